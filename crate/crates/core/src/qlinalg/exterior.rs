use std::collections::HashMap;

use itertools::Itertools;
use num_traits::Zero;

use super::{QMat, Rational};

/// All `p`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(p).collect()
}

/// Coordinates of `Λ^p Q^n` in the monomial basis `e_I`, `I` increasing.
#[derive(Clone, Debug)]
pub struct ExteriorIndex {
    n: usize,
    p: usize,
    sets: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl ExteriorIndex {
    pub fn new(n: usize, p: usize) -> Self {
        let sets = subsets(n, p);
        let lookup = sets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        ExteriorIndex { n, p, sets, lookup }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn subset(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn index_of(&self, set: &[usize]) -> Option<usize> {
        self.lookup.get(set).copied()
    }

    /// Matrix of `Λ^p m` for the row-convention map `x ↦ x·m`, `m` of shape
    /// `n × n'`: entry `(I, J)` is the minor `det m[I, J]`.
    pub fn induced(&self, m: &QMat, target: &ExteriorIndex) -> QMat {
        assert_eq!(m.rows(), self.n);
        assert_eq!(m.cols(), target.n);
        assert_eq!(self.p, target.p);
        let mut out = QMat::zeros(self.len(), target.len());
        for (i, rows) in self.sets.iter().enumerate() {
            let sub = m.select_rows(rows);
            if self.p > 0 && sub.is_zero() {
                continue;
            }
            for (j, cols) in target.sets.iter().enumerate() {
                let d = sub.select_cols(cols).det();
                if !d.is_zero() {
                    out.set(i, j, d);
                }
            }
        }
        out
    }
}

/// Sign of the permutation sorting `seq` (entries distinct), or 0 if repeated.
pub fn sort_sign(seq: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] == seq[j] {
                return 0;
            }
            if seq[i] > seq[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `v_1 ∧ … ∧ v_p` in the monomial coordinates of `Λ^p Q^n`.
pub fn wedge_vectors(n: usize, vs: &[Vec<Rational>]) -> Vec<Rational> {
    let p = vs.len();
    let idx = ExteriorIndex::new(n, p);
    let m = QMat::from_rows(n, vs.to_vec());
    idx.subsets()
        .iter()
        .map(|cols| if p == 0 { Rational::from_integer(1.into()) } else { m.select_cols(cols).det() })
        .collect()
}

/// Contraction `ω ⌞ φ` with `ω ∈ Λ^q Q^n`, `φ ∈ Λ^p (Q^n)^∨`.
///
/// On monomials `e_I ⌞ e_J^∨ = ± e_{I∖J}` when `J ⊆ I`, the sign being that
/// of the shuffle moving `J` to the front of `I`; otherwise 0.
/// Returns `None` when `p > q`.
pub fn contraction(n: usize, q: usize, omega: &[Rational], p: usize, phi: &[Rational]) -> Option<Vec<Rational>> {
    if p > q {
        return None;
    }
    let iq = ExteriorIndex::new(n, q);
    let ip = ExteriorIndex::new(n, p);
    let ir = ExteriorIndex::new(n, q - p);
    assert_eq!(omega.len(), iq.len());
    assert_eq!(phi.len(), ip.len());
    let mut out = vec![Rational::zero(); ir.len()];
    for (a, i_set) in iq.subsets().iter().enumerate() {
        if omega[a].is_zero() {
            continue;
        }
        for (b, j_set) in ip.subsets().iter().enumerate() {
            if phi[b].is_zero() || !j_set.iter().all(|j| i_set.contains(j)) {
                continue;
            }
            let rest: Vec<usize> = i_set.iter().copied().filter(|i| !j_set.contains(i)).collect();
            let mut seq = j_set.clone();
            seq.extend(&rest);
            let s = sort_sign(&seq);
            let c = ir.index_of(&rest).expect("subset of the right size");
            let term = &omega[a] * &phi[b];
            if s > 0 {
                out[c] += term;
            } else {
                out[c] -= term;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{q, to_q_vec};

    fn mono(n: usize, set: &[usize]) -> Vec<Rational> {
        let idx = ExteriorIndex::new(n, set.len());
        let mut v = vec![Rational::zero(); idx.len()];
        v[idx.index_of(set).unwrap()] = q(1);
        v
    }

    #[test]
    fn contraction_examples() {
        // (e1∧e2) ⌞ e1^∨ = e2
        let r = contraction(3, 2, &mono(3, &[0, 1]), 1, &mono(3, &[0])).unwrap();
        assert_eq!(r, mono(3, &[1]));
        // (e2∧e3) ⌞ e1^∨ = 0
        let r = contraction(3, 2, &mono(3, &[1, 2]), 1, &mono(3, &[0])).unwrap();
        assert!(r.iter().all(Zero::is_zero));
        // (e1∧e2) ⌞ e2^∨ = -e1
        let r = contraction(3, 2, &mono(3, &[0, 1]), 1, &mono(3, &[1])).unwrap();
        assert_eq!(r, vec![q(-1), q(0), q(0)]);
        // ω ⌞ 1 = ω
        let w = to_q_vec(&[3, -1, 2]);
        assert_eq!(contraction(3, 2, &w, 0, &[q(1)]).unwrap(), w);
        assert!(contraction(3, 1, &to_q_vec(&[1, 0, 0]), 2, &mono(3, &[0, 1])).is_none());
    }

    #[test]
    fn wedge_is_determinant() {
        let w = wedge_vectors(2, &[to_q_vec(&[1, 2]), to_q_vec(&[3, 4])]);
        assert_eq!(w, vec![q(-2)]);
    }

    #[test]
    fn induced_identity() {
        let i = ExteriorIndex::new(4, 2);
        assert_eq!(i.induced(&QMat::identity(4), &i), QMat::identity(6));
        let z = ExteriorIndex::new(3, 0);
        assert_eq!(z.induced(&QMat::identity(3), &z), QMat::identity(1));
    }
}
