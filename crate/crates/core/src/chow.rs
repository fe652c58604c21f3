use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::fans::{ConeId, Fan, MinkowskiWeight, TropicalFanCycle};
use crate::ihomology::DimensionTable;
use crate::qlinalg::{integer_kernel_basis, q, to_q_vec, QMat, QuotientSpace, Rational, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChowError {
    #[error("weight is not balanced at cones {0:?}")]
    Unbalanced(Vec<ConeId>),
    #[error("class has degree {got}, expected {expected}")]
    WrongDegree { expected: usize, got: usize },
    #[error("ray {0} out of range")]
    RayOutOfRange(usize),
    #[error("fan is not complete")]
    NotComplete,
    #[error("no rewriting functional for ray {ray} on cone {cone}")]
    NoFunctional { ray: usize, cone: ConeId },
}

/// A formal combination of cone classes `[V(σ)]`, all of the same codimension.
pub type ConeCombination = BTreeMap<ConeId, Rational>;

/// `CH^p(T_Λ) ⊗ Q` as `Q^{Λ(p)}` modulo the balancing-dual relations.
#[derive(Clone, Debug)]
pub struct ChowPresentation {
    pub p: usize,
    pub generators: Vec<ConeId>,
    /// One row per `(τ, m)` with `τ ∈ Λ(p−1)`, `m` in a basis of `M ∩ τ^⊥`.
    pub relations: QMat,
    pub quotient: QuotientSpace,
}

impl ChowPresentation {
    pub fn dim(&self) -> usize {
        self.quotient.dim()
    }

    pub fn to_vector(&self, c: &ConeCombination) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.generators.len()];
        for (cone, x) in c {
            if let Some(i) = self.generators.iter().position(|g| g == cone) {
                v[i] += x;
            }
        }
        v
    }

    /// Coordinates in `CH^p` (complement basis).
    pub fn class_of(&self, c: &ConeCombination) -> Vec<Rational> {
        self.quotient.project(&self.to_vector(c)).expect("full ambient")
    }

    pub fn is_zero_class(&self, c: &ConeCombination) -> bool {
        self.class_of(c).iter().all(Zero::is_zero)
    }

    /// Representatives of a basis of `CH^p`, as cone combinations.
    pub fn basis(&self) -> Vec<ConeCombination> {
        let comp = self.quotient.complement();
        (0..comp.rows())
            .map(|i| {
                comp.row(i)
                    .iter()
                    .zip(&self.generators)
                    .filter(|(x, _)| !x.is_zero())
                    .map(|(x, g)| (*g, x.clone()))
                    .collect()
            })
            .collect()
    }
}

pub fn ch_group(fan: &Fan, p: usize) -> ChowPresentation {
    let generators = fan.cones_of_dim(p);
    let mut rows = Vec::new();
    if p >= 1 {
        for tau in fan.cones_of_dim(p - 1) {
            let perp = integer_kernel_basis(&fan.ray_matrix(tau), fan.rank()).expect("small lattice");
            for m in &perp {
                let row: Vec<Rational> = generators
                    .iter()
                    .map(|&s| {
                        if !fan.is_face(tau, s) {
                            return Rational::zero();
                        }
                        let extra = fan.cone(s).iter().find(|r| !fan.cone(tau).contains(r)).expect("one extra ray");
                        q(dot(m, fan.ray(*extra)))
                    })
                    .collect();
                rows.push(row);
            }
        }
    }
    let n = generators.len();
    let relations = QMat::from_rows(n, rows);
    let quotient = QuotientSpace::new(Subspace::full(n), Subspace::row_span(&relations)).expect("full ambient");
    ChowPresentation { p, generators, relations, quotient }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// How the functional `m` with `⟨m, u_ρ⟩ = 1`, zero on the other rays of σ, is picked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FunctionalChoice {
    /// Least-index pivoting, free variables zero.
    #[default]
    Minimal,
    /// The minimal solution plus the first basis vector of `M ∩ σ^⊥`.
    Shifted,
}

fn rewriting_functional(fan: &Fan, sigma: ConeId, ray: usize, choice: FunctionalChoice) -> Option<Vec<Rational>> {
    let cone = fan.cone(sigma);
    let a = QMat::from_i64(&fan.ray_matrix(sigma));
    let rhs: Vec<Rational> = cone.iter().map(|&r| q(i64::from(r == ray))).collect();
    // Solve a · m = rhs.
    let rows: Vec<Vec<Rational>> =
        (0..a.rows()).map(|i| a.row(i).iter().cloned().chain(std::iter::once(rhs[i].clone())).collect()).collect();
    let n = fan.rank();
    let (r, piv) = QMat::from_rows(n + 1, rows).rref();
    if piv.last() == Some(&n) {
        return None;
    }
    let mut m = vec![Rational::zero(); n];
    for (i, &c) in piv.iter().enumerate() {
        m[c] = r.get(i, n).clone();
    }
    if choice == FunctionalChoice::Shifted {
        let perp = integer_kernel_basis(&fan.ray_matrix(sigma), n).expect("small lattice");
        if let Some(v) = perp.first() {
            for (mi, vi) in m.iter_mut().zip(to_q_vec(v)) {
                *mi += vi;
            }
        }
    }
    Some(m)
}

/// `x_ρ · c`.
pub fn multiply_by_divisor(fan: &Fan, ray: usize, c: &ConeCombination, choice: FunctionalChoice) -> Result<ConeCombination, ChowError> {
    if ray >= fan.rays().len() {
        return Err(ChowError::RayOutOfRange(ray));
    }
    let mut out = ConeCombination::new();
    let mut add = |cone: ConeId, x: Rational| {
        let e = out.entry(cone).or_insert_with(Rational::zero);
        *e += x;
    };
    for (&sigma, coef) in c {
        if coef.is_zero() {
            continue;
        }
        if !fan.cone(sigma).contains(&ray) {
            if let Some(t) = fan.join_ray(sigma, ray) {
                add(t, coef.clone());
            }
            continue;
        }
        let m = rewriting_functional(fan, sigma, ray, choice).ok_or(ChowError::NoFunctional { ray, cone: sigma })?;
        for r in 0..fan.rays().len() {
            if fan.cone(sigma).contains(&r) {
                continue;
            }
            let pairing: Rational = m.iter().zip(fan.ray(r)).map(|(a, &b)| a * q(b)).sum();
            if pairing.is_zero() {
                continue;
            }
            if let Some(t) = fan.join_ray(sigma, r) {
                add(t, -(pairing * coef));
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Product of two cone combinations, expanding `[V(σ)] = ∏_{ρ ∈ σ} x_ρ`.
pub fn product(fan: &Fan, a: &ConeCombination, b: &ConeCombination, choice: FunctionalChoice) -> Result<ConeCombination, ChowError> {
    let mut out = ConeCombination::new();
    for (&sigma, ca) in a {
        let mut cur = b.clone();
        for &r in fan.cone(sigma) {
            cur = multiply_by_divisor(fan, r, &cur, choice)?;
        }
        for (t, x) in cur {
            *out.entry(t).or_insert_with(Rational::zero) += x * ca;
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// `Σ c_σ w(σ)` for a balanced weight on `d`-cones.
pub fn evaluate(w: &MinkowskiWeight, c: &ConeCombination) -> Result<Rational, ChowError> {
    let b = w.is_balanced();
    if !b.balanced {
        return Err(ChowError::Unbalanced(b.violations));
    }
    let mut acc = Rational::zero();
    for (&s, x) in c {
        let dim = w.fan.cone_dim(s);
        if dim != w.k {
            return Err(ChowError::WrongDegree { expected: w.k, got: dim });
        }
        acc += x * q(w.weight(s));
    }
    Ok(acc)
}

/// `true` iff the weight pairs to zero with every relation of `CH^k`.
pub fn kills_relations(w: &MinkowskiWeight) -> bool {
    let pres = ch_group(&w.fan, w.k);
    let v: Vec<Rational> = pres.generators.iter().map(|&g| q(w.weight(g))).collect();
    (0..pres.relations.rows()).all(|i| pres.relations.row(i).iter().zip(&v).map(|(a, b)| a * b).sum::<Rational>().is_zero())
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingData {
    pub p: usize,
    pub dim_left: usize,
    pub dim_right: usize,
    /// `B[i][j] = (Λ, w)(α_i · β_j)`.
    pub matrix: Vec<Vec<String>>,
    pub rank: usize,
    pub num_left: usize,
    pub num_right: usize,
}

impl PairingData {
    pub fn quotient_dim(&self) -> usize {
        self.rank
    }
}

pub fn pairing_matrix(c: &TropicalFanCycle, p: usize, choice: FunctionalChoice) -> Result<(QMat, usize, usize), ChowError> {
    let fan = c.fan();
    let d = c.dim();
    if p > d {
        return Err(ChowError::WrongDegree { expected: d, got: p });
    }
    let w = c.as_minkowski_weight();
    let left = ch_group(fan, p).basis();
    let right = ch_group(fan, d - p).basis();
    let entries: Vec<Vec<Rational>> = left
        .par_iter()
        .map(|a| right.iter().map(|b| evaluate(&w, &product(fan, a, b, choice)?)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    Ok((QMat::from_rows(right.len(), entries), left.len(), right.len()))
}

pub fn pairing_and_num(c: &TropicalFanCycle, p: usize) -> Result<PairingData, ChowError> {
    let (m, dl, dr) = pairing_matrix(c, p, FunctionalChoice::Minimal)?;
    let rank = m.rank();
    let matrix = (0..m.rows()).map(|i| m.row(i).iter().map(ToString::to_string).collect()).collect();
    Ok(PairingData { p, dim_left: dl, dim_right: dr, matrix, rank, num_left: dl - rank, num_right: dr - rank })
}

/// `(p,p) ↦ dim CH^p / Num^p`.
pub fn predicted_ih(c: &TropicalFanCycle) -> Result<DimensionTable, ChowError> {
    let d = c.dim();
    let ranks: Vec<usize> = (0..=d).into_par_iter().map(|p| pairing_and_num(c, p).map(|x| x.rank)).collect::<Result<_, _>>()?;
    Ok(DimensionTable::diagonal(&ranks))
}

/// `dim CH^p` for `p = 0..=dim Λ`.
pub fn chow_dims(fan: &Fan) -> Vec<usize> {
    (0..=fan.dim()).map(|p| ch_group(fan, p).dim()).collect()
}

/// Complete: pure of full dimension, every wall in exactly two maximal cones.
pub fn is_complete(fan: &Fan) -> bool {
    let n = fan.rank();
    if !fan.is_pure() || fan.dim() != n {
        return false;
    }
    if n == 0 {
        return true;
    }
    let tops = fan.cones_of_dim(n);
    fan.cones_of_dim(n - 1).into_iter().all(|wall| tops.iter().filter(|&&t| fan.is_face(wall, t)).count() == 2)
}

/// Even Betti numbers `b_{2k} = h_k` of a complete smooth toric variety.
pub fn singular_betti(fan: &Fan) -> Result<Vec<usize>, ChowError> {
    if !is_complete(fan) {
        return Err(ChowError::NotComplete);
    }
    let n = fan.rank();
    let f: Vec<i64> = (0..=n).map(|i| fan.cones_of_dim(i).len() as i64).collect();
    let binom = |a: usize, b: usize| -> i64 { (0..b).fold(1i64, |acc, i| acc * (a - i) as i64 / (i + 1) as i64) };
    Ok((0..=n)
        .map(|k| {
            let h: i64 = (k..=n).map(|i| if (i - k) % 2 == 0 { 1 } else { -1 } * binom(i, k) * f[n - i]).sum();
            h as usize
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fans::build_fan;

    fn p2_fan() -> Fan {
        build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn one(c: ConeId) -> ConeCombination {
        [(c, q(1))].into_iter().collect()
    }

    #[test]
    fn chow_dimensions() {
        assert_eq!(chow_dims(&p2_fan()), vec![1, 1, 1]);
        let tl = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(chow_dims(&tl), vec![1, 1]);
        assert_eq!(ch_group(&tl, 2).dim(), 0);
        let p2 = p2_fan();
        assert_eq!(ch_group(&p2, 1).relations.rank(), 2);
    }

    #[test]
    fn self_intersection_on_p2() {
        let f = p2_fan();
        let r1 = f.find(&[0]).unwrap();
        let prod = multiply_by_divisor(&f, 0, &one(r1), FunctionalChoice::Minimal).unwrap();
        assert_eq!(prod, one(f.find(&[0, 2]).unwrap()));
        // Not a cone: product vanishes.
        let tl = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0], vec![1], vec![2]]).unwrap();
        let r = tl.find(&[0]).unwrap();
        assert!(multiply_by_divisor(&tl, 1, &one(r), FunctionalChoice::Minimal).unwrap().is_empty());
        let r = f.find(&[1]).unwrap();
        assert_eq!(multiply_by_divisor(&f, 0, &one(r), FunctionalChoice::Minimal).unwrap(), one(f.find(&[0, 1]).unwrap()));
    }

    #[test]
    fn evaluation() {
        let f = p2_fan();
        let c = TropicalFanCycle::new(f.clone(), vec![1, 1, 1]).unwrap();
        let w = c.as_minkowski_weight();
        assert_eq!(evaluate(&w, &one(f.find(&[0, 1]).unwrap())).unwrap(), q(1));
        let bad = TropicalFanCycle::new(
            build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0], vec![1], vec![2]]).unwrap(),
            vec![1, 1, 2],
        )
        .unwrap();
        assert!(matches!(evaluate(&bad.as_minkowski_weight(), &ConeCombination::new()), Err(ChowError::Unbalanced(_))));
        assert!(!kills_relations(&bad.as_minkowski_weight()));
        assert!(kills_relations(&w));
    }

    #[test]
    fn pairings() {
        let c = TropicalFanCycle::new(p2_fan(), vec![1, 1, 1]).unwrap();
        let pd = pairing_and_num(&c, 1).unwrap();
        assert_eq!(pd.matrix, vec![vec!["1".to_string()]]);
        assert_eq!(pd.num_left, 0);
        assert_eq!(predicted_ih(&c).unwrap(), DimensionTable::diagonal(&[1, 1, 1]));
        let bl = build_fan(2, vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap();
        let c = TropicalFanCycle::new(bl, vec![1; 4]).unwrap();
        let pd = pairing_and_num(&c, 1).unwrap();
        assert_eq!((pd.dim_left, pd.rank), (2, 2));
    }

    #[test]
    fn betti_numbers() {
        assert_eq!(singular_betti(&p2_fan()).unwrap(), vec![1, 1, 1]);
        let sq = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]], vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap();
        assert_eq!(singular_betti(&sq).unwrap(), vec![1, 2, 1]);
        let p1 = build_fan(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]).unwrap();
        assert_eq!(singular_betti(&p1).unwrap(), vec![1, 1]);
        let half = build_fan(1, vec![vec![1]], vec![vec![0]]).unwrap();
        assert_eq!(singular_betti(&half), Err(ChowError::NotComplete));
    }
}
