//! Canonical compactification of a fan cycle as a cubical cell complex.

use std::collections::HashMap;

use crate::fans::{product, ConeId, TropicalFanCycle};

/// The cell `C_{τ,σ}`: the closure of `σ` intersected with the stratum of `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CCell {
    pub tau: ConeId,
    pub sigma: ConeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stratum {
    Smooth,
    Singular,
}

/// Cells are sorted by dimension, then by `(τ, σ)`.
#[derive(Clone, Debug)]
pub struct CompactifiedCellComplex {
    cycle: TropicalFanCycle,
    cells: Vec<CCell>,
    lookup: HashMap<CCell, usize>,
}

impl CompactifiedCellComplex {
    /// Builds a complex from an explicit cell list. Used for the canonical
    /// compactification and for hand-made test complexes.
    pub fn from_cells(cycle: TropicalFanCycle, mut cells: Vec<CCell>) -> Self {
        let fan = cycle.fan();
        cells.sort_by_key(|c| (fan.cone_dim(c.sigma) - fan.cone_dim(c.tau), c.tau, c.sigma));
        cells.dedup();
        let lookup = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        CompactifiedCellComplex { cycle, cells, lookup }
    }

    pub fn cycle(&self) -> &TropicalFanCycle {
        &self.cycle
    }

    /// Dimension `d` of the cycle.
    pub fn d(&self) -> usize {
        self.cycle.dim()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CCell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> CCell {
        self.cells[i]
    }

    pub fn index_of(&self, c: CCell) -> Option<usize> {
        self.lookup.get(&c).copied()
    }

    pub fn cell_dim(&self, i: usize) -> usize {
        let f = self.cycle.fan();
        let c = self.cells[i];
        f.cone_dim(c.sigma) - f.cone_dim(c.tau)
    }

    pub fn cells_of_dim(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.cell_dim(i) == k).collect()
    }

    /// Rays of `σ` not in `τ`, in global ray order.
    pub fn free_rays(&self, i: usize) -> Vec<usize> {
        let f = self.cycle.fan();
        let c = self.cells[i];
        let tau = f.cone(c.tau);
        f.cone(c.sigma).iter().copied().filter(|r| !tau.contains(r)).collect()
    }

    pub fn stratum(&self, i: usize) -> Stratum {
        let c = self.cells[i];
        let f = self.cycle.fan();
        if f.cone_dim(c.tau) == 0 && self.cell_dim(i) + 1 >= self.d() {
            Stratum::Smooth
        } else {
            Stratum::Singular
        }
    }

    pub fn is_smooth(&self, i: usize) -> bool {
        self.stratum(i) == Stratum::Smooth
    }

    /// `a ⪯ b`: `τ_b ⊆ τ_a ⊆ σ_a ⊆ σ_b`.
    pub fn is_face(&self, a: usize, b: usize) -> bool {
        let f = self.cycle.fan();
        let (ca, cb) = (self.cells[a], self.cells[b]);
        f.is_face(cb.tau, ca.tau) && f.is_face(ca.sigma, cb.sigma)
    }

    /// All faces of cell `i`, including itself.
    pub fn faces(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&a| self.is_face(a, i)).collect()
    }

    /// Top-dimensional cells of sedentarity zero.
    pub fn top_cells(&self) -> Vec<usize> {
        let d = self.d();
        let f = self.cycle.fan();
        (0..self.len())
            .filter(|&i| self.cell_dim(i) == d && f.cone_dim(self.cells[i].tau) == 0)
            .collect()
    }

    /// Top cells whose closure contains cell `i`.
    pub fn tops_over(&self, i: usize) -> Vec<usize> {
        self.top_cells().into_iter().filter(|&p| self.is_face(i, p)).collect()
    }

    /// Weight of a top cell.
    pub fn weight(&self, i: usize) -> i64 {
        self.cycle.weight(self.cells[i].sigma)
    }

    /// Signed boundary: `Σ_i (−1)^i (∞-face_i − 0-face_i)` over the free rays.
    pub fn boundary(&self, i: usize) -> Vec<(usize, i64)> {
        let f = self.cycle.fan();
        let c = self.cells[i];
        let mut out = Vec::new();
        for (k, r) in self.free_rays(i).into_iter().enumerate() {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let mut t = f.cone(c.tau).to_vec();
            t.push(r);
            if let Some(tau2) = f.find(&t) {
                if let Some(j) = self.index_of(CCell { tau: tau2, sigma: c.sigma }) {
                    out.push((j, sign));
                }
            }
            let s: Vec<usize> = f.cone(c.sigma).iter().copied().filter(|&x| x != r).collect();
            if let Some(sig2) = f.find(&s) {
                if let Some(j) = self.index_of(CCell { tau: c.tau, sigma: sig2 }) {
                    out.push((j, -sign));
                }
            }
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..self.len()).map(|i| if self.cell_dim(i).is_multiple_of(2) { 1 } else { -1 }).sum()
    }

    /// Every sedentary cell sits in the closure of a finite top cell with
    /// the full cube of faces present around it.
    pub fn is_regular_at_infinity(&self) -> bool {
        let f = self.cycle.fan();
        for p in self.top_cells() {
            let sigma = self.cells[p].sigma;
            for t in f.cone_ids().filter(|&t| f.is_face(t, sigma)) {
                if self.index_of(CCell { tau: t, sigma }).is_none() {
                    return false;
                }
            }
        }
        for c in &self.cells {
            if f.cone_dim(c.tau) == 0 {
                continue;
            }
            let ok = self.top_cells().into_iter().any(|p| {
                let sp = self.cells[p].sigma;
                f.is_face(c.sigma, sp) && self.index_of(CCell { tau: c.tau, sigma: sp }).is_some()
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

pub fn canonical_compactification(c: &TropicalFanCycle) -> CompactifiedCellComplex {
    let f = c.fan();
    let mut cells = Vec::new();
    for sigma in f.cone_ids() {
        for tau in f.cone_ids() {
            if f.is_face(tau, sigma) {
                cells.push(CCell { tau, sigma });
            }
        }
    }
    CompactifiedCellComplex::from_cells(c.clone(), cells)
}

/// Order complex of the face poset. Simplices are strictly increasing chains
/// of cell indices; the carrier of a simplex is its last cell.
#[derive(Clone, Debug)]
pub struct BarycentricSubdivision {
    simplices: Vec<Vec<Vec<usize>>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl BarycentricSubdivision {
    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    /// Simplices of dimension `q` (chains of length `q + 1`).
    pub fn simplices(&self, q: usize) -> &[Vec<usize>] {
        self.simplices.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn index_of(&self, chain: &[usize]) -> Option<usize> {
        self.lookup.get(chain).copied()
    }

    pub fn carrier(chain: &[usize]) -> usize {
        *chain.last().expect("nonempty chain")
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(q, s)| if q % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }

    /// Dimension of `Δ ∩ rel.int S`: the position of `S` in the chain.
    pub fn meet_dim(chain: &[usize], s: usize) -> Option<usize> {
        chain.iter().position(|&c| c == s)
    }
}

pub fn barycentric_subdivision(x: &CompactifiedCellComplex) -> BarycentricSubdivision {
    let n = x.len();
    // Strictly larger faces of each cell.
    let ups: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).filter(|&b| b != a && x.is_face(a, b)).collect())
        .collect();
    let mut simplices: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut layer: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for ch in &layer {
            let last = *ch.last().expect("nonempty");
            for &b in &ups[last] {
                let mut c = ch.clone();
                c.push(b);
                next.push(c);
            }
        }
        let mut l = std::mem::replace(&mut layer, next);
        l.sort();
        simplices.push(l);
    }
    let lookup = simplices
        .iter()
        .flat_map(|l| l.iter().enumerate().map(|(i, c)| (c.clone(), i)))
        .collect();
    BarycentricSubdivision { simplices, lookup }
}

/// Compactification of the product cycle, with each cell's pair of factor cells.
pub fn product_complex(
    x1: &CompactifiedCellComplex,
    x2: &CompactifiedCellComplex,
) -> (CompactifiedCellComplex, Vec<(usize, usize)>) {
    let prod = canonical_compactification(&product(x1.cycle(), x2.cycle()));
    let (f1, f2, fp) = (x1.cycle().fan(), x2.cycle().fan(), prod.cycle().fan());
    let off = f1.rays().len();
    let join = |a: ConeId, b: ConeId| -> ConeId {
        let mut rays = f1.cone(a).to_vec();
        rays.extend(f2.cone(b).iter().map(|r| r + off));
        fp.find(&rays).expect("product cone")
    };
    let mut pairs = vec![(usize::MAX, usize::MAX); prod.len()];
    for (i, c1) in x1.cells().iter().enumerate() {
        for (j, c2) in x2.cells().iter().enumerate() {
            let cell = CCell { tau: join(c1.tau, c2.tau), sigma: join(c1.sigma, c2.sigma) };
            let k = prod.index_of(cell).expect("product cell");
            pairs[k] = (i, j);
        }
    }
    (prod, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fans::build_fan;

    fn p1() -> TropicalFanCycle {
        let f = build_fan(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]).unwrap();
        TropicalFanCycle::new(f, vec![1, 1]).unwrap()
    }

    fn tl() -> TropicalFanCycle {
        let f = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0], vec![1], vec![2]]).unwrap();
        TropicalFanCycle::new(f, vec![1, 1, 1]).unwrap()
    }

    fn p2() -> TropicalFanCycle {
        let f = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        TropicalFanCycle::new(f, vec![1, 1, 1]).unwrap()
    }

    fn boundary_squared_zero(x: &CompactifiedCellComplex) {
        for i in 0..x.len() {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for (j, s) in x.boundary(i) {
                for (k, t) in x.boundary(j) {
                    *acc.entry(k).or_default() += s * t;
                }
            }
            assert!(acc.values().all(|&v| v == 0), "∂² ≠ 0 at cell {i}");
        }
    }

    #[test]
    fn counts() {
        let x = canonical_compactification(&p1());
        assert_eq!(x.cells_of_dim(0).len(), 3);
        assert_eq!(x.cells_of_dim(1).len(), 2);
        let x = canonical_compactification(&tl());
        assert_eq!(x.len(), 7);
        assert_eq!(x.cells_of_dim(0).len(), 4);
        let x = canonical_compactification(&p2());
        assert_eq!(x.len(), 19);
        assert_eq!(x.cells_of_dim(0).len(), 7);
        assert_eq!(x.cells_of_dim(1).len(), 9);
        boundary_squared_zero(&x);
        let x = canonical_compactification(&product(&p1(), &p1()));
        assert_eq!(x.len(), 25);
    }

    #[test]
    fn cubes_have_three_to_the_k_faces() {
        let x = canonical_compactification(&p2());
        for i in 0..x.len() {
            assert_eq!(x.faces(i).len(), 3usize.pow(x.cell_dim(i) as u32));
        }
    }

    #[test]
    fn regularity_and_negative_control() {
        assert!(canonical_compactification(&tl()).is_regular_at_infinity());
        assert!(canonical_compactification(&p2()).is_regular_at_infinity());
        let full = canonical_compactification(&tl());
        let f = full.cycle().fan();
        let missing = CCell { tau: f.find(&[0]).unwrap(), sigma: f.find(&[0]).unwrap() };
        let cells: Vec<CCell> = full.cells().iter().copied().filter(|&c| c != missing).collect();
        let broken = CompactifiedCellComplex::from_cells(tl(), cells);
        assert!(!broken.is_regular_at_infinity());
    }

    #[test]
    fn barycentric_counts() {
        let b = barycentric_subdivision(&canonical_compactification(&p1()));
        assert_eq!(b.simplices(0).len(), 5);
        assert_eq!(b.simplices(1).len(), 4);
        let b = barycentric_subdivision(&canonical_compactification(&tl()));
        assert_eq!(b.simplices(0).len(), 7);
        assert_eq!(b.simplices(1).len(), 6);
        for c in [p1(), tl(), p2()] {
            let x = canonical_compactification(&c);
            assert_eq!(barycentric_subdivision(&x).euler_characteristic(), x.euler_characteristic());
        }
    }

    #[test]
    fn products() {
        let x = canonical_compactification(&p1());
        let (pp, pairs) = product_complex(&x, &x);
        assert_eq!(pp.cells_of_dim(0).len(), 9);
        assert_eq!(pp.cells_of_dim(1).len(), 12);
        assert_eq!(pp.cells_of_dim(2).len(), 4);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            assert_eq!(pp.cell_dim(k), x.cell_dim(i) + x.cell_dim(j));
        }
        boundary_squared_zero(&pp);
        let pt = canonical_compactification(&TropicalFanCycle::point());
        let (xp, _) = product_complex(&x, &pt);
        assert_eq!(xp.len(), x.len());
    }
}
