//! Coefficient systems on the cells of a compactified fan cycle.
//!
//! `F_{p,w}` is modelled inside one global coordinate space: a block per top
//! cell `P`, holding `Λ^p Tan P` in the monomial basis of the rays of `P`.
//! Every `F_{p,w}(S)` is then a quotient `A_S / K_S` of coordinate subspaces,
//! and the maps `ι` are induced by the identity on global coordinates.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use num_traits::Zero;

use crate::compactified::CompactifiedCellComplex;
use crate::qlinalg::{
    integer_kernel_basis, q, sort_sign, to_q_vec, wedge_vectors, ExteriorIndex, LinAlgError, QMat,
    QuotientSpace, Rational, Subspace,
};

pub use crate::qlinalg::contraction;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoeffError {
    #[error("degree p = {p} outside 0..={d}")]
    DegreeOutOfRange { p: usize, d: usize },
    #[error("cell {0} is not in the smooth part")]
    NotSmooth(usize),
    #[error("cell {0} is not a face of cell {1}")]
    NotAFace(usize, usize),
    #[error("filtration degrees of the zero element are undefined")]
    ZeroElement,
    #[error("flag W ⊆ U ⊆ Tan P does not hold")]
    FlagViolation,
    #[error("balancing fails at cell {0}; no lift exists")]
    Unbalanced(usize),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffKind {
    Pw,
    PwDual,
    Ikmz,
}

/// Which lifts `ṽ_{P,Q}` are used in the codimension-one relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftChoice {
    /// The correction lives entirely on the first top cell.
    Canonical,
    /// Canonical plus a balanced shift along the first ray of `Q`.
    Perturbed,
}

#[derive(Clone, Debug)]
pub struct CoefficientSpace {
    pub cell: usize,
    pub kind: CoeffKind,
    pub p: usize,
    pub space: QuotientSpace,
    /// Top cells whose blocks make up the ambient (empty for `Ikmz`).
    pub slots: Vec<usize>,
}

impl CoefficientSpace {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// `v ≤ u`: filtration positions of an element relative to `W ⊆ U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiltrationDegrees {
    pub v: usize,
    pub u: usize,
}

/// The weighted multi-tangent system `F_{p,w}` for one `p`, memoised per cell.
pub struct PwSystem<'a> {
    x: &'a CompactifiedCellComplex,
    p: usize,
    tops: Vec<usize>,
    block_of: HashMap<usize, usize>,
    ext: ExteriorIndex,
    // Lifts ṽ_{P,Q} per smooth codim-one cell, in the ray coordinates of each P.
    lifts: HashMap<usize, Vec<(usize, Vec<Rational>)>>,
    kernels: Vec<OnceLock<Subspace>>,
    spaces: Vec<OnceLock<Arc<CoefficientSpace>>>,
}

impl<'a> PwSystem<'a> {
    pub fn new(x: &'a CompactifiedCellComplex, p: usize, lift: LiftChoice) -> Result<Self, CoeffError> {
        let d = x.d();
        if p > d {
            return Err(CoeffError::DegreeOutOfRange { p, d });
        }
        let tops = x.top_cells();
        let block_of = tops.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut lifts = HashMap::new();
        if d >= 1 {
            for r in x.cells_of_dim(d - 1) {
                if x.is_smooth(r) {
                    lifts.insert(r, compute_lifts(x, r, lift)?);
                }
            }
        }
        let n = x.len();
        Ok(PwSystem {
            x,
            p,
            tops,
            block_of,
            ext: ExteriorIndex::new(d, p),
            lifts,
            kernels: (0..n).map(|_| OnceLock::new()).collect(),
            spaces: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn complex(&self) -> &CompactifiedCellComplex {
        self.x
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn global_dim(&self) -> usize {
        self.tops.len() * self.ext.len()
    }

    pub fn block_len(&self) -> usize {
        self.ext.len()
    }

    pub fn tops(&self) -> &[usize] {
        &self.tops
    }

    pub fn block_offset(&self, top: usize) -> usize {
        self.block_of[&top] * self.ext.len()
    }

    /// Global coordinate and sign of the monomial `∧ rays` in the block of
    /// `top`; `None` if some ray is missing from `top` or repeated.
    pub fn monomial(&self, top: usize, rays: &[usize]) -> Option<(usize, i32)> {
        let own = self.x.free_rays(top);
        let mut pos = Vec::with_capacity(rays.len());
        for r in rays {
            pos.push(own.iter().position(|o| o == r)?);
        }
        let s = sort_sign(&pos);
        if s == 0 {
            return None;
        }
        pos.sort_unstable();
        Some((self.block_offset(top) + self.ext.index_of(&pos)?, s))
    }

    fn blocks_subspace(&self, tops: &[usize]) -> Subspace {
        let coords: Vec<usize> = tops
            .iter()
            .flat_map(|&t| {
                let o = self.block_offset(t);
                o..o + self.ext.len()
            })
            .collect();
        Subspace::coordinate(self.global_dim(), &coords)
    }

    /// Kernel of `⊕_{P ⊇ R} F(P) → F(R)` for a codimension-one cell `R`.
    pub fn codim_one_kernel(&self, r: usize) -> &Subspace {
        self.kernels[r].get_or_init(|| self.compute_kernel(r))
    }

    fn compute_kernel(&self, r: usize) -> Subspace {
        let x = self.x;
        let n = self.global_dim();
        let f = x.cycle().fan();
        let cell = x.cell(r);
        let tops = x.tops_over(r);
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let unit = |coord: Option<(usize, i32)>, scale: &Rational, v: &mut Vec<Rational>| {
            if let Some((c, s)) = coord {
                if s > 0 {
                    v[c] += scale;
                } else {
                    v[c] -= scale;
                }
            }
        };
        if x.is_smooth(r) {
            let q_rays = f.cone(cell.sigma).to_vec();
            let one = q(1);
            // Identify Λ^p Tan Q across all top cells.
            for m in ExteriorIndex::new(q_rays.len(), self.p).subsets() {
                let rays: Vec<usize> = m.iter().map(|&i| q_rays[i]).collect();
                for &t in &tops[1..] {
                    let mut v = vec![Rational::zero(); n];
                    unit(self.monomial(tops[0], &rays), &one, &mut v);
                    unit(self.monomial(t, &rays), &-one.clone(), &mut v);
                    rows.push(v);
                }
            }
            if self.p >= 1 {
                let lifts = &self.lifts[&r];
                for u in ExteriorIndex::new(q_rays.len(), self.p - 1).subsets() {
                    let urays: Vec<usize> = u.iter().map(|&i| q_rays[i]).collect();
                    let mut v = vec![Rational::zero(); n];
                    for (t, coeffs) in lifts {
                        let own = x.free_rays(*t);
                        let w = q(x.weight(*t));
                        for (ray, c) in own.iter().zip(coeffs) {
                            if c.is_zero() {
                                continue;
                            }
                            let mut mono = vec![*ray];
                            mono.extend(&urays);
                            unit(self.monomial(*t, &mono), &(c * &w), &mut v);
                        }
                    }
                    rows.push(v);
                }
            }
        } else {
            // Sedentary codim-one cell (ρ, σ): kill every monomial through ρ.
            let rho = f.cone(cell.tau)[0];
            let top = tops[0];
            for (i, m) in self.ext.subsets().iter().enumerate() {
                let own = x.free_rays(top);
                if m.iter().any(|&j| own[j] == rho) {
                    let mut v = vec![Rational::zero(); n];
                    v[self.block_offset(top) + i] = q(1);
                    rows.push(v);
                }
            }
        }
        Subspace::span(n, rows)
    }

    /// `F_{p,w}(S)`.
    pub fn space(&self, s: usize) -> Arc<CoefficientSpace> {
        self.spaces[s]
            .get_or_init(|| {
                let x = self.x;
                let slots = x.tops_over(s);
                let ambient = self.blocks_subspace(&slots);
                let d = x.d();
                let mut killed = Subspace::zero(self.global_dim());
                if d >= 1 {
                    for r in x.cells_of_dim(d - 1) {
                        if x.is_face(s, r) {
                            killed = killed.sum(self.codim_one_kernel(r)).expect("same ambient");
                        }
                    }
                }
                let space = QuotientSpace::new(ambient, killed).expect("kernels lie in the ambient");
                Arc::new(CoefficientSpace { cell: s, kind: CoeffKind::Pw, p: self.p, space, slots })
            })
            .clone()
    }

    /// Matrix of `ι_{S ⊆ S'}: F(S') → F(S)` (rows: basis of `F(S')`).
    pub fn iota(&self, from: usize, to: usize) -> Result<QMat, CoeffError> {
        if !self.x.is_face(to, from) {
            return Err(CoeffError::NotAFace(to, from));
        }
        let src = self.space(from);
        let dst = self.space(to);
        Ok(dst.space.project_rows_unchecked(src.space.complement()))
    }

    /// Projection of a global-coordinate subspace (inside `A_R`) into `F(R)`.
    pub fn project_subspace(&self, r: usize, sub: &Subspace) -> Subspace {
        let sp = self.space(r);
        if sub.is_zero() {
            return Subspace::zero(sp.dim());
        }
        Subspace::row_span(&sp.space.project_rows_unchecked(sub.basis()))
    }

    /// `F^{p,w}(R)` as the annihilator of `K_R` inside the coordinates of `A_R`.
    pub fn dual(&self, r: usize) -> Result<CoefficientSpace, CoeffError> {
        if !self.x.is_smooth(r) {
            return Err(CoeffError::NotSmooth(r));
        }
        let sp = self.space(r);
        let ambient = sp.space.ambient().clone();
        let ann = sp.space.killed().annihilator().intersect(&ambient)?;
        let space = QuotientSpace::plain(ann);
        Ok(CoefficientSpace { cell: r, kind: CoeffKind::PwDual, p: self.p, space, slots: sp.slots.clone() })
    }

    /// Span, in the monomial coordinates of `Λ^p Tan P`, of the elements
    /// allowed at the singular cell `S` for a `q`-piece meeting `rel.int S`
    /// in dimension `k`.
    pub fn allowed_in_top(&self, top: usize, s: usize, q: usize, k: usize) -> Result<Subspace, CoeffError> {
        allowed_subspace(self.x, top, s, self.p, q, k)
    }

    /// Allowed coefficients of a `q`-piece with carrier `r`, meeting each
    /// listed singular cell `S` in dimension `k`, as a subspace of `F(R)`.
    pub fn allowed_piece(&self, r: usize, q: usize, meets: &[(usize, usize)]) -> Result<Subspace, CoeffError> {
        let sp = self.space(r);
        let mut acc = Subspace::full(sp.dim());
        for &(s, k) in meets {
            let mut rows: Vec<Vec<Rational>> = Vec::new();
            for &top in &sp.slots {
                let local = self.allowed_in_top(top, s, q, k)?;
                let off = self.block_offset(top);
                for i in 0..local.dim() {
                    let mut v = vec![Rational::zero(); self.global_dim()];
                    for (j, c) in local.basis().row(i).iter().enumerate() {
                        v[off + j] = c.clone();
                    }
                    rows.push(v);
                }
            }
            let g = Subspace::span(self.global_dim(), rows);
            acc = acc.intersect(&self.project_subspace(r, &g))?;
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }
}

fn compute_lifts(x: &CompactifiedCellComplex, r: usize, choice: LiftChoice) -> Result<Vec<(usize, Vec<Rational>)>, CoeffError> {
    let f = x.cycle().fan();
    let qc = x.cell(r).sigma;
    let q_rays = f.cone(qc).to_vec();
    let tops = x.tops_over(r);
    let mut b = vec![0i64; f.rank()];
    let mut out = Vec::new();
    for &t in &tops {
        let w = x.weight(t);
        let own = x.free_rays(t);
        let extra = *own.iter().find(|o| !q_rays.contains(o)).expect("one extra ray");
        for (bi, ui) in b.iter_mut().zip(f.ray(extra)) {
            *bi += w * ui;
        }
        let mut c = vec![Rational::zero(); own.len()];
        c[own.iter().position(|&o| o == extra).expect("own ray")] = q(1);
        out.push((t, c));
    }
    let coords = f.ray_coordinates(qc, &to_q_vec(&b)).ok_or(CoeffError::Unbalanced(r))?;
    // Put the correction −b / w_{P1} on the first top cell.
    let w1 = q(x.weight(tops[0]));
    let own1 = x.free_rays(tops[0]);
    for (j, &qr) in q_rays.iter().enumerate() {
        let pos = own1.iter().position(|&o| o == qr).expect("Q ⊆ P");
        out[0].1[pos] -= &coords[j] / &w1;
    }
    if choice == LiftChoice::Perturbed && !q_rays.is_empty() && tops.len() >= 2 {
        let e = q_rays[0];
        let (w1, w2) = (x.weight(tops[0]), x.weight(tops[1]));
        let p1 = x.free_rays(tops[0]).iter().position(|&o| o == e).expect("Q ⊆ P");
        let p2 = x.free_rays(tops[1]).iter().position(|&o| o == e).expect("Q ⊆ P");
        out[0].1[p1] += q(w2);
        out[1].1[p2] -= q(w1);
    }
    Ok(out)
}

/// A basis of `Tan P` adapted to the flag `W ⊆ U ⊆ Tan P`: the first `w`
/// rows span `W`, the first `u` rows span `U`. Rows are in ray coordinates.
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub basis: QMat,
    pub w: usize,
    pub u: usize,
}

impl AdaptedBasis {
    /// Greedy extension `W → U → Tan P` in the given order.
    pub fn extend(dim: usize, w_gens: &[Vec<Rational>], u_gens: &[Vec<Rational>]) -> Result<Self, CoeffError> {
        let wsp = Subspace::span(dim, w_gens.to_vec());
        let usp = Subspace::span(dim, u_gens.to_vec());
        if !usp.contains_subspace(&wsp) {
            return Err(CoeffError::FlagViolation);
        }
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let mut acc = Subspace::zero(dim);
        let std_basis: Vec<Vec<Rational>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { q(1) } else { q(0) }).collect())
            .collect();
        let mut marks = [0usize; 2];
        for (stage, gens) in [w_gens, u_gens, &std_basis[..]].into_iter().enumerate() {
            for g in gens {
                if !acc.contains(g) {
                    rows.push(g.clone());
                    acc = Subspace::span(dim, rows.clone());
                }
            }
            if stage < 2 {
                marks[stage] = rows.len();
            }
        }
        Ok(AdaptedBasis { basis: QMat::from_rows(dim, rows), w: marks[0], u: marks[1] })
    }

    /// Coordinate flag: `W` spanned by the first `w` standard vectors of a
    /// reordering, `U` by the first `u`.
    pub fn coordinate(dim: usize, w_coords: &[usize], u_coords: &[usize]) -> Result<Self, CoeffError> {
        let unit = |i: usize| -> Vec<Rational> { (0..dim).map(|j| if i == j { q(1) } else { q(0) }).collect() };
        let wg: Vec<Vec<Rational>> = w_coords.iter().map(|&i| unit(i)).collect();
        let ug: Vec<Vec<Rational>> = u_coords.iter().map(|&i| unit(i)).collect();
        Self::extend(dim, &wg, &ug)
    }

    fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// `(#W-factors, #U-factors)` of each adapted monomial of degree `p`.
    fn counts(&self, p: usize) -> Vec<(usize, usize)> {
        ExteriorIndex::new(self.dim(), p)
            .subsets()
            .iter()
            .map(|s| (s.iter().filter(|&&i| i < self.w).count(), s.iter().filter(|&&i| i < self.u).count()))
            .collect()
    }

    /// `Λ^p` of the basis matrix: rows are the adapted monomials expressed
    /// in the monomial coordinates of the original basis.
    fn wedge_matrix(&self, p: usize) -> QMat {
        let e = ExteriorIndex::new(self.dim(), p);
        e.induced(&self.basis, &e)
    }

    /// Span of the adapted monomials whose counts satisfy `keep`.
    pub fn span_where(&self, p: usize, keep: impl Fn(usize, usize) -> bool) -> Subspace {
        let m = self.wedge_matrix(p);
        let rows: Vec<usize> = self.counts(p).into_iter().enumerate().filter(|(_, (a, b))| keep(*a, *b)).map(|(i, _)| i).collect();
        Subspace::row_span(&m.select_rows(&rows))
    }

    /// `v` and `u` of `α` (given in original monomial coordinates).
    pub fn degrees(&self, p: usize, alpha: &[Rational]) -> Result<FiltrationDegrees, CoeffError> {
        if alpha.iter().all(Zero::is_zero) {
            return Err(CoeffError::ZeroElement);
        }
        let inv = self.wedge_matrix(p).inverse().expect("adapted basis is a basis");
        // α = c · M with the adapted monomials as rows of M.
        let c = inv.vec_mul(alpha);
        let counts = self.counts(p);
        let mut v = usize::MAX;
        let mut u = usize::MAX;
        for (ci, (a, b)) in c.iter().zip(counts) {
            if !ci.is_zero() {
                v = v.min(a);
                u = u.min(b);
            }
        }
        Ok(FiltrationDegrees { v, u })
    }
}

/// Flag `Tan σ_S ⊆ span σ_S ⊆ Tan P` in the ray basis of the top cell `P`.
pub fn cell_flag(x: &CompactifiedCellComplex, top: usize, s: usize) -> Result<AdaptedBasis, CoeffError> {
    let f = x.cycle().fan();
    let own = x.free_rays(top);
    let cs = x.cell(s);
    let pos = |rays: &[usize]| -> Option<Vec<usize>> { rays.iter().map(|r| own.iter().position(|o| o == r)).collect() };
    let w = pos(f.cone(cs.tau)).ok_or(CoeffError::FlagViolation)?;
    let u = pos(f.cone(cs.sigma)).ok_or(CoeffError::FlagViolation)?;
    AdaptedBasis::coordinate(own.len(), &w, &u)
}

/// `v(α ∩ σ_S)` and `u(α ∩ pr^{-1}(S))` for `α ∈ Λ^p Tan P`.
pub fn vu_degrees(x: &CompactifiedCellComplex, top: usize, s: usize, p: usize, alpha: &[Rational]) -> Result<FiltrationDegrees, CoeffError> {
    if !x.is_face(s, top) {
        return Err(CoeffError::FlagViolation);
    }
    cell_flag(x, top, s)?.degrees(p, alpha)
}

/// Allowed part of `Λ^p Tan P` at a singular cell `S` for a `q`-piece meeting
/// `rel.int S` in dimension `k`, in the ray-monomial coordinates of `P`.
pub fn allowed_subspace(x: &CompactifiedCellComplex, top: usize, s: usize, p: usize, q: usize, k: usize) -> Result<Subspace, CoeffError> {
    if !x.is_face(s, top) {
        return Err(CoeffError::FlagViolation);
    }
    let d = x.d() as i64;
    let flag = cell_flag(x, top, s)?;
    let t = flag.w as i64;
    let dim_s = x.cell_dim(s) as i64;
    let (p, qi, k) = (p as i64, q as i64, k as i64);
    if t == 0 && qi - k == d - dim_s {
        return Ok(Subspace::full(ExteriorIndex::new(x.d(), p as usize).len()));
    }
    Ok(flag.span_where(p as usize, |a, b| {
        let (a, b) = (a as i64, b as i64);
        qi - k + a >= 2.max(p + t - b + 1)
    }))
}

/// `Fil^j_S Λ^r Tan P`: span of adapted monomials with `v + u ≥ j`.
pub fn fil_subspace(flag: &AdaptedBasis, r: usize, j: i64) -> Subspace {
    flag.span_where(r, |a, b| (a + b) as i64 >= j)
}

/// The wedge pairing `Fil^{-k+dim S+2 dim σ_S} Λ^{d−p} × Λ^p / Fil^{k+1} → Λ^d`.
#[derive(Clone, Debug)]
pub struct FilPairing {
    pub fil: Subspace,
    /// Rows span a complement of `Fil^{k+1} Λ^p` (adapted monomials outside it).
    pub quotient_reps: QMat,
    pub matrix: QMat,
    pub rank: usize,
}

impl FilPairing {
    pub fn is_nondegenerate(&self) -> bool {
        self.rank == self.fil.dim() && self.rank == self.quotient_reps.rows()
    }
}

pub fn fil_and_wedge(x: &CompactifiedCellComplex, top: usize, s: usize, p: usize, k: i64) -> Result<FilPairing, CoeffError> {
    let d = x.d();
    if p > d {
        return Err(CoeffError::DegreeOutOfRange { p, d });
    }
    if !x.is_face(s, top) {
        return Err(CoeffError::FlagViolation);
    }
    let flag = cell_flag(x, top, s)?;
    let t = flag.w as i64;
    let dim_s = x.cell_dim(s) as i64;
    let fil = fil_subspace(&flag, d - p, -k + dim_s + 2 * t);
    let m = flag.wedge_matrix(p);
    let reps: Vec<usize> = flag
        .counts(p)
        .into_iter()
        .enumerate()
        .filter(|(_, (a, b))| ((a + b) as i64) < k + 1)
        .map(|(i, _)| i)
        .collect();
    let quotient_reps = m.select_rows(&reps);
    let mut matrix = QMat::zeros(fil.dim(), quotient_reps.rows());
    for i in 0..fil.dim() {
        for j in 0..quotient_reps.rows() {
            matrix.set(i, j, wedge_top(d, d - p, fil.basis().row(i), p, quotient_reps.row(j)));
        }
    }
    let rank = matrix.rank();
    Ok(FilPairing { fil, quotient_reps, matrix, rank })
}

/// `α ∧ β ∈ Λ^d Q^d ≅ Q` for `α ∈ Λ^a`, `β ∈ Λ^b`, `a + b = d`.
pub fn wedge_top(d: usize, a: usize, alpha: &[Rational], b: usize, beta: &[Rational]) -> Rational {
    let ia = ExteriorIndex::new(d, a);
    let ib = ExteriorIndex::new(d, b);
    let mut acc = Rational::zero();
    for (i, s) in ia.subsets().iter().enumerate() {
        if alpha[i].is_zero() {
            continue;
        }
        for (j, t) in ib.subsets().iter().enumerate() {
            if beta[j].is_zero() {
                continue;
            }
            let mut seq = s.clone();
            seq.extend(t);
            let sg = sort_sign(&seq);
            if sg == 0 {
                continue;
            }
            let term = &alpha[i] * &beta[j];
            if sg > 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
    }
    acc
}

/// The IKMZ system `F^p`, in the monomial coordinates of `Λ^p M_Q`.
pub struct IkmzSystem<'a> {
    x: &'a CompactifiedCellComplex,
    p: usize,
    ext_n: ExteriorIndex,
    spaces: Vec<OnceLock<Arc<CoefficientSpace>>>,
}

impl<'a> IkmzSystem<'a> {
    pub fn new(x: &'a CompactifiedCellComplex, p: usize) -> Self {
        let n = x.cycle().fan().rank();
        IkmzSystem { x, p, ext_n: ExteriorIndex::new(n, p), spaces: (0..x.len()).map(|_| OnceLock::new()).collect() }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn space(&self, r: usize) -> Arc<CoefficientSpace> {
        self.spaces[r]
            .get_or_init(|| {
                let x = self.x;
                let f = x.cycle().fan();
                let n = f.rank();
                let dim = self.ext_n.len();
                let cell = x.cell(r);
                let perp = integer_kernel_basis(&f.ray_matrix(cell.tau), n).expect("small lattice");
                let gens: Vec<Vec<Rational>> = ExteriorIndex::new(perp.len(), self.p)
                    .subsets()
                    .iter()
                    .map(|s| wedge_vectors(n, &s.iter().map(|&i| to_q_vec(&perp[i])).collect::<Vec<_>>()))
                    .collect();
                let ambient = Subspace::span(dim, gens);
                let slots = x.tops_over(r);
                let mut eval: Option<QMat> = None;
                for &t in &slots {
                    let rays = f.ray_matrix(x.cell(t).sigma);
                    let m = QMat::from_i64(&rays).transpose();
                    let target = ExteriorIndex::new(rays.len(), self.p);
                    let e = self.ext_n.induced(&m, &target);
                    eval = Some(match eval {
                        None => e,
                        Some(prev) => prev.hstack(&e),
                    });
                }
                let joint = match eval {
                    Some(e) if e.cols() > 0 => Subspace::row_span(&e.left_kernel()),
                    _ => Subspace::full(dim),
                };
                let killed = ambient.intersect(&joint).expect("same ambient");
                let space = QuotientSpace::new(ambient, killed).expect("killed ⊆ ambient");
                Arc::new(CoefficientSpace { cell: r, kind: CoeffKind::Ikmz, p: self.p, space, slots })
            })
            .clone()
    }

    /// Restriction `F^p(S) → F^p(R)` for `S ⪯ R`.
    pub fn restriction(&self, from: usize, to: usize) -> Result<QMat, CoeffError> {
        if !self.x.is_face(from, to) {
            return Err(CoeffError::NotAFace(from, to));
        }
        let src = self.space(from);
        let dst = self.space(to);
        Ok(dst.space.project_rows_unchecked(src.space.complement()))
    }
}

pub fn f_pw(x: &CompactifiedCellComplex, s: usize, p: usize) -> Result<CoefficientSpace, CoeffError> {
    Ok((*PwSystem::new(x, p, LiftChoice::Canonical)?.space(s)).clone())
}

pub fn f_pw_dual(x: &CompactifiedCellComplex, r: usize, p: usize) -> Result<CoefficientSpace, CoeffError> {
    PwSystem::new(x, p, LiftChoice::Canonical)?.dual(r)
}

pub fn f_ikmz(x: &CompactifiedCellComplex, r: usize, p: usize) -> CoefficientSpace {
    (*IkmzSystem::new(x, p).space(r)).clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compactified::canonical_compactification;
    use crate::fans::{build_fan, TropicalFanCycle};

    fn tl() -> CompactifiedCellComplex {
        let f = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0], vec![1], vec![2]]).unwrap();
        canonical_compactification(&TropicalFanCycle::new(f, vec![1, 1, 1]).unwrap())
    }

    fn p2() -> CompactifiedCellComplex {
        let f = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        canonical_compactification(&TropicalFanCycle::new(f, vec![1, 1, 1]).unwrap())
    }

    fn origin(x: &CompactifiedCellComplex) -> usize {
        let f = x.cycle().fan();
        x.index_of(crate::compactified::CCell { tau: f.origin(), sigma: f.origin() }).unwrap()
    }

    fn infinity_vertex(x: &CompactifiedCellComplex, ray: usize) -> usize {
        let f = x.cycle().fan();
        let c = f.find(&[ray]).unwrap();
        x.index_of(crate::compactified::CCell { tau: c, sigma: c }).unwrap()
    }

    #[test]
    fn tropical_line_center() {
        let x = tl();
        let o = origin(&x);
        assert_eq!(f_pw(&x, o, 1).unwrap().dim(), 2);
        assert_eq!(f_pw(&x, o, 0).unwrap().dim(), 1);
        assert_eq!(f_pw_dual(&x, o, 1).unwrap().dim(), 2);
        assert_eq!(f_ikmz(&x, o, 1).dim(), 2);
        for t in x.top_cells() {
            assert_eq!(f_pw(&x, t, 1).unwrap().dim(), 1);
            assert_eq!(f_pw_dual(&x, t, 1).unwrap().dim(), 1);
        }
        let v = infinity_vertex(&x, 0);
        assert_eq!(f_pw(&x, v, 1).unwrap().dim(), 0);
        assert!(f_ikmz(&x, v, 1).dim() <= 1);
        assert!(f_pw_dual(&x, v, 1).is_err());
        assert!(f_pw(&x, o, 2).is_err());
    }

    #[test]
    fn ikmz_on_p2_top_cell() {
        let x = p2();
        let t = x.top_cells()[0];
        assert_eq!(f_ikmz(&x, t, 1).dim(), 2);
        assert_eq!(f_pw(&x, t, 2).unwrap().dim(), 1);
    }

    #[test]
    fn degrees_examples() {
        // Tan P = Q², W = U = span e1.
        let b = AdaptedBasis::coordinate(2, &[0], &[0]).unwrap();
        assert_eq!(b.degrees(1, &[q(1), q(0)]).unwrap(), FiltrationDegrees { v: 1, u: 1 });
        assert_eq!(b.degrees(1, &[q(0), q(1)]).unwrap().v, 0);
        let b = AdaptedBasis::coordinate(2, &[0], &[0, 1]).unwrap();
        assert_eq!(b.degrees(1, &[q(0), q(1)]).unwrap().u, 1);
        assert_eq!(b.degrees(2, &[q(1)]).unwrap(), FiltrationDegrees { v: 1, u: 2 });
        assert_eq!(b.degrees(1, &[q(0), q(0)]), Err(CoeffError::ZeroElement));
        assert!(AdaptedBasis::coordinate(2, &[1], &[0]).is_err());
    }

    #[test]
    fn allowability_at_infinity_of_the_line() {
        let x = tl();
        let s = infinity_vertex(&x, 0);
        let top = x.tops_over(s)[0];
        assert!(allowed_subspace(&x, top, s, 1, 1, 0).unwrap().is_full());
        assert!(allowed_subspace(&x, top, s, 0, 0, 0).unwrap().is_zero());
        let o = origin(&x);
        // dim σ_S = 0 and q − k = d − dim S.
        assert!(allowed_subspace(&x, top, o, 0, 1, 0).unwrap().is_full());
    }

    #[test]
    fn fil_pairing_on_an_edge() {
        let x = tl();
        let s = infinity_vertex(&x, 0);
        let top = x.tops_over(s)[0];
        let fp = fil_and_wedge(&x, top, s, 0, 0).unwrap();
        assert_eq!(fp.fil.dim(), 1);
        assert_eq!(fp.matrix.rows(), 1);
        assert_eq!(fp.matrix.cols(), 1);
        assert!(fp.is_nondegenerate(), "{fp:?}");
        for k in -3..6 {
            for p in 0..=1 {
                assert!(fil_and_wedge(&x, top, s, p, k).unwrap().is_nondegenerate());
            }
        }
        let low = fil_and_wedge(&x, top, s, 1, -1).unwrap();
        assert!(low.quotient_reps.rows() == 0 && low.fil.is_zero());
    }

    #[test]
    fn lift_choice_does_not_matter() {
        for x in [tl(), p2()] {
            for p in 0..=x.d() {
                let a = PwSystem::new(&x, p, LiftChoice::Canonical).unwrap();
                let b = PwSystem::new(&x, p, LiftChoice::Perturbed).unwrap();
                for c in 0..x.len() {
                    assert_eq!(a.space(c).space.killed(), b.space(c).space.killed());
                }
            }
        }
    }

    #[test]
    fn dual_has_same_dimension() {
        let x = p2();
        for p in 0..=2 {
            for c in 0..x.len() {
                if x.is_smooth(c) {
                    assert_eq!(f_pw(&x, c, p).unwrap().dim(), f_pw_dual(&x, c, p).unwrap().dim());
                }
            }
        }
    }

    #[test]
    fn iota_composes() {
        let x = p2();
        let sys = PwSystem::new(&x, 1, LiftChoice::Canonical).unwrap();
        for a in 0..x.len() {
            for b in x.faces(a) {
                for c in x.faces(b) {
                    let ab = sys.iota(a, b).unwrap();
                    let bc = sys.iota(b, c).unwrap();
                    assert_eq!(ab.mul(&bc), sys.iota(a, c).unwrap());
                }
            }
        }
    }
}
