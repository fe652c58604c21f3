//! Unimodular simplicial fans, Minkowski weights and tropical fan cycles.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::qlinalg::{
    integer_kernel_basis, is_unimodular, lattice_coordinates, primitive_vector, q, to_q_vec,
    QMat, Rational, Subspace,
};

/// Index of a cone in [`Fan::cones`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct ConeId(pub usize);

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FanError {
    #[error("ray {0} has length {1}, expected the lattice rank {2}")]
    RayLength(usize, usize, usize),
    #[error("ray {0} is not primitive")]
    NonPrimitiveRay(usize),
    #[error("ray {0} is zero")]
    ZeroRay(usize),
    #[error("rays {0} and {1} coincide")]
    DuplicateRay(usize, usize),
    #[error("cone refers to missing ray index {0}")]
    RayIndexOutOfRange(usize),
    #[error("cone {0:?} repeats a ray")]
    RepeatedRay(Vec<usize>),
    #[error("cone {0:?} is not unimodular")]
    NonUnimodular(Vec<usize>),
    #[error("ray {ray} lies inside cone {cone:?} without being one of its rays")]
    RayInsideCone { ray: usize, cone: Vec<usize> },
    #[error("cones {0:?} and {1:?} overlap beyond their common face")]
    BadIntersection(Vec<usize>, Vec<usize>),
    #[error("cone {0:?} is not in the fan")]
    ConeNotInFan(Vec<usize>),
    #[error("fan is not pure")]
    NotPure,
    #[error("no maximal cones given")]
    Empty,
    #[error("weight for maximal cone {0} must be positive")]
    NonPositiveWeight(usize),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("vector {0:?} is not in the support of the fan")]
    NotInSupport(Vec<i64>),
    #[error("lattice arithmetic overflow")]
    Overflow,
}

/// A unimodular simplicial fan with its full face lattice.
///
/// Cones are ray-index sets in increasing order, sorted by dimension and then
/// lexicographically; cone 0 is always the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
    maximal: Vec<ConeId>,
    lookup: HashMap<Vec<usize>, ConeId>,
}

impl Fan {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[i64] {
        &self.rays[i]
    }

    pub fn num_cones(&self) -> usize {
        self.cones.len()
    }

    pub fn cone(&self, c: ConeId) -> &[usize] {
        &self.cones[c.0]
    }

    pub fn cone_ids(&self) -> impl Iterator<Item = ConeId> {
        (0..self.cones.len()).map(ConeId)
    }

    pub fn cone_dim(&self, c: ConeId) -> usize {
        self.cones[c.0].len()
    }

    pub fn origin(&self) -> ConeId {
        ConeId(0)
    }

    /// Maximal cones in the order they were given.
    pub fn maximal_cones(&self) -> &[ConeId] {
        &self.maximal
    }

    pub fn find(&self, rays: &[usize]) -> Option<ConeId> {
        let mut key = rays.to_vec();
        key.sort_unstable();
        self.lookup.get(&key).copied()
    }

    pub fn cones_of_dim(&self, k: usize) -> Vec<ConeId> {
        self.cone_ids().filter(|&c| self.cone_dim(c) == k).collect()
    }

    /// Largest cone dimension.
    pub fn dim(&self) -> usize {
        self.cones.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_pure(&self) -> bool {
        let d = self.dim();
        self.maximal.iter().all(|&c| self.cone_dim(c) == d)
    }

    /// `a ⪯ b` in the face order.
    pub fn is_face(&self, a: ConeId, b: ConeId) -> bool {
        let (sa, sb) = (self.cone(a), self.cone(b));
        sa.iter().all(|r| sb.binary_search(r).is_ok())
    }

    /// Cones containing `c`, including `c`.
    pub fn cofaces(&self, c: ConeId) -> Vec<ConeId> {
        self.cone_ids().filter(|&b| self.is_face(c, b)).collect()
    }

    pub fn maximal_containing(&self, c: ConeId) -> Vec<ConeId> {
        self.maximal.iter().copied().filter(|&m| self.is_face(c, m)).collect()
    }

    /// The cone spanned by `c` and one extra ray, if it exists.
    pub fn join_ray(&self, c: ConeId, ray: usize) -> Option<ConeId> {
        let mut rays = self.cone(c).to_vec();
        if rays.contains(&ray) {
            return None;
        }
        rays.push(ray);
        self.find(&rays)
    }

    /// Rows are the ray vectors of `c`.
    pub fn ray_matrix(&self, c: ConeId) -> Vec<Vec<i64>> {
        self.cone(c).iter().map(|&r| self.rays[r].clone()).collect()
    }

    /// `Tan_Q c` as a subspace of `N_Q`.
    pub fn tangent(&self, c: ConeId) -> Subspace {
        Subspace::span(self.rank, self.cone(c).iter().map(|&r| to_q_vec(&self.rays[r])).collect())
    }

    /// `N_Q`-coordinates of `v` in the ray basis of `c`, if `v ∈ Tan_Q c`.
    pub fn ray_coordinates(&self, c: ConeId, v: &[Rational]) -> Option<Vec<Rational>> {
        solve_in_rays(&self.ray_matrix(c), v)
    }

    /// Certifies `cone(A) ∩ cone(B) = cone(A ∩ B)` for every pair of maximal
    /// cones by exact Fourier–Motzkin elimination.
    pub fn check_geometric(&self) -> Result<(), FanError> {
        for (i, &a) in self.maximal.iter().enumerate() {
            for &b in &self.maximal[i + 1..] {
                if !proper_intersection(self, a, b) {
                    return Err(FanError::BadIntersection(self.cone(a).to_vec(), self.cone(b).to_vec()));
                }
            }
        }
        Ok(())
    }
}

fn solve_in_rays(rays: &[Vec<i64>], v: &[Rational]) -> Option<Vec<Rational>> {
    let k = rays.len();
    if k == 0 {
        return v.iter().all(Zero::is_zero).then(Vec::new);
    }
    let m = QMat::from_i64(rays).transpose();
    let col = QMat::from_rows(1, v.iter().map(|x| vec![x.clone()]).collect());
    let (r, pivots) = m.hstack(&col).rref();
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut out = vec![Rational::zero(); k];
    for (i, &p) in pivots.iter().enumerate() {
        out[p] = r.get(i, k).clone();
    }
    Some(out)
}

/// Builds a fan from rays and generating cones, generating all faces.
pub fn build_fan(rank: usize, rays: Vec<Vec<i64>>, maximal_cones: Vec<Vec<usize>>) -> Result<Fan, FanError> {
    if maximal_cones.is_empty() {
        return Err(FanError::Empty);
    }
    for (i, r) in rays.iter().enumerate() {
        if r.len() != rank {
            return Err(FanError::RayLength(i, r.len(), rank));
        }
        match primitive_vector(r) {
            Err(_) => return Err(FanError::ZeroRay(i)),
            Ok(p) if &p != r => return Err(FanError::NonPrimitiveRay(i)),
            Ok(_) => {}
        }
        if let Some(j) = rays[..i].iter().position(|s| s == r) {
            return Err(FanError::DuplicateRay(j, i));
        }
    }
    let mut gens: Vec<Vec<usize>> = Vec::new();
    for c in &maximal_cones {
        let mut s = c.clone();
        s.sort_unstable();
        if let Some(&bad) = s.iter().find(|&&r| r >= rays.len()) {
            return Err(FanError::RayIndexOutOfRange(bad));
        }
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(FanError::RepeatedRay(c.clone()));
        }
        let m: Vec<Vec<i64>> = s.iter().map(|&r| rays[r].clone()).collect();
        if !m.is_empty() && !is_unimodular(&m) {
            return Err(FanError::NonUnimodular(s));
        }
        gens.push(s);
    }
    let mut all: Vec<Vec<usize>> = gens
        .iter()
        .flat_map(|g| g.iter().copied().powerset())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all.dedup();
    let lookup: HashMap<Vec<usize>, ConeId> =
        all.iter().enumerate().map(|(i, c)| (c.clone(), ConeId(i))).collect();
    // Keep given order, dropping generators that are faces of other generators.
    let mut maximal = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let dominated = gens.iter().enumerate().any(|(j, h)| {
            j != i && h.len() > g.len() && g.iter().all(|r| h.contains(r))
        });
        let id = lookup[g];
        if !dominated && !maximal.contains(&id) {
            maximal.push(id);
        }
    }
    let fan = Fan { rank, rays, cones: all, maximal, lookup };
    // A ray sitting inside another cone breaks the fan structure.
    for &m in &fan.maximal {
        let rm = fan.ray_matrix(m);
        for (ri, r) in fan.rays.iter().enumerate() {
            if fan.cone(m).contains(&ri) {
                continue;
            }
            if let Some(c) = solve_in_rays(&rm, &to_q_vec(r)) {
                if c.iter().all(|x| !x.is_negative()) {
                    return Err(FanError::RayInsideCone { ray: ri, cone: fan.cone(m).to_vec() });
                }
            }
        }
    }
    Ok(fan)
}

// Is there x = Σ λ_a a = Σ μ_b b with λ, μ ≥ 0 and Σ_{a ∉ B} λ_a = 1?
fn proper_intersection(fan: &Fan, a: ConeId, b: ConeId) -> bool {
    let sa = fan.cone(a);
    let sb = fan.cone(b);
    let only_a: Vec<usize> = sa.iter().copied().filter(|r| !sb.contains(r)).collect();
    if only_a.is_empty() {
        return true;
    }
    let nv = sa.len() + sb.len();
    let n = fan.rank;
    let mut eq: Vec<Vec<Rational>> = Vec::new();
    for i in 0..n {
        let mut row = vec![Rational::zero(); nv + 1];
        for (j, &r) in sa.iter().enumerate() {
            row[j] = q(fan.rays[r][i]);
        }
        for (j, &r) in sb.iter().enumerate() {
            row[sa.len() + j] = -q(fan.rays[r][i]);
        }
        eq.push(row);
    }
    let mut norm = vec![Rational::zero(); nv + 1];
    for (j, r) in sa.iter().enumerate() {
        if only_a.contains(r) {
            norm[j] = q(1);
        }
    }
    norm[nv] = q(1);
    eq.push(norm);
    !nonneg_feasible(nv, &eq)
}

/// Feasibility of `E x = f, x ≥ 0`, rows of `eq` being `[E | f]`.
fn nonneg_feasible(nv: usize, eq: &[Vec<Rational>]) -> bool {
    let m = QMat::from_rows(nv + 1, eq.to_vec());
    let (r, pivots) = m.rref();
    if pivots.last() == Some(&nv) {
        return false;
    }
    let free: Vec<usize> = (0..nv).filter(|c| !pivots.contains(c)).collect();
    // Inequalities a·y ≤ b over the free variables y.
    let mut ineqs: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for (i, _) in pivots.iter().enumerate() {
        // x_p = f_i − Σ r_ij y_j ≥ 0  ⇔  Σ r_ij y_j ≤ f_i
        let a: Vec<Rational> = free.iter().map(|&j| r.get(i, j).clone()).collect();
        ineqs.push((a, r.get(i, nv).clone()));
    }
    for k in 0..free.len() {
        let mut a = vec![Rational::zero(); free.len()];
        a[k] = q(-1);
        ineqs.push((a, Rational::zero()));
    }
    fourier_motzkin(free.len(), ineqs)
}

fn fourier_motzkin(nvars: usize, mut ineqs: Vec<(Vec<Rational>, Rational)>) -> bool {
    for k in 0..nvars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in ineqs {
            if a[k].is_positive() {
                pos.push((a, b));
            } else if a[k].is_negative() {
                neg.push((a, b));
            } else {
                rest.push((a, b));
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let (sp, sn) = (-an[k].clone(), ap[k].clone());
                let a: Vec<Rational> = ap.iter().zip(an).map(|(x, y)| x * &sp + y * &sn).collect();
                let b = bp * &sp + bn * &sn;
                rest.push((a, b));
            }
        }
        rest.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
        rest.dedup_by(|x, y| x.0 == y.0);
        ineqs = rest;
    }
    ineqs.iter().all(|(_, b)| !b.is_negative())
}

/// Integer weights on the `k`-cones of a fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinkowskiWeight {
    pub fan: Fan,
    pub k: usize,
    pub weights: BTreeMap<ConeId, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Balancing {
    pub balanced: bool,
    /// `(k−1)`-cones where balancing fails.
    pub violations: Vec<ConeId>,
}

impl MinkowskiWeight {
    pub fn weight(&self, c: ConeId) -> i64 {
        self.weights.get(&c).copied().unwrap_or(0)
    }

    pub fn is_balanced(&self) -> Balancing {
        if self.k == 0 {
            return Balancing { balanced: true, violations: Vec::new() };
        }
        let fan = &self.fan;
        let mut violations = Vec::new();
        for qc in fan.cones_of_dim(self.k - 1) {
            let mut sum = vec![0i64; fan.rank()];
            for p in fan.cones_of_dim(self.k) {
                if !fan.is_face(qc, p) {
                    continue;
                }
                let w = self.weight(p);
                let extra = fan.cone(p).iter().find(|r| !fan.cone(qc).contains(r)).copied().expect("one extra ray");
                for (s, x) in sum.iter_mut().zip(fan.ray(extra)) {
                    *s += w * x;
                }
            }
            if lattice_coordinates(&fan.ray_matrix(qc), &sum).is_none() {
                violations.push(qc);
            }
        }
        Balancing { balanced: violations.is_empty(), violations }
    }
}

/// A pure fan with positive weights on its maximal cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalFanCycle {
    fan: Fan,
    weights: Vec<i64>,
}

impl TropicalFanCycle {
    /// Weights are listed in the order of `fan.maximal_cones()`.
    ///
    /// Balancing is not enforced here; see [`TropicalFanCycle::is_balanced`].
    pub fn new(fan: Fan, weights: Vec<i64>) -> Result<Self, FanError> {
        if !fan.is_pure() {
            return Err(FanError::NotPure);
        }
        if weights.len() != fan.maximal_cones().len() {
            return Err(FanError::WeightCount { expected: fan.maximal_cones().len(), got: weights.len() });
        }
        if let Some(i) = weights.iter().position(|&w| w <= 0) {
            return Err(FanError::NonPositiveWeight(i));
        }
        Ok(TropicalFanCycle { fan, weights })
    }

    /// The rank-0 point with weight 1.
    pub fn point() -> Self {
        let fan = build_fan(0, Vec::new(), vec![Vec::new()]).expect("point fan");
        TropicalFanCycle { fan, weights: vec![1] }
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight(&self, c: ConeId) -> i64 {
        self.fan
            .maximal_cones()
            .iter()
            .position(|&m| m == c)
            .map_or(0, |i| self.weights[i])
    }

    pub fn as_minkowski_weight(&self) -> MinkowskiWeight {
        let weights = self.fan.maximal_cones().iter().copied().zip(self.weights.iter().copied()).collect();
        MinkowskiWeight { fan: self.fan.clone(), k: self.dim(), weights }
    }

    pub fn is_balanced(&self) -> Balancing {
        self.as_minkowski_weight().is_balanced()
    }

    pub fn scaled(&self, factor: i64) -> Self {
        TropicalFanCycle { fan: self.fan.clone(), weights: self.weights.iter().map(|w| w * factor).collect() }
    }
}

/// Star of a cone: the quotient fan together with provenance of its rays.
#[derive(Clone, Debug)]
pub struct StarFan {
    pub fan: Fan,
    /// For each ray of the star, the ray of the original fan it comes from.
    pub ray_origin: Vec<usize>,
    /// Rows are the integer functionals realising `N → N / span σ`.
    pub projection: Vec<Vec<i64>>,
}

impl StarFan {
    /// The original cone whose image is `c`.
    pub fn origin_cone(&self, original: &Fan, sigma: ConeId, c: ConeId) -> ConeId {
        let mut rays = original.cone(sigma).to_vec();
        rays.extend(self.fan.cone(c).iter().map(|&r| self.ray_origin[r]));
        original.find(&rays).expect("image of a coface")
    }
}

fn project(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn star_fan(f: &Fan, sigma: ConeId) -> Result<StarFan, FanError> {
    if sigma.0 >= f.num_cones() {
        return Err(FanError::ConeNotInFan(Vec::new()));
    }
    let sig = f.cone(sigma).to_vec();
    let projection = integer_kernel_basis(&f.ray_matrix(sigma), f.rank()).map_err(|_| FanError::Overflow)?;
    let mut ray_origin: Vec<usize> = Vec::new();
    let mut new_rays = Vec::new();
    for (ri, _) in f.rays().iter().enumerate() {
        if sig.contains(&ri) || f.join_ray(sigma, ri).is_none() {
            continue;
        }
        let img = project(&projection, f.ray(ri));
        new_rays.push(primitive_vector(&img).map_err(|_| FanError::ZeroRay(ri))?);
        ray_origin.push(ri);
    }
    let mut maximal = Vec::new();
    for m in f.maximal_containing(sigma) {
        let c: Vec<usize> = f
            .cone(m)
            .iter()
            .filter(|r| !sig.contains(r))
            .map(|r| ray_origin.iter().position(|o| o == r).expect("ray of a coface"))
            .collect();
        maximal.push(c);
    }
    let fan = build_fan(projection.len(), new_rays, maximal)?;
    Ok(StarFan { fan, ray_origin, projection })
}

/// Weighted stratum `V(σ) ∩ X`, a cycle in `N / span σ`.
pub fn restrict_to_stratum(c: &TropicalFanCycle, sigma: ConeId) -> Result<(TropicalFanCycle, StarFan), FanError> {
    let star = star_fan(c.fan(), sigma)?;
    let weights = star
        .fan
        .maximal_cones()
        .iter()
        .map(|&m| c.weight(star.origin_cone(c.fan(), sigma, m)))
        .collect();
    let cyc = TropicalFanCycle::new(star.fan.clone(), weights)?;
    Ok((cyc, star))
}

/// Inserts `new_ray` and subdivides every cone containing it.
pub fn stellar_subdivision(c: &TropicalFanCycle, new_ray: &[i64]) -> Result<TropicalFanCycle, FanError> {
    let fan = c.fan();
    if fan.rays().iter().any(|r| r == new_ray) {
        return Ok(c.clone());
    }
    let prim = primitive_vector(new_ray).map_err(|_| FanError::NotInSupport(new_ray.to_vec()))?;
    if prim != new_ray {
        return Err(FanError::NonPrimitiveRay(fan.rays().len()));
    }
    let v = to_q_vec(new_ray);
    let carrier = fan
        .cone_ids()
        .find(|&cid| {
            fan.ray_coordinates(cid, &v)
                .is_some_and(|co| !co.is_empty() && co.iter().all(|x| x.is_positive()))
        })
        .ok_or_else(|| FanError::NotInSupport(new_ray.to_vec()))?;
    let tau = fan.cone(carrier).to_vec();
    let new_idx = fan.rays().len();
    let mut rays = fan.rays().to_vec();
    rays.push(new_ray.to_vec());
    let mut maximal = Vec::new();
    let mut weights = Vec::new();
    for (&m, &w) in fan.maximal_cones().iter().zip(c.weights()) {
        let cone = fan.cone(m);
        if tau.iter().all(|r| cone.contains(r)) {
            for r in &tau {
                let mut piece: Vec<usize> = cone.iter().copied().filter(|x| x != r).collect();
                piece.push(new_idx);
                maximal.push(piece);
                weights.push(w);
            }
        } else {
            maximal.push(cone.to_vec());
            weights.push(w);
        }
    }
    let f = build_fan(fan.rank(), rays, maximal)?;
    TropicalFanCycle::new(f, weights)
}

/// Cartesian product in `N1 × N2`; maximal cones ordered `(i, j) ↦ i·m2 + j`.
pub fn product(c1: &TropicalFanCycle, c2: &TropicalFanCycle) -> TropicalFanCycle {
    let (f1, f2) = (c1.fan(), c2.fan());
    let (n1, n2) = (f1.rank(), f2.rank());
    let mut rays = Vec::new();
    for r in f1.rays() {
        let mut v = r.clone();
        v.extend(std::iter::repeat_n(0, n2));
        rays.push(v);
    }
    for r in f2.rays() {
        let mut v = vec![0; n1];
        v.extend(r.iter().copied());
        rays.push(v);
    }
    let off = f1.rays().len();
    let mut maximal = Vec::new();
    let mut weights = Vec::new();
    for (&a, &wa) in f1.maximal_cones().iter().zip(c1.weights()) {
        for (&b, &wb) in f2.maximal_cones().iter().zip(c2.weights()) {
            let mut cone = f1.cone(a).to_vec();
            cone.extend(f2.cone(b).iter().map(|r| r + off));
            maximal.push(cone);
            weights.push(wa * wb);
        }
    }
    let f = build_fan(n1 + n2, rays, maximal).expect("product of valid fans is valid");
    TropicalFanCycle::new(f, weights).expect("product of valid cycles is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn p2_fan() -> Fan {
        build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn line(weights: Vec<i64>) -> TropicalFanCycle {
        let f = build_fan(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0], vec![1], vec![2]]).unwrap();
        TropicalFanCycle::new(f, weights).unwrap()
    }

    #[test]
    fn cone_counts() {
        assert_eq!(p2_fan().num_cones(), 7);
        assert_eq!(line(vec![1, 1, 1]).fan().num_cones(), 4);
    }

    #[test]
    fn non_unimodular_rejected() {
        let e = build_fan(2, vec![vec![1, 0], vec![1, 2]], vec![vec![0, 1]]).unwrap_err();
        assert_eq!(e, FanError::NonUnimodular(vec![0, 1]));
        assert_eq!(build_fan(1, vec![vec![2]], vec![vec![0]]).unwrap_err(), FanError::NonPrimitiveRay(0));
    }

    #[test]
    fn balancing() {
        assert!(line(vec![1, 1, 1]).is_balanced().balanced);
        let b = line(vec![1, 1, 2]).is_balanced();
        assert!(!b.balanced);
        assert_eq!(b.violations, vec![ConeId(0)]);
        let p2 = TropicalFanCycle::new(p2_fan(), vec![1, 1, 1]).unwrap();
        assert!(p2.is_balanced().balanced);
    }

    #[test]
    fn star_of_p2_at_a_ray() {
        let f = p2_fan();
        let s = star_fan(&f, f.find(&[0]).unwrap()).unwrap();
        assert_eq!(s.fan.rank(), 1);
        let mut rays = s.fan.rays().to_vec();
        rays.sort();
        assert_eq!(rays, vec![vec![-1], vec![1]]);
        assert_eq!(star_fan(&f, f.origin()).unwrap().fan.num_cones(), 7);
        let top = star_fan(&f, f.find(&[0, 1]).unwrap()).unwrap();
        assert_eq!(top.fan.rank(), 0);
        assert_eq!(top.fan.num_cones(), 1);
    }

    #[test]
    fn restriction() {
        let p2 = TropicalFanCycle::new(p2_fan(), vec![1, 1, 1]).unwrap();
        let (r, _) = restrict_to_stratum(&p2, ConeId(1)).unwrap();
        assert_eq!(r.dim(), 1);
        assert_eq!(r.weights(), &[1, 1]);
        assert!(r.is_balanced().balanced);
        let l = line(vec![1, 1, 1]);
        let (pt, _) = restrict_to_stratum(&l, ConeId(1)).unwrap();
        assert_eq!(pt.dim(), 0);
        assert_eq!(pt.weights(), &[1]);
    }

    #[test]
    fn blow_up_p2() {
        let p2 = TropicalFanCycle::new(p2_fan(), vec![1, 1, 1]).unwrap();
        let bl = stellar_subdivision(&p2, &[1, 1]).unwrap();
        assert_eq!(bl.fan().rays().len(), 4);
        assert_eq!(bl.fan().maximal_cones().len(), 4);
        assert!(bl.is_balanced().balanced);
        let l = line(vec![1, 1, 1]);
        assert_eq!(stellar_subdivision(&l, &[1, 0]).unwrap(), l);
        let w = line(vec![2, 2, 2]);
        let sub = stellar_subdivision(&w.scaled(1), &[1, 0]).unwrap();
        assert_eq!(sub.weights(), &[2, 2, 2]);
        assert!(stellar_subdivision(&l, &[1, 1]).is_err());
    }

    #[test]
    fn products() {
        let p1f = build_fan(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]).unwrap();
        let p1 = TropicalFanCycle::new(p1f.clone(), vec![1, 1]).unwrap();
        let pp = product(&p1, &p1);
        assert_eq!(pp.fan().rays().len(), 4);
        assert_eq!(pp.fan().maximal_cones().len(), 4);
        assert!(pp.is_balanced().balanced);
        let x = product(&p1, &TropicalFanCycle::point());
        assert_eq!(x.fan().num_cones(), p1.fan().num_cones());
        let a = TropicalFanCycle::new(p1f.clone(), vec![2, 2]).unwrap();
        let b = TropicalFanCycle::new(p1f, vec![3, 3]).unwrap();
        assert!(product(&a, &b).weights().iter().all(|&w| w == 6));
    }

    #[test]
    fn geometric_check() {
        assert!(p2_fan().check_geometric().is_ok());
        // Two 2-cones in Z³ crossing through each other's interiors.
        let f = build_fan(
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 2, 1], vec![1, 1, -1]],
            vec![vec![0, 1], vec![2, 3]],
        )
        .unwrap();
        assert!(matches!(f.check_geometric(), Err(FanError::BadIntersection(..))));
        let f = build_fan(2, vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![2, 1]], vec![vec![0, 2], vec![1, 3]]);
        assert!(matches!(f, Err(FanError::RayInsideCone { .. })));
    }
}
