use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{CoeffError, IkmzSystem, LiftChoice, PwSystem};
use crate::compactified::{barycentric_subdivision, BarycentricSubdivision, CompactifiedCellComplex};
use crate::qlinalg::{q, LinAlgError, QMat, Rational, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IhError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error("boundary does not square to zero in degree {0}")]
    BoundarySquare(usize),
}

/// Which cell structure the chains live on. Strata are always the native cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Native,
    #[default]
    Barycentric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    /// Maps lower the degree.
    Homological,
    /// Maps raise the degree.
    Cohomological,
}

/// Graded `Q`-vector spaces with maps `maps[q]` out of degree `q`
/// (row convention, shape `dims[q] × dims[q ∓ 1]`).
#[derive(Clone, Debug)]
pub struct ChainComplexQ {
    pub grading: Grading,
    pub dims: Vec<usize>,
    pub maps: Vec<QMat>,
}

impl ChainComplexQ {
    pub fn new(grading: Grading, dims: Vec<usize>, maps: Vec<QMat>) -> Result<Self, IhError> {
        let c = ChainComplexQ { grading, dims, maps };
        for qd in 0..c.dims.len() {
            if let Some(next) = c.target(qd) {
                let prod = c.maps[qd].mul(&c.maps[next]);
                if !prod.is_zero() {
                    return Err(IhError::BoundarySquare(qd));
                }
            }
        }
        Ok(c)
    }

    pub fn zero(grading: Grading, top: usize) -> Self {
        let dims = vec![0; top + 1];
        let maps = (0..=top).map(|_| QMat::zeros(0, 0)).collect();
        ChainComplexQ { grading, dims, maps }
    }

    fn target(&self, qd: usize) -> Option<usize> {
        match self.grading {
            Grading::Homological => qd.checked_sub(1),
            Grading::Cohomological => (qd + 1 < self.dims.len()).then_some(qd + 1),
        }
    }

    fn source(&self, qd: usize) -> Option<usize> {
        match self.grading {
            Grading::Homological => (qd + 1 < self.dims.len()).then_some(qd + 1),
            Grading::Cohomological => qd.checked_sub(1),
        }
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.maps.par_iter().map(QMat::rank).collect()
    }

    /// Dimensions of (co)homology in every degree.
    pub fn homology_dims(&self) -> Vec<usize> {
        let ranks = self.ranks();
        (0..self.dims.len())
            .map(|qd| {
                let out = if self.target(qd).is_some() { ranks[qd] } else { 0 };
                let inc = self.source(qd).map_or(0, |s| ranks[s]);
                self.dims[qd] - out - inc
            })
            .collect()
    }
}

/// `(p, q) ↦ n`, zero outside `0 ≤ p, q ≤ d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionTable {
    pub d: usize,
    entries: BTreeMap<(usize, usize), usize>,
}

impl DimensionTable {
    pub fn new(d: usize) -> Self {
        DimensionTable { d, entries: BTreeMap::new() }
    }

    pub fn diagonal(values: &[usize]) -> Self {
        let mut t = DimensionTable::new(values.len().saturating_sub(1));
        for (i, &v) in values.iter().enumerate() {
            t.set(i, i, v);
        }
        t
    }

    pub fn get(&self, p: usize, q: usize) -> usize {
        self.entries.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, p: usize, q: usize, n: usize) {
        assert!(p <= self.d && q <= self.d, "entry outside the table");
        if n == 0 {
            self.entries.remove(&(p, q));
        } else {
            self.entries.insert((p, q), n);
        }
    }

    pub fn diagonal_values(&self) -> Vec<usize> {
        (0..=self.d).map(|i| self.get(i, i)).collect()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Full table keyed `"p,q"`, zeros included.
    pub fn to_keyed(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for p in 0..=self.d {
            for qd in 0..=self.d {
                m.insert(format!("{p},{qd}"), self.get(p, qd));
            }
        }
        m
    }

    pub fn off_diagonal_zero(&self) -> bool {
        self.entries.keys().all(|(p, q)| p == q)
    }

    /// First `(p, q)` with `t(p,q) ≠ t(d−p, d−q)`.
    pub fn duality_defect(&self) -> Option<(usize, usize)> {
        let d = self.d;
        (0..=d)
            .flat_map(|p| (0..=d).map(move |q| (p, q)))
            .find(|&(p, q)| self.get(p, q) != self.get(d - p, d - q))
    }

    /// Künneth convolution.
    pub fn convolve(&self, other: &DimensionTable) -> DimensionTable {
        let mut t = DimensionTable::new(self.d + other.d);
        for ((p1, q1), a) in self.nonzero() {
            for ((p2, q2), b) in other.nonzero() {
                let cur = t.get(p1 + p2, q1 + q2);
                t.set(p1 + p2, q1 + q2, cur + a * b);
            }
        }
        t
    }

    /// First entry where the two tables differ: `(p, q, self, other)`.
    pub fn first_difference(&self, other: &DimensionTable) -> Option<(usize, usize, usize, usize)> {
        let d = self.d.max(other.d);
        for p in 0..=d {
            for qd in 0..=d {
                let (a, b) = (self.get(p, qd), other.get(p, qd));
                if a != b {
                    return Some((p, qd, a, b));
                }
            }
        }
        None
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for p in (0..=self.d).rev() {
            let row: Vec<String> = (0..=self.d).map(|qd| self.get(p, qd).to_string()).collect();
            s.push_str(&format!("p={p}: {}\n", row.join(" ")));
        }
        s
    }
}

/// The pieces of a cell structure on `X̄`: each has a carrier cell, the
/// singular native cells it meets with the dimension of the meet, and a
/// signed list of facets.
#[derive(Clone, Debug)]
pub struct Pieces {
    pub structure: Structure,
    carriers: Vec<Vec<usize>>,
    meets: Vec<Vec<Vec<(usize, usize)>>>,
    facets: Vec<Vec<Vec<(usize, i64)>>>,
    chains: Option<BarycentricSubdivision>,
}

impl Pieces {
    pub fn new(x: &CompactifiedCellComplex, structure: Structure) -> Self {
        let d = x.d();
        let singular: Vec<usize> = (0..x.len()).filter(|&s| !x.is_smooth(s)).collect();
        let mut carriers = vec![Vec::new(); d + 1];
        let mut meets = vec![Vec::new(); d + 1];
        let mut facets = vec![Vec::new(); d + 1];
        match structure {
            Structure::Native => {
                let mut pos = vec![0; x.len()];
                for k in 0..=d {
                    for (i, c) in x.cells_of_dim(k).into_iter().enumerate() {
                        pos[c] = i;
                        carriers[k].push(c);
                    }
                }
                for k in 0..=d {
                    for &c in &carriers[k] {
                        meets[k].push(singular.iter().filter(|&&s| x.is_face(s, c)).map(|&s| (s, x.cell_dim(s))).collect());
                        facets[k].push(x.boundary(c).into_iter().map(|(f, sg)| (pos[f], sg)).collect());
                    }
                }
                Pieces { structure, carriers, meets, facets, chains: None }
            }
            Structure::Barycentric => {
                let b = barycentric_subdivision(x);
                for k in 0..=d {
                    for ch in b.simplices(k) {
                        carriers[k].push(BarycentricSubdivision::carrier(ch));
                        meets[k].push(
                            singular
                                .iter()
                                .filter_map(|&s| BarycentricSubdivision::meet_dim(ch, s).map(|m| (s, m)))
                                .collect(),
                        );
                        let mut fs = Vec::new();
                        if k > 0 {
                            for i in 0..ch.len() {
                                let mut face = ch.clone();
                                face.remove(i);
                                let j = b.index_of(&face).expect("faces of chains are chains");
                                fs.push((j, if i % 2 == 0 { 1 } else { -1 }));
                            }
                        }
                        facets[k].push(fs);
                    }
                }
                Pieces { structure, carriers, meets, facets, chains: Some(b) }
            }
        }
    }

    pub fn top(&self) -> usize {
        self.carriers.len().saturating_sub(1)
    }

    pub fn count(&self, k: usize) -> usize {
        self.carriers.get(k).map_or(0, Vec::len)
    }

    pub fn carrier(&self, k: usize, i: usize) -> usize {
        self.carriers[k][i]
    }

    pub fn meets(&self, k: usize, i: usize) -> &[(usize, usize)] {
        &self.meets[k][i]
    }

    pub fn facets(&self, k: usize, i: usize) -> &[(usize, i64)] {
        &self.facets[k][i]
    }

    /// The defining chain of a barycentric piece.
    pub fn chain(&self, k: usize, i: usize) -> Option<&[usize]> {
        self.chains.as_ref().map(|b| b.simplices(k)[i].as_slice())
    }
}

fn place(m: &mut QMat, r0: usize, c0: usize, block: &QMat, sign: i64) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            let v = block.get(i, j);
            if v.is_zero() {
                continue;
            }
            let cur = m.get(r0 + i, c0 + j).clone();
            m.set(r0 + i, c0 + j, if sign > 0 { cur + v } else { cur - v });
        }
    }
}

type AllowedKey = (usize, usize, Vec<(usize, usize)>);

/// Cellular chains `C_{p,•}` with coefficients in `F_{p,w}` on a chosen cell
/// structure, together with the allowability data.
pub struct CellularChains<'a> {
    x: &'a CompactifiedCellComplex,
    sys: PwSystem<'a>,
    pieces: Pieces,
    offsets: Vec<Vec<usize>>,
    complex: ChainComplexQ,
    allowed_cache: Mutex<HashMap<AllowedKey, Subspace>>,
}

impl<'a> CellularChains<'a> {
    pub fn new(x: &'a CompactifiedCellComplex, p: usize, structure: Structure) -> Result<Self, IhError> {
        Self::with_lift(x, p, structure, LiftChoice::Canonical)
    }

    pub fn with_lift(x: &'a CompactifiedCellComplex, p: usize, structure: Structure, lift: LiftChoice) -> Result<Self, IhError> {
        let sys = PwSystem::new(x, p, lift)?;
        let pieces = Pieces::new(x, structure);
        let top = pieces.top();
        let mut offsets = Vec::with_capacity(top + 1);
        let mut dims = Vec::with_capacity(top + 1);
        for k in 0..=top {
            let mut o = Vec::with_capacity(pieces.count(k) + 1);
            let mut acc = 0;
            for i in 0..pieces.count(k) {
                o.push(acc);
                acc += sys.space(pieces.carrier(k, i)).dim();
            }
            o.push(acc);
            offsets.push(o);
            dims.push(acc);
        }
        let maps: Vec<QMat> = (0..=top)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    return Ok(QMat::zeros(dims[0], 0));
                }
                let mut m = QMat::zeros(dims[k], dims[k - 1]);
                for i in 0..pieces.count(k) {
                    let c = pieces.carrier(k, i);
                    for &(j, sign) in pieces.facets(k, i) {
                        let fc = pieces.carrier(k - 1, j);
                        let block = if fc == c { QMat::identity(sys.space(c).dim()) } else { sys.iota(c, fc)? };
                        place(&mut m, offsets[k][i], offsets[k - 1][j], &block, sign);
                    }
                }
                Ok(m)
            })
            .collect::<Result<_, IhError>>()?;
        let complex = ChainComplexQ::new(Grading::Homological, dims, maps)?;
        Ok(CellularChains { x, sys, pieces, offsets, complex, allowed_cache: Mutex::new(HashMap::new()) })
    }

    pub fn complex(&self) -> &ChainComplexQ {
        &self.complex
    }

    pub fn pieces(&self) -> &Pieces {
        &self.pieces
    }

    pub fn system(&self) -> &PwSystem<'a> {
        &self.sys
    }

    pub fn offset(&self, k: usize, i: usize) -> usize {
        self.offsets[k][i]
    }

    fn piece_allowed(&self, k: usize, i: usize) -> Result<Subspace, IhError> {
        let key = (self.pieces.carrier(k, i), k, self.pieces.meets(k, i).to_vec());
        if let Some(s) = self.allowed_cache.lock().expect("cache").get(&key) {
            return Ok(s.clone());
        }
        let s = self.sys.allowed_piece(key.0, k, &key.2)?;
        self.allowed_cache.lock().expect("cache").insert(key, s.clone());
        Ok(s)
    }

    /// `A_q`: chains whose every piece is allowed, in the coordinates of `C_q`.
    pub fn allowed(&self, k: usize) -> Result<Subspace, IhError> {
        let n = self.complex.dims[k];
        let mut rows = Vec::new();
        for i in 0..self.pieces.count(k) {
            let a = self.piece_allowed(k, i)?;
            let off = self.offsets[k][i];
            for r in 0..a.dim() {
                let mut v = vec![Rational::zero(); n];
                for (j, c) in a.basis().row(r).iter().enumerate() {
                    v[off + j] = c.clone();
                }
                rows.push(v);
            }
        }
        Ok(Subspace::span(n, rows))
    }

    /// `IC_q = A_q ∩ ∂^{-1}(A_{q−1})`.
    pub fn ic(&self, k: usize) -> Result<Subspace, IhError> {
        let a = self.allowed(k)?;
        if k == 0 || a.is_zero() {
            return Ok(a);
        }
        let below = self.allowed(k - 1)?;
        let ann = below.annihilator();
        if ann.is_zero() {
            return Ok(a);
        }
        let bd = a.basis().mul(&self.complex.maps[k]);
        let m = bd.mul(&ann.basis().transpose());
        let l = m.left_kernel();
        if l.rows() == 0 {
            return Ok(Subspace::zero(a.ambient_dim()));
        }
        Ok(Subspace::row_span(&l.mul(a.basis())))
    }

    /// The allowable subcomplex, in the canonical bases of each `IC_q`.
    pub fn ic_complex(&self) -> Result<ChainComplexQ, IhError> {
        let top = self.pieces.top();
        let ics: Vec<Subspace> = (0..=top).into_par_iter().map(|k| self.ic(k)).collect::<Result<_, _>>()?;
        let dims: Vec<usize> = ics.iter().map(Subspace::dim).collect();
        let mut maps = Vec::with_capacity(top + 1);
        for k in 0..=top {
            if k == 0 {
                maps.push(QMat::zeros(dims[0], 0));
                continue;
            }
            let img = ics[k].basis().mul(&self.complex.maps[k]);
            // Coordinates in the RREF basis of IC_{k-1} are read off its pivots.
            maps.push(img.select_cols(ics[k - 1].pivots()));
            debug_assert!((0..img.rows()).all(|r| ics[k - 1].contains(img.row(r))));
        }
        ChainComplexQ::new(Grading::Homological, dims, maps)
    }

    pub fn is_allowable(&self, k: usize, chain: &[Rational]) -> Result<bool, IhError> {
        Ok(self.ic(k)?.contains(chain))
    }

    pub fn is_closed(&self, k: usize, chain: &[Rational]) -> bool {
        if k == 0 {
            return true;
        }
        self.complex.maps[k].vec_mul(chain).iter().all(Zero::is_zero)
    }

    /// `[X] = Σ_P w_P · 1_{Λ^d Tan_Z P}`, oriented piece by piece.
    pub fn fundamental_class(&self) -> Result<Vec<Rational>, IhError> {
        let x = self.x;
        let d = x.d();
        if self.sys.p() != d {
            return Err(CoeffError::DegreeOutOfRange { p: self.sys.p(), d }.into());
        }
        let mut out = vec![Rational::zero(); self.complex.dims[d]];
        for i in 0..self.pieces.count(d) {
            let top = self.pieces.carrier(d, i);
            let own = x.free_rays(top);
            let sign = match self.pieces.structure {
                Structure::Native => 1,
                Structure::Barycentric => simplex_orientation(x, top, self.pieces.chain(d, i).expect("chain")),
            };
            let (coord, s) = self.sys.monomial(top, &own).expect("top monomial");
            let mut g = vec![Rational::zero(); self.sys.global_dim()];
            g[coord] = q(x.weight(top) * i64::from(s) * sign);
            let local = self.sys.space(top).space.project(&g)?;
            for (j, c) in local.into_iter().enumerate() {
                out[self.offsets[d][i] + j] = c;
            }
        }
        Ok(out)
    }
}

/// Sign of the simplex spanned by the barycenters of `chain` inside the cube
/// of `top`, relative to the free-ray orientation of `top`.
fn simplex_orientation(x: &CompactifiedCellComplex, top: usize, chain: &[usize]) -> i64 {
    let f = x.cycle().fan();
    let own = x.free_rays(top);
    let bary = |c: usize| -> Vec<Rational> {
        let cell = x.cell(c);
        own.iter()
            .map(|r| {
                if f.cone(cell.tau).contains(r) {
                    q(2)
                } else if f.cone(cell.sigma).contains(r) {
                    q(1)
                } else {
                    q(0)
                }
            })
            .collect()
    };
    let b0 = bary(chain[0]);
    let rows: Vec<Vec<Rational>> = chain[1..]
        .iter()
        .map(|&c| bary(c).iter().zip(&b0).map(|(a, b)| a - b).collect())
        .collect();
    let det = QMat::from_rows(own.len(), rows).det();
    if det.is_positive() {
        1
    } else if det.is_negative() {
        -1
    } else {
        0
    }
}

pub fn chain_complex(x: &CompactifiedCellComplex, p: usize, structure: Structure) -> Result<ChainComplexQ, IhError> {
    Ok(CellularChains::new(x, p, structure)?.complex)
}

pub fn ic_complex(x: &CompactifiedCellComplex, p: usize, structure: Structure) -> Result<ChainComplexQ, IhError> {
    CellularChains::new(x, p, structure)?.ic_complex()
}

/// `dim IH_{p,q}` for `q = 0..=d`.
pub fn ih_homology(x: &CompactifiedCellComplex, p: usize, structure: Structure) -> Result<Vec<usize>, IhError> {
    Ok(ic_complex(x, p, structure)?.homology_dims())
}

/// Cohomological labels: `IH^{d−p, d−q} = IH_{p,q}`.
pub fn ih_table(x: &CompactifiedCellComplex, structure: Structure) -> Result<DimensionTable, IhError> {
    let d = x.d();
    let rows: Vec<Vec<usize>> = (0..=d).into_par_iter().map(|p| ih_homology(x, p, structure)).collect::<Result<_, _>>()?;
    let mut t = DimensionTable::new(d);
    for (p, row) in rows.iter().enumerate() {
        for (qd, &n) in row.iter().enumerate() {
            t.set(d - p, d - qd, n);
        }
    }
    Ok(t)
}

/// Cellular cochains with coefficients in the IKMZ system `F^p`.
pub fn cochain_complex(x: &CompactifiedCellComplex, p: usize, structure: Structure) -> Result<ChainComplexQ, IhError> {
    let d = x.d();
    let sys = IkmzSystem::new(x, p);
    let pieces = Pieces::new(x, structure);
    let top = pieces.top();
    if p > d {
        return Ok(ChainComplexQ::zero(Grading::Cohomological, top));
    }
    let mut offsets = Vec::with_capacity(top + 1);
    let mut dims = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let mut o = Vec::new();
        let mut acc = 0;
        for i in 0..pieces.count(k) {
            o.push(acc);
            acc += sys.space(pieces.carrier(k, i)).dim();
        }
        offsets.push(o);
        dims.push(acc);
    }
    let maps: Vec<QMat> = (0..=top)
        .into_par_iter()
        .map(|k| {
            if k == top {
                return Ok(QMat::zeros(dims[k], 0));
            }
            let mut m = QMat::zeros(dims[k], dims[k + 1]);
            for i in 0..pieces.count(k + 1) {
                let c = pieces.carrier(k + 1, i);
                for &(j, sign) in pieces.facets(k + 1, i) {
                    let fc = pieces.carrier(k, j);
                    let block = if fc == c { QMat::identity(sys.space(c).dim()) } else { sys.restriction(fc, c)? };
                    place(&mut m, offsets[k][j], offsets[k + 1][i], &block, sign);
                }
            }
            Ok(m)
        })
        .collect::<Result<_, IhError>>()?;
    ChainComplexQ::new(Grading::Cohomological, dims, maps)
}

/// `dim H^{p,q}` for `q = 0..=d`.
pub fn tropical_cohomology(x: &CompactifiedCellComplex, p: usize, structure: Structure) -> Result<Vec<usize>, IhError> {
    if p > x.d() {
        return Ok(vec![0; x.d() + 1]);
    }
    Ok(cochain_complex(x, p, structure)?.homology_dims())
}

pub fn hcoh_table(x: &CompactifiedCellComplex, structure: Structure) -> Result<DimensionTable, IhError> {
    let d = x.d();
    let rows: Vec<Vec<usize>> =
        (0..=d).into_par_iter().map(|p| tropical_cohomology(x, p, structure)).collect::<Result<_, _>>()?;
    let mut t = DimensionTable::new(d);
    for (p, row) in rows.iter().enumerate() {
        for (qd, &n) in row.iter().enumerate() {
            t.set(p, qd, n);
        }
    }
    Ok(t)
}

/// The fundamental class and whether it is closed and allowable.
#[derive(Clone, Debug)]
pub struct FundamentalClass {
    pub structure: Structure,
    pub chain: Vec<Rational>,
    pub support: usize,
    pub closed: bool,
    pub allowable: bool,
}

pub fn fundamental_class(x: &CompactifiedCellComplex, structure: Structure) -> Result<FundamentalClass, IhError> {
    let d = x.d();
    let cc = CellularChains::new(x, d, structure)?;
    let chain = cc.fundamental_class()?;
    let support = (0..cc.pieces.count(d))
        .filter(|&i| {
            let (a, b) = (cc.offsets[d][i], cc.offsets[d][i + 1]);
            chain[a..b].iter().any(|c| !c.is_zero())
        })
        .count();
    let closed = cc.is_closed(d, &chain);
    let allowable = cc.is_allowable(d, &chain)?;
    Ok(FundamentalClass { structure, chain, support, closed, allowable })
}

/// Two tables and the first entry where they disagree.
#[derive(Clone, Debug, Serialize)]
pub struct TableComparison {
    pub left: DimensionTable,
    pub right: DimensionTable,
    pub first_difference: Option<(usize, usize, usize, usize)>,
}

impl TableComparison {
    pub fn new(left: DimensionTable, right: DimensionTable) -> Self {
        let first_difference = left.first_difference(&right);
        TableComparison { left, right, first_difference }
    }

    pub fn agree(&self) -> bool {
        self.first_difference.is_none()
    }
}

/// `dim IH^{p,q} = dim IH^{d−p,d−q}`; returns the table and the first defect.
pub fn verify_duality(x: &CompactifiedCellComplex, structure: Structure) -> Result<(DimensionTable, Option<(usize, usize)>), IhError> {
    let t = ih_table(x, structure)?;
    let defect = t.duality_defect();
    Ok((t, defect))
}

/// Native cubical versus barycentric `ih_table`.
pub fn verify_subdivision(x: &CompactifiedCellComplex) -> Result<TableComparison, IhError> {
    let (a, b) = rayon::join(|| ih_table(x, Structure::Native), || ih_table(x, Structure::Barycentric));
    Ok(TableComparison::new(a?, b?))
}
