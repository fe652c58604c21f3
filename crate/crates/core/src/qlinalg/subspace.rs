use num_traits::Zero;

use super::{LinAlgError, QMat, Rational};

/// Linear subspace of `Q^n`, stored by its reduced row echelon basis.
///
/// Because the basis is canonical, two subspaces are equal iff their
/// structures are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: QMat,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: QMat::zeros(0, ambient_dim), pivots: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: QMat::identity(ambient_dim),
            pivots: (0..ambient_dim).collect(),
        }
    }

    /// Span of the rows of `m`.
    pub fn row_span(m: &QMat) -> Self {
        let (r, pivots) = m.rref();
        let basis = r.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        Subspace { ambient_dim: m.cols(), basis, pivots }
    }

    pub fn span(ambient_dim: usize, vectors: Vec<Vec<Rational>>) -> Self {
        Self::row_span(&QMat::from_rows(ambient_dim, vectors))
    }

    /// Span of a set of standard basis vectors.
    pub fn coordinate(ambient_dim: usize, coords: &[usize]) -> Self {
        let mut c = coords.to_vec();
        c.sort_unstable();
        c.dedup();
        let mut basis = QMat::zeros(c.len(), ambient_dim);
        for (i, &j) in c.iter().enumerate() {
            basis.set(i, j, Rational::from_integer(1.into()));
        }
        Subspace { ambient_dim, basis, pivots: c }
    }

    /// `{x : m x = 0}`.
    pub fn kernel_of(m: &QMat) -> Self {
        Self::row_span(&m.right_kernel())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis(&self) -> &QMat {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    /// Remainder of `v` after eliminating the pivot coordinates.
    pub fn reduce(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = v.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            if out[p].is_zero() {
                continue;
            }
            let f = out[p].clone();
            for (o, b) in out.iter_mut().zip(self.basis.row(i)) {
                if !b.is_zero() {
                    *o -= &f * b;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        assert_eq!(v.len(), self.ambient_dim);
        self.reduce(v).iter().all(Zero::is_zero)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        (0..other.dim()).all(|i| self.contains(other.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check(other)?;
        if other.is_zero() || self.is_full() {
            return Ok(self.clone());
        }
        if self.is_zero() || other.is_full() {
            return Ok(other.clone());
        }
        Ok(Self::row_span(&self.basis.vstack(&other.basis)))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check(other)?;
        if self.is_full() || other.is_zero() {
            return Ok(other.clone());
        }
        if other.is_full() || self.is_zero() {
            return Ok(self.clone());
        }
        let ann = self.annihilator().sum(&other.annihilator())?;
        Ok(ann.annihilator())
    }

    /// `{y : y·x = 0 for all x in self}` under the standard pairing.
    pub fn annihilator(&self) -> Subspace {
        if self.is_zero() {
            return Subspace::full(self.ambient_dim);
        }
        Subspace::kernel_of(&self.basis)
    }

    /// Image of the subspace under `x ↦ x·m` (row convention).
    pub fn image(&self, m: &QMat) -> Subspace {
        assert_eq!(m.rows(), self.ambient_dim);
        if self.is_zero() {
            return Subspace::zero(m.cols());
        }
        Subspace::row_span(&self.basis.mul(m))
    }

    /// Preimage `{x : x·m ∈ target}`.
    pub fn preimage(m: &QMat, target: &Subspace) -> Subspace {
        assert_eq!(m.cols(), target.ambient_dim);
        let ann = target.annihilator();
        if ann.is_zero() {
            return Subspace::full(m.rows());
        }
        Subspace::kernel_of(&ann.basis.mul(&m.transpose()))
    }

    fn check(&self, other: &Subspace) -> Result<(), LinAlgError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(LinAlgError::DimensionMismatch(self.ambient_dim, other.ambient_dim));
        }
        Ok(())
    }
}

/// Sum and intersection of two subspaces of the same ambient space.
pub fn sum_intersect(a: &Subspace, b: &Subspace) -> Result<(Subspace, Subspace), LinAlgError> {
    Ok((a.sum(b)?, a.intersect(b)?))
}

/// The quotient `ambient / killed`, with a fixed complement used for coordinates.
#[derive(Clone, Debug)]
pub struct QuotientSpace {
    ambient: Subspace,
    killed: Subspace,
    complement: QMat,
    // Columns on which [killed; complement] is invertible, and that inverse.
    solve_cols: Vec<usize>,
    solve_inv: QMat,
}

impl QuotientSpace {
    pub fn new(ambient: Subspace, killed: Subspace) -> Result<Self, LinAlgError> {
        ambient.check(&killed)?;
        if !ambient.contains_subspace(&killed) {
            return Err(LinAlgError::KilledNotContained);
        }
        let n = ambient.ambient_dim();
        let mut acc = killed.clone();
        let mut comp_rows = Vec::new();
        for i in 0..ambient.dim() {
            let v = ambient.basis.row(i);
            if !acc.contains(v) {
                comp_rows.push(v.to_vec());
                acc = Subspace::row_span(&acc.basis.vstack(&QMat::from_rows(n, vec![v.to_vec()])));
            }
        }
        let complement = QMat::from_rows(n, comp_rows);
        let full = killed.basis.vstack(&complement);
        let (_, solve_cols) = full.rref();
        let solve_inv = if full.rows() == 0 {
            QMat::zeros(0, 0)
        } else {
            full.select_cols(&solve_cols)
                .inverse()
                .expect("independent rows restricted to pivot columns are invertible")
        };
        Ok(QuotientSpace { ambient, killed, complement, solve_cols, solve_inv })
    }

    /// The whole ambient space, nothing killed.
    pub fn plain(ambient: Subspace) -> Self {
        let k = Subspace::zero(ambient.ambient_dim());
        Self::new(ambient, k).expect("zero subspace is contained in anything")
    }

    pub fn ambient(&self) -> &Subspace {
        &self.ambient
    }

    pub fn killed(&self) -> &Subspace {
        &self.killed
    }

    pub fn dim(&self) -> usize {
        self.complement.rows()
    }

    /// Rows are lifts of the chosen quotient basis.
    pub fn complement(&self) -> &QMat {
        &self.complement
    }

    /// Coordinates of the class of `v` in the quotient basis.
    pub fn project(&self, v: &[Rational]) -> Result<Vec<Rational>, LinAlgError> {
        let n = self.ambient.ambient_dim();
        if v.len() != n {
            return Err(LinAlgError::DimensionMismatch(v.len(), n));
        }
        if self.solve_cols.is_empty() {
            return if v.iter().all(Zero::is_zero) {
                Ok(Vec::new())
            } else {
                Err(LinAlgError::NotInAmbient)
            };
        }
        if !self.ambient.contains(v) {
            return Err(LinAlgError::NotInAmbient);
        }
        let restricted: Vec<Rational> = self.solve_cols.iter().map(|&c| v[c].clone()).collect();
        let coeffs = self.solve_inv.vec_mul(&restricted);
        Ok(coeffs[self.killed.dim()..].to_vec())
    }

    /// Matrix whose rows are the projections of the rows of `m`.
    ///
    /// Rows outside the ambient are projected through the same linear formula,
    /// which is only meaningful when they do lie in the ambient.
    pub fn project_rows_unchecked(&self, m: &QMat) -> QMat {
        let k = self.killed.dim();
        if self.solve_cols.is_empty() {
            return QMat::zeros(m.rows(), 0);
        }
        let cols: Vec<usize> = (k..self.solve_inv.cols()).collect();
        m.select_cols(&self.solve_cols).mul(&self.solve_inv.select_cols(&cols))
    }

    /// A representative of the class with the given coordinates.
    pub fn lift(&self, coords: &[Rational]) -> Vec<Rational> {
        assert_eq!(coords.len(), self.dim());
        self.complement.vec_mul(coords)
    }
}
