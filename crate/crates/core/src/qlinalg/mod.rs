//! Exact rational and integer linear algebra.
//!
//! Everything downstream (coefficient spaces, chain complexes, Chow groups) is
//! expressed through the types here. There is no floating point anywhere.

mod exterior;
mod lattice;
mod matrix;
mod subspace;

pub use exterior::{contraction, sort_sign, subsets, wedge_vectors, ExteriorIndex};
pub use lattice::{
    content, integer_kernel_basis, is_unimodular, lattice_coordinates, primitive_vector,
    LatticeError,
};
pub use matrix::QMat;
pub use subspace::{sum_intersect, QuotientSpace, Subspace};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exact rational number, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_zero(x: &Rational) -> bool {
    x.is_zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// Integer vector promoted to rationals.
pub fn to_q_vec(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}

/// Errors raised by the linear algebra kernel.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("vector is not in the ambient space")]
    NotInAmbient,
    #[error("killed subspace is not contained in the ambient subspace")]
    KilledNotContained,
}
