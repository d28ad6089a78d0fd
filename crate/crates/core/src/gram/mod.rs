//! Monomial bases, Gram matrices, and the coefficient-matching system `A y = b`
//! linking a Gram matrix to the polynomial it represents.

mod basis;
mod matrix;
mod system;

pub use basis::{full_basis, support_restricted_basis, MonomialBasis, DEFAULT_BASIS_CAP};
pub use matrix::{gram_to_float_poly, gram_to_poly, GramNumeric, GramRational};
pub use system::{matching_system, project_coordinates, project_onto_affine, LinearSystem};

use crate::poly::Monomial;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GramError {
    #[error("basis of length {size} exceeds the cap {cap}")]
    BasisTooLarge { size: usize, cap: usize },
    #[error("polynomial has odd total degree {0}")]
    OddDegree(u32),
    #[error("monomial {0} is not a product of two basis monomials")]
    Inexpressible(Monomial),
    #[error("constraint for monomial {0} contradicts earlier rows")]
    Inconsistent(Monomial),
    #[error("constraint rows are rank deficient after removing dependent rows")]
    RankDeficient,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("duplicate basis monomial {0}")]
    DuplicateMonomial(Monomial),
}
