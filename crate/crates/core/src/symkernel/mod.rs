//! Exact algebra: rational functions in the model parameters, polynomials in
//! the derivative symbol `D`, and matrices over them.

pub mod expr;
pub mod hermite;
pub mod matrix;
pub mod mpoly;
pub mod oppoly;
pub mod oprat;
pub mod param;

pub use hermite::{hermite_form, hermite_reduce, HermiteRow};
pub use matrix::{normalize_vector, Entry, OpMatrix};
pub use mpoly::MPoly;
pub use oppoly::OpPoly;
pub use oprat::OpRat;
pub use param::ParamRat;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("substituting {param} = {value} makes a denominator vanish")]
    SingularSubstitution { param: String, value: String },
    #[error("no numeric value bound for parameter '{0}'")]
    UnboundParameter(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// Kernel composition `a(D) delta * b(D) delta = (a b)(D) delta`.
pub fn op_mul(a: &OpPoly, b: &OpPoly) -> OpPoly {
    a * b
}

pub fn op_adjoint(p: &OpPoly) -> OpPoly {
    p.adjoint()
}

pub fn mat_det<T: Entry>(m: &OpMatrix<T>) -> Result<OpRat, SymError> {
    m.det()
}

pub fn mat_inverse<T: Entry>(m: &OpMatrix<T>) -> Result<OpMatrix<OpRat>, SymError> {
    m.inverse()
}

pub fn mat_kernel<T: Entry>(m: &OpMatrix<T>) -> Result<Vec<Vec<OpPoly>>, SymError> {
    if !m.is_square() {
        return Err(SymError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.left_kernel())
}
