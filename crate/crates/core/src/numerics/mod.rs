//! Dense complex linear algebra and quadrature shared by the rest of the
//! crate. Nothing in here knows about antennas or cells.

mod cholesky;
mod matrix;
mod quadrature;

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};
use thiserror::Error;

pub use cholesky::{hermitian_solve, is_positive_semidefinite, Cholesky};
pub use matrix::CMatrix;
pub use quadrature::{
    integrate_complex, integrate_complex_many, GaussLegendre, QuadratureRule, QuadratureSpec,
    DEFAULT_ABS_TOL, MIN_NODES,
};

/// Real scalar usable by the numeric kernels: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must have at least one row and column, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("entry count {len} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, len: usize },
    #[error("matrix is not Hermitian (max asymmetry {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive definite: non-positive pivot at index {pivot}")]
    NotPositiveDefinite { pivot: usize },
    #[error("integrand is not finite at node {node}")]
    NonFinite { node: f64 },
    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("quadrature did not reach tolerance with {nodes} nodes (last change {change:e})")]
    NotConverged { nodes: usize, change: f64 },
}
