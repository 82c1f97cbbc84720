//! Self-contained numeric backbone.
//!
//! Everything here is written from scratch on purpose — the crate carries no
//! external numerical dependency. The pieces are the classical workhorses:
//!
//! * [`dense`] — complex Householder tridiagonalization + implicit-shift QL
//!   for dense Hermitian matrices (dimension ≤ [`dense::DENSE_DIM_LIMIT`]);
//! * [`tri`] — the real symmetric tridiagonal QL kernel and inverse iteration
//!   for selected eigenvectors;
//! * [`banded`] — complex banded LU with partial pivoting (fill bounded by
//!   twice the bandwidth) for resolvent solves;
//! * [`power`] — power iteration on a Gram map for operator norms, with a
//!   fixed seed so every run is reproducible.

pub mod banded;
pub mod dense;
pub mod power;
pub mod tri;

use thiserror::Error;

/// Default seed for every randomized start in this module.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("QL iteration failed to converge at eigenvalue index {index} after {iters} sweeps")]
    ConvergenceFailure { index: usize, iters: usize },
    #[error("exactly singular pivot in column {col} of banded LU")]
    SingularPivot { col: usize },
    #[error("dense eigensolver limited to dimension {limit}, got {dim}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("inverse iteration produced residual {residual:.3e} above {tol:.3e} for eigenvalue {lambda}")]
    BadResidual { lambda: f64, residual: f64, tol: f64 },
    #[error("matrix is not square: {rows} rows, {cols} cols in row {row}")]
    NotSquare { rows: usize, cols: usize, row: usize },
}
