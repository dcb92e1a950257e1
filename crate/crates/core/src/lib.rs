//! Fourier spectral solvers for parabolic PDEs and SPDEs on uniform grids with
//! non-periodic boundaries.
//!
//! Two spectral methods are provided alongside a finite-difference baseline:
//!
//! - **FSD** (Fourier spectral derivative): the Laplacian is evaluated by a
//!   fast sine/cosine transform, multiplied by `-k²`, and transformed back,
//!   inside an iterated midpoint stepper.
//! - **FIP** (Fourier interaction picture): the Laplacian is propagated
//!   exactly in spectral space with `exp(-D k² τ)` and the remaining terms are
//!   integrated with the midpoint rule.
//!
//! Inhomogeneous Dirichlet/Neumann boundaries are handled by subtracting a
//! low-order polynomial patch so the remainder satisfies homogeneous
//! conditions, which the DST/DCT bases satisfy exactly.
//!
//! Fields are complex arrays with layout `[component, K_1, ..., K_d]`.

pub mod boundaries;
pub mod integrator;
pub mod lattice;
pub mod metrics;
pub mod operators;
pub mod problems;
pub mod selftest;
pub mod tables;
pub mod transforms;

use ndarray::ArrayD;
use num_complex::Complex64;

pub use num_complex::Complex64 as C64;

/// Complex lattice field, layout `[component, K_1, ..., K_d]`.
pub type Field = ArrayD<Complex64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid transform plan: {0}")]
    InvalidPlan(String),
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid boundary specification: {0}")]
    InvalidBoundary(String),
    #[error("periodic boundaries need no patch")]
    NoPatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("solution diverged at step {step} (t = {time})")]
    Diverged { step: usize, time: f64 },
    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
