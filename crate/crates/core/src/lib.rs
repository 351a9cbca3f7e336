//! Alternating gradient descent (AGD) for asymmetric low-rank matrix
//! factorization, `min ½‖XYᵀ − A‖_F²` over `X ∈ ℝ^{m×d}`, `Y ∈ ℝ^{n×d}`,
//! started from an unbalanced random initialization with `X₀` in the column
//! space of `A`.
//!
//! Modules:
//!
//! - [`linalg`]: dense matrices, Jacobi SVD and seeded Gaussian sampling
//! - [`objective`]: loss, gradients, residuals and diagnostics
//! - [`init`]: the unbalanced initialization and two baselines
//! - [`theory`]: closed-form constants (`ρ`, `β`, `δ`, step caps, budgets)
//! - [`agd`]: the iteration with runtime invariant monitors
//! - [`synth`]: synthetic targets with prescribed spectra
//! - [`harness`]: experiment drivers, CSV output and the verification suite
//!
//! The `examples/` directory has one runnable program per capability.

pub mod agd;
pub mod error;
pub mod harness;
pub mod init;
pub mod linalg;
pub mod objective;
pub mod synth;
pub mod theory;

pub use agd::{agd_step, run, AgdConfig, IterationStats, Monitor, MonitorMode, Termination, TrajectoryRecord};
pub use error::{Error, Result};
pub use init::{initialize, InitConfig, InitScheme};
pub use linalg::{DenseMatrix, Rng};
pub use objective::Problem;
pub use synth::SpectrumSpec;
