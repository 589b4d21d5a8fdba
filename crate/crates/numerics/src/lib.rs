//! Numerical side of the diffusion model: a conservative Crank-Nicolson
//! solver in planar, cylindrical and spherical geometry, material-equation
//! residuals, and invariance checks of computed solutions under the finite
//! symmetry transformations.

pub mod export;
pub mod field;
pub mod grid;
pub mod invariance;
pub mod material;
pub mod mms;
pub mod residual;
pub mod solver;
pub mod spline;
pub mod transform;

use ndsym_core::kernel::KernelError;
use thiserror::Error;

pub use field::Field;
pub use grid::{Boundary, BoundarySpec, GridSpec};
pub use invariance::{invariance_residual, refinement_study, InvarianceProblem, InvarianceReport, InvarianceSample};
pub use material::MaterialModel;
pub use residual::{material_residual, MaterialResidual};
pub use solver::{pde_residual, solve_pde};
pub use transform::{transform_field, TransformMap, TransformParams};

#[derive(Debug, Error)]
pub enum NumError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid transformation: {0}")]
    InvalidTransform(String),
    #[error("singular tridiagonal system at step {step}, row {row}")]
    Singular { step: usize, row: usize },
    #[error("non-finite flux detected at step {step}")]
    NonFinite { step: usize },
    #[error("{fraction:.3} of the transformed grid lies outside the source domain (threshold {threshold})")]
    OutOfDomain { fraction: f64, threshold: f64 },
    #[error("no value bound for '{0}'")]
    Unbound(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
