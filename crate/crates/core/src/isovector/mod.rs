//! Lie derivatives of the exterior system under the translation/scaling
//! generator, ideal reduction, determining equations and their audit.

pub mod audit;
pub mod closure;
pub mod determining;
pub mod generator;
pub mod jets;
pub mod reduce;

pub use audit::{audit_against_reference, AuditEntry, AuditReport, AuditStatus, FormAudit, REFERENCE_EQUATIONS};
pub use closure::{closure_check, ClosureReport};
pub use determining::{
    extract_determining, extract_with, specialize_geometry, Branch, BranchCheck, DeterminingSystem, Disposition,
    MaterialPde, ProductConstraint, Provenance, ResidualEquation,
};
pub use generator::{lie_form, lie_scalar, Generator};
pub use jets::JetReducer;
pub use reduce::{ideal_reduce, split_monomials, IdealElement, MultiplierSolve};

use thiserror::Error;

use crate::kernel::KernelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("structurally zero pivot for {generator} on {basis}")]
    ZeroPivot { generator: String, basis: String },
    #[error("residual coefficient is not polynomial in phi and w: {0}")]
    NotPolynomial(String),
    #[error("zero test inconclusive in {context}: {expr}")]
    UnknownVerdict { context: String, expr: String },
    #[error("t-derivative elimination did not terminate: {0}")]
    JetReductionDiverged(String),
    #[error("constraint closure did not reach a fixed point")]
    NoFixedPoint,
    #[error("expected `lhs = rhs`, got {0:?}")]
    NotAnEquation(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
