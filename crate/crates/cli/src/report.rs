//! Serializable reports. Expressions are carried as printed strings, equations
//! additionally as the SHA-256 of their canonical form; maps are ordered so
//! the JSON output is byte-stable.

use std::collections::BTreeMap;

use ndsym_core::characteristics::SolutionBranch;
use ndsym_core::isovector::AuditStatus;
use ndsym_core::kernel::ZeroVerdict;
use ndsym_core::properties::PropertyOutcome;
use ndsym_numerics::grid::BoundarySpec;
use ndsym_numerics::invariance::InvarianceReport;
use ndsym_numerics::mms::ConvergenceReport;
use ndsym_numerics::solver::ResidualSummary;
use ndsym_numerics::{GridSpec, MaterialResidual, TransformParams};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equation {
    pub text: String,
    pub canonical_hash: String,
}

// derive

#[derive(Clone, Debug, Serialize)]
pub struct DeriveReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub geometry: String,
    pub seed: u64,
    pub generator: String,
    pub final_generator: String,
    pub multipliers: BTreeMap<String, String>,
    pub multipliers_free_of_w: bool,
    pub constraints: Vec<Equation>,
    pub material: Vec<MaterialEquation>,
    pub assumptions: Vec<String>,
    pub residuals: Vec<ResidualRow>,
    pub branches: Vec<BranchRow>,
    pub audit: AuditSection,
    /// Every residual vanishes on every branch with no inconclusive zero test.
    pub sufficient: bool,
    pub strict_reference: bool,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaterialEquation {
    pub field: String,
    pub equation: String,
    pub canonical_hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub source: String,
    pub basis: String,
    pub monomial: String,
    pub raw: String,
    pub disposition: &'static str,
    pub reduced: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchRow {
    pub label: String,
    pub zeros: Vec<String>,
    pub residuals: usize,
    pub zero: usize,
    pub nonzero: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSection {
    pub entries: Vec<AuditRow>,
    pub forms: Vec<FormRow>,
    /// Zero test of the r-derivative of `diffusion-reduced` minus `gradient-reduced`.
    pub dependency: ZeroVerdict,
    pub unknown_verdicts: usize,
    pub counts: BTreeMap<&'static str, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub id: String,
    pub printed: String,
    pub canonical: String,
    pub canonical_hash: String,
    pub status: AuditStatus,
    pub matched: Option<String>,
    pub remainder: String,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FormRow {
    pub id: String,
    pub matches: bool,
    /// Basis to (printed - derived) coefficient.
    pub deltas: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Passed,
    Failed,
    StrictAuditFailed,
}

// cases

#[derive(Clone, Debug, Serialize)]
pub struct CasesReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub points: usize,
    pub tolerance: f64,
    pub cases: Vec<CaseRow>,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseRow {
    pub id: String,
    /// Validity conditions of the case.
    pub conditions: Vec<String>,
    pub diffusion_equation: String,
    pub production_equation: String,
    pub diffusion: SolutionRow,
    pub production: SolutionRow,
    pub coincides_with: Vec<String>,
    pub notes: Vec<String>,
    pub checks: Vec<CheckRow>,
    pub reference: Vec<ReferenceRow>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionRow {
    pub expr: String,
    pub argument: Option<String>,
    pub arbitrary: String,
    pub conditions: Vec<String>,
    pub branch: SolutionBranch,
    pub label: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub field: String,
    pub symbolic: ZeroVerdict,
    pub numeric_max: f64,
    pub points: usize,
    pub verdict: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReferenceRow {
    pub field: String,
    pub printed: String,
    pub back_substitution: ZeroVerdict,
}

// verify

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub closure: Option<ClosureSection>,
    pub material: Option<MaterialSection>,
    pub invariance: Option<InvarianceSection>,
    pub properties: Option<PropertiesSection>,
    pub solver: Option<SolverSection>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureSection {
    pub multiplier: String,
    pub residual: String,
    pub verdict: ZeroVerdict,
    pub message: String,
    /// The same check with the generator's D_r component replaced by 0.
    pub mutation_residual: String,
    pub mutation_verdict: ZeroVerdict,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaterialSection {
    pub case: String,
    pub diffusion: String,
    pub production: String,
    pub params: TransformParams,
    pub grid: GridSpec,
    pub residual: MaterialResidual,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceSection {
    pub case: String,
    pub problem: &'static str,
    pub boundary: BoundarySpec,
    pub study: InvarianceReport,
    pub ratio_target: f64,
    pub ratio_tolerance: f64,
    pub ratios_within: bool,
    pub tolerance: f64,
    pub finest_within: bool,
    pub control: Option<ControlSection>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ControlSection {
    pub exponent_shift: f64,
    pub study: InvarianceReport,
    /// Finest mutated residual over finest unmutated residual.
    pub separation: f64,
    pub plateaus: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertiesSection {
    pub trials: usize,
    pub outcomes: Vec<PropertyOutcome>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverSection {
    pub manufactured: ConvergenceReport,
    pub order_target: f64,
    pub order_tolerance: f64,
    pub order_within: bool,
    pub growth: GrowthCheck,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthCheck {
    pub geometries: Vec<u32>,
    pub v: f64,
    pub gamma: f64,
    pub t: f64,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

// simulate

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub grid: GridSpec,
    pub boundary: BoundarySpec,
    pub diffusion: String,
    pub production: String,
    pub initial: String,
    pub v: f64,
    pub residual: ResidualSummary,
    pub final_integral: f64,
    pub final_max: f64,
    pub files: Vec<String>,
}

/// Ordered counts of each audit status.
pub fn audit_counts(statuses: impl Iterator<Item = AuditStatus>) -> BTreeMap<&'static str, usize> {
    let mut out: BTreeMap<&'static str, usize> =
        [AuditStatus::Reproduced, AuditStatus::Implied, AuditStatus::NotDerivable, AuditStatus::Discrepant]
            .iter()
            .map(|s| (s.label(), 0))
            .collect();
    for s in statuses {
        *out.entry(s.label()).or_default() += 1;
    }
    out
}

pub fn material_residual_ok(r: &MaterialResidual, tol: f64) -> bool {
    r.res_d <= tol && r.res_gamma <= tol
}
