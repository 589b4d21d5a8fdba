//! `ndsym`: derive the determining system of the neutron diffusion equation,
//! enumerate its material cases, and verify the results numerically.
//!
//! Exit codes: 0 success, 1 invalid input, 2 derivation or verification
//! failure, 3 strict audit failure (`derive --strict-reference`).

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ndsym_numerics::{Boundary, TransformMap};
use serde::Serialize;

use config::{parse_boundary, GeometryValue, GridConfig, RunConfig};
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "ndsym", version, about = "Symmetry analysis of the one-dimensional neutron diffusion equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every randomized check.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance override (numeric back-substitution for `cases`, finest residuals for `verify`).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for the JSON report (and CSV output of `simulate`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config; explicit flags take precedence over its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the JSON report instead of the Markdown summary.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive and audit the determining equations.
    Derive(DeriveArgs),
    /// Enumerate the material cases and back-substitute their closed forms.
    Cases(CasesArgs),
    /// Closure, material residuals, invariance, property and solver checks.
    Verify(VerifyArgs),
    /// Solve the diffusion equation for given materials and export the field.
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Derive(_) => "derive",
            Command::Cases(_) => "cases",
            Command::Verify(_) => "verify",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    /// Geometry: symbolic, 0, 1 or 2.
    #[arg(long)]
    pub n: Option<String>,
    /// Exit 3 if a reference equation is not derivable or discrepant.
    #[arg(long, alias = "strict-paper")]
    pub strict_reference: bool,
}

#[derive(Debug, Args)]
pub struct CasesArgs {
    /// Single case A-F.
    #[arg(long)]
    pub case: Option<String>,
    /// Random points per numeric back-substitution.
    #[arg(long)]
    pub points: Option<usize>,
}

fn parse_map(s: &str) -> Result<TransformMap, String> {
    match s {
        "printed" => Ok(TransformMap::Printed),
        "flow" => Ok(TransformMap::Flow),
        _ => Err(format!("expected 'printed' or 'flow', got '{s}'")),
    }
}

#[derive(Debug, Default, Args)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a4: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a5: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a6: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a7: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a8: Option<f64>,
    /// Group parameter of the finite transformation.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Finite maps: printed (default) or flow.
    #[arg(long, value_parser = parse_map)]
    pub map: Option<TransformMap>,
}

#[derive(Debug, Default, Args)]
pub struct GridArgs {
    /// Geometry 0, 1 or 2.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    /// Neutron speed.
    #[arg(long)]
    pub v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check that the generator preserves the contact condition.
    #[arg(long)]
    pub closure: bool,
    /// Case A-F for material residuals (and invariance with --invariance).
    #[arg(long)]
    pub case: Option<String>,
    /// Run the invariance refinement study for --case.
    #[arg(long)]
    pub invariance: bool,
    /// Cells of the coarsest invariance grid.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Number of joint mesh halvings.
    #[arg(long)]
    pub refine: Option<usize>,
    /// Time-exponent shift of the symmetry-breaking control (0 disables).
    #[arg(long, allow_hyphen_values = true)]
    pub control: Option<f64>,
    /// Run the exterior-algebra property suite.
    #[arg(long)]
    pub properties: bool,
    /// Trials per property.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Run the manufactured-solution and exponential-growth solver checks.
    #[arg(long)]
    pub solver: bool,
    /// Arbitrary function G of xi for the case materials.
    #[arg(long)]
    pub g: Option<String>,
    /// Arbitrary function F of xi for the case materials.
    #[arg(long)]
    pub f: Option<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Diffusion coefficient D(r, t).
    #[arg(long)]
    pub d: Option<String>,
    /// Net production Gamma(r, t).
    #[arg(long)]
    pub gamma: Option<String>,
    /// Start profile phi(r) at t0.
    #[arg(long)]
    pub initial: Option<String>,
    /// Left boundary: zero-gradient or a Dirichlet value.
    #[arg(long, value_parser = parse_boundary, allow_hyphen_values = true)]
    pub left: Option<Boundary>,
    /// Right boundary: zero-gradient or a Dirichlet value.
    #[arg(long, value_parser = parse_boundary, allow_hyphen_values = true)]
    pub right: Option<Boundary>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

fn geometry(n: Option<String>) -> Option<GeometryValue> {
    n.map(|s| s.parse().map(GeometryValue::Literal).unwrap_or(GeometryValue::Text(s)))
}

impl ParamArgs {
    fn apply(self, c: RunConfig) -> RunConfig {
        RunConfig {
            a1: self.a1,
            a2: self.a2,
            a3: self.a3,
            a4: self.a4,
            a5: self.a5,
            a6: self.a6,
            a7: self.a7,
            a8: self.a8,
            eps: self.eps,
            map: self.map,
            ..c
        }
    }
}

impl GridArgs {
    fn apply(self, c: RunConfig) -> RunConfig {
        let g = GridConfig { r0: self.r0, r1: self.r1, t0: self.t0, t1: self.t1, nr: self.nr, nt: self.nt };
        let grid = (g != GridConfig::default()).then_some(g);
        RunConfig { n: geometry(self.n), grid, v: self.v, ..c }
    }
}

impl Cli {
    /// Explicit flags as a partial config.
    pub fn flags(self) -> (Option<PathBuf>, &'static str, RunConfig) {
        let name = self.command.name();
        let base =
            RunConfig { seed: self.seed, tol: self.tol, out: self.out, json: flag(self.json), ..RunConfig::default() };
        let cfg = match self.command {
            Command::Derive(a) => RunConfig { n: geometry(a.n), strict_reference: flag(a.strict_reference), ..base },
            Command::Cases(a) => RunConfig { case: a.case, points: a.points, ..base },
            Command::Verify(a) => {
                let c = RunConfig {
                    closure: flag(a.closure),
                    case: a.case,
                    invariance: flag(a.invariance),
                    cells: a.cells,
                    refine: a.refine,
                    control: a.control,
                    properties: flag(a.properties),
                    trials: a.trials,
                    solver: flag(a.solver),
                    g: a.g,
                    f: a.f,
                    ..base
                };
                a.grid.apply(a.params.apply(c))
            }
            Command::Simulate(a) => {
                let c = RunConfig { d: a.d, gamma: a.gamma, initial: a.initial, left: a.left, right: a.right, ..base };
                a.grid.apply(a.params.apply(c))
            }
        };
        (self.config, name, cfg)
    }
}

/// Result of one command: the JSON report, its Markdown summary, the exit
/// code and diagnostics for stderr.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub command: &'static str,
    pub json: String,
    pub markdown: String,
    pub code: u8,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    pub fn new<R: Serialize>(command: &'static str, report: &R, markdown: String, code: u8) -> Result<Self, CliError> {
        let mut json = serde_json::to_string_pretty(report)?;
        json.push('\n');
        Ok(Outcome { command, json, markdown, code, diagnostics: Vec::new() })
    }

    pub fn with_diagnostics(mut self, diagnostics: Vec<String>) -> Self {
        self.diagnostics = diagnostics;
        self
    }
}

/// Merge the config file under the flags and run the command.
pub fn execute(cli: Cli) -> Result<(RunConfig, Outcome), CliError> {
    let (path, name, flags) = cli.flags();
    let cfg = match path {
        Some(p) => flags.over(RunConfig::load(&p)?),
        None => flags,
    };
    cfg.check_command(name)?;
    let outcome = match name {
        "derive" => commands::derive::run(&cfg)?,
        "cases" => commands::cases::run(&cfg)?,
        "verify" => commands::verify::run(&cfg)?,
        _ => commands::simulate::run(&cfg)?,
    };
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.json", outcome.command)), &outcome.json)?;
    }
    Ok((cfg, outcome))
}

/// Parse arguments (including the program name) and run.
pub fn run_args<I, T>(args: I) -> Result<(RunConfig, Outcome), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    execute(cli)
}
