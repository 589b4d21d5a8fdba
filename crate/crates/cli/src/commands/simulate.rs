use std::path::Path;

use ndsym_core::characteristics::sample_env;
use ndsym_core::kernel::{evaluate, parse, Expr, ParseMode, Symbol, SymbolTable};
use ndsym_numerics::export::{export, FieldMetadata};
use ndsym_numerics::{pde_residual, solve_pde, Boundary, BoundarySpec, Field, GridSpec, MaterialModel};

use crate::config::RunConfig;
use crate::error::{exit, CliError};
use crate::report::*;
use crate::Outcome;

pub const DEFAULT_D: &str = "1";
pub const DEFAULT_GAMMA: &str = "0";
pub const DEFAULT_INITIAL: &str = "cos(pi*r/2)";

pub fn default_grid() -> GridSpec {
    GridSpec { r0: 0.0, r1: 1.0, t0: 0.0, t1: 1.0, nr: 32, nt: 32, n: 0 }
}

fn expression(text: &str, table: &SymbolTable) -> Result<Expr, CliError> {
    parse(text, table, ParseMode::Strict).map_err(|e| CliError::Expression { text: text.into(), source: e })
}

/// Solve once and summarize; the field and its export metadata are returned alongside.
pub fn build(cfg: &RunConfig) -> Result<(SimulateReport, Field, FieldMetadata), CliError> {
    let table = SymbolTable::standard();
    let n = cfg.literal_n()?;
    let grid = cfg.grid_or(&default_grid(), n)?;
    let bc =
        BoundarySpec::new(cfg.left.unwrap_or(Boundary::ZeroGradient), cfg.right.unwrap_or(Boundary::Dirichlet(0.0)));
    let v = cfg.v.unwrap_or(1.0);
    let d_text = cfg.d.clone().unwrap_or_else(|| DEFAULT_D.into());
    let g_text = cfg.gamma.clone().unwrap_or_else(|| DEFAULT_GAMMA.into());
    let ic_text = cfg.initial.clone().unwrap_or_else(|| DEFAULT_INITIAL.into());
    let d = expression(&d_text, &table)?;
    let gamma = expression(&g_text, &table)?;
    let ic = expression(&ic_text, &table)?;
    let p = cfg.params()?;
    let values = p.values();
    let values: Vec<(&str, f64)> = values.iter().map(|(k, x)| (k.as_str(), *x)).collect();
    let m = MaterialModel::from_exprs("user", &d, &gamma, &values, v)?;

    let env = sample_env(&values).with("r", grid.r0);
    evaluate(&ic, &env, &table).map_err(|e| CliError::Expression { text: ic_text.clone(), source: e })?;
    let start = |r: f64| {
        let mut env = env.clone();
        env.set(&Symbol::new("r"), r);
        evaluate(&ic, &env, &table).unwrap_or(f64::NAN)
    };
    let field = solve_pde(&grid, &m, &start, &bc)?;
    let residual = pde_residual(&field, &m);
    let last = grid.nt;
    let final_max = field.final_row().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut meta = FieldMetadata::of(&field, Some(bc));
    meta.residuals.insert("pde".into(), residual.max);
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        grid: grid.clone(),
        boundary: bc,
        diffusion: d.to_string(),
        production: gamma.to_string(),
        initial: ic.to_string(),
        v,
        residual,
        final_integral: field.integral(last),
        final_max,
        files: if cfg.out.is_some() { vec!["phi.csv".into(), "phi.json".into()] } else { Vec::new() },
    };
    Ok((report, field, meta))
}

/// With an output directory, also writes `phi.csv` and its JSON sidecar.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (report, field, meta) = build(cfg)?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        export(&field, &meta, Path::new(dir), "phi")?;
    }
    Outcome::new("simulate", &report, markdown(&report), exit::OK)
}

fn markdown(r: &SimulateReport) -> String {
    let mut s = format!(
        "# Simulation\n\nD = `{}`, Gamma = `{}`, v = {}, start `{}`\n\nGrid: r in [{}, {}] ({} cells), t in [{}, {}] ({} steps), n = {}\n\n",
        r.diffusion, r.production, r.v, r.initial, r.grid.r0, r.grid.r1, r.grid.nr, r.grid.t0, r.grid.t1, r.grid.nt, r.grid.n
    );
    s += &format!(
        "Final integral {:.6e}, final max |phi| {:.6e}, discrete residual {:.3e}\n",
        r.final_integral, r.final_max, r.residual.max
    );
    if !r.files.is_empty() {
        s += &format!("\nWrote {}\n", r.files.join(", "));
    }
    s
}
