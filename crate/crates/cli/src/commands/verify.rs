use ndsym_core::characteristics::{case, CaseResult};
use ndsym_core::isovector::{closure_check, Generator};
use ndsym_core::kernel::{parse, substitute, Bindings, Expr, Lambda, ParseMode, SymbolKind, SymbolTable};
use ndsym_core::properties::exterior_suite;
use ndsym_numerics::invariance::problem_for;
use ndsym_numerics::material::perturb_time_exponent;
use ndsym_numerics::mms::manufactured_convergence;
use ndsym_numerics::{
    material_residual, refinement_study, solve_pde, Boundary, BoundarySpec, GridSpec, MaterialModel, TransformParams,
};

use crate::config::RunConfig;
use crate::error::{exit, CliError};
use crate::report::*;
use crate::Outcome;

pub const MATERIAL_TOLERANCE: f64 = 1e-6;
pub const INVARIANCE_TOLERANCE: f64 = 1e-4;
pub const RATIO_TARGET: f64 = 4.0;
pub const RATIO_TOLERANCE: f64 = 0.3;
pub const CONTROL_SHIFT: f64 = 0.1;
pub const CONTROL_SEPARATION: f64 = 10.0;
pub const DEFAULT_TRIALS: usize = 300;
pub const DEFAULT_CELLS: usize = 16;
pub const DEFAULT_REFINE: usize = 3;
pub const ORDER_TARGET: f64 = 2.0;
pub const ORDER_TOLERANCE: f64 = 0.2;
pub const GROWTH_TOLERANCE: f64 = 1e-6;

/// Grid for material residuals unless overridden.
pub fn default_material_grid() -> GridSpec {
    GridSpec { r0: 0.0, r1: 2.0, t0: 0.5, t1: 1.5, nr: 64, nt: 64, n: 0 }
}

pub fn build(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let table = SymbolTable::standard();
    let case_id = cfg.case_id()?;
    let closure = cfg.closure.unwrap_or(false);
    let invariance = cfg.invariance.unwrap_or(false);
    let properties = cfg.properties.unwrap_or(false);
    let solver = cfg.solver.unwrap_or(false);
    if !(closure || case_id.is_some() || properties || solver) {
        return Err(CliError::Config("verify needs at least one of --closure, --case, --properties, --solver".into()));
    }
    if invariance && case_id.is_none() {
        return Err(CliError::Config("--invariance needs --case".into()));
    }
    let mut report =
        VerifyReport { schema_version: SCHEMA_VERSION, command: "verify", seed: cfg.seed(), ..Default::default() };
    if closure {
        report.closure = Some(closure_section(&table)?);
    }
    if let Some(id) = case_id {
        let c = case(id, &table, 10, cfg.seed())?.expect("validated case id");
        let p = cfg.params()?;
        let (d, gamma) = case_materials(&c, cfg, &table)?;
        report.material = Some(material_section(&c, &d, &gamma, &p, cfg)?);
        if invariance {
            report.invariance = Some(invariance_section(&c, &d, &gamma, &p, cfg)?);
        }
    }
    if properties {
        let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
        let outcomes = exterior_suite(trials, cfg.seed(), &table);
        let passed = outcomes.iter().all(|o| o.passed());
        report.properties = Some(PropertiesSection { trials, outcomes, passed });
    }
    if solver {
        report.solver = Some(solver_section()?);
    }
    report.passed = report.closure.as_ref().is_none_or(|s| s.passed)
        && report.material.as_ref().is_none_or(|s| s.passed)
        && report.invariance.as_ref().is_none_or(|s| s.passed)
        && report.properties.as_ref().is_none_or(|s| s.passed)
        && report.solver.as_ref().is_none_or(|s| s.passed);
    Ok(report)
}

fn closure_section(table: &SymbolTable) -> Result<ClosureSection, CliError> {
    let ok = closure_check(&Generator::standard(), table)?;
    let broken = closure_check(&Generator::standard().with_override("D_r", Expr::zero()), table)?;
    Ok(ClosureSection {
        multiplier: ok.multiplier.to_string(),
        residual: ok.residual_string(),
        verdict: ok.verdict,
        message: if ok.passed() { "identically satisfied".into() } else { "residual does not vanish".into() },
        mutation_residual: broken.residual_string(),
        mutation_verdict: broken.verdict,
        passed: ok.passed() && !broken.passed(),
    })
}

fn user_function(text: &str, table: &SymbolTable) -> Result<Lambda, CliError> {
    let body =
        parse(text, table, ParseMode::Strict).map_err(|e| CliError::Expression { text: text.into(), source: e })?;
    Ok(Lambda::new(&["xi"], body))
}

/// Closed-form D and Gamma of a case with user G, F (functions of `xi`)
/// substituted when given; otherwise the sampled defaults stay in place.
pub fn case_materials(c: &CaseResult, cfg: &RunConfig, table: &SymbolTable) -> Result<(Expr, Expr), CliError> {
    table.declare("xi", SymbolKind::Parameter)?;
    let mut b = Bindings::new();
    if let Some(g) = &cfg.g {
        b = b.function("G", user_function(g, table)?);
    }
    if let Some(f) = &cfg.f {
        b = b.function("F", user_function(f, table)?);
    }
    if b.is_empty() {
        return Ok((c.diffusion.expr.clone(), c.production.expr.clone()));
    }
    Ok((substitute(&c.diffusion.expr, &b, table)?, substitute(&c.production.expr, &b, table)?))
}

fn model(id: &str, d: &Expr, gamma: &Expr, p: &TransformParams, v: f64) -> Result<MaterialModel, CliError> {
    let values = p.values();
    let values: Vec<(&str, f64)> = values.iter().map(|(k, x)| (k.as_str(), *x)).collect();
    Ok(MaterialModel::from_exprs(id, d, gamma, &values, v)?)
}

fn material_section(
    c: &CaseResult,
    d: &Expr,
    gamma: &Expr,
    p: &TransformParams,
    cfg: &RunConfig,
) -> Result<MaterialSection, CliError> {
    let grid = cfg.grid_or(&default_material_grid(), cfg.literal_n()?)?;
    let m = model(&format!("case-{}", c.id), d, gamma, p, cfg.v.unwrap_or(1.0))?;
    let residual = material_residual(&m, p, &grid)?;
    let tolerance = cfg.tol.unwrap_or(MATERIAL_TOLERANCE);
    Ok(MaterialSection {
        case: c.id.to_string(),
        diffusion: d.to_string(),
        production: gamma.to_string(),
        params: *p,
        grid,
        passed: material_residual_ok(&residual, tolerance),
        residual,
        tolerance,
    })
}

fn invariance_section(
    c: &CaseResult,
    d: &Expr,
    gamma: &Expr,
    p: &TransformParams,
    cfg: &RunConfig,
) -> Result<InvarianceSection, CliError> {
    let v = cfg.v.unwrap_or(1.0);
    let a1 = p.get(1);
    let problem = problem_for(cfg.cells.unwrap_or(DEFAULT_CELLS), cfg.literal_n()?, a1)?;
    let refine = cfg.refine.unwrap_or(DEFAULT_REFINE);
    let id = format!("case-{}", c.id);
    let study = refinement_study(&problem, &model(&id, d, gamma, p, v)?, p, refine)?;
    let tolerance = cfg.tol.unwrap_or(INVARIANCE_TOLERANCE);
    let ratios_within = study.ratios_within(RATIO_TARGET, RATIO_TOLERANCE);
    let finest_within = study.finest().residual <= tolerance;
    let shift = cfg.control.unwrap_or(CONTROL_SHIFT);
    let control = if shift == 0.0 {
        None
    } else {
        let delta = parse(&format!("{shift}"), &SymbolTable::standard(), ParseMode::Strict)?;
        let mutated = perturb_time_exponent(d, delta);
        let cstudy = refinement_study(&problem, &model(&format!("{id}-control"), &mutated, gamma, p, v)?, p, refine)?;
        let separation = cstudy.finest().residual / study.finest().residual;
        let plateaus = cstudy.ratios.iter().all(|q| *q < 1.5);
        Some(ControlSection {
            exponent_shift: shift,
            study: cstudy,
            separation,
            plateaus,
            passed: plateaus && separation > CONTROL_SEPARATION,
        })
    };
    let passed = ratios_within && finest_within && control.as_ref().is_none_or(|c| c.passed);
    Ok(InvarianceSection {
        case: c.id.to_string(),
        problem: if a1 == 0.0 { "desk" } else { "offset" },
        boundary: problem.bc,
        study,
        ratio_target: RATIO_TARGET,
        ratio_tolerance: RATIO_TOLERANCE,
        ratios_within,
        tolerance,
        finest_within,
        control,
        passed,
    })
}

/// Manufactured-solution order and growth of a uniform start in a medium
/// with constant Gamma, where phi = phi0 exp(v Gamma t) exactly.
fn solver_section() -> Result<SolverSection, CliError> {
    let manufactured = manufactured_convergence(&[16, 32, 64, 128], 1.0)?;
    let order_within = manufactured.within(ORDER_TARGET, ORDER_TOLERANCE);
    let (v, gamma, t) = (2.0, 0.7, 1.0);
    let bc = BoundarySpec::new(Boundary::ZeroGradient, Boundary::ZeroGradient);
    let mut worst: f64 = 0.0;
    let geometries = vec![0, 1, 2];
    for &n in &geometries {
        let g = GridSpec::new((0.0, 1.0), (0.0, t), 8, 4096, n)?;
        let m = MaterialModel::new("uniform", v, |r, t| 1.0 + r * r * (1.0 + t), move |_, _| gamma);
        let f = solve_pde(&g, &m, &|_| 1.5, &bc)?;
        let exact = 1.5 * (v * gamma * t).exp();
        for phi in f.final_row() {
            worst = worst.max(((phi - exact) / exact).abs());
        }
    }
    let growth = GrowthCheck {
        geometries,
        v,
        gamma,
        t,
        max_relative_error: worst,
        tolerance: GROWTH_TOLERANCE,
        passed: worst <= GROWTH_TOLERANCE,
    };
    let passed = order_within && growth.passed;
    Ok(SolverSection {
        manufactured,
        order_target: ORDER_TARGET,
        order_tolerance: ORDER_TOLERANCE,
        order_within,
        growth,
        passed,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = build(cfg)?;
    let code = if report.passed { exit::OK } else { exit::FAILED };
    Outcome::new("verify", &report, markdown(&report), code)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn markdown(r: &VerifyReport) -> String {
    let mut s = String::from("# Verification\n\n");
    if let Some(c) = &r.closure {
        s += &format!(
            "## Contact closure\n\n{}: residual `{}`, multiplier `{}`\n\nMutation control (D_r component set to 0): residual `{}` ({:?})\n\n",
            c.message, c.residual, c.multiplier, c.mutation_residual, c.mutation_verdict
        );
    }
    if let Some(m) = &r.material {
        s += &format!(
            "## Material residuals, case {}\n\nD: {:.3e}, Gamma: {:.3e} (tolerance {:e}): {}\n\n",
            m.case,
            m.residual.res_d,
            m.residual.res_gamma,
            m.tolerance,
            verdict(m.passed)
        );
    }
    if let Some(i) = &r.invariance {
        s += &format!("## Invariance, case {} ({} problem, eps = {})\n\n", i.case, i.problem, i.study.params.eps);
        s += "| nr | nt | residual | base residual | clipped |\n|---|---|---|---|---|\n";
        for l in &i.study.levels {
            s += &format!(
                "| {} | {} | {:.3e} | {:.3e} | {:.3} |\n",
                l.nr, l.nt, l.residual, l.base_residual, l.clipped_fraction
            );
        }
        let ratios: Vec<String> = i.study.ratios.iter().map(|q| format!("{q:.3}")).collect();
        s += &format!(
            "\nRatios: {} (target {} +- {}%): {}\n\nEps-halving ratio: {:.3}\n\nFinest residual within {:e}: {}\n",
            ratios.join(", "),
            i.ratio_target,
            i.ratio_tolerance * 100.0,
            verdict(i.ratios_within),
            i.study.eps_ratio,
            i.tolerance,
            verdict(i.finest_within)
        );
        if let Some(c) = &i.control {
            let ratios: Vec<String> = c.study.ratios.iter().map(|q| format!("{q:.3}")).collect();
            s += &format!(
                "\nControl (time exponent + {}): finest {:.3e}, {:.1}x the unmutated residual, ratios {}: {}\n",
                c.exponent_shift,
                c.study.finest().residual,
                c.separation,
                ratios.join(", "),
                verdict(c.passed)
            );
        }
        s += "\n";
    }
    if let Some(p) = &r.properties {
        s += &format!("## Exterior-algebra properties ({} trials)\n\n", p.trials);
        for o in &p.outcomes {
            s += &format!("- {}: {} failure(s): {}\n", o.name, o.failures, verdict(o.passed()));
        }
        s += "\n";
    }
    if let Some(v) = &r.solver {
        let orders: Vec<String> = v.manufactured.orders.iter().map(|q| format!("{q:.3}")).collect();
        s += &format!(
            "## Solver\n\nManufactured-solution orders: {}: {}\n\nExponential growth, max relative error {:.3e}: {}\n\n",
            orders.join(", "),
            verdict(v.order_within),
            v.growth.max_relative_error,
            verdict(v.growth.passed)
        );
    }
    s += &format!("Status: {}\n", if r.passed { "passed" } else { "FAILED" });
    s
}
