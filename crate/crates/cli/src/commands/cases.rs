use ndsym_core::characteristics::{case, enumerate_cases, CaseResult, MaterialSolution, NUMERIC_TOLERANCE};
use ndsym_core::kernel::SymbolTable;

use crate::config::RunConfig;
use crate::error::{exit, CliError};
use crate::report::*;
use crate::Outcome;

pub const DEFAULT_POINTS: usize = 1000;

pub fn build(cfg: &RunConfig) -> Result<CasesReport, CliError> {
    let table = SymbolTable::standard();
    let points = cfg.points.unwrap_or(DEFAULT_POINTS);
    let tol = cfg.tol.unwrap_or(NUMERIC_TOLERANCE);
    let seed = cfg.seed();
    let results = match cfg.case_id()? {
        Some(id) => case(id, &table, points, seed)?.into_iter().collect(),
        None => enumerate_cases(&table, points, seed)?,
    };
    let cases: Vec<CaseRow> = results.iter().map(|c| row(c, tol, &table)).collect();
    let status = if cases.iter().all(|c| c.passed) { Status::Passed } else { Status::Failed };
    Ok(CasesReport { schema_version: SCHEMA_VERSION, command: "cases", seed, points, tolerance: tol, cases, status })
}

fn solution(s: &MaterialSolution) -> SolutionRow {
    SolutionRow {
        expr: s.expr.to_string(),
        argument: s.argument.as_ref().map(|a| a.to_string()),
        arbitrary: s.arbitrary.clone(),
        conditions: s.conditions.clone(),
        branch: s.branch,
        label: s.label(),
    }
}

fn row(c: &CaseResult, tol: f64, table: &SymbolTable) -> CaseRow {
    let fields = [&c.diffusion_pde.field, &c.production_pde.field];
    let checks: Vec<CheckRow> = c
        .checks
        .iter()
        .zip(fields)
        .map(|(b, field)| CheckRow {
            field: field.clone(),
            symbolic: b.symbolic,
            numeric_max: b.numeric_max,
            points: b.points,
            verdict: b.verdict.clone(),
            passed: b.passed() && b.numeric_max <= tol,
        })
        .collect();
    CaseRow {
        id: c.id.to_string(),
        conditions: c.constraints.clone(),
        diffusion_equation: c.diffusion_pde.describe(table),
        production_equation: c.production_pde.describe(table),
        diffusion: solution(&c.diffusion),
        production: solution(&c.production),
        coincides_with: c.coincides_with.clone(),
        notes: c.notes.clone(),
        passed: checks.iter().all(|k| k.passed),
        checks,
        reference: c
            .reference
            .iter()
            .map(|(field, printed, v)| ReferenceRow {
                field: field.clone(),
                printed: printed.clone(),
                back_substitution: *v,
            })
            .collect(),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = build(cfg)?;
    let code = if report.status == Status::Passed { exit::OK } else { exit::FAILED };
    Outcome::new("cases", &report, markdown(&report), code)
}

fn markdown(r: &CasesReport) -> String {
    let mut s = format!(
        "# Material cases\n\n{} point(s) per numeric check, tolerance {:e}, seed {}\n\n",
        r.points, r.tolerance, r.seed
    );
    s += "| case | conditions | D | Gamma | back-substitution |\n|---|---|---|---|---|\n";
    for c in &r.cases {
        s += &format!(
            "| {} | {} | `{}` | `{}` | {} |\n",
            c.id,
            c.conditions.join(", "),
            c.diffusion.expr,
            c.production.expr,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    let noted: Vec<&CaseRow> = r.cases.iter().filter(|c| !c.notes.is_empty()).collect();
    if !noted.is_empty() {
        s += "\n## Notes\n\n";
        for c in noted {
            for n in &c.notes {
                s += &format!("- {}: {}\n", c.id, n);
            }
        }
    }
    s += &format!("\nStatus: {}\n", super::derive::status_text(r.status));
    s
}
