use std::collections::BTreeMap;

use ndsym_core::isovector::{audit_against_reference, extract_determining, AuditStatus, Generator};
use ndsym_core::kernel::{canonical_equation, canonical_hash, SymbolTable, ZeroVerdict};

use crate::config::RunConfig;
use crate::error::{exit, CliError};
use crate::report::*;
use crate::Outcome;

pub fn build(cfg: &RunConfig) -> Result<DeriveReport, CliError> {
    let table = SymbolTable::standard();
    let geometry = cfg.geometry()?;
    let sys = extract_determining(geometry, &table)?;
    let audit = audit_against_reference(&sys, &table)?;
    let checks = sys.sufficiency(&table)?;

    let constraints = sys
        .constraint_strings()
        .into_iter()
        .zip(sys.constraint_equations())
        .map(|(text, e)| Equation { text, canonical_hash: canonical_hash(&canonical_equation(&e)) })
        .collect();
    let material = sys
        .material
        .iter()
        .map(|m| MaterialEquation {
            field: m.field.name().to_string(),
            equation: format!("{} = 0", m.equation),
            canonical_hash: canonical_hash(&m.equation),
        })
        .collect();
    let residuals = sys
        .residuals
        .iter()
        .zip(&sys.classified)
        .map(|(r, c)| ResidualRow {
            source: r.provenance.source.clone(),
            basis: r.provenance.basis.clone(),
            monomial: r.provenance.monomial.clone(),
            raw: r.raw.to_string(),
            disposition: c.disposition.label(),
            reduced: c.reduced.to_string(),
        })
        .collect();
    let branches: Vec<BranchRow> = sys
        .branches()
        .iter()
        .zip(&checks)
        .map(|(b, c)| {
            let count = |v: ZeroVerdict| c.verdicts.iter().filter(|x| **x == v).count();
            BranchRow {
                label: b.label.clone(),
                zeros: b.zeros.iter().map(|s| s.name().to_string()).collect(),
                residuals: c.verdicts.len(),
                zero: count(ZeroVerdict::Zero),
                nonzero: count(ZeroVerdict::Nonzero),
                unknown: count(ZeroVerdict::Unknown),
            }
        })
        .collect();
    let entries = audit
        .entries
        .iter()
        .map(|e| AuditRow {
            id: e.id.clone(),
            printed: e.printed.clone(),
            canonical: e.canonical.to_string(),
            canonical_hash: canonical_hash(&e.canonical),
            status: e.status,
            matched: e.matched.as_ref().map(|m| m.to_string()),
            remainder: e.remainder.to_string(),
            note: e.note.clone(),
        })
        .collect();
    let forms = audit
        .forms
        .iter()
        .map(|f| FormRow {
            id: f.id.clone(),
            matches: f.matches(),
            deltas: f.deltas.iter().map(|(b, d)| (b.clone(), d.to_string())).collect(),
        })
        .collect();
    let counts = audit_counts(audit.entries.iter().map(|e| e.status));

    let unknown = audit.unknown_verdicts + branches.iter().map(|b| b.unknown).sum::<usize>();
    let sufficient = unknown == 0 && checks.iter().all(|c| c.all_zero());
    let strict = cfg.strict_reference.unwrap_or(false);
    let strict_failed = strict && audit.entries.iter().any(|e| strict_violation(e.status));
    let status = if !sufficient {
        Status::Failed
    } else if strict_failed {
        Status::StrictAuditFailed
    } else {
        Status::Passed
    };
    let multipliers: BTreeMap<String, String> =
        sys.multipliers().into_iter().map(|(k, v)| (k, v.to_string())).collect();

    Ok(DeriveReport {
        schema_version: SCHEMA_VERSION,
        command: "derive",
        geometry: geometry.label(),
        seed: cfg.seed(),
        generator: Generator::standard().describe(),
        final_generator: sys.final_generator.describe(),
        multipliers,
        multipliers_free_of_w: sys.multipliers_free_of_w(),
        constraints,
        material,
        assumptions: sys.assumptions.clone(),
        residuals,
        branches,
        audit: AuditSection {
            entries,
            forms,
            dependency: audit.dependency,
            unknown_verdicts: audit.unknown_verdicts,
            counts,
        },
        sufficient,
        strict_reference: strict,
        status,
    })
}

fn strict_violation(s: AuditStatus) -> bool {
    matches!(s, AuditStatus::NotDerivable | AuditStatus::Discrepant)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = build(cfg)?;
    let code = match report.status {
        Status::Passed => exit::OK,
        Status::Failed => exit::FAILED,
        Status::StrictAuditFailed => exit::STRICT_AUDIT,
    };
    let diagnostics = if report.status == Status::StrictAuditFailed {
        report
            .audit
            .entries
            .iter()
            .filter(|e| strict_violation(e.status))
            .map(|e| format!("audit {}: {} [{}] {}", e.id, e.printed, e.status.label(), e.note))
            .collect()
    } else {
        Vec::new()
    };
    Ok(Outcome::new("derive", &report, markdown(&report), code)?.with_diagnostics(diagnostics))
}

fn markdown(r: &DeriveReport) -> String {
    let mut s = format!("# Determining system (geometry {})\n\n", r.geometry);
    s += &format!("Final generator: `{}`\n\n## Constraints\n\n", r.final_generator);
    for c in &r.constraints {
        s += &format!("- `{}`\n", c.text);
    }
    s += "\n## Material equations\n\n";
    for m in &r.material {
        s += &format!("- {}: `{}`\n", m.field, m.equation);
    }
    s += "\n## Audit of reference equations\n\n| id | status | printed |\n|---|---|---|\n";
    for e in &r.audit.entries {
        s += &format!("| {} | {} | `{}` |\n", e.id, e.status.label(), e.printed);
    }
    s += &format!(
        "\nDependency check: {:?}. Inconclusive zero tests: {}.\n",
        r.audit.dependency, r.audit.unknown_verdicts
    );
    for f in &r.audit.forms {
        if f.matches {
            s += &format!("Form expansion {}: matches\n", f.id);
        } else {
            let d: Vec<String> = f.deltas.iter().map(|(b, x)| format!("{b}: `{x}`")).collect();
            s += &format!("Form expansion {}: printed - derived = {}\n", f.id, d.join("; "));
        }
    }
    s += &format!(
        "\nSufficiency on {} branch(es): {}\n",
        r.branches.len(),
        if r.sufficient { "all residuals vanish" } else { "FAILED" }
    );
    s += &format!("\nStatus: {}\n", status_text(r.status));
    s
}

pub(crate) fn status_text(s: Status) -> &'static str {
    match s {
        Status::Passed => "passed",
        Status::Failed => "FAILED",
        Status::StrictAuditFailed => "strict audit FAILED",
    }
}
