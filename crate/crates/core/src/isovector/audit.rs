use std::collections::BTreeSet;

use crate::forms::{build_mu1_printed, build_mu2, DifferentialForm, Geometry};
use crate::kernel::{
    canonical_equation, differentiate, is_zero, normalize, parse, substitute, Bindings, Expr, ParseMode, Symbol,
    SymbolTable, ZeroVerdict,
};

use super::determining::{is_parameter_only, DeterminingSystem};
use super::generator::{lie_form, Generator};
use super::jets::{jet_order, JetReducer};
use super::EngineError;

/// A printed determining equation used as reference data.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceEquation {
    pub id: &'static str,
    pub text: &'static str,
}

pub const REFERENCE_EQUATIONS: [ReferenceEquation; 10] = [
    ReferenceEquation { id: "w-translation", text: "a7 = 0" },
    ReferenceEquation { id: "w-scaling", text: "a6 - a2 - a8 = 0" },
    ReferenceEquation {
        id: "diffusion-balance",
        text: "(a1 + a2*r)*D_r + (a3 + a4*t)*D_t + (a8 + a4 - a2 - a6)*D = 0",
    },
    ReferenceEquation { id: "diffusion-translation", text: "a1*D_r = 0" },
    ReferenceEquation { id: "diffusion-gradient", text: "(a1 + a2*r)*D_rr + (a3 + a4*t)*D_rt + (a4 - a2)*D_r = 0" },
    ReferenceEquation { id: "geometry-translation", text: "n*D*a1 = 0" },
    ReferenceEquation { id: "production-balance", text: "(a1 + a2*r)*Gamma_r + (a3 + a4*t)*Gamma_t + a4*Gamma = 0" },
    ReferenceEquation { id: "flux-translation", text: "a5 = 0" },
    ReferenceEquation { id: "diffusion-reduced", text: "(a1 + a2*r)*D_r + (a3 + a4*t)*D_t = (2*a2 - a4)*D" },
    ReferenceEquation { id: "gradient-reduced", text: "(a1 + a2*r)*D_rr + (a3 + a4*t)*D_rt = (a2 - a4)*D_r" },
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatus {
    Reproduced,
    Implied,
    NotDerivable,
    Discrepant,
}

impl AuditStatus {
    pub fn label(self) -> &'static str {
        match self {
            AuditStatus::Reproduced => "reproduced",
            AuditStatus::Implied => "implied",
            AuditStatus::NotDerivable => "not-derivable",
            AuditStatus::Discrepant => "discrepant",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuditEntry {
    pub id: String,
    pub printed: String,
    pub canonical: Expr,
    pub status: AuditStatus,
    /// Engine equation that matched or whose principal part coincides.
    pub matched: Option<Expr>,
    /// What remains after reduction by the derived system.
    pub remainder: Expr,
    pub note: String,
}

/// Per-basis comparison of a printed Lie-derivative expansion with the engine's.
#[derive(Clone, Debug)]
pub struct FormAudit {
    pub id: String,
    /// (basis, printed - engine), nonzero entries only, on canonical bases.
    pub deltas: Vec<(String, Expr)>,
    pub difference: DifferentialForm,
}

impl FormAudit {
    pub fn matches(&self) -> bool {
        self.deltas.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
    pub forms: Vec<FormAudit>,
    /// `∂r(diffusion-reduced) - gradient-reduced`.
    pub dependency: ZeroVerdict,
    pub unknown_verdicts: usize,
}

impl AuditReport {
    pub fn entry(&self, id: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn count(&self, status: AuditStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }
}

/// Parse `lhs = rhs` into `lhs - rhs`.
pub fn parse_equation(text: &str, table: &SymbolTable) -> Result<Expr, EngineError> {
    let (lhs, rhs) = text.split_once('=').ok_or_else(|| EngineError::NotAnEquation(text.to_string()))?;
    let l = parse(lhs.trim(), table, ParseMode::Strict)?;
    let r = parse(rhs.trim(), table, ParseMode::Strict)?;
    Ok(normalize(&(l - r)))
}

/// Highest-order jets of a field equation; symbol set of a parameter equation.
fn principal_part(e: &Expr, table: &SymbolTable) -> BTreeSet<Symbol> {
    if is_parameter_only(e, table) {
        return e.free_symbols();
    }
    let top = jet_order(e, table);
    e.free_symbols()
        .into_iter()
        .filter(|s| {
            let one = Expr::symbol(s);
            jet_order(&one, table) == top && table.depends_on_base(s) && !table.is_coordinate(s)
        })
        .collect()
}

struct Counter(usize);

impl Counter {
    fn zero(&mut self, e: &Expr, table: &SymbolTable) -> bool {
        if e.is_zero_literal() {
            return true;
        }
        match is_zero(e, table) {
            ZeroVerdict::Zero => true,
            ZeroVerdict::Nonzero => false,
            ZeroVerdict::Unknown => {
                self.0 += 1;
                false
            }
        }
    }
}

fn reduce_on_branch(
    sys: &DeterminingSystem,
    e: &Expr,
    zeros: &[Symbol],
    table: &SymbolTable,
) -> Result<Expr, EngineError> {
    let zb = zeros.iter().fold(Bindings::new(), |b, s| b.scalar(s.name(), Expr::zero()));
    let mut reducer = JetReducer::new();
    for m in &sys.material {
        reducer.add_equation(&canonical_equation(&substitute(&m.equation, &zb, table)?), table)?;
    }
    let sigma =
        sys.substitutions
            .iter()
            .fold(zb.clone(), |b, (k, v)| if zeros.contains(k) { b } else { b.scalar(k.name(), v.clone()) });
    let e = substitute(&substitute(e, &sigma, table)?, &zb, table)?;
    Ok(canonical_equation(&reducer.reduce(&e, table)?))
}

/// Compare each printed equation against the derived system.
pub fn audit_against_reference(sys: &DeterminingSystem, table: &SymbolTable) -> Result<AuditReport, EngineError> {
    let mut counter = Counter(0);
    let pool = sys.derived_pool();
    let geometry = Bindings::new().scalar("n", sys.geometry.n());
    let mut entries = Vec::new();
    for r in REFERENCE_EQUATIONS {
        let eq = substitute(&parse_equation(r.text, table)?, &geometry, table)?;
        let canonical = canonical_equation(&eq);
        let remainder = sys.reduce(&canonical, table)?;
        let (status, matched, note) = if let Some(m) = pool.iter().find(|p| canonical_equation(p) == canonical) {
            (AuditStatus::Reproduced, Some(m.clone()), "matches a derived equation up to normalization".to_string())
        } else if counter.zero(&remainder, table) {
            (AuditStatus::Implied, None, "vanishes after eliminating t-derivatives with the material equations".into())
        } else if !sys.branches().iter().all(|b| b.zeros.is_empty())
            && sys.branches().iter().try_fold(true, |acc, b| {
                Ok::<_, EngineError>(acc && counter.zero(&reduce_on_branch(sys, &canonical, &b.zeros, table)?, table))
            })?
        {
            (AuditStatus::Implied, None, "vanishes on every branch of the product constraints".into())
        } else {
            let pp = principal_part(&canonical, table);
            match pool.iter().find(|p| principal_part(p, table) == pp) {
                Some(m) => {
                    (AuditStatus::Discrepant, Some(m.clone()), "same principal part as a derived equation".into())
                }
                None => (
                    AuditStatus::NotDerivable,
                    None,
                    format!("not forced by the derived system; remainder {remainder} = 0"),
                ),
            }
        };
        entries.push(AuditEntry {
            id: r.id.into(),
            printed: r.text.into(),
            canonical,
            status,
            matched,
            remainder,
            note,
        });
    }
    let reduced = parse_equation(REFERENCE_EQUATIONS[8].text, table)?;
    let gradient = parse_equation(REFERENCE_EQUATIONS[9].text, table)?;
    let dependency = is_zero(&(differentiate(&reduced, &Symbol::new("r"), table)? - gradient), table);
    if dependency == ZeroVerdict::Unknown {
        counter.0 += 1;
    }
    let forms = form_audits(sys.geometry, table)?;
    Ok(AuditReport { entries, forms, dependency, unknown_verdicts: counter.0 })
}

fn printed_form(terms: &[(&str, &[&str])], table: &SymbolTable) -> Result<DifferentialForm, EngineError> {
    let mut out = DifferentialForm::zero(2);
    for (text, basis) in terms {
        out = out.add(&DifferentialForm::term(parse(text, table, ParseMode::Strict)?, basis));
    }
    Ok(out)
}

/// Printed expansion of the balance-form Lie derivative, term by term.
pub fn printed_balance_expansion(table: &SymbolTable) -> Result<DifferentialForm, EngineError> {
    printed_form(
        &[
            ("(1/v)*((a1 + a2*r) + r*(a6 + a2))", &["phi", "r"]),
            ("n*D*(a6 + a4)", &["phi", "t"]),
            ("n*((a1 + a2*r)*D_r + (a3 + a4*t)*D_t)", &["phi", "t"]),
            ("D_r*(a1 + a2*r)", &["phi", "t"]),
            ("r*((a1 + a2*r)*D_rr + (a3 + a4*t)*D_rt)", &["phi", "t"]),
            ("D_r*((a1 + a2*r) + r*(a6 + a4))", &["phi", "t"]),
            ("r*((a1 + a2*r)*D_r + (a3 + a4*t)*D_t)", &["w", "t"]),
            ("D*((a1 + a2*r) + r*(a8 + a4))", &["w", "t"]),
            ("r*phi*((a1 + a2*r)*Gamma_r + (a3 + a4*t)*Gamma_t)", &["t", "r"]),
            ("Gamma*phi*((a1 + a2*r) + r*(a4 + a2))", &["t", "r"]),
            ("Gamma*r*(a5 + a6*phi)", &["t", "r"]),
        ],
        table,
    )
}

/// Printed simplified contact-form Lie derivative.
pub fn printed_contact_expansion(table: &SymbolTable) -> Result<DifferentialForm, EngineError> {
    printed_form(&[("a7 + a8*w", &["t", "r"]), ("(a4 + a2)*w", &["t", "r"]), ("a6 + a4", &["t", "r"])], table)
}

fn delta(id: &str, printed: &DifferentialForm, engine: &DifferentialForm) -> FormAudit {
    let diff = printed.sub(engine);
    let deltas = diff.terms().map(|(b, c)| (b.to_string(), c.clone())).collect();
    FormAudit { id: id.into(), deltas, difference: diff }
}

/// Printed expansions checked against the term-by-term Lie derivative.
pub fn form_audits(geometry: Geometry, table: &SymbolTable) -> Result<Vec<FormAudit>, EngineError> {
    let chi = Generator::standard();
    let n = Bindings::new().scalar("n", geometry.n());
    let balance_engine = lie_form(&chi, &build_mu1_printed(Geometry::Symbolic).scale(&Expr::sym("r")), table)?
        .map_coefficients(|c| substitute(c, &n, table))?;
    let balance_printed = printed_balance_expansion(table)?.map_coefficients(|c| substitute(c, &n, table))?;
    let contact_engine = lie_form(&chi, &build_mu2(), table)?;
    Ok(vec![
        delta("balance-expansion", &balance_printed, &balance_engine),
        delta("contact-expansion", &printed_contact_expansion(table)?, &contact_engine),
    ])
}
