use std::collections::{BTreeMap, BTreeSet};

use crate::forms::{build_mu2, build_r_mu1, Geometry};
use crate::kernel::{
    canonical_equation, is_zero, normalize, solve_linear, strip_content, substitute, Bindings, Expr, Symbol,
    SymbolKind, SymbolTable, ZeroVerdict,
};

use super::generator::{lie_form, Generator};
use super::jets::{jet_order, JetReducer};
use super::reduce::{ideal_reduce, split_monomials, IdealElement, MultiplierSolve};
use super::EngineError;

const MAX_ROUNDS: usize = 8;

/// Where a residual equation came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    /// `r*mu1` or `mu2`.
    pub source: String,
    pub basis: String,
    /// Monomial in phi and w whose coefficient this is.
    pub monomial: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualEquation {
    pub provenance: Provenance,
    pub raw: Expr,
    pub canonical: Expr,
}

/// What became of a residual equation once the system was closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Disposition {
    /// Vanishes under the parameter substitutions alone.
    Satisfied,
    /// Equation in the generator constants only.
    Parameter,
    /// First-order evolution equation for a material function.
    Material,
    /// Vanishes after eliminating t-derivatives with the material equations.
    Implied,
    /// Reduces to a new equation in the generator constants and geometry.
    Constraint,
    /// Field equation that could not be reduced further.
    Leftover,
}

impl Disposition {
    pub fn label(self) -> &'static str {
        match self {
            Disposition::Satisfied => "satisfied",
            Disposition::Parameter => "parameter",
            Disposition::Material => "material",
            Disposition::Implied => "implied",
            Disposition::Constraint => "constraint",
            Disposition::Leftover => "leftover",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classified {
    pub disposition: Disposition,
    /// Canonical form after all substitutions and jet elimination.
    pub reduced: Expr,
}

/// A branch of a product constraint: the listed constants vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub label: String,
    pub zeros: Vec<Symbol>,
}

/// Nonlinear constraint such as `n*a1 = 0`, kept as a disjunction.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductConstraint {
    /// With field factors retained (`n*a1*D`).
    pub equation: Expr,
    pub canonical: Expr,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialPde {
    pub field: Symbol,
    pub equation: Expr,
}

#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub geometry: Geometry,
    pub generator: Generator,
    pub final_generator: Generator,
    pub solves: Vec<(String, MultiplierSolve)>,
    pub residuals: Vec<ResidualEquation>,
    pub classified: Vec<Classified>,
    /// Linear solution for the generator constants.
    pub substitutions: BTreeMap<Symbol, Expr>,
    pub products: Vec<ProductConstraint>,
    pub material: Vec<MaterialPde>,
    pub assumptions: Vec<String>,
    pub reducer: JetReducer,
}

pub fn unknowns() -> Vec<Symbol> {
    (1..=8).map(|i| Symbol::new(&format!("a{i}"))).collect()
}

/// True if `e` mentions no coordinate, field or jet.
pub fn is_parameter_only(e: &Expr, table: &SymbolTable) -> bool {
    e.free_symbols().iter().all(|s| {
        !matches!(table.kind(s), Some(SymbolKind::Coordinate) | Some(SymbolKind::Field) | Some(SymbolKind::Jet { .. }))
    })
}

fn bindings(map: &BTreeMap<Symbol, Expr>) -> Bindings {
    map.iter().fold(Bindings::new(), |b, (k, v)| b.scalar(k.name(), v.clone()))
}

/// The ideal `{r mu1, mu2}` with the pivots used for multiplier matching.
pub fn ideal(geometry: Geometry) -> Vec<IdealElement> {
    vec![
        IdealElement::new("r*mu1", build_r_mu1(geometry), &["phi", "r"]),
        IdealElement::new("mu2", build_mu2(), &["phi", "t"]),
    ]
}

/// Lie derivatives of both ideal generators reduced modulo the ideal.
pub fn multiplier_solves(
    geometry: Geometry,
    chi: &Generator,
    table: &SymbolTable,
) -> Result<Vec<(String, MultiplierSolve)>, EngineError> {
    let ideal = ideal(geometry);
    ideal.iter().map(|g| Ok((g.label.clone(), ideal_reduce(&lie_form(chi, &g.form, table)?, &ideal)?))).collect()
}

/// Residual coefficients split by basis and by monomials in phi and w.
pub fn raw_residuals(solves: &[(String, MultiplierSolve)]) -> Result<Vec<ResidualEquation>, EngineError> {
    let mut out = Vec::new();
    for (source, solve) in solves {
        for (basis, coef) in solve.residual.terms() {
            for (monomial, part) in split_monomials(coef, &["phi", "w"])? {
                out.push(ResidualEquation {
                    provenance: Provenance { source: source.clone(), basis: basis.to_string(), monomial },
                    canonical: canonical_equation(&part),
                    raw: part,
                });
            }
        }
    }
    Ok(out)
}

/// Run the full derivation with the standard generator.
pub fn extract_determining(geometry: Geometry, table: &SymbolTable) -> Result<DeterminingSystem, EngineError> {
    extract_with(geometry, &Generator::standard(), table)
}

pub fn extract_with(
    geometry: Geometry,
    chi: &Generator,
    table: &SymbolTable,
) -> Result<DeterminingSystem, EngineError> {
    let solves = multiplier_solves(geometry, chi, table)?;
    let residuals = raw_residuals(&solves)?;
    close(geometry, chi, solves, residuals, table)
}

fn nonzero(e: &Expr, table: &SymbolTable, context: &str) -> Result<bool, EngineError> {
    if e.is_zero_literal() {
        return Ok(false);
    }
    match is_zero(e, table) {
        ZeroVerdict::Nonzero => Ok(true),
        ZeroVerdict::Zero => Ok(false),
        ZeroVerdict::Unknown => Err(EngineError::UnknownVerdict { context: context.to_string(), expr: e.to_string() }),
    }
}

/// Close the raw residual set: solve for constants, collect evolution
/// equations, eliminate t-jets from the rest, and repeat until stable.
pub fn close(
    geometry: Geometry,
    chi: &Generator,
    solves: Vec<(String, MultiplierSolve)>,
    residuals: Vec<ResidualEquation>,
    table: &SymbolTable,
) -> Result<DeterminingSystem, EngineError> {
    let unknowns = unknowns();
    let mut params: Vec<Expr> = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let sol = solve_linear(&params, &unknowns);
        let sigma = bindings(&sol.solved);
        let mut staged = Vec::new();
        let mut reducer = JetReducer::new();
        let mut material = Vec::new();
        for eq in &residuals {
            let e = canonical_equation(&substitute(&eq.raw, &sigma, table)?);
            let context = format!("{} {} [{}]", eq.provenance.source, eq.provenance.basis, eq.provenance.monomial);
            let disposition = if !nonzero(&e, table, &context)? {
                Some(Disposition::Satisfied)
            } else if is_parameter_only(&e, table) {
                Some(Disposition::Parameter)
            } else if jet_order(&e, table) <= 1 && reducer.add_equation(&e, table)? {
                let field = super::jets::single_field(&e, table).expect("evolution equation has a field");
                material.push(MaterialPde { field, equation: e.clone() });
                Some(Disposition::Material)
            } else {
                None
            };
            staged.push((e, disposition, context));
        }
        let mut classified = Vec::new();
        for (e, disposition, context) in staged {
            classified.push(match disposition {
                Some(d) => Classified { disposition: d, reduced: e },
                None => {
                    let reduced = reducer.reduce(&e, table)?;
                    let keep_r = strip_content(&reduced, &[Symbol::new("r")]);
                    let c = canonical_equation(&reduced);
                    if !nonzero(&c, table, &context)? {
                        Classified { disposition: Disposition::Implied, reduced: Expr::zero() }
                    } else if is_parameter_only(&c, table) {
                        Classified { disposition: Disposition::Constraint, reduced: keep_r }
                    } else {
                        Classified { disposition: Disposition::Leftover, reduced: c }
                    }
                }
            });
        }
        let mut new_params = Vec::new();
        for c in &classified {
            let p = match c.disposition {
                Disposition::Parameter => c.reduced.clone(),
                Disposition::Constraint => canonical_equation(&c.reduced),
                _ => continue,
            };
            if !params.contains(&p) {
                new_params.push(p);
            }
        }
        if new_params.is_empty() {
            let products = product_constraints(&classified, &sol.residual, table);
            let final_generator = chi.specialize(&sigma, table)?;
            return Ok(DeterminingSystem {
                geometry,
                generator: chi.clone(),
                final_generator,
                solves,
                residuals,
                classified,
                substitutions: sol.solved,
                products,
                material,
                assumptions: vec!["D != 0".into(), "Gamma not identically 0".into()],
                reducer,
            });
        }
        params.extend(new_params);
    }
    Err(EngineError::NoFixedPoint)
}

fn product_constraints(classified: &[Classified], nonlinear: &[Expr], table: &SymbolTable) -> Vec<ProductConstraint> {
    let mut out: Vec<ProductConstraint> = Vec::new();
    for eq in nonlinear {
        let canonical = canonical_equation(eq);
        if out.iter().any(|p| p.canonical == canonical) {
            continue;
        }
        let equation = classified
            .iter()
            .filter(|c| c.disposition == Disposition::Constraint)
            .map(|c| c.reduced.clone())
            .find(|r| canonical_equation(r) == canonical)
            .unwrap_or_else(|| canonical.clone());
        let terms = canonical.terms();
        let branches = if terms.len() == 1 {
            canonical
                .free_symbols()
                .into_iter()
                .filter(|s| table.kind(s) == Some(SymbolKind::Parameter))
                .map(|s| Branch { label: format!("{s} = 0"), zeros: vec![s] })
                .collect()
        } else {
            Vec::new()
        };
        out.push(ProductConstraint { equation, canonical, branches });
    }
    out
}

/// Outcome of imposing one branch of the constraint set on every residual.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchCheck {
    pub label: String,
    pub verdicts: Vec<ZeroVerdict>,
}

impl BranchCheck {
    pub fn all_zero(&self) -> bool {
        self.verdicts.iter().all(|v| *v == ZeroVerdict::Zero)
    }
}

impl DeterminingSystem {
    /// Derived constraints as equations `lhs - rhs` (linear ones first).
    pub fn constraint_equations(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = self.substitutions.iter().map(|(k, v)| normalize(&(Expr::symbol(k) - v))).collect();
        out.extend(self.products.iter().map(|p| p.equation.clone()));
        out
    }

    /// Human-readable constraints (`a8 = a6 - a2`, `n*a1*D = 0`).
    pub fn constraint_strings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.substitutions.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        out.extend(self.products.iter().map(|p| format!("{} = 0", p.equation)));
        out
    }

    /// All branches of the disjunctive constraints (a single unconditional
    /// branch when there are none).
    pub fn branches(&self) -> Vec<Branch> {
        let mut acc: Vec<Branch> = vec![Branch { label: "all".into(), zeros: Vec::new() }];
        for p in &self.products {
            if p.branches.is_empty() {
                continue;
            }
            let mut next = Vec::new();
            for a in &acc {
                for b in &p.branches {
                    let mut zeros = a.zeros.clone();
                    zeros.extend(b.zeros.iter().cloned());
                    let label = if a.zeros.is_empty() { b.label.clone() } else { format!("{}, {}", a.label, b.label) };
                    next.push(Branch { label, zeros });
                }
            }
            acc = next;
        }
        acc
    }

    /// Impose a branch and eliminate jets: every residual must vanish identically.
    pub fn check_branch(&self, branch: &Branch, table: &SymbolTable) -> Result<BranchCheck, EngineError> {
        let zeros: Bindings = branch.zeros.iter().fold(Bindings::new(), |b, s| b.scalar(s.name(), Expr::zero()));
        let mut sigma = BTreeMap::new();
        for (k, v) in &self.substitutions {
            sigma.insert(k.clone(), substitute(v, &zeros, table)?);
        }
        for z in &branch.zeros {
            sigma.insert(z.clone(), Expr::zero());
        }
        let sigma = bindings(&sigma);
        let mut reducer = JetReducer::new();
        for m in &self.material {
            let e = canonical_equation(&substitute(&m.equation, &zeros, table)?);
            reducer.add_equation(&e, table)?;
        }
        let mut verdicts = Vec::new();
        for eq in &self.residuals {
            let e = reducer.reduce(&substitute(&eq.raw, &sigma, table)?, table)?;
            verdicts.push(is_zero(&e, table));
        }
        Ok(BranchCheck { label: branch.label.clone(), verdicts })
    }

    pub fn sufficiency(&self, table: &SymbolTable) -> Result<Vec<BranchCheck>, EngineError> {
        self.branches().iter().map(|b| self.check_branch(b, table)).collect()
    }

    /// Order-independent fingerprint of the closed system, for comparing derivations.
    pub fn signature(&self) -> SystemSignature {
        let set = |it: Vec<String>| it.into_iter().collect::<BTreeSet<_>>();
        SystemSignature {
            raw: set(self
                .residuals
                .iter()
                .filter(|r| !r.canonical.is_zero_literal())
                .map(|r| r.canonical.to_string())
                .collect()),
            constraints: set(self.constraint_strings()),
            material: set(self.material.iter().map(|m| format!("{}: {}", m.field, m.equation)).collect()),
        }
    }

    /// Multipliers keyed `lambda1..lambda4`.
    pub fn multipliers(&self) -> Vec<(String, Expr)> {
        self.solves
            .iter()
            .flat_map(|(_, s)| s.multipliers.iter().map(|(_, m)| m.clone()))
            .enumerate()
            .map(|(i, m)| (format!("lambda{}", i + 1), m))
            .collect()
    }

    pub fn multipliers_free_of_w(&self) -> bool {
        self.solves.iter().all(|(_, s)| s.multipliers_free_of("w"))
    }

    /// Equations the derivation rests on: every non-vacuous residual in its
    /// canonical form, the linear constraints, product constraints and material PDEs.
    pub fn derived_pool(&self) -> Vec<Expr> {
        let mut pool: Vec<Expr> = self.residuals.iter().map(|r| r.canonical.clone()).collect();
        pool.extend(self.constraint_equations().iter().map(canonical_equation));
        pool.extend(self.material.iter().map(|m| m.equation.clone()));
        pool.retain(|e| !e.is_zero_literal());
        pool
    }

    /// Apply the linear substitutions and eliminate t-jets.
    pub fn reduce(&self, e: &Expr, table: &SymbolTable) -> Result<Expr, EngineError> {
        let sigma = bindings(&self.substitutions);
        Ok(canonical_equation(&self.reducer.reduce(&substitute(e, &sigma, table)?, table)?))
    }
}

/// Comparable summary of a determining system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSignature {
    pub raw: BTreeSet<String>,
    pub constraints: BTreeSet<String>,
    pub material: BTreeSet<String>,
}

/// Re-close a symbolic-geometry derivation after substituting a literal `n`.
pub fn specialize_geometry(
    sys: &DeterminingSystem,
    n: u8,
    table: &SymbolTable,
) -> Result<DeterminingSystem, EngineError> {
    let b = Bindings::new().scalar("n", Expr::int(n as i64));
    let mut solves = Vec::new();
    for (label, s) in &sys.solves {
        let multipliers = s
            .multipliers
            .iter()
            .map(|(k, m)| Ok((k.clone(), substitute(m, &b, table)?)))
            .collect::<Result<Vec<_>, EngineError>>()?;
        let residual = s.residual.map_coefficients(|c| substitute(c, &b, table))?;
        solves.push((label.clone(), MultiplierSolve { multipliers, residual }));
    }
    let residuals = raw_residuals(&solves)?;
    close(Geometry::Literal(n), &sys.generator, solves, residuals, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{parse, ParseMode};

    fn p(t: &SymbolTable, s: &str) -> Expr {
        parse(s, t, ParseMode::Strict).unwrap()
    }

    #[test]
    fn symbolic_geometry_constraints() {
        let t = SymbolTable::standard();
        let sys = extract_determining(Geometry::Symbolic, &t).unwrap();
        assert_eq!(sys.substitutions[&Symbol::new("a5")], Expr::zero());
        assert_eq!(sys.substitutions[&Symbol::new("a7")], Expr::zero());
        assert_eq!(sys.substitutions[&Symbol::new("a8")], p(&t, "a6 - a2"));
        assert_eq!(sys.substitutions.len(), 3);
        assert_eq!(sys.products.len(), 1);
        assert_eq!(sys.products[0].equation, p(&t, "n*a1*D"));
        assert_eq!(sys.products[0].branches.len(), 2);
        let d = sys.material.iter().find(|m| m.field.name() == "D").unwrap();
        assert_eq!(d.equation, canonical_equation(&p(&t, "(a1 + a2*r)*D_r + (a3 + a4*t)*D_t - (2*a2 - a4)*D")));
        let g = sys.material.iter().find(|m| m.field.name() == "Gamma").unwrap();
        assert_eq!(g.equation, canonical_equation(&p(&t, "(a1 + a2*r)*Gamma_r + (a3 + a4*t)*Gamma_t + a4*Gamma")));
        assert!(sys.classified.iter().all(|c| c.disposition != Disposition::Leftover));
        assert!(sys.multipliers_free_of_w());
    }

    #[test]
    fn multipliers_match_hand_values() {
        let t = SymbolTable::standard();
        let sys = extract_determining(Geometry::Symbolic, &t).unwrap();
        let m: BTreeMap<_, _> = sys.multipliers().into_iter().collect();
        assert_eq!(m["lambda1"], p(&t, "a1/r + 2*a2 + a6"));
        assert!(m["lambda3"].is_zero_literal());
        assert_eq!(m["lambda4"], p(&t, "a6 + a4"));
    }

    #[test]
    fn planar_geometry_leaves_a1_free() {
        let t = SymbolTable::standard();
        let sys = extract_determining(Geometry::Literal(0), &t).unwrap();
        assert!(sys.products.is_empty());
        assert!(!sys.substitutions.contains_key(&Symbol::new("a1")));
        let cyl = extract_determining(Geometry::Literal(1), &t).unwrap();
        assert_eq!(cyl.substitutions[&Symbol::new("a1")], Expr::zero());
    }

    #[test]
    fn every_branch_is_sufficient() {
        let t = SymbolTable::standard();
        let sys = extract_determining(Geometry::Symbolic, &t).unwrap();
        let checks = sys.sufficiency(&t).unwrap();
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(BranchCheck::all_zero), "{checks:?}");
    }

    #[test]
    fn geometry_specialization_commutes() {
        let t = SymbolTable::standard();
        let sym = extract_determining(Geometry::Symbolic, &t).unwrap();
        for n in 0..=2u8 {
            let direct = extract_determining(Geometry::Literal(n), &t).unwrap();
            let via = specialize_geometry(&sym, n, &t).unwrap();
            assert_eq!(direct.signature(), via.signature(), "n = {n}");
        }
    }
}
