use std::collections::{BTreeMap, BTreeSet};

use crate::forms::{d_scalar, wedge, Basis, DifferentialForm};
use crate::kernel::{
    normalize, partial_symbol, substitute, Bindings, Expr, KernelError, Symbol, SymbolKind, SymbolTable,
};

/// Translation/scaling generator `(a1 + a2 r) ∂r + (a3 + a4 t) ∂t + (a5 + a6 phi) ∂phi + (a7 + a8 w) ∂w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    coefficients: BTreeMap<Symbol, Expr>,
    pinned: BTreeSet<usize>,
    overrides: BTreeMap<Symbol, Expr>,
}

fn a(i: usize) -> Expr {
    Expr::sym(&format!("a{i}"))
}

impl Generator {
    pub fn standard() -> Self {
        let mut coefficients = BTreeMap::new();
        for (q, i) in [("r", 1), ("t", 3), ("phi", 5), ("w", 7)] {
            coefficients.insert(Symbol::new(q), normalize(&(a(i) + a(i + 1) * Expr::sym(q))));
        }
        Generator { coefficients, pinned: BTreeSet::new(), overrides: BTreeMap::new() }
    }

    /// Generator with every constant zero.
    pub fn zero() -> Self {
        (1..=8).fold(Self::standard(), |g, i| g.pin(i))
    }

    /// Fix `a_i = 0`.
    pub fn pin(mut self, i: usize) -> Self {
        assert!((1..=8).contains(&i), "generator constants are a1..a8");
        self.pinned.insert(i);
        let b = Bindings::new().scalar(&format!("a{i}"), Expr::zero());
        let table = SymbolTable::empty();
        for c in self.coefficients.values_mut() {
            *c = substitute(c, &b, &table).expect("scalar substitution");
        }
        self
    }

    pub fn pinned(&self) -> &BTreeSet<usize> {
        &self.pinned
    }

    /// Replace the action on a single symbol, e.g. `chi(D_r) := 0` for mutation tests.
    pub fn with_override(mut self, symbol: &str, value: Expr) -> Self {
        self.overrides.insert(Symbol::new(symbol), value);
        self
    }

    /// Apply a substitution to the coefficients (e.g. the derived constraints).
    pub fn specialize(&self, b: &Bindings, table: &SymbolTable) -> Result<Self, KernelError> {
        let mut out = self.clone();
        for c in out.coefficients.values_mut() {
            *c = substitute(c, b, table)?;
        }
        Ok(out)
    }

    /// Coefficient of `∂/∂q`.
    pub fn component(&self, q: &str) -> Expr {
        self.coefficients.get(&Symbol::new(q)).cloned().unwrap_or_else(Expr::zero)
    }

    /// Action on a single symbol.
    fn on_symbol(&self, s: &Symbol, table: &SymbolTable) -> Result<Expr, KernelError> {
        if let Some(v) = self.overrides.get(s) {
            return Ok(v.clone());
        }
        if let Some(c) = self.coefficients.get(s) {
            return Ok(c.clone());
        }
        let field_like = match table.kind(s) {
            Some(SymbolKind::Field) => true,
            Some(SymbolKind::Jet { base, .. }) => table.kind(&base) == Some(SymbolKind::Field),
            _ => false,
        };
        if !field_like {
            return Ok(Expr::zero());
        }
        let jr = Expr::symbol(&table.jet(s, 1, 0)?);
        let jt = Expr::symbol(&table.jet(s, 0, 1)?);
        Ok(normalize(&(self.component("r") * jr + self.component("t") * jt)))
    }

    /// Human-readable vector field.
    pub fn describe(&self) -> String {
        ["r", "t", "phi", "w"]
            .iter()
            .filter(|q| !self.component(q).is_zero_literal())
            .map(|q| format!("({})*d/d{q}", self.component(q)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Symbol, &Expr)> {
        self.coefficients.iter()
    }
}

/// `chi(f) = sum_q xi_q ∂f/∂q`, with fields and their jets prolonged along r and t.
pub fn lie_scalar(chi: &Generator, f: &Expr, table: &SymbolTable) -> Result<Expr, KernelError> {
    let mut terms = Vec::new();
    for s in f.free_symbols() {
        let action = chi.on_symbol(&s, table)?;
        if action.is_zero_literal() {
            continue;
        }
        let df = partial_symbol(f, &s, table)?;
        terms.push(df * action);
    }
    Ok(normalize(&Expr::sum(terms)))
}

/// Lie derivative of a form: for each term `f dq1^...^dqk`,
/// `chi(f) dq1^... + f sum_i dq1^...^d(chi qi)^...^dqk`.
pub fn lie_form(
    chi: &Generator,
    alpha: &DifferentialForm,
    table: &SymbolTable,
) -> Result<DifferentialForm, KernelError> {
    let mut out = DifferentialForm::zero(alpha.degree());
    for (basis, f) in alpha.terms() {
        let names = basis.names();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        out = out.add(&DifferentialForm::term(lie_scalar(chi, f, table)?, &names));
        for i in 0..names.len() {
            let q = Expr::sym(names[i]);
            let dchi = d_scalar(&lie_scalar(chi, &q, table)?, table)?;
            let mut acc = DifferentialForm::scalar(f.clone());
            for (j, n) in names.iter().enumerate() {
                let factor = if i == j { dchi.clone() } else { DifferentialForm::d(n) };
                acc = wedge(&acc, &factor);
            }
            out = out.add(&acc);
        }
    }
    Ok(out)
}

/// Basis helper used by the reduction and audits.
pub fn basis(names: &[&str]) -> Basis {
    Basis::canonical(names).expect("distinct differentials").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{build_mu2, build_r_mu1, exterior_d, Geometry};
    use crate::kernel::{parse, ParseMode};

    fn p(t: &SymbolTable, s: &str) -> Expr {
        parse(s, t, ParseMode::Strict).unwrap()
    }

    #[test]
    fn lie_scalar_examples() {
        let t = SymbolTable::standard();
        let chi = Generator::standard();
        assert_eq!(lie_scalar(&chi, &Expr::sym("r"), &t).unwrap(), p(&t, "a1 + a2*r"));
        assert!(lie_scalar(&chi, &Expr::int(7), &t).unwrap().is_zero_literal());
        assert_eq!(
            lie_scalar(&chi, &Expr::sym("Gamma"), &t).unwrap(),
            p(&t, "(a1 + a2*r)*Gamma_r + (a3 + a4*t)*Gamma_t")
        );
        assert_eq!(lie_scalar(&chi, &Expr::sym("D_r"), &t).unwrap(), p(&t, "(a1 + a2*r)*D_rr + (a3 + a4*t)*D_rt"));
    }

    #[test]
    fn lie_form_of_contact_form() {
        let t = SymbolTable::standard();
        let l = lie_form(&Generator::standard(), &build_mu2(), &t).unwrap();
        assert_eq!(l.coefficient(&["t", "r"]), p(&t, "a7 + a8*w + (a4 + a2)*w"));
        assert_eq!(l.coefficient(&["phi", "t"]), p(&t, "a6 + a4"));
        assert_eq!(l.terms().count(), 2);
        let dr = lie_form(&Generator::standard(), &DifferentialForm::d("r"), &t).unwrap();
        assert_eq!(dr, DifferentialForm::term(Expr::sym("a2"), &["r"]));
    }

    #[test]
    fn lie_form_of_balance_form_dw_dt() {
        let t = SymbolTable::standard();
        let l = lie_form(&Generator::standard(), &build_r_mu1(Geometry::Symbolic), &t).unwrap();
        assert_eq!(
            l.coefficient(&["w", "t"]),
            p(&t, "r*((a1 + a2*r)*D_r + (a3 + a4*t)*D_t) + D*((a1 + a2*r) + r*(a8 + a4))")
        );
    }

    #[test]
    fn commutes_with_exterior_derivative() {
        let t = SymbolTable::standard();
        let chi = Generator::standard();
        for f in ["D", "Gamma", "D_r", "phi", "w", "r*phi", "D*w + t*Gamma"] {
            let f = p(&t, f);
            let lhs = lie_form(&chi, &exterior_d(&DifferentialForm::scalar(f.clone()), &t).unwrap(), &t).unwrap();
            let rhs = exterior_d(&DifferentialForm::scalar(lie_scalar(&chi, &f, &t).unwrap()), &t).unwrap();
            assert_eq!(lhs, rhs, "for {f}");
        }
    }

    #[test]
    fn pinning_zeroes_constants() {
        let chi = Generator::standard().pin(1).pin(5);
        assert_eq!(chi.component("r"), Expr::sym("a2") * Expr::sym("r"));
        assert_eq!(chi.component("phi"), Expr::sym("a6") * Expr::sym("phi"));
        assert!(Generator::zero().describe().is_empty());
    }
}
