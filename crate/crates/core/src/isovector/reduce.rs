use std::collections::BTreeMap;

use crate::forms::{Basis, DifferentialForm};
use crate::kernel::{collect_by_symbols, normalize, Expr, Symbol};

use super::generator::basis;
use super::EngineError;

/// An ideal generator together with the basis 2-form used to match its multiplier.
#[derive(Clone, Debug)]
pub struct IdealElement {
    pub label: String,
    pub form: DifferentialForm,
    pub pivot: Basis,
}

impl IdealElement {
    pub fn new(label: &str, form: DifferentialForm, pivot: &[&str]) -> Self {
        IdealElement { label: label.to_string(), form, pivot: basis(pivot) }
    }
}

/// `L = sum_i lambda_i g_i + residual`.
#[derive(Clone, Debug)]
pub struct MultiplierSolve {
    pub multipliers: Vec<(String, Expr)>,
    pub residual: DifferentialForm,
}

impl MultiplierSolve {
    /// `sum lambda_i g_i + residual`, for the reconstruction identity.
    pub fn reconstruct(&self, ideal: &[IdealElement]) -> DifferentialForm {
        let mut acc = self.residual.clone();
        for ((_, lambda), g) in self.multipliers.iter().zip(ideal) {
            acc = acc.add(&g.form.scale(lambda));
        }
        acc
    }

    /// True when no multiplier depends on `w`.
    pub fn multipliers_free_of(&self, s: &str) -> bool {
        let s = Symbol::new(s);
        self.multipliers.iter().all(|(_, m)| !m.contains_symbol(&s))
    }
}

/// Match multipliers one generator at a time on its pivot basis, in the given order.
pub fn ideal_reduce(form: &DifferentialForm, ideal: &[IdealElement]) -> Result<MultiplierSolve, EngineError> {
    let mut rest = form.clone();
    let mut multipliers = Vec::new();
    for g in ideal {
        let names = g.pivot.names();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let p = g.form.coefficient(&names);
        if p.is_zero_literal() {
            return Err(EngineError::ZeroPivot { generator: g.label.clone(), basis: g.pivot.to_string() });
        }
        let lambda = normalize(&(rest.coefficient(&names) / p));
        rest = rest.sub(&g.form.scale(&lambda));
        multipliers.push((g.label.clone(), lambda));
    }
    Ok(MultiplierSolve { multipliers, residual: rest })
}

/// Split a coefficient into the coefficients of its monomials in `vars`.
/// Keys are printed monomials such as `1`, `phi`, `w`, `phi*w`.
pub fn split_monomials(e: &Expr, vars: &[&str]) -> Result<BTreeMap<String, Expr>, EngineError> {
    let syms: Vec<Symbol> = vars.iter().map(|v| Symbol::new(v)).collect();
    let groups = collect_by_symbols(e, &syms).ok_or_else(|| EngineError::NotPolynomial(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (degrees, coef) in groups {
        if coef.is_zero_literal() {
            continue;
        }
        let mono = normalize(&Expr::product(
            syms.iter().zip(&degrees).map(|(s, &k)| Expr::symbol(s).powi(k as i64)).collect(),
        ));
        out.insert(mono.to_string(), coef);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{build_mu2, build_r_mu1, Geometry};
    use crate::isovector::generator::{lie_form, Generator};
    use crate::kernel::{parse, ParseMode, SymbolTable};

    fn ideal(g: Geometry) -> Vec<IdealElement> {
        vec![
            IdealElement::new("lambda1", build_r_mu1(g), &["phi", "r"]),
            IdealElement::new("lambda2", build_mu2(), &["phi", "t"]),
        ]
    }

    #[test]
    fn contact_form_multipliers() {
        let t = SymbolTable::standard();
        let l = lie_form(&Generator::standard(), &build_mu2(), &t).unwrap();
        let s = ideal_reduce(&l, &ideal(Geometry::Symbolic)).unwrap();
        assert!(s.multipliers[0].1.is_zero_literal());
        assert_eq!(s.multipliers[1].1, parse("a6 + a4", &t, ParseMode::Strict).unwrap());
        assert_eq!(s.residual.coefficient(&["t", "r"]), parse("a7 + (a8 + a2 - a6)*w", &t, ParseMode::Strict).unwrap());
        let parts = split_monomials(&s.residual.coefficient(&["t", "r"]), &["phi", "w"]).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts["1"], Expr::sym("a7"));
    }

    #[test]
    fn balance_form_first_multiplier() {
        let t = SymbolTable::standard();
        let g = ideal(Geometry::Symbolic);
        let l = lie_form(&Generator::standard(), &g[0].form, &t).unwrap();
        let s = ideal_reduce(&l, &g).unwrap();
        assert_eq!(s.multipliers[0].1, parse("a1/r + 2*a2 + a6", &t, ParseMode::Strict).unwrap());
        assert_eq!(s.reconstruct(&g), l);
        assert!(s.residual.coefficient(&["phi", "r"]).is_zero_literal());
        assert!(s.residual.coefficient(&["phi", "t"]).is_zero_literal());
        assert!(s.multipliers_free_of("w"));
    }

    #[test]
    fn zero_pivot_is_reported() {
        let bad = vec![IdealElement::new("g", build_mu2(), &["phi", "r"])];
        let err = ideal_reduce(&build_mu2(), &bad).unwrap_err();
        assert!(matches!(err, EngineError::ZeroPivot { .. }));
    }
}
