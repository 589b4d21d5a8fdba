use std::collections::BTreeMap;

use num_traits::Zero;

use super::expr::{Expr, Symbol};
use super::normal::{collect_by_symbols, normalize};
use super::subst::{substitute, Bindings};
use super::symbols::SymbolTable;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearSolution {
    /// Pivot unknown -> its value in the remaining unknowns.
    pub solved: BTreeMap<Symbol, Expr>,
    /// Equations that are nonlinear in the unknowns or whose only coefficients
    /// are symbolic (e.g. `n*a1`), after substituting the solved values.
    pub residual: Vec<Expr>,
}

/// Gaussian elimination over the unknowns. Pivots only on nonzero rational
/// coefficients; among those the unknown listed last wins.
pub fn solve_linear(eqs: &[Expr], unknowns: &[Symbol]) -> LinearSolution {
    let table = SymbolTable::empty();
    let mut solved: BTreeMap<Symbol, Expr> = BTreeMap::new();
    let mut pending: Vec<Expr> = eqs.iter().map(normalize).collect();
    let mut residual = Vec::new();
    loop {
        let mut progress = false;
        let mut next = Vec::new();
        for eq in pending {
            let eq = apply(&eq, &solved, &table);
            if eq.is_zero_literal() {
                continue;
            }
            match pivot(&eq, unknowns) {
                Some((x, coef, rest)) if !progress => {
                    let value = normalize(&(-rest / Expr::num(coef)));
                    let one = BTreeMap::from([(x.clone(), value.clone())]);
                    for v in solved.values_mut() {
                        *v = apply(v, &one, &table);
                    }
                    solved.insert(x, value);
                    progress = true;
                }
                _ => next.push(eq),
            }
        }
        pending = next;
        if !progress {
            break;
        }
    }
    for eq in pending {
        let eq = apply(&eq, &solved, &table);
        if !eq.is_zero_literal() && !residual.contains(&eq) {
            residual.push(eq);
        }
    }
    LinearSolution { solved, residual }
}

fn apply(e: &Expr, solved: &BTreeMap<Symbol, Expr>, table: &SymbolTable) -> Expr {
    if solved.is_empty() {
        return e.clone();
    }
    let b = Bindings { scalars: solved.clone(), functions: BTreeMap::new() };
    substitute(e, &b, table).expect("scalar substitution is infallible")
}

/// `eq = coef*x + rest` with `coef` a nonzero rational and `rest` free of `x`.
fn pivot(eq: &Expr, unknowns: &[Symbol]) -> Option<(Symbol, super::Rational, Expr)> {
    let groups = collect_by_symbols(eq, unknowns)?;
    if groups.keys().any(|k| k.iter().sum::<u32>() > 1) {
        return None;
    }
    for (i, x) in unknowns.iter().enumerate().rev() {
        let mut key = vec![0u32; unknowns.len()];
        key[i] = 1;
        let Some(c) = groups.get(&key) else { continue };
        let Some(q) = c.as_rational() else { continue };
        if q.is_zero() {
            continue;
        }
        let rest = normalize(&(eq - Expr::num(q.clone()) * Expr::symbol(x)));
        return Some((x.clone(), q.clone(), rest));
    }
    None
}
