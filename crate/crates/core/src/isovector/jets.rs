use std::collections::BTreeMap;

use crate::kernel::{
    collect_by_symbols, normalize, partial, substitute, Bindings, Expr, KernelError, Symbol, SymbolKind, SymbolTable,
};

use super::EngineError;

const MAX_PASSES: usize = 8;

/// Eliminates t-derivatives of fields using first-order evolution equations
/// `f_t = rhs(f, f_r, r, t)` and their prolongations.
#[derive(Clone, Debug, Default)]
pub struct JetReducer {
    rules: BTreeMap<Symbol, Expr>,
}

/// Field whose jets appear in `e`, if exactly one.
pub fn single_field(e: &Expr, table: &SymbolTable) -> Option<Symbol> {
    let mut found: Option<Symbol> = None;
    for s in e.free_symbols() {
        let base = match table.kind(&s) {
            Some(SymbolKind::Field) => s.clone(),
            Some(SymbolKind::Jet { base, .. }) if table.kind(&base) == Some(SymbolKind::Field) => base,
            _ => continue,
        };
        match &found {
            Some(f) if *f != base => return None,
            _ => found = Some(base),
        }
    }
    found
}

/// Highest total derivative order among field jets in `e` (0 for bare fields).
pub fn jet_order(e: &Expr, table: &SymbolTable) -> u32 {
    e.free_symbols()
        .iter()
        .filter_map(|s| match table.kind(s) {
            Some(SymbolKind::Jet { base, r_order, t_order }) if table.kind(&base) == Some(SymbolKind::Field) => {
                Some(r_order + t_order)
            }
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

impl JetReducer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `eq = 0`, solved for the t-jet of its field. Returns false when the
    /// equation has no usable t-jet (then it is not an evolution equation).
    pub fn add_equation(&mut self, eq: &Expr, table: &SymbolTable) -> Result<bool, EngineError> {
        let Some(field) = single_field(eq, table) else { return Ok(false) };
        if jet_order(eq, table) != 1 || self.rules.contains_key(&field) {
            return Ok(false);
        }
        let ft = table.jet(&field, 0, 1)?;
        let Some(groups) = collect_by_symbols(eq, std::slice::from_ref(&ft)) else { return Ok(false) };
        let (Some(c), rest) = (groups.get(&vec![1]), groups.get(&vec![0]).cloned().unwrap_or_else(Expr::zero)) else {
            return Ok(false);
        };
        if groups.len() > 2 || c.is_zero_literal() {
            return Ok(false);
        }
        self.rules.insert(field, normalize(&(-rest / c)));
        Ok(true)
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Symbol, &Expr)> {
        self.rules.iter()
    }

    /// Replace every t-jet of a ruled field until none remain.
    pub fn reduce(&self, e: &Expr, table: &SymbolTable) -> Result<Expr, EngineError> {
        let mut cur = normalize(e);
        for _ in 0..MAX_PASSES {
            let mut b = Bindings::new();
            let mut any = false;
            for s in cur.free_symbols() {
                if let Some(SymbolKind::Jet { base, r_order, t_order }) = table.kind(&s) {
                    if t_order == 0 {
                        continue;
                    }
                    if let Some(rule) = self.rules.get(&base) {
                        b = b.scalar(s.name(), self.prolong(rule, r_order, t_order - 1, table)?);
                        any = true;
                    }
                }
            }
            if !any {
                return Ok(cur);
            }
            cur = substitute(&cur, &b, table)?;
        }
        Err(EngineError::JetReductionDiverged(cur.to_string()))
    }

    fn prolong(&self, rule: &Expr, r: u32, t: u32, table: &SymbolTable) -> Result<Expr, KernelError> {
        let mut e = rule.clone();
        for _ in 0..r {
            e = partial(&e, &Symbol::new("r"), table)?;
        }
        for _ in 0..t {
            e = partial(&e, &Symbol::new("t"), table)?;
        }
        Ok(e)
    }
}
