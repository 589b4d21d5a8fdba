use crate::forms::{build_mu3, DifferentialForm};
use crate::kernel::{is_zero, Expr, SymbolTable, ZeroVerdict};

use super::generator::{lie_form, Generator};
use super::reduce::{ideal_reduce, IdealElement};
use super::EngineError;

/// Result of reducing `chi(mu3)` modulo `mu3`.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub multiplier: Expr,
    pub residual: DifferentialForm,
    pub verdict: ZeroVerdict,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.verdict == ZeroVerdict::Zero
    }

    /// Residual as a single printed form (`0` when it vanishes).
    pub fn residual_string(&self) -> String {
        if self.residual.is_zero() {
            "0".into()
        } else {
            self.residual.to_string()
        }
    }
}

/// Check that the generator preserves the contact condition on `D_r`.
pub fn closure_check(chi: &Generator, table: &SymbolTable) -> Result<ClosureReport, EngineError> {
    let mu3 = build_mu3();
    let l = lie_form(chi, &mu3, table)?;
    let solve = ideal_reduce(&l, &[IdealElement::new("mu3", mu3, &["D", "t"])])?;
    let verdict = solve
        .residual
        .terms()
        .map(|(_, c)| is_zero(c, table))
        .find(|v| *v != ZeroVerdict::Zero)
        .unwrap_or(ZeroVerdict::Zero);
    Ok(ClosureReport { multiplier: solve.multipliers[0].1.clone(), residual: solve.residual, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{normalize, parse, ParseMode};

    #[test]
    fn closure_holds() {
        let t = SymbolTable::standard();
        let rep = closure_check(&Generator::standard(), &t).unwrap();
        assert!(rep.passed());
        assert!(rep.residual.is_zero());
        assert_eq!(rep.multiplier, Expr::sym("a4"));
    }

    #[test]
    fn mutated_prolongation_is_detected() {
        let t = SymbolTable::standard();
        let chi = Generator::standard().with_override("D_r", Expr::zero());
        let rep = closure_check(&chi, &t).unwrap();
        assert!(!rep.passed());
        let expected = parse("(a1 + a2*r)*D_rr + (a3 + a4*t)*D_rt", &t, ParseMode::Strict).unwrap();
        let c = rep.residual.coefficient(&["r", "t"]);
        assert_eq!(normalize(&(c + expected)), Expr::zero());
    }

    #[test]
    fn trivial_generator() {
        let t = SymbolTable::standard();
        let rep = closure_check(&Generator::zero(), &t).unwrap();
        assert!(rep.passed());
        assert!(rep.multiplier.is_zero_literal());
    }
}
