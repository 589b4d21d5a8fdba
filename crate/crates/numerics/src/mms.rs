//! Method of manufactured solutions for the solver.

use rayon::prelude::*;
use serde::Serialize;

use ndsym_core::kernel::{evaluate, normalize, parse, partial, Env, Expr, ParseMode, SymbolTable};

use crate::grid::{Boundary, BoundarySpec, GridSpec};
use crate::material::MaterialModel;
use crate::solver::solve_pde;
use crate::NumError;

pub const PHI: &str = "(1 + t)*cos(pi*r/2)";
pub const DIFFUSION: &str = "1 + t/2";

/// Gamma that makes `phi` an exact solution for diffusion coefficient `d` in
/// geometry n: Gamma = [(1/v) phi_t - r^-n (r^n D phi_r)_r] / phi.
pub fn source_adjusted_gamma(phi: &Expr, d: &Expr, n: u32, table: &SymbolTable) -> Result<Expr, NumError> {
    let (r, t) = (&"r".into(), &"t".into());
    let flux = d.clone() * partial(phi, r, table)?;
    let mut divergence = partial(&flux, r, table)?;
    if n > 0 {
        divergence = divergence + Expr::int(n as i64) * flux * Expr::sym("r").recip();
    }
    let rate = Expr::sym("v").recip() * partial(phi, t, table)?;
    Ok(normalize(&((rate - divergence) * phi.recip())))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceLevel {
    pub nr: usize,
    pub nt: usize,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// log2 of successive error ratios.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn within(&self, target: f64, tol: f64) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|o| (o - target).abs() <= tol)
    }
}

/// Planar manufactured problem on [0, 1] x [0, 1]: zero gradient at r = 0,
/// phi = 0 at r = 1, errors measured in max norm at the final time.
pub fn manufactured_convergence(cells: &[usize], v: f64) -> Result<ConvergenceReport, NumError> {
    let table = SymbolTable::standard();
    let phi = parse(PHI, &table, ParseMode::Strict)?;
    let d = parse(DIFFUSION, &table, ParseMode::Strict)?;
    let gamma = source_adjusted_gamma(&phi, &d, 0, &table)?;
    let material = MaterialModel::from_exprs("manufactured", &d, &gamma, &[("v", v)], v)?;
    let exact = |r: f64, t: f64| -> Result<f64, NumError> {
        Ok(evaluate(&phi, &Env::new().with("r", r).with("t", t), &table)?)
    };
    let levels = cells
        .par_iter()
        .map(|&nc| {
            let g = GridSpec::new((0.0, 1.0), (0.0, 1.0), nc, nc, 0)?;
            let bc = BoundarySpec::new(Boundary::ZeroGradient, Boundary::Dirichlet(0.0));
            let ic = |r: f64| exact(r, 0.0).unwrap_or(f64::NAN);
            let f = solve_pde(&g, &material, &ic, &bc)?;
            let mut error = 0.0f64;
            for (i, value) in f.final_row().iter().enumerate() {
                error = error.max((value - exact(g.r(i), g.t1)?).abs());
            }
            Ok(ConvergenceLevel { nr: nc, nt: nc, error })
        })
        .collect::<Result<Vec<_>, NumError>>()?;
    let orders = levels.windows(2).map(|w| (w[0].error / w[1].error).log2()).collect();
    Ok(ConvergenceReport { levels, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjusted_gamma_is_regular() {
        let table = SymbolTable::standard();
        let phi = parse(PHI, &table, ParseMode::Strict).unwrap();
        let d = parse(DIFFUSION, &table, ParseMode::Strict).unwrap();
        let gamma = source_adjusted_gamma(&phi, &d, 0, &table).unwrap();
        for (r, t) in [(0.0, 0.0), (0.3, 0.7), (0.9, 1.0), (1.0, 0.5)] {
            let env = Env::new().with("r", r).with("t", t).with("v", 2.0);
            let g = evaluate(&gamma, &env, &table).unwrap();
            let expected = 1.0 / (2.0 * (1.0 + t)) + (1.0 + t / 2.0) * std::f64::consts::PI.powi(2) / 4.0;
            assert!((g - expected).abs() <= 1e-12, "{gamma} at ({r}, {t})");
        }
    }
}
