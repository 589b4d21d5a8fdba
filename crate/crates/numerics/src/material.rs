use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use ndsym_core::characteristics::{sample_env, CaseResult};
use ndsym_core::kernel::{evaluate, Expr, SymbolTable};

use crate::grid::GridSpec;
use crate::transform::TransformParams;
use crate::NumError;

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Diffusion coefficient D(r, t), gamma coefficient Gamma(r, t) and neutron
/// speed v. The speed is held fixed under every transformation.
#[derive(Clone)]
pub struct MaterialModel {
    pub id: String,
    pub v: f64,
    d: ScalarField,
    gamma: ScalarField,
    decomposition: Option<[ScalarField; 3]>,
}

impl fmt::Debug for MaterialModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaterialModel")
            .field("id", &self.id)
            .field("v", &self.v)
            .field("decomposed", &self.decomposition.is_some())
            .finish()
    }
}

impl MaterialModel {
    pub fn new(
        id: &str,
        v: f64,
        d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gamma: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.to_string(), v, d: Arc::new(d), gamma: Arc::new(gamma), decomposition: None }
    }

    pub fn constant(d: f64, gamma: f64, v: f64) -> Self {
        Self::new(&format!("constant(D={d}, Gamma={gamma})"), v, move |_, _| d, move |_, _| gamma)
    }

    /// Build from kernel expressions in r and t. `values` binds every other
    /// free symbol; G and F use the sampled shapes and C defaults to 1.3.
    pub fn from_exprs(id: &str, d: &Expr, gamma: &Expr, values: &[(&str, f64)], v: f64) -> Result<Self, NumError> {
        let env = sample_env(values);
        let mut bound: BTreeSet<String> = ["r", "t", "pi"].iter().map(|s| s.to_string()).collect();
        bound.extend(env.values.keys().map(|s| s.name().to_string()));
        for e in [d, gamma] {
            if let Some(s) = e.free_symbols().iter().find(|s| !bound.contains(s.name())) {
                return Err(NumError::Unbound(s.name().to_string()));
            }
        }
        let table = Arc::new(SymbolTable::standard());
        let closure = |e: &Expr| -> ScalarField {
            let (e, env, table) = (e.clone(), env.clone(), table.clone());
            Arc::new(move |r, t| {
                let mut env = env.clone();
                env.values.insert("r".into(), r);
                env.values.insert("t".into(), t);
                evaluate(&e, &env, &table).unwrap_or(f64::NAN)
            })
        };
        Ok(Self { id: id.to_string(), v, d: closure(d), gamma: closure(gamma), decomposition: None })
    }

    /// Material of a characteristics case with the a-values of `p`.
    pub fn from_case(case: &CaseResult, p: &TransformParams, v: f64) -> Result<Self, NumError> {
        Self::from_case_with(case, &case.diffusion.expr, p, v)
    }

    /// Case material with its diffusion expression replaced by `d`.
    pub fn from_case_with(case: &CaseResult, d: &Expr, p: &TransformParams, v: f64) -> Result<Self, NumError> {
        let values = p.values();
        let values: Vec<(&str, f64)> = values.iter().map(|(k, x)| (k.as_str(), *x)).collect();
        Self::from_exprs(&format!("case-{}", case.id), d, &case.production.expr, &values, v)
    }

    /// Attach Gamma = nubar * Sigma_f - Sigma_a; it must reproduce Gamma on
    /// the grid to 1e-12.
    pub fn with_decomposition(
        mut self,
        nubar: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        sigma_f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        sigma_a: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grid: &GridSpec,
    ) -> Result<Self, NumError> {
        for t in grid.times() {
            for r in grid.nodes() {
                let g = self.gamma(r, t);
                let rebuilt = nubar(r, t) * sigma_f(r, t) - sigma_a(r, t);
                if (g - rebuilt).abs() > 1e-12 * g.abs().max(1.0) {
                    return Err(NumError::InvalidMaterial(format!(
                        "decomposition gives {rebuilt} but Gamma is {g} at r = {r}, t = {t}"
                    )));
                }
            }
        }
        self.decomposition = Some([Arc::new(nubar), Arc::new(sigma_f), Arc::new(sigma_a)]);
        Ok(self)
    }

    pub fn d(&self, r: f64, t: f64) -> f64 {
        (self.d)(r, t)
    }

    pub fn gamma(&self, r: f64, t: f64) -> f64 {
        (self.gamma)(r, t)
    }

    /// (nubar, Sigma_f, Sigma_a) at a point, when a decomposition is attached.
    pub fn cross_sections(&self, r: f64, t: f64) -> Option<(f64, f64, f64)> {
        self.decomposition.as_ref().map(|[a, b, c]| (a(r, t), b(r, t), c(r, t)))
    }

    /// D must be positive and finite on every node of the grid.
    pub fn check(&self, grid: &GridSpec) -> Result<(), NumError> {
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(NumError::InvalidMaterial(format!("neutron speed {} must be positive", self.v)));
        }
        for t in grid.times() {
            for r in grid.nodes() {
                let d = self.d(r, t);
                if !(d.is_finite() && d > 0.0) {
                    return Err(NumError::InvalidMaterial(format!("D = {d} at r = {r}, t = {t}")));
                }
                if !self.gamma(r, t).is_finite() {
                    return Err(NumError::InvalidMaterial(format!("Gamma is not finite at r = {r}, t = {t}")));
                }
            }
        }
        Ok(())
    }
}

/// Diffusion expression of a case with its time exponent shifted by `delta`,
/// i.e. multiplied by (a3 + a4 t)^delta. Used as a symmetry-breaking control.
pub fn perturb_time_exponent(d: &Expr, delta: Expr) -> Expr {
    let base = Expr::sym("a3") + Expr::sym("a4") * Expr::sym("t");
    d.clone() * base.pow(delta)
}
