use serde::Serialize;

use crate::grid::GridSpec;
use crate::material::MaterialModel;
use crate::transform::TransformParams;
use crate::NumError;

/// Normalized max-norm residuals of the two material equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaterialResidual {
    pub res_d: f64,
    pub res_gamma: f64,
}

impl MaterialResidual {
    pub fn max(&self) -> f64 {
        self.res_d.max(self.res_gamma)
    }
}

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Residuals of (a1 + a2 r) D_r + (a3 + a4 t) D_t - (2 a2 - a4) D and
/// (a1 + a2 r) Gamma_r + (a3 + a4 t) Gamma_t + a4 Gamma on the grid nodes,
/// with derivatives from fourth-order central differences of step h/2, dt/2.
pub fn material_residual(m: &MaterialModel, a: &TransformParams, g: &GridSpec) -> Result<MaterialResidual, NumError> {
    g.validate()?;
    let (hr, ht) = (0.5 * g.h(), 0.5 * g.dt());
    let (a1, a2, a3, a4) = (a.get(1), a.get(2), a.get(3), a.get(4));
    let (mut rd, mut rg, mut dmax, mut gmax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for t in g.times() {
        for r in g.nodes() {
            let (cr, ct) = (a1 + a2 * r, a3 + a4 * t);
            let d = m.d(r, t);
            let res_d = cr * central(|x| m.d(x, t), r, hr) + ct * central(|s| m.d(r, s), t, ht) - (2.0 * a2 - a4) * d;
            let gm = m.gamma(r, t);
            let res_g = cr * central(|x| m.gamma(x, t), r, hr) + ct * central(|s| m.gamma(r, s), t, ht) + a4 * gm;
            if !(res_d.is_finite() && res_g.is_finite()) {
                return Err(NumError::InvalidMaterial(format!("non-finite derivative at r = {r}, t = {t}")));
            }
            rd = rd.max(res_d.abs());
            rg = rg.max(res_g.abs());
            dmax = dmax.max(d.abs());
            gmax = gmax.max(gm.abs());
        }
    }
    let norm = |res: f64, scale: f64| if scale > 0.0 { res / scale } else { res };
    Ok(MaterialResidual { res_d: norm(rd, dmax), res_gamma: norm(rg, gmax) })
}
