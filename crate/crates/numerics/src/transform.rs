use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::spline::CubicSpline;
use crate::NumError;

pub const DEFAULT_CLIP_THRESHOLD: f64 = 0.2;

/// Which finite maps to apply.
///
/// `Printed` is r -> eps a1 + e^{eps a2} r (likewise for t). It is the flow of
/// the generator only when a1 = 0 or a2 = 0 (a3 = 0 or a4 = 0 for t).
/// `Flow` is the exact flow r -> (r + a1/a2) e^{eps a2} - a1/a2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformMap {
    #[default]
    Printed,
    Flow,
}

/// Group parameter eps and generator constants a1..a8.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformParams {
    pub eps: f64,
    pub a: [f64; 8],
    #[serde(default)]
    pub map: TransformMap,
}

impl TransformParams {
    /// Enforces the determining constraints a5 = a7 = 0 and a8 = a6 - a2.
    pub fn new(eps: f64, a: [f64; 8]) -> Result<Self, NumError> {
        if a[4] != 0.0 || a[6] != 0.0 {
            return Err(NumError::InvalidTransform(format!("a5 = {} and a7 = {} must vanish", a[4], a[6])));
        }
        if (a[7] - (a[5] - a[1])).abs() > 1e-12 * (1.0 + a[7].abs()) {
            return Err(NumError::InvalidTransform(format!("a8 = {} but a6 - a2 = {}", a[7], a[5] - a[1])));
        }
        if !eps.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(NumError::InvalidTransform("non-finite parameter".into()));
        }
        Ok(Self { eps, a, map: TransformMap::Printed })
    }

    /// Parameters from (a1, a2, a3, a4, a6); a5, a7 and a8 follow from the
    /// determining constraints.
    pub fn admissible(eps: f64, a1: f64, a2: f64, a3: f64, a4: f64, a6: f64) -> Self {
        Self { eps, a: [a1, a2, a3, a4, 0.0, a6, 0.0, a6 - a2], map: TransformMap::Printed }
    }

    pub fn with_map(self, map: TransformMap) -> Self {
        Self { map, ..self }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }

    pub fn get(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    /// Named values a1..a8 for expression evaluation.
    pub fn values(&self) -> Vec<(String, f64)> {
        (1..=8).map(|i| (format!("a{i}"), self.get(i))).collect()
    }

    /// Source radius sampled by the transformed field at r.
    pub fn source_r(&self, r: f64) -> f64 {
        self.inverse(r, self.get(1), self.get(2))
    }

    pub fn source_t(&self, t: f64) -> f64 {
        self.inverse(t, self.get(3), self.get(4))
    }

    /// Inverse of x -> shift + e^{eps scale} x (printed) or of the flow of
    /// (shift + scale x) d/dx.
    fn inverse(&self, x: f64, shift: f64, scale: f64) -> f64 {
        let e = self.eps;
        match self.map {
            TransformMap::Flow if scale != 0.0 => {
                let c = shift / scale;
                (x + c) * (-e * scale).exp() - c
            }
            _ => (-e * scale).exp() * (x - e * shift),
        }
    }

    pub fn amplitude(&self) -> f64 {
        (self.eps * self.get(6)).exp()
    }
}

/// phi_new(r, t) = e^{eps a6} phi(e^{-eps a2}(r - eps a1), e^{-eps a4}(t - eps a3)),
/// sampled on the source grid by a tensor-product cubic spline.
pub fn transform_field(f: &Field, p: &TransformParams) -> Result<Field, NumError> {
    transform_field_with(f, p, DEFAULT_CLIP_THRESHOLD)
}

pub fn transform_field_with(f: &Field, p: &TransformParams, threshold: f64) -> Result<Field, NumError> {
    let g = &f.grid;
    let ((k_lo, k_hi), (i_lo, i_hi)) = valid_rectangle(f)?;
    if k_hi - k_lo < 3 || i_hi - i_lo < 3 {
        return Err(NumError::InvalidTransform("valid region of the source field is too small".into()));
    }
    let (h, dt) = (g.h(), g.dt());
    let (r_lo, t_lo) = (g.r(i_lo), g.t(k_lo));
    let probe_r = CubicSpline::new(r_lo, h, &vec![0.0; i_hi - i_lo + 1]);
    let probe_t = CubicSpline::new(t_lo, dt, &vec![0.0; k_hi - k_lo + 1]);
    let target_r: Vec<Option<f64>> =
        (0..=g.nr).map(|i| Some(p.source_r(g.r(i))).filter(|x| probe_r.eval(*x).is_some())).collect();
    let target_t: Vec<Option<f64>> =
        (0..=g.nt).map(|k| Some(p.source_t(g.t(k))).filter(|x| probe_t.eval(*x).is_some())).collect();

    // interpolate in r along each source time row, then in t along each column
    let cols: Vec<usize> = (0..=g.nr).filter(|i| target_r[*i].is_some()).collect();
    let mut stage = vec![vec![0.0; k_hi - k_lo + 1]; g.nr + 1];
    for k in k_lo..=k_hi {
        let spline = CubicSpline::new(r_lo, h, &f.row(k)[i_lo..=i_hi]);
        for &i in &cols {
            stage[i][k - k_lo] = spline.eval(target_r[i].unwrap()).unwrap();
        }
    }
    let amp = p.amplitude();
    let mut values = vec![f64::NAN; f.values.len()];
    let mut mask = vec![false; f.values.len()];
    for &i in &cols {
        let spline = CubicSpline::new(t_lo, dt, &stage[i]);
        for k in 0..=g.nt {
            if let Some(tt) = target_t[k] {
                let idx = f.index(k, i);
                values[idx] = amp * spline.eval(tt).unwrap();
                mask[idx] = true;
            }
        }
    }
    let clipped = mask.iter().filter(|v| !**v).count() as f64 / mask.len() as f64;
    if clipped > threshold {
        return Err(NumError::OutOfDomain { fraction: clipped, threshold });
    }
    let mut out = Field::new(g.clone(), &f.material, values);
    out.mask = if clipped > 0.0 { Some(mask) } else { None };
    out.transform = Some(*p);
    Ok(out)
}

/// Index ranges (k, i) of the field's valid region, which must be a rectangle.
fn valid_rectangle(f: &Field) -> Result<((usize, usize), (usize, usize)), NumError> {
    let g = &f.grid;
    let Some(_) = &f.mask else {
        return Ok(((0, g.nt), (0, g.nr)));
    };
    let ks: Vec<usize> = (0..=g.nt).filter(|k| (0..=g.nr).any(|i| f.is_valid(*k, i))).collect();
    let is: Vec<usize> = (0..=g.nr).filter(|i| (0..=g.nt).any(|k| f.is_valid(k, *i))).collect();
    let (Some(&k_lo), Some(&k_hi), Some(&i_lo), Some(&i_hi)) = (ks.first(), ks.last(), is.first(), is.last()) else {
        return Err(NumError::InvalidTransform("source field has no valid nodes".into()));
    };
    let full = (k_lo..=k_hi).all(|k| (i_lo..=i_hi).all(|i| f.is_valid(k, i)));
    if !full {
        return Err(NumError::InvalidTransform("valid region of the source field is not a rectangle".into()));
    }
    Ok(((k_lo, k_hi), (i_lo, i_hi)))
}
