use serde::{Deserialize, Serialize};

use crate::NumError;

/// Uniform space-time grid with `nr` cells in r and `nt` steps in t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r0: f64,
    pub r1: f64,
    pub t0: f64,
    pub t1: f64,
    pub nr: usize,
    pub nt: usize,
    /// Geometry index: 0 planar, 1 cylindrical, 2 spherical.
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Dirichlet(f64),
    ZeroGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub left: Boundary,
    pub right: Boundary,
}

impl BoundarySpec {
    pub fn new(left: Boundary, right: Boundary) -> Self {
        Self { left, right }
    }
}

impl GridSpec {
    pub fn new(r: (f64, f64), t: (f64, f64), nr: usize, nt: usize, n: u32) -> Result<Self, NumError> {
        let g = Self { r0: r.0, r1: r.1, t0: t.0, t1: t.1, nr, nt, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), NumError> {
        let bad = |m: &str| Err(NumError::InvalidGrid(m.into()));
        if !(self.r0.is_finite() && self.r1.is_finite() && self.t0.is_finite() && self.t1.is_finite()) {
            return bad("non-finite bounds");
        }
        if self.r0 < 0.0 || self.r1 <= self.r0 {
            return bad("need 0 <= r0 < r1");
        }
        if self.t1 <= self.t0 {
            return bad("need t0 < t1");
        }
        if self.nr < 4 || self.nt < 4 {
            return bad("need at least 4 cells and 4 steps");
        }
        if self.n > 2 {
            return bad("geometry index must be 0, 1 or 2");
        }
        Ok(())
    }

    /// Check the boundary policy against the geometry: r = 0 in curvilinear
    /// geometry needs the zero-gradient regularity condition.
    pub fn check_boundaries(&self, bc: &BoundarySpec) -> Result<(), NumError> {
        self.validate()?;
        if self.n > 0 && self.r0 == 0.0 && bc.left != Boundary::ZeroGradient {
            return Err(NumError::InvalidGrid("r0 = 0 with n > 0 requires a zero-gradient left boundary".into()));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.r1 - self.r0) / self.nr as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.nt as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        if i == self.nr {
            self.r1
        } else {
            self.r0 + i as f64 * self.h()
        }
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.nt {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nr).map(|i| self.r(i)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.nt).map(|k| self.t(k)).collect()
    }

    /// Grid with both mesh widths halved.
    pub fn refined(&self) -> Self {
        Self { nr: 2 * self.nr, nt: 2 * self.nt, ..self.clone() }
    }

    /// Control-volume measure of node i: the integral of r^n over the dual cell.
    pub fn volume(&self, i: usize) -> f64 {
        let h = self.h();
        let a = (self.r(i) - 0.5 * h).max(self.r0);
        let b = (self.r(i) + 0.5 * h).min(self.r1);
        let p = self.n as i32 + 1;
        (b.powi(p) - a.powi(p)) / p as f64
    }

    /// Radius weight r^n of the face between nodes i and i + 1.
    pub fn face_weight(&self, i: usize) -> f64 {
        (self.r(i) + 0.5 * self.h()).powi(self.n as i32)
    }
}
