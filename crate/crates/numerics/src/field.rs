use serde::Serialize;

use crate::grid::GridSpec;
use crate::transform::TransformParams;

/// Flux values on the (nt + 1) x (nr + 1) grid, stored row by row in time.
///
/// Fields produced by [`crate::transform_field`] carry a mask; clipped nodes
/// hold NaN and are excluded by every consumer.
#[derive(Clone, Debug, Serialize)]
pub struct Field {
    pub grid: GridSpec,
    pub material: String,
    pub values: Vec<f64>,
    pub mask: Option<Vec<bool>>,
    pub transform: Option<TransformParams>,
    /// Leading steps taken by the damped start rather than Crank-Nicolson.
    pub damped_steps: usize,
}

impl Field {
    pub fn new(grid: GridSpec, material: &str, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), (grid.nr + 1) * (grid.nt + 1));
        Self { grid, material: material.to_string(), values, mask: None, transform: None, damped_steps: 0 }
    }

    pub fn index(&self, k: usize, i: usize) -> usize {
        k * (self.grid.nr + 1) + i
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.values[self.index(k, i)]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.grid.nr + 1;
        &self.values[k * w..(k + 1) * w]
    }

    pub fn is_valid(&self, k: usize, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[self.index(k, i)])
    }

    pub fn final_row(&self) -> &[f64] {
        self.row(self.grid.nt)
    }

    /// Fraction of nodes outside the mask.
    pub fn clipped_fraction(&self) -> f64 {
        match &self.mask {
            None => 0.0,
            Some(m) => m.iter().filter(|v| !**v).count() as f64 / m.len() as f64,
        }
    }

    /// Largest |a - b| over nodes valid in both fields.
    pub fn max_difference(&self, other: &Field) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..=self.grid.nt {
            for i in 0..=self.grid.nr {
                if self.is_valid(k, i) && other.is_valid(k, i) {
                    worst = worst.max((self.get(k, i) - other.get(k, i)).abs());
                }
            }
        }
        worst
    }

    /// Discrete integral of phi r^n over the domain at step k.
    pub fn integral(&self, k: usize) -> f64 {
        self.row(k).iter().enumerate().map(|(i, v)| v * self.grid.volume(i)).sum()
    }
}
