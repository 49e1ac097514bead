use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Uniform frequency grid `center ± half_width` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
}

impl FrequencyGrid {
    pub const MIN_POINTS: usize = 8;
    pub const DEFAULT_POINTS: usize = 256;

    pub fn new(center: f64, half_width: f64, n: usize) -> Result<Self> {
        let grid = Self { center, half_width, n };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= Self::MIN_POINTS, || {
            format!("grid needs at least {} points, got {}", Self::MIN_POINTS, self.n)
        })?;
        ensure(self.half_width > 0.0 && self.half_width.is_finite(), || {
            format!("grid half_width must be positive, got {}", self.half_width)
        })?;
        ensure(self.center.is_finite(), || "grid center must be finite".into())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.center - self.half_width + i as f64 * self.spacing()
    }

    /// Offset of point `i` from the center.
    pub fn detuning(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.detuning(i)).collect()
    }
}
