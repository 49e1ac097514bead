//! Frequency correlation of the medium's transmission coefficients and
//! correlated Gaussian sampling.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::FrequencyGrid;

/// Diagonal jitter is added once the smallest eigenvalue of the covariance
/// falls below this multiple of `t_bar`.
pub const JITTER_FLOOR: f64 = 1e-12;
/// Largest admissible jitter, as a multiple of `t_bar`.
pub const JITTER_BUDGET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRaw", into = "ModelRaw")]
pub enum CorrelationModel {
    /// `C = exp(-|dw| / omega_corr)`.
    ModelI { omega_corr: f64 },
    /// `C = z / sinh z`, `z = sqrt(-i dw / omega_th)`.
    ModelII { omega_th: f64 },
}

#[derive(Serialize, Deserialize)]
struct ModelRaw {
    model: String,
    scale: f64,
}

impl TryFrom<ModelRaw> for CorrelationModel {
    type Error = Error;
    fn try_from(raw: ModelRaw) -> Result<Self> {
        let m = match raw.model.as_str() {
            "I" => CorrelationModel::ModelI { omega_corr: raw.scale },
            "II" => CorrelationModel::ModelII { omega_th: raw.scale },
            other => return Err(Error::InvalidParameter(format!("unknown correlation model {other:?}"))),
        };
        m.validate()?;
        Ok(m)
    }
}

impl From<CorrelationModel> for ModelRaw {
    fn from(m: CorrelationModel) -> Self {
        ModelRaw { model: m.label().to_string(), scale: m.scale() }
    }
}

impl CorrelationModel {
    pub fn model_i(omega_corr: f64) -> Result<Self> {
        let m = CorrelationModel::ModelI { omega_corr };
        m.validate()?;
        Ok(m)
    }

    pub fn model_ii(omega_th: f64) -> Result<Self> {
        let m = CorrelationModel::ModelII { omega_th };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.scale();
        ensure(s > 0.0 && s.is_finite(), || format!("correlation scale must be positive, got {s}"))
    }

    /// `omega_corr` or `omega_th`.
    pub fn scale(&self) -> f64 {
        match *self {
            CorrelationModel::ModelI { omega_corr } => omega_corr,
            CorrelationModel::ModelII { omega_th } => omega_th,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CorrelationModel::ModelI { .. } => "I",
            CorrelationModel::ModelII { .. } => "II",
        }
    }

    /// Same model with a different scale.
    pub fn with_scale(&self, scale: f64) -> Self {
        match self {
            CorrelationModel::ModelI { .. } => CorrelationModel::ModelI { omega_corr: scale },
            CorrelationModel::ModelII { .. } => CorrelationModel::ModelII { omega_th: scale },
        }
    }
}

/// `z / sinh z` for Re z >= 0.
fn z_over_sinh(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 * (7.0 / 360.0);
    }
    if z.re.abs() > 20.0 {
        // 2 z e^{-z} / (1 - e^{-2z}) without overflowing sinh
        let zz = if z.re < 0.0 { -z } else { z };
        let e = (-zz).exp();
        return 2.0 * zz * e / (1.0 - e * e);
    }
    z / z.sinh()
}

/// Model II kernel in dimensionless form, `kappa = dw / omega_th`.
pub fn model_ii_kernel(kappa: f64) -> Complex64 {
    z_over_sinh(Complex64::new(0.0, -kappa).sqrt())
}

/// `|C_II|^2 = 2|k| / (cosh sqrt(2|k|) - cos sqrt(2|k|))`, real arithmetic.
pub fn model_ii_kernel_sq(kappa: f64) -> f64 {
    let x2 = 2.0 * kappa.abs();
    let x = x2.sqrt();
    if x < 0.1 {
        // cosh x - cos x = x^2 (1 + x^4/360 + x^8/1814400 + ...)
        let x4 = x2 * x2;
        return 1.0 / (1.0 + x4 / 360.0 + x4 * x4 / 1_814_400.0);
    }
    if x > 700.0 {
        return 0.0;
    }
    x2 / (x.cosh() - x.cos())
}

/// `C(dw)` with `C(0) = 1` and `C(-dw) = conj C(dw)`.
pub fn correlation(delta_omega: f64, model: &CorrelationModel) -> Complex64 {
    match *model {
        CorrelationModel::ModelI { omega_corr } => Complex64::new((-delta_omega.abs() / omega_corr).exp(), 0.0),
        CorrelationModel::ModelII { omega_th } => model_ii_kernel(delta_omega / omega_th),
    }
}

/// `|C(dw)|^2`.
pub fn correlation_sq_magnitude(delta_omega: f64, model: &CorrelationModel) -> f64 {
    match *model {
        CorrelationModel::ModelI { omega_corr } => (-2.0 * delta_omega.abs() / omega_corr).exp(),
        CorrelationModel::ModelII { omega_th } => model_ii_kernel_sq(delta_omega / omega_th),
    }
}

/// Lower factor `L` with `L L^H = t_bar C(w_m - w_n) + jitter I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceFactor {
    /// `None` when built from explicit points.
    pub grid: Option<FrequencyGrid>,
    pub lower_factor: DMatrix<Complex64>,
    pub jitter_used: f64,
    pub t_bar: f64,
}

impl CovarianceFactor {
    pub fn dim(&self) -> usize {
        self.lower_factor.nrows()
    }

    /// `L z` for a vector of standard circular normals `z`.
    pub fn apply(&self, z: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = z.iter().take(i + 1).enumerate().map(|(j, zj)| self.lower_factor[(i, j)] * zj).sum();
        }
    }
}

/// Covariance matrix `t_bar C(w_m - w_n)`.
pub fn covariance_matrix(points: &[f64], model: &CorrelationModel, t_bar: f64) -> DMatrix<Complex64> {
    let n = points.len();
    DMatrix::from_fn(n, n, |m, k| t_bar * correlation(points[m] - points[k], model))
}

/// Factor the covariance of transmission coefficients on a grid.
pub fn covariance_factor(grid: &FrequencyGrid, model: &CorrelationModel, t_bar: f64) -> Result<CovarianceFactor> {
    grid.validate()?;
    let mut f = covariance_factor_points(&grid.points(), model, t_bar)?;
    f.grid = Some(*grid);
    Ok(f)
}

/// As [`covariance_factor`] for arbitrary frequencies (any count >= 1).
pub fn covariance_factor_points(points: &[f64], model: &CorrelationModel, t_bar: f64) -> Result<CovarianceFactor> {
    model.validate()?;
    ensure(t_bar > 0.0 && t_bar <= 1.0, || format!("t_bar must lie in (0, 1], got {t_bar}"))?;
    ensure(!points.is_empty(), || "no frequencies to sample".into())?;
    let sigma = covariance_matrix(points, model, t_bar);
    let lambda_min = SymmetricEigen::new(sigma.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = JITTER_FLOOR * t_bar;
    let budget = JITTER_BUDGET * t_bar;
    let mut jitter = if lambda_min < floor { floor - lambda_min } else { 0.0 };
    loop {
        if jitter > budget {
            return Err(Error::NotPositiveSemidefinite { required: jitter, budget });
        }
        let mut m = sigma.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(m) {
            return Ok(CovarianceFactor { grid: None, lower_factor: ch.unpack(), jitter_used: jitter, t_bar });
        }
        jitter = if jitter == 0.0 { floor } else { 10.0 * jitter };
    }
}
