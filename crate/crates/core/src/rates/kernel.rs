//! Medium kernels in dimensionless form.
//!
//! For the phase-matched states the rate reduces to `1 + int_{-1}^{1} f(x + t) h(x) dx`
//! with `f(y) = w g(w y)` and `g(u) = int_0^inf |C(k)|^2 cos(k u) dk`.
//! For Gaussian wave packets it reduces to averages over `z ~ N(0, 1)` of
//! `|C(z / w)|^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::correlation::{model_ii_kernel_sq, CorrelationModel};
use crate::error::{ensure, Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::special::erfcx_complex;
use num_complex::Complex64;

/// Tolerances for the one-dimensional reductions.
pub const KERNEL_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 4000 };

/// Which medium the rate is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MediumRepr", into = "MediumRepr")]
pub enum Medium {
    /// Weak disorder, `|C|^2 = 1` over the photon bandwidth.
    Cw,
    Correlated(CorrelationModel),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MediumRepr {
    Named(String),
    Model(CorrelationModel),
}

impl TryFrom<MediumRepr> for Medium {
    type Error = Error;
    fn try_from(r: MediumRepr) -> Result<Self> {
        match r {
            MediumRepr::Named(s) if s == "cw" => Ok(Medium::Cw),
            MediumRepr::Named(s) => Err(Error::InvalidParameter(format!("unknown medium {s:?}"))),
            MediumRepr::Model(m) => Ok(Medium::Correlated(m)),
        }
    }
}

impl From<Medium> for MediumRepr {
    fn from(m: Medium) -> Self {
        match m {
            Medium::Cw => MediumRepr::Named("cw".into()),
            Medium::Correlated(c) => MediumRepr::Model(c),
        }
    }
}

impl Medium {
    pub fn label(&self) -> String {
        match self {
            Medium::Cw => "cw".into(),
            Medium::Correlated(m) => format!("model {} scale {}", m.label(), m.scale()),
        }
    }
}

/// Dimensionless kernel with correlation width `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Cw,
    ModelI { w: f64 },
    ModelII { w: f64 },
}

impl Kernel {
    /// Kernel of `model` at dimensionless width `w`; `w = inf` gives [`Kernel::Cw`].
    pub fn new(model: &CorrelationModel, w: f64) -> Result<Self> {
        ensure(w > 0.0 && !w.is_nan(), || format!("w must be positive, got {w}"))?;
        if w.is_infinite() {
            return Ok(Kernel::Cw);
        }
        Ok(match model {
            CorrelationModel::ModelI { .. } => Kernel::ModelI { w },
            CorrelationModel::ModelII { .. } => Kernel::ModelII { w },
        })
    }

    pub fn model_i(w: f64) -> Result<Self> {
        Self::new(&CorrelationModel::ModelI { omega_corr: 1.0 }, w)
    }

    pub fn model_ii(w: f64) -> Result<Self> {
        Self::new(&CorrelationModel::ModelII { omega_th: 1.0 }, w)
    }

    pub fn w(&self) -> f64 {
        match *self {
            Kernel::Cw => f64::INFINITY,
            Kernel::ModelI { w } | Kernel::ModelII { w } => w,
        }
    }

    /// `|C(k)|^2` at dimensionless frequency offset `k` (units of the medium scale).
    pub fn sq_magnitude(&self, k: f64) -> f64 {
        match self {
            Kernel::Cw => 1.0,
            Kernel::ModelI { .. } => (-2.0 * k.abs()).exp(),
            Kernel::ModelII { .. } => model_ii_kernel_sq(k),
        }
    }

    /// `f(y) = w g(w y)`; integrates to pi over the real line.
    pub fn f(&self, y: f64) -> f64 {
        match *self {
            Kernel::Cw => {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Kernel::ModelI { w } => 2.0 * w / (4.0 + (w * y).powi(2)),
            Kernel::ModelII { w } => w * g_model_ii(w * y),
        }
    }

    /// `int_{-1}^{1} f(x + t) h(x) dx`, with `pi h(-t)` for the cw kernel.
    /// `h` may have kinks at 0 and must vanish at `|x| = 1`.
    pub fn smear<H: Fn(f64) -> f64>(&self, t: f64, h: H) -> Result<f64> {
        if let Kernel::Cw = self {
            return Ok(if t.abs() < 1.0 { PI * h(-t) } else { 0.0 });
        }
        let mut pts = vec![-1.0, 0.0, 1.0];
        if t.abs() < 1.0 && t != 0.0 {
            pts.push(-t);
        }
        // geometric ladder about the peak at x = -t, so a narrow f is never stepped over
        let mut d = 1.0 / self.w();
        while d < 2.0 {
            pts.extend([-t - d, -t + d].into_iter().filter(|x| x.abs() < 1.0));
            d *= 2.0;
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let r = integrate_with_breaks(|x| self.f(x + t) * h(x), &pts, &KERNEL_QUAD);
        converged(r.value, r.error, r.converged, KERNEL_QUAD.abs_tol)
    }

    /// `E[|C(z / w)|^2 cos(t z)]` over `z ~ N(0, 1)`.
    pub fn gaussian_average(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        match *self {
            Kernel::Cw => Ok((-0.5 * t * t).exp()),
            Kernel::ModelI { w } => Ok(erfcx_complex(Complex64::new(2.0 / w, -t) * std::f64::consts::FRAC_1_SQRT_2).re),
            Kernel::ModelII { w } => {
                let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
                let r = integrate_with_breaks(
                    |z| 2.0 * phi(z) * model_ii_kernel_sq(z / w) * (t * z).cos(),
                    &[0.0, 2.0, 4.0, 9.5],
                    &KERNEL_QUAD,
                );
                converged(r.value, r.error, r.converged, KERNEL_QUAD.abs_tol)
            }
        }
    }

    /// `E[|C(z / w)|^2]`, the zero-delay average.
    pub fn gaussian_mean(&self) -> Result<f64> {
        match *self {
            Kernel::Cw => Ok(1.0),
            Kernel::ModelI { w } => Ok(crate::special::erfcx(std::f64::consts::SQRT_2 / w)),
            Kernel::ModelII { .. } => self.gaussian_average(0.0),
        }
    }
}

fn converged(value: f64, error: f64, ok: bool, tolerance: f64) -> Result<f64> {
    if ok {
        Ok(value)
    } else {
        Err(Error::QuadratureNotConverged { estimate: error, tolerance })
    }
}

/// `g(u) = int_0^inf |C_II(k)|^2 cos(k u) dk`.
///
/// `|C_II|^2` is the characteristic function of the difference of two
/// independent slab transit times, whose density has the mode expansion
/// `2 pi^2 sum (-1)^{m+1} m^2 e^{-m^2 pi^2 t}`. Convolving one factor
/// against the Laplace transform `sqrt(l)/sinh(sqrt(l))` of the other gives
/// `g(u) = 2 pi^4 sum (-1)^{m+1} m^3 / sinh(m pi) e^{-m^2 pi^2 |u|}`,
/// which converges geometrically for every `u`.
pub fn g_model_ii(u: f64) -> f64 {
    let u = u.abs();
    let pi2 = PI * PI;
    let mut sum = 0.0f64;
    for m in 1..=24 {
        let mf = m as f64;
        let term = mf.powi(3) / (mf * PI).sinh() * (-mf * mf * pi2 * u).exp();
        if term < 1e-18 * sum.abs() {
            break;
        }
        sum += if m % 2 == 1 { term } else { -term };
    }
    2.0 * pi2 * pi2 * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    #[allow(clippy::excessive_precision)]
    fn g_model_ii_reference_values() {
        // direct cosine transform of |C_II|^2, 30-digit quadrature
        let cases = [
            (0.0, 11.817_045_008_077_115_768),
            (0.01, 11.693_391_386_299_088_455),
            (0.1, 6.175_082_997_239_783_709_8),
            (0.3, 0.873_332_636_112_329_466_63),
        ];
        for (u, expected) in cases {
            assert!((g_model_ii(u) - expected).abs() < 1e-13 * expected, "u={u}");
        }
    }

    #[test]
    fn kernels_integrate_to_pi() {
        let opts = QuadOptions { max_intervals: 10_000, ..Default::default() };
        let one = integrate(|y| Kernel::ModelI { w: 1.0 }.f(y), 0.0, 1e3, &opts).value;
        assert!((2.0 * one - 2.0 * 500f64.atan()).abs() < 1e-10);
        let two = integrate(|y| Kernel::ModelII { w: 1.0 }.f(y), 0.0, 10.0, &opts).value;
        assert!((2.0 * two - PI).abs() < 1e-10, "{two}");
    }

    #[test]
    fn model_i_cosine_transform() {
        let g = |u: f64| integrate(|k: f64| (-2.0 * k).exp() * (k * u).cos(), 0.0, 40.0, &QuadOptions::default()).value;
        for &u in &[0.0, 0.5, 3.0] {
            assert!((g(u) - 2.0 / (4.0 + u * u)).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_average_generic_matches_model_i() {
        // Model I through the same quadrature used for Model II
        for &(t, w) in &[(0.0, 1.0), (1.0, 1.0), (2.5, 0.3), (5.0, 3.0)] {
            let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
            let q = integrate_with_breaks(
                |z| 2.0 * phi(z) * (-2.0 * z / w).exp() * (t * z).cos(),
                &[0.0, 2.0, 4.0, 9.5],
                &KERNEL_QUAD,
            );
            let closed = Kernel::ModelI { w }.gaussian_average(t).unwrap();
            assert!((q.value - closed).abs() < 1e-12, "t={t} w={w}");
        }
    }

    #[test]
    fn medium_serde() {
        assert_eq!(serde_json::to_string(&Medium::Cw).unwrap(), "\"cw\"");
        let m: Medium = serde_json::from_str(r#"{"model":"I","scale":2.0}"#).unwrap();
        assert_eq!(m, Medium::Correlated(CorrelationModel::ModelI { omega_corr: 2.0 }));
        assert!(serde_json::from_str::<Medium>("\"xx\"").is_err());
    }
}
