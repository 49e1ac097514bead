//! Closed-form and one-dimensional rate formulas in dimensionless variables.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{ensure, Error, Result};
use crate::special::erf;
use crate::spectral::{exchange_overlap, exchange_phase, CrystalParams, DEGENERACY_THRESHOLD};

/// Dimensionless delay, pump width and correlation width.
///
/// Phase-matched states: `t = tau / eta_-`, `s = sigma eta_+`, `w = |Omega eta_-|`.
/// Gaussian wave packets: `t = tau delta`, `w = Omega / delta`, `s` unused.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessArgs {
    pub t: f64,
    pub s: f64,
    pub w: f64,
}

impl DimensionlessArgs {
    pub fn new(t: f64, s: f64, w: f64) -> Self {
        Self { t, s, w }
    }

    pub fn phase_matched(tau: f64, sigma: f64, omega: f64, crystal: &CrystalParams) -> Self {
        Self { t: tau / crystal.eta_minus(), s: sigma * crystal.eta_plus(), w: (omega * crystal.eta_minus()).abs() }
    }

    pub fn wave_packet(tau: f64, delta: f64, omega: f64) -> Self {
        Self { t: tau * delta, s: 0.0, w: omega / delta }
    }
}

/// `I(s, x) = erf(s (1 - |x|) / 2) / (s sqrt(pi))`, even in `s`.
pub fn i_function(s: f64, x: f64) -> f64 {
    let s = s.abs();
    let u = 1.0 - x.abs();
    if u <= 0.0 {
        return 0.0;
    }
    if s < 1e-3 {
        let y2 = (0.5 * s * u).powi(2);
        return u / PI * (1.0 - y2 / 3.0 + y2 * y2 / 10.0);
    }
    erf(0.5 * s * u) / (s * PI.sqrt())
}

/// `J(s, x) = (1 - |x|) exp(-s^2 x^2 / 4) / pi`.
pub fn j_function(s: f64, x: f64) -> f64 {
    let u = 1.0 - x.abs();
    if u <= 0.0 {
        return 0.0;
    }
    u / PI * (-0.25 * s * s * x * x).exp()
}

/// `(I - J) / (s/2)^2`, finite at `s = 0`.
fn i_minus_j_scaled(s: f64, x: f64) -> f64 {
    let u = 1.0 - x.abs();
    if u <= 0.0 {
        return 0.0;
    }
    let a = 0.25 * s * s;
    if a > 1.0 {
        return (i_function(s, x) - j_function(s, x)) / a;
    }
    // (u/pi) sum_{n>=1} (-1)^n a^{n-1}/n! [u^{2n}/(2n+1) - x^{2n}]
    let (u2, x2) = (u * u, x * x);
    let (mut un, mut xn, mut coef, mut sum) = (1.0, 1.0, 1.0, 0.0);
    for n in 1..60 {
        un *= u2;
        xn *= x2;
        coef *= -1.0 / n as f64;
        if n > 1 {
            coef *= a;
        }
        let term = coef * (un / (2 * n + 1) as f64 - xn);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && n > 2 {
            break;
        }
    }
    u / PI * sum
}

/// `(1 - X0(s)) / (s/2)^2`, finite at `s = 0` (value 1/3).
fn one_minus_overlap_scaled(s: f64) -> f64 {
    let a = 0.25 * s * s;
    if a > 1.0 {
        return (1.0 - exchange_overlap(s)) / a;
    }
    // -sum_{n>=1} (-1)^n a^{n-1} / (n! (2n+1))
    let (mut coef, mut sum) = (1.0, 0.0);
    for n in 1..60 {
        coef *= -1.0 / n as f64;
        if n > 1 {
            coef *= a;
        }
        let term = -coef / (2 * n + 1) as f64;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Weak-disorder rate `1 + (sqrt(pi)/s) erf(s (1 - |t|)/2)` for `|t| < 1`.
pub fn rate_entangled_cw_limit(t: f64, s: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 1.0;
    }
    1.0 + PI * i_function(s, t)
}

/// Entangled-state rate `1 + int f(x + t) I(s, x) dx` for any kernel.
pub fn rate_entangled(args: DimensionlessArgs, kernel: Kernel) -> Result<f64> {
    let t = args.t.abs();
    let s = args.s;
    if let Kernel::Cw = kernel {
        return Ok(rate_entangled_cw_limit(t, s));
    }
    Ok(1.0 + kernel.smear(t, |x| i_function(s, x))?)
}

/// Entangled state with the exponential kernel; `w = inf` gives the cw limit,
/// `s = 0` the monochromatic-pump limit.
pub fn rate_entangled_model_i(args: DimensionlessArgs) -> Result<f64> {
    rate_entangled(args, Kernel::model_i(args.w)?)
}

/// Symmetrized-state rate (same mode) for any kernel.
///
/// Written as `1 + [a N1 + b N2] / [a D1 + b D2]` with `a = (s/2)^2`,
/// `b = 1 + cos(theta)`, `N1 = int f (I - J)/a`, `N2 = int f J`,
/// `D1 = (1 - X0)/a`, `D2 = X0`, so neither factor cancels near
/// `theta = pi`, `s = 0`. At `theta = pi` exactly the result is
/// `1 + N1/D1` for every `s`, including the `s -> 0` limit. With
/// `allow_limit = false` a vanishing denominator is reported instead.
pub fn rate_theta(args: DimensionlessArgs, theta: f64, kernel: Kernel, allow_limit: bool) -> Result<f64> {
    ensure(theta.is_finite(), || format!("theta must be finite, got {theta}"))?;
    let t = args.t.abs();
    let s = args.s.abs();
    let a = 0.25 * s * s;
    let b = 1.0 + exchange_phase(theta).re;
    let d1 = one_minus_overlap_scaled(s);
    let d2 = exchange_overlap(s);
    let den = a * d1 + b * d2;
    if den < DEGENERACY_THRESHOLD && !allow_limit {
        return Err(Error::DegenerateAntisymmetric { denominator: den });
    }
    let n1 = kernel.smear(t, |x| i_minus_j_scaled(s, x))?;
    if b == 0.0 {
        return Ok(1.0 + n1 / d1);
    }
    let n2 = kernel.smear(t, |x| j_function(s, x))?;
    if den == 0.0 {
        return Ok(1.0 + n2 / d2);
    }
    Ok(1.0 + (a * n1 + b * n2) / den)
}

/// Symmetrized state with the exponential kernel. The degenerate
/// `theta = pi`, `s -> 0` point is evaluated as its limit.
pub fn rate_theta_model_i(t: f64, s: f64, w: f64, theta: f64) -> Result<f64> {
    rate_theta(DimensionlessArgs::new(t, s, w), theta, Kernel::model_i(w)?, true)
}

/// Fock-state rate `1 + E[|C(z/w)|^2 cos(t z)]`.
pub fn rate_fock(t: f64, kernel: Kernel) -> Result<f64> {
    Ok(1.0 + kernel.gaussian_average(t)?)
}

/// Coherent-state rate `2 + E[|C|^2] + E[|C|^2 cos(t z)]`.
pub fn rate_coherent(t: f64, kernel: Kernel) -> Result<f64> {
    Ok(2.0 + kernel.gaussian_mean()? + kernel.gaussian_average(t)?)
}

/// `1 + Re erfcx((2/w - i|t|)/sqrt 2)`: the closed form written with the
/// scaled complementary error function, so the decaying Gaussian prefactor
/// and the growing error-function terms never appear separately.
pub fn rate_fock_model_i(t: f64, w: f64) -> Result<f64> {
    rate_fock(t, Kernel::model_i(w)?)
}

/// `2 + erfcx(sqrt2 / w) + Re erfcx((2/w - i|t|)/sqrt 2)`.
pub fn rate_coherent_model_i(t: f64, w: f64) -> Result<f64> {
    rate_coherent(t, Kernel::model_i(w)?)
}
