//! Direct quadrature of the disorder-averaged double-frequency integrals.
//!
//! Works in physical units with sum/difference coordinates
//! `p = d1 + d2`, `q = w1 - w2` (`d = w - omega_bar`), nested adaptive
//! Gauss-Kronrod in `q` (inner) and `p` (outer). For the phase-matched
//! states the norms use the exact identities
//! `int sinc^2(c + b) db = pi` and `int sinc(c + b) sinc(c - b) db = pi sinc(2c)`,
//! which do not involve the medium.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::correlation::{correlation_sq_magnitude, CorrelationModel};
use crate::error::{Error, Result};
use crate::quad::{breakpoints, integrate_with_breaks, QuadOptions};
use crate::special::sinc;
use crate::spectral::{exchange_overlap, exchange_phase, CrystalParams, PumpParams, StateSpec, DEGENERACY_THRESHOLD};

/// Default tolerance on R for [`rate_numeric`].
pub const NUMERIC_TOLERANCE: f64 = 1e-9;

/// Largest `|eta_- q / 2|` integrated for phase-matched states. Beyond it
/// the sinc products are bounded by `1/b^2` and the omitted tail enters the
/// returned error estimate.
pub const SINC_TAIL_CUTOFF: f64 = 5000.0;

/// Default options: absolute tolerance [`NUMERIC_TOLERANCE`] on R.
pub fn numeric_options() -> QuadOptions {
    QuadOptions { abs_tol: NUMERIC_TOLERANCE, rel_tol: 0.0, max_intervals: 20_000 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

/// Offset beyond which `|C|^2 < 1e-16`.
fn kernel_cutoff(model: &CorrelationModel) -> f64 {
    match *model {
        CorrelationModel::ModelI { omega_corr } => 18.5 * omega_corr,
        CorrelationModel::ModelII { omega_th } => 1100.0 * omega_th,
    }
}

/// `int dp int dq f(p, q)` over `[-p_max, p_max]` with per-`p` inner
/// breakpoints. Returns (value, error bound, converged).
fn nested<B, F>(p_max: f64, inner: B, f: F, tol: f64, max_intervals: usize) -> (f64, f64, bool)
where
    B: Fn(f64) -> Vec<f64>,
    F: Fn(f64, f64) -> f64,
{
    let inner_tol = 0.25 * tol / (2.0 * p_max);
    let worst_inner = Cell::new(0.0f64);
    let all_converged = Cell::new(true);
    let inner_opts = QuadOptions { abs_tol: inner_tol, rel_tol: 1e-13, max_intervals };
    let outer_opts = QuadOptions { abs_tol: 0.5 * tol, rel_tol: 1e-13, max_intervals };
    let outer = integrate_with_breaks(
        |p| {
            let pts = inner(p);
            let r = integrate_with_breaks(|q| f(p, q), &pts, &inner_opts);
            worst_inner.set(worst_inner.get().max(r.error));
            if !r.converged {
                all_converged.set(false);
            }
            r.value
        },
        &[-p_max, 0.0, p_max],
        &outer_opts,
    );
    let error = outer.error + worst_inner.get() * 2.0 * p_max;
    (outer.value, error, outer.converged && all_converged.get())
}

fn finish(value: f64, error: f64, converged: bool, opts: &QuadOptions) -> Result<QuadEstimate> {
    let tolerance = opts.abs_tol.max(opts.rel_tol * value.abs());
    if !converged || error > tolerance || !value.is_finite() {
        return Err(Error::QuadratureNotConverged { estimate: error, tolerance });
    }
    Ok(QuadEstimate { value, error })
}

/// Same-mode rate R at physical delay `tau` by direct quadrature.
///
/// `opts.abs_tol` / `opts.rel_tol` bound the error of R itself;
/// `opts.max_intervals` caps each adaptive level.
pub fn rate_numeric(state: &StateSpec, model: &CorrelationModel, tau: f64, opts: &QuadOptions) -> Result<QuadEstimate> {
    state.validate()?;
    model.validate()?;
    match *state {
        StateSpec::Entangled { pump, crystal } => phase_matched(&pump, &crystal, None, model, tau, opts),
        StateSpec::Symmetrized { pump, crystal, theta } => {
            phase_matched(&pump, &crystal, Some(theta), model, tau, opts)
        }
        StateSpec::Fock { delta, .. } => wave_packets(delta, false, model, tau, opts),
        StateSpec::Coherent { delta, .. } => wave_packets(delta, true, model, tau, opts),
    }
}

fn phase_matched(
    pump: &PumpParams,
    crystal: &CrystalParams,
    theta: Option<f64>,
    model: &CorrelationModel,
    tau: f64,
    opts: &QuadOptions,
) -> Result<QuadEstimate> {
    if pump.sigma == 0.0 {
        return Err(Error::MonochromaticLimit);
    }
    let sigma = pump.sigma;
    let (ep, em) = (crystal.eta_plus(), crystal.eta_minus());
    let c = theta.map(|t| exchange_phase(t).re).unwrap_or(0.0);
    let sn = theta.map(|t| exchange_phase(t).im).unwrap_or(0.0);
    if theta.is_some() {
        let denominator = 1.0 + c * exchange_overlap(sigma * ep);
        if denominator < DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateAntisymmetric { denominator });
        }
    }
    let p_max = 6.5 * sigma;
    let alpha_sq = |p: f64| (-p * p / (sigma * sigma)).exp();

    // Norm: (1/2) int dp alpha^2 (2 pi/|eta_-|) [1 + c sinc(eta_+ p)] times 2 when symmetrized.
    let mult = if theta.is_some() { 2.0 } else { 1.0 };
    let norm_opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: opts.max_intervals };
    let norm = integrate_with_breaks(
        |p| 0.5 * alpha_sq(p) * (2.0 * PI / em.abs()) * mult * (1.0 + c * sinc(ep * p)),
        &[-p_max, 0.0, p_max],
        &norm_opts,
    );
    if !norm.converged {
        return Err(Error::QuadratureNotConverged { estimate: norm.error, tolerance: norm_opts.abs_tol });
    }

    let cap = 2.0 * SINC_TAIL_CUTOFF / em.abs();
    let kc = kernel_cutoff(model);
    let q_max = kc.min(cap);
    let truncated = kc > cap;
    // panels about one sinc period wide keep the adaptive rule on the oscillations
    let period = 2.0 * PI / em.abs();
    let panels = (q_max / period).ceil().max(1.0) as usize;
    let max_intervals = opts.max_intervals.max(8 * panels);

    let integrand = |p: f64, q: f64| {
        let a = 0.5 * ep * p;
        let b = 0.5 * em * q;
        let b12 = sinc(a + b);
        let b21 = sinc(a - b);
        let k = correlation_sq_magnitude(q, model);
        let phase = q * tau;
        let val = match theta {
            None => b12 * b21 * phase.cos(),
            Some(_) => 2.0 * (b12 * b21 * phase.cos() + b12 * b12 * (c * phase.cos() + sn * phase.sin())),
        };
        0.5 * alpha_sq(p) * k * val
    };
    let inner = |p: f64| {
        let peak = (ep * p / em).abs();
        let mut interior: Vec<f64> = vec![0.0, peak, -peak];
        let step = q_max / panels as f64;
        interior.extend((1..panels).flat_map(|i| [i as f64 * step, -(i as f64) * step]));
        breakpoints(-q_max, q_max, &interior)
    };
    let tol = 0.5 * opts.abs_tol.max(1e-13) * norm.value;
    let (num, err, ok) = nested(p_max, inner, integrand, tol, max_intervals);

    let mut error = err / norm.value + norm.error / norm.value;
    if truncated {
        // |sinc(a+b) sinc(a-b)| <= 1/(b^2 - a^2) beyond the cutoff, on both sides
        let a_max = 0.5 * ep.abs() * p_max;
        let terms = if theta.is_some() { 4.0 } else { 1.0 };
        let kmax = correlation_sq_magnitude(q_max, model);
        let tail_b = 2.0 / (SINC_TAIL_CUTOFF - a_max).max(1.0);
        error += kmax * terms * (2.0 / em.abs()) * tail_b * 0.5 * sigma * PI.sqrt() / norm.value;
    }
    finish(1.0 + num / norm.value, error, ok, opts)
}

fn wave_packets(
    delta: f64,
    coherent: bool,
    model: &CorrelationModel,
    tau: f64,
    opts: &QuadOptions,
) -> Result<QuadEstimate> {
    // |B(w1)|^2 |B(w2)|^2 = exp(-(p^2 + q^2) / 2 delta^2) / (pi delta^2), dw1 dw2 = dp dq / 2
    let g = |p: f64, q: f64| 0.5 * (-(p * p + q * q) / (2.0 * delta * delta)).exp() / (PI * delta * delta);
    let p_max = 9.0 * delta;
    let q_max = p_max.min(kernel_cutoff(model));
    let inner = |_p: f64| breakpoints(-q_max, q_max, &[0.0]);
    let inner_full = |_p: f64| breakpoints(-p_max, p_max, &[0.0]);
    let (norm, norm_err, ok_n) = nested(p_max, inner_full, g, 1e-13, opts.max_intervals);
    let tol = 0.5 * opts.abs_tol.max(1e-13) * norm;
    let kernel = |p: f64, q: f64| {
        let k = correlation_sq_magnitude(q, model);
        let phase = if coherent { 2.0 * (0.5 * q * tau).cos().powi(2) } else { (q * tau).cos() };
        g(p, q) * k * phase
    };
    let (num, err, ok) = nested(p_max, inner, kernel, tol, opts.max_intervals);
    let base = if coherent { 2.0 } else { 1.0 };
    finish(base + num / norm, (err + norm_err) / norm, ok && ok_n, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::closed::{rate_coherent_model_i, rate_fock_model_i};

    #[test]
    fn fock_matches_closed_form() {
        let state = StateSpec::Fock { omega_bar: 10.0, delta: 2.0 };
        let model = CorrelationModel::ModelI { omega_corr: 2.0 };
        let r = rate_numeric(&state, &model, 0.5, &numeric_options()).unwrap();
        let closed = rate_fock_model_i(1.0, 1.0).unwrap();
        assert!((r.value - closed).abs() < 1e-8, "{} vs {closed}", r.value);
    }

    #[test]
    fn coherent_weak_disorder_peak() {
        let state = StateSpec::Coherent { omega_bar: 10.0, delta: 1.0 };
        let model = CorrelationModel::ModelI { omega_corr: 1e4 };
        let r = rate_numeric(&state, &model, 0.0, &numeric_options()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-3);
        let closed = rate_coherent_model_i(0.0, 1e4).unwrap();
        assert!((r.value - closed).abs() < 1e-8);
    }
}
