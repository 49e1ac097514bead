//! Normalized photocount coincidence rates.

pub mod closed;
pub mod kernel;
pub mod numeric;

use serde::{Deserialize, Serialize};

pub use crate::special::erf_complex;
pub use closed::{
    i_function, j_function, rate_coherent, rate_coherent_model_i, rate_entangled, rate_entangled_cw_limit,
    rate_entangled_model_i, rate_fock, rate_fock_model_i, rate_theta, rate_theta_model_i, DimensionlessArgs,
};
pub use kernel::{g_model_ii, Kernel, Medium};
pub use numeric::{numeric_options, rate_numeric, QuadEstimate, NUMERIC_TOLERANCE};

use crate::correlation::CorrelationModel;
use crate::error::{ensure, Error, Result};
use crate::exec::{map_slice, Execution};
use crate::quad::QuadOptions;
use crate::spectral::StateSpec;

/// Dimensionless arguments of `state` at physical delay `tau` in `medium`.
pub fn dimensionless(state: &StateSpec, medium: &Medium, tau: f64) -> DimensionlessArgs {
    let omega = match medium {
        Medium::Cw => f64::INFINITY,
        Medium::Correlated(m) => m.scale(),
    };
    match *state {
        StateSpec::Entangled { pump, crystal } | StateSpec::Symmetrized { pump, crystal, .. } => {
            DimensionlessArgs::phase_matched(tau, pump.sigma, omega, &crystal)
        }
        StateSpec::Fock { delta, .. } | StateSpec::Coherent { delta, .. } => {
            DimensionlessArgs::wave_packet(tau, delta, omega)
        }
    }
}

fn kernel_for(medium: &Medium, w: f64) -> Result<Kernel> {
    match medium {
        Medium::Cw => Ok(Kernel::Cw),
        Medium::Correlated(m) => Kernel::new(m, w),
    }
}

/// Same-mode rate from the closed forms and their one-dimensional reductions.
pub fn rate(state: &StateSpec, medium: &Medium, tau: f64) -> Result<f64> {
    state.validate()?;
    if let Medium::Correlated(m) = medium {
        m.validate()?;
    }
    let args = dimensionless(state, medium, tau);
    rate_dimensionless(state, medium, args)
}

/// As [`rate`] with precomputed dimensionless arguments.
pub fn rate_dimensionless(state: &StateSpec, medium: &Medium, args: DimensionlessArgs) -> Result<f64> {
    let kernel = kernel_for(medium, args.w)?;
    match *state {
        StateSpec::Entangled { .. } => rate_entangled(args, kernel),
        StateSpec::Symmetrized { theta, .. } => rate_theta(args, theta, kernel, true),
        StateSpec::Fock { .. } => rate_fock(args.t, kernel),
        StateSpec::Coherent { .. } => rate_coherent(args.t, kernel),
    }
}

/// Cross-mode rate (`i != j`), independent of every parameter.
pub fn rate_cross_mode(state: &StateSpec) -> f64 {
    if state.is_two_photon() {
        2.0
    } else {
        4.0
    }
}

/// Mean photocount per output mode, `2 t_bar` for every state.
pub fn mean_photocount(t_bar: f64) -> Result<f64> {
    ensure(t_bar > 0.0 && t_bar <= 1.0, || format!("t_bar must lie in (0, 1], got {t_bar}"))?;
    Ok(2.0 * t_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// Sampled R(tau) with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub points: Vec<(f64, f64)>,
    pub state: StateSpec,
    pub medium: Medium,
    pub method: Method,
    pub tolerances: Option<QuadOptions>,
}

impl RateCurve {
    pub fn new(
        points: Vec<(f64, f64)>,
        state: StateSpec,
        medium: Medium,
        method: Method,
        tolerances: Option<QuadOptions>,
    ) -> Result<Self> {
        let c = Self { points, state, medium, method, tolerances };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.points.windows(2).all(|w| w[1].0 > w[0].0), || "taus must be strictly increasing".into())?;
        ensure(self.points.iter().all(|p| p.1 >= -1e-9 && p.1.is_finite()), || "rates must be >= 0".into())
    }

    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }
}

/// `n` evenly spaced values over `[min, max]`.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
}

/// Closed-form curve over `taus`; points are evaluated in parallel and kept in order.
pub fn rate_curve(state: &StateSpec, medium: &Medium, taus: &[f64], exec: Execution) -> Result<RateCurve> {
    let values: Result<Vec<f64>> = map_slice(exec, taus, |&tau| rate(state, medium, tau)).into_iter().collect();
    let points = taus.iter().copied().zip(values?).collect();
    RateCurve::new(points, *state, *medium, Method::ClosedForm, None)
}

/// Quadrature curve over `taus`.
pub fn rate_curve_numeric(
    state: &StateSpec,
    model: &CorrelationModel,
    taus: &[f64],
    opts: &QuadOptions,
    exec: Execution,
) -> Result<RateCurve> {
    let values: Result<Vec<QuadEstimate>> =
        map_slice(exec, taus, |&tau| rate_numeric(state, model, tau, opts)).into_iter().collect();
    let points = taus.iter().copied().zip(values?.into_iter().map(|e| e.value)).collect();
    RateCurve::new(points, *state, Medium::Correlated(*model), Method::Quadrature, Some(*opts))
}

/// Relative change allowed over the last decade of `|tau|` for the tail
/// value to count as `R(inf)`.
pub const TAIL_TOLERANCE: f64 = 1e-4;

/// Visibility `|R(0) - R(inf)| / (R(0) + R(inf))`, with `R(inf)` taken
/// from the point of largest `|tau|`.
pub fn visibility(curve: &RateCurve) -> Result<f64> {
    visibility_of_points(&curve.points)
}

/// As [`visibility`] for raw `(tau, R)` pairs.
pub fn visibility_of_points(points: &[(f64, f64)]) -> Result<f64> {
    let r0 = points.iter().find(|p| p.0 == 0.0).ok_or(Error::MissingOrigin)?.1;
    let &(tau_max, r_inf) = points.iter().max_by(|a, b| a.0.abs().total_cmp(&b.0.abs())).ok_or(Error::MissingOrigin)?;
    let tau_max = tau_max.abs();
    let decade: Vec<f64> =
        points.iter().filter(|p| p.0.abs() >= 0.1 * tau_max && p.0.abs() > 0.0).map(|p| p.1).collect();
    if tau_max == 0.0 || decade.len() < 2 {
        return Err(Error::TailNotConverged { change: f64::INFINITY, limit: TAIL_TOLERANCE });
    }
    let change = decade.iter().map(|r| (r - r_inf).abs()).fold(0.0, f64::max) / r_inf.abs().max(f64::MIN_POSITIVE);
    if change >= TAIL_TOLERANCE {
        return Err(Error::TailNotConverged { change, limit: TAIL_TOLERANCE });
    }
    Ok((r0 - r_inf).abs() / (r0 + r_inf))
}

/// Margin below 2 needed to call a rate nonclassical.
pub const NONCLASSICAL_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LightClass {
    ConsistentWithClassical,
    Nonclassical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: LightClass,
    /// `dI^2 / I^2 = R/2 - 1` when non-negative.
    pub implied_fluctuation: Option<f64>,
}

/// Classical light has `R = 2 (1 + dI^2 / I^2) >= 2`.
pub fn classify_semiclassical(r_value: f64) -> Result<Classification> {
    ensure(r_value >= 0.0, || format!("rate must be >= 0, got {r_value}"))?;
    let class = if r_value < 2.0 - NONCLASSICAL_MARGIN {
        LightClass::Nonclassical
    } else {
        LightClass::ConsistentWithClassical
    };
    let fluct = r_value / 2.0 - 1.0;
    Ok(Classification { class, implied_fluctuation: (fluct >= 0.0).then_some(fluct) })
}
