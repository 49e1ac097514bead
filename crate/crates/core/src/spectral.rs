//! Spectral amplitudes of the input light states.
//!
//! Frequencies are angular (rad per time unit) and the crystal group-delay
//! mismatches `nu_o`, `nu_e` are in the reciprocal time unit, so only the
//! products `nu * omega` and `sigma * eta` matter.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grid::FrequencyGrid;
use crate::special::{erf, sinc};

/// Literature-sourced group-delay mismatches for a BBO crystal (ps). These
/// are example defaults, not measured inputs; override them for real work.
pub const BBO_NU_O: f64 = -0.073;
pub const BBO_NU_E: f64 = -0.264;

/// Spectral width of the phase-matching factor in the monochromatic limit,
/// in units of 1/|eta_-|.
pub const CW_WIDTH_FACTOR: f64 = 2.78;
/// Width parameter of the Gaussian that matches sinc^2 at half maximum.
pub const SINC2_GAUSSIAN_WIDTH: f64 = 2.79;

/// Edge-mass budget for Gaussian spectral envelopes.
pub const EDGE_MASS_LIMIT_GAUSSIAN: f64 = 1e-6;
/// Edge-mass budget for sinc phase-matched amplitudes, whose |B|^2 tails
/// decay only as 1/x^2.
pub const EDGE_MASS_LIMIT_PHASE_MATCHED: f64 = 5e-3;

/// Smallest admissible value of the symmetrized-state normalization
/// denominator `1 + cos(theta) X0(s)`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CrystalRaw", into = "CrystalRaw")]
pub struct CrystalParams {
    nu_o: f64,
    nu_e: f64,
    eta_plus: f64,
    eta_minus: f64,
}

#[derive(Serialize, Deserialize)]
struct CrystalRaw {
    nu_o: f64,
    nu_e: f64,
}

impl TryFrom<CrystalRaw> for CrystalParams {
    type Error = Error;
    fn try_from(raw: CrystalRaw) -> Result<Self> {
        CrystalParams::new(raw.nu_o, raw.nu_e)
    }
}

impl From<CrystalParams> for CrystalRaw {
    fn from(c: CrystalParams) -> Self {
        CrystalRaw { nu_o: c.nu_o, nu_e: c.nu_e }
    }
}

impl CrystalParams {
    pub fn new(nu_o: f64, nu_e: f64) -> Result<Self> {
        ensure(nu_o.is_finite() && nu_e.is_finite(), || "crystal parameters must be finite".into())?;
        let eta_minus = nu_o - nu_e;
        ensure(eta_minus != 0.0, || "nu_o == nu_e gives an infinite biphoton coherence time".into())?;
        Ok(Self { nu_o, nu_e, eta_plus: nu_o + nu_e, eta_minus })
    }

    /// BBO example defaults ([`BBO_NU_O`], [`BBO_NU_E`]).
    pub fn bbo() -> Self {
        Self::new(BBO_NU_O, BBO_NU_E).expect("valid defaults")
    }

    pub fn nu_o(&self) -> f64 {
        self.nu_o
    }
    pub fn nu_e(&self) -> f64 {
        self.nu_e
    }
    pub fn eta_plus(&self) -> f64 {
        self.eta_plus
    }
    pub fn eta_minus(&self) -> f64 {
        self.eta_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpParams {
    /// Central frequency of each down-converted photon; the pump sits at twice this.
    pub omega_bar: f64,
    /// Pump spectral width.
    pub sigma: f64,
}

impl PumpParams {
    pub fn new(omega_bar: f64, sigma: f64) -> Result<Self> {
        let p = Self { omega_bar, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.omega_bar > 0.0 && self.omega_bar.is_finite(), || {
            format!("omega_bar must be positive, got {}", self.omega_bar)
        })?;
        ensure(self.sigma >= 0.0 && self.sigma.is_finite(), || format!("sigma must be >= 0, got {}", self.sigma))
    }
}

/// Input light state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateSpec {
    /// Collinear type-II down-converted pair.
    Entangled { pump: PumpParams, crystal: CrystalParams },
    /// `B(w1,w2) + e^{i theta} B(w2,w1)`, normalized.
    Symmetrized { pump: PumpParams, crystal: CrystalParams, theta: f64 },
    /// Two photons in identical Gaussian wave packets of bandwidth `delta`.
    Fock { omega_bar: f64, delta: f64 },
    /// Two-mode coherent state with one photon per mode on average.
    Coherent { omega_bar: f64, delta: f64 },
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Entangled { pump, .. } => pump.validate(),
            StateSpec::Symmetrized { pump, theta, .. } => {
                pump.validate()?;
                ensure((0.0..TAU).contains(&theta), || format!("theta must lie in [0, 2pi), got {theta}"))
            }
            StateSpec::Fock { omega_bar, delta } | StateSpec::Coherent { omega_bar, delta } => {
                ensure(omega_bar > 0.0 && omega_bar.is_finite(), || {
                    format!("omega_bar must be positive, got {omega_bar}")
                })?;
                ensure(delta > 0.0 && delta.is_finite(), || format!("delta must be positive, got {delta}"))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StateSpec::Entangled { .. } => "entangled",
            StateSpec::Symmetrized { .. } => "symmetrized",
            StateSpec::Fock { .. } => "fock",
            StateSpec::Coherent { .. } => "coherent",
        }
    }

    pub fn omega_bar(&self) -> f64 {
        match *self {
            StateSpec::Entangled { pump, .. } | StateSpec::Symmetrized { pump, .. } => pump.omega_bar,
            StateSpec::Fock { omega_bar, .. } | StateSpec::Coherent { omega_bar, .. } => omega_bar,
        }
    }

    /// Two-photon states (entangled, symmetrized, Fock) versus coherent light.
    pub fn is_two_photon(&self) -> bool {
        !matches!(self, StateSpec::Coherent { .. })
    }

    pub fn is_phase_matched(&self) -> bool {
        matches!(self, StateSpec::Entangled { .. } | StateSpec::Symmetrized { .. })
    }

    /// Default grid: centered at omega_bar, half-width
    /// 6 max(sigma, 1/|eta_-|, delta), 256 points.
    pub fn default_grid(&self) -> FrequencyGrid {
        self.grid_with(6.0, FrequencyGrid::DEFAULT_POINTS)
    }

    /// Grid with half-width `factor * max(sigma, 1/|eta_-|, delta)`.
    pub fn grid_with(&self, factor: f64, n: usize) -> FrequencyGrid {
        let scale = match *self {
            StateSpec::Entangled { pump, crystal } | StateSpec::Symmetrized { pump, crystal, .. } => {
                pump.sigma.max(1.0 / crystal.eta_minus().abs())
            }
            StateSpec::Fock { delta, .. } | StateSpec::Coherent { delta, .. } => delta,
        };
        FrequencyGrid { center: self.omega_bar(), half_width: factor * scale, n }
    }
}

/// Pump envelope `exp[-(omega_sum - 2 omega_bar)^2 / 2 sigma^2]`.
pub fn pump_envelope(omega_sum: f64, pump: &PumpParams) -> Result<f64> {
    if pump.sigma == 0.0 {
        return Err(Error::MonochromaticLimit);
    }
    let d = omega_sum - 2.0 * pump.omega_bar;
    Ok((-d * d / (2.0 * pump.sigma * pump.sigma)).exp())
}

/// Phase-matching factor `sinc[nu_o (w1 - wbar) + nu_e (w2 - wbar)]`.
pub fn phase_matching(omega1: f64, omega2: f64, omega_bar: f64, crystal: &CrystalParams) -> f64 {
    sinc(crystal.nu_o * (omega1 - omega_bar) + crystal.nu_e * (omega2 - omega_bar))
}

/// Normalized Gaussian wave packet; its modulus squared integrates to one.
pub fn gaussian_envelope(omega: f64, omega_bar: f64, delta: f64) -> f64 {
    let d = omega - omega_bar;
    (-d * d / (2.0 * delta * delta)).exp() / (PI.sqrt() * delta).sqrt()
}

/// Unnormalized `alpha(w1 + w2) Phi(w1, w2)`.
fn biphoton_unnormalized(omega1: f64, omega2: f64, pump: &PumpParams, crystal: &CrystalParams) -> f64 {
    let d = omega1 + omega2 - 2.0 * pump.omega_bar;
    (-d * d / (2.0 * pump.sigma * pump.sigma)).exp() * phase_matching(omega1, omega2, pump.omega_bar, crystal)
}

/// `K` from `|K|^2 pi^{3/2} sigma / |eta_-| = 1`.
///
/// This is exact for the true sinc: in sum/difference coordinates the
/// difference integral of sinc^2 equals pi independent of the sum.
pub fn closed_form_norm_constant(pump: &PumpParams, crystal: &CrystalParams) -> Result<f64> {
    if pump.sigma == 0.0 {
        return Err(Error::MonochromaticLimit);
    }
    Ok((crystal.eta_minus().abs() / (PI.powf(1.5) * pump.sigma)).sqrt())
}

/// Discretized `sum |f|^2 h^2` over the grid and the fraction of it carried
/// by the outermost ring of cells.
fn grid_mass<F: Fn(f64, f64) -> f64>(grid: &FrequencyGrid, modulus_sq: F) -> (f64, f64) {
    let pts = grid.points();
    let n = grid.n;
    let mut total = 0.0;
    let mut edge = 0.0;
    for (i, &w1) in pts.iter().enumerate() {
        for (j, &w2) in pts.iter().enumerate() {
            let m = modulus_sq(w1, w2);
            total += m;
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                edge += m;
            }
        }
    }
    let h = grid.spacing();
    (total * h * h, if total > 0.0 { edge / total } else { 1.0 })
}

fn check_edge(edge_fraction: f64, limit: f64) -> Result<()> {
    if edge_fraction > limit {
        Err(Error::GridTooNarrow { edge_fraction, limit })
    } else {
        Ok(())
    }
}

/// Entangled-state amplitude normalized on a frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonAmplitude {
    pub pump: PumpParams,
    pub crystal: CrystalParams,
    /// Normalization constant making the discretized integral of |B|^2 one.
    pub k: f64,
    /// Fraction of |B|^2 mass on the outermost grid cells.
    pub edge_fraction: f64,
}

impl BiphotonAmplitude {
    pub fn new(pump: PumpParams, crystal: CrystalParams, grid: &FrequencyGrid) -> Result<Self> {
        pump.validate()?;
        grid.validate()?;
        if pump.sigma == 0.0 {
            return Err(Error::MonochromaticLimit);
        }
        let (mass, edge_fraction) = grid_mass(grid, |a, b| biphoton_unnormalized(a, b, &pump, &crystal).powi(2));
        check_edge(edge_fraction, EDGE_MASS_LIMIT_PHASE_MATCHED)?;
        Ok(Self { pump, crystal, k: mass.sqrt().recip(), edge_fraction })
    }

    pub fn eval(&self, omega1: f64, omega2: f64) -> Complex64 {
        Complex64::new(self.k * biphoton_unnormalized(omega1, omega2, &self.pump, &self.crystal), 0.0)
    }
}

/// `K alpha(w1 + w2) Phi(w1, w2)` with `K` fixed by grid normalization.
pub fn biphoton_amplitude(
    omega1: f64,
    omega2: f64,
    pump: &PumpParams,
    crystal: &CrystalParams,
    grid: &FrequencyGrid,
) -> Result<Complex64> {
    Ok(BiphotonAmplitude::new(*pump, *crystal, grid)?.eval(omega1, omega2))
}

/// Exchange overlap `X0(s) = sqrt(pi) erf(s/2) / s` of the normalized
/// biphoton with its mirror image; even in s, X0(0) = 1.
pub fn exchange_overlap(s: f64) -> f64 {
    let s = s.abs();
    if s < 1e-3 {
        // 1 - s^2/12 + s^4/160
        let s2 = s * s;
        1.0 - s2 / 12.0 + s2 * s2 / 160.0
    } else {
        PI.sqrt() * erf(0.5 * s) / s
    }
}

/// Closed-form `|K_theta|^2 = 1 / (2 [1 + cos(theta) X0(s)])`, `s = sigma eta_+`.
pub fn symmetrized_norm_closed_form(theta: f64, s: f64) -> Result<f64> {
    let denominator = 1.0 + theta.cos() * exchange_overlap(s);
    if denominator < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateAntisymmetric { denominator });
    }
    Ok(0.5 / denominator)
}

/// `e^{i theta}`, exact at multiples of pi/2 so that theta = pi gives an
/// exactly antisymmetric amplitude.
pub fn exchange_phase(theta: f64) -> Complex64 {
    let quarter = theta / std::f64::consts::FRAC_PI_2;
    if quarter == quarter.round() {
        match (quarter as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, theta)
    }
}

/// Symmetrized entangled amplitude normalized on a frequency grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizedAmplitude {
    pub pump: PumpParams,
    pub crystal: CrystalParams,
    pub theta: f64,
    phase: Complex64,
    pub k: f64,
    pub edge_fraction: f64,
}

impl SymmetrizedAmplitude {
    pub fn new(theta: f64, pump: PumpParams, crystal: CrystalParams, grid: &FrequencyGrid) -> Result<Self> {
        StateSpec::Symmetrized { pump, crystal, theta }.validate()?;
        grid.validate()?;
        if pump.sigma == 0.0 {
            return Err(Error::MonochromaticLimit);
        }
        symmetrized_norm_closed_form(theta, pump.sigma * crystal.eta_plus())?;
        let phase = exchange_phase(theta);
        let raw = |a: f64, b: f64| {
            biphoton_unnormalized(a, b, &pump, &crystal) + phase * biphoton_unnormalized(b, a, &pump, &crystal)
        };
        let (mass, edge_fraction) = grid_mass(grid, |a, b| raw(a, b).norm_sqr());
        check_edge(edge_fraction, EDGE_MASS_LIMIT_PHASE_MATCHED)?;
        Ok(Self { pump, crystal, theta, phase, k: mass.sqrt().recip(), edge_fraction })
    }

    pub fn eval(&self, omega1: f64, omega2: f64) -> Complex64 {
        let b12 = biphoton_unnormalized(omega1, omega2, &self.pump, &self.crystal);
        let b21 = biphoton_unnormalized(omega2, omega1, &self.pump, &self.crystal);
        (b12 + self.phase * b21) * self.k
    }
}

/// `K_theta [B(w1,w2) + e^{i theta} B(w2,w1)]` normalized on `grid`.
pub fn symmetrized_amplitude(
    omega1: f64,
    omega2: f64,
    theta: f64,
    pump: &PumpParams,
    crystal: &CrystalParams,
    grid: &FrequencyGrid,
) -> Result<Complex64> {
    Ok(SymmetrizedAmplitude::new(theta, *pump, *crystal, grid)?.eval(omega1, omega2))
}

/// FWHM spectral widths of the ordinary and extraordinary beams relative to
/// their monochromatic-pump value `2.78/|eta_-|`, from the Gaussian
/// replacement of sinc^2.
pub fn spectral_width_ratio(sigma: f64, crystal: &CrystalParams) -> (f64, f64) {
    let abs_eta = crystal.eta_minus().abs();
    let cw = CW_WIDTH_FACTOR / abs_eta;
    // 2|nu|/|eta| sqrt(ln2 [2.79/(nu cw)^2 + (sigma/cw)^2]) with nu pulled inside the root.
    let ratio = |nu: f64| {
        2.0 / (abs_eta * cw) * (std::f64::consts::LN_2 * (SINC2_GAUSSIAN_WIDTH + (nu * sigma).powi(2))).sqrt()
    };
    (ratio(crystal.nu_o()), ratio(crystal.nu_e()))
}

/// Row-major `B(w_i, w_j)` on `grid`, normalized so that
/// `sum |B|^2 h^2 = 1`. Defined for the two-photon states.
pub fn two_photon_matrix(state: &StateSpec, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    state.validate()?;
    grid.validate()?;
    let pts = grid.points();
    let eval: Box<dyn Fn(f64, f64) -> Complex64> = match *state {
        StateSpec::Entangled { pump, crystal } => {
            let amp = BiphotonAmplitude::new(pump, crystal, grid)?;
            Box::new(move |a, b| amp.eval(a, b))
        }
        StateSpec::Symmetrized { pump, crystal, theta } => {
            let amp = SymmetrizedAmplitude::new(theta, pump, crystal, grid)?;
            Box::new(move |a, b| amp.eval(a, b))
        }
        StateSpec::Fock { omega_bar, delta } => {
            let env: Vec<f64> = pts.iter().map(|&w| gaussian_envelope(w, omega_bar, delta)).collect();
            let h = grid.spacing();
            let mass: f64 = env.iter().map(|e| e * e).sum::<f64>() * h;
            let edge = (env[0].powi(2) + env[grid.n - 1].powi(2)) * h / mass;
            // A ring cell carries the edge mass of one axis times the full other axis.
            check_edge(2.0 * edge, EDGE_MASS_LIMIT_GAUSSIAN)?;
            let norm = mass.recip();
            let mut out = Vec::with_capacity(grid.n * grid.n);
            for a in &env {
                for b in &env {
                    out.push(Complex64::new(a * b * norm, 0.0));
                }
            }
            return Ok(out);
        }
        StateSpec::Coherent { .. } => {
            return Err(Error::InvalidParameter("coherent state has no two-photon amplitude".into()));
        }
    };
    let mut out = Vec::with_capacity(grid.n * grid.n);
    for &a in &pts {
        for &b in &pts {
            out.push(eval(a, b));
        }
    }
    Ok(out)
}

/// `|alpha(w_i)|^2` of the coherent state on `grid`, normalized so that
/// `sum |alpha|^2 h = 1` (one photon per polarization mode on average).
pub fn coherent_profile(state: &StateSpec, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    state.validate()?;
    grid.validate()?;
    let StateSpec::Coherent { omega_bar, delta } = *state else {
        return Err(Error::InvalidParameter("coherent_profile needs a coherent state".into()));
    };
    let sq: Vec<f64> = grid.points().iter().map(|&w| gaussian_envelope(w, omega_bar, delta).powi(2)).collect();
    let mass: f64 = sq.iter().sum::<f64>() * grid.spacing();
    check_edge((sq[0] + sq[grid.n - 1]) * grid.spacing() / mass, EDGE_MASS_LIMIT_GAUSSIAN)?;
    Ok(sq.into_iter().map(|v| v / mass).collect())
}
