//! Monte Carlo random-medium oracle.
//!
//! Transmission coefficients are drawn as correlated circular Gaussian
//! vectors on a frequency grid and pushed through the per-realization
//! photocount correlators. Averaging over realizations gives an estimate
//! of the disorder-averaged rates that is independent of the closed forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::correlation::{covariance_factor, CorrelationModel, CovarianceFactor};
use crate::error::{ensure, Error, Result};
use crate::exec::{map_indexed, pairwise_sum, Execution};
use crate::grid::FrequencyGrid;
use crate::spectral::{coherent_profile, two_photon_matrix, StateSpec};

/// Half-width of [`mc_grid`] for phase-matched states, in units of `1/|eta_-|`.
pub const MC_HALF_WIDTH_PHASE_MATCHED: f64 = 16.0;
/// Half-width of [`mc_grid`] for Gaussian wave packets, in units of `delta`.
pub const MC_HALF_WIDTH_WAVE_PACKET: f64 = 6.0;
pub const DEFAULT_REALIZATIONS: usize = 10_000;
pub const DEFAULT_MC_POINTS: usize = 128;

/// Words reserved per (mode, polarization) sub-stream.
const SUBSTREAM_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub grid: FrequencyGrid,
    pub model: CorrelationModel,
    pub t_bar: f64,
    pub n_realizations: usize,
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
    /// Fail with `InsufficientRealizations` above this standard error.
    #[serde(default)]
    pub max_std_error: Option<f64>,
}

impl EnsembleConfig {
    pub fn new(grid: FrequencyGrid, model: CorrelationModel, t_bar: f64, n_realizations: usize, seed: u64) -> Self {
        Self { grid, model, t_bar, n_realizations, seed, execution: Execution::default(), max_std_error: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.model.validate()?;
        ensure(self.t_bar > 0.0 && self.t_bar <= 1.0, || format!("t_bar must lie in (0, 1], got {}", self.t_bar))?;
        ensure(self.n_realizations >= 2, || format!("need at least 2 realizations, got {}", self.n_realizations))?;
        if let Some(tol) = self.max_std_error {
            ensure(tol > 0.0, || format!("max_std_error must be positive, got {tol}"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    /// Sample mean and standard error of the mean (pairwise sums, fixed order).
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let n = values.len();
        ensure(n >= 2, || format!("need at least 2 samples, got {n}"))?;
        let mean = pairwise_sum(values) / n as f64;
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1) as f64;
        Ok(Self { mean, std_error: (var / n as f64).sqrt(), n })
    }

    /// `(mean - target) / std_error`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_error
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

/// Grid used for Monte Carlo runs of `state`, `n` points per axis.
///
/// Phase-matched amplitudes get a wider window than the default grid: the
/// grid normalization otherwise inflates `R - 1` by the truncated sinc tail.
pub fn mc_grid(state: &StateSpec, n: usize) -> FrequencyGrid {
    match *state {
        StateSpec::Entangled { pump, crystal } | StateSpec::Symmetrized { pump, crystal, .. } => {
            let half = (MC_HALF_WIDTH_PHASE_MATCHED / crystal.eta_minus().abs()).max(6.0 * pump.sigma);
            FrequencyGrid { center: state.omega_bar(), half_width: half, n }
        }
        StateSpec::Fock { .. } | StateSpec::Coherent { .. } => state.grid_with(MC_HALF_WIDTH_WAVE_PACKET, n),
    }
}

/// Transmission coefficients of one realization, indexed `[mode][frequency]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub t_o: Vec<Vec<Complex64>>,
    pub t_e: Vec<Vec<Complex64>>,
}

/// Covariance factor plus configuration, reused across realizations.
#[derive(Debug, Clone)]
pub struct Ensemble {
    cfg: EnsembleConfig,
    factor: CovarianceFactor,
}

impl Ensemble {
    pub fn new(cfg: EnsembleConfig) -> Result<Self> {
        cfg.validate()?;
        let factor = covariance_factor(&cfg.grid, &cfg.model, cfg.t_bar)?;
        Ok(Self { cfg, factor })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.cfg
    }

    pub fn factor(&self) -> &CovarianceFactor {
        &self.factor
    }

    /// Realization `index` for `mode_count` output modes. Each of the
    /// `2 mode_count` vectors reads its own sub-stream of the master seed.
    pub fn sample(&self, mode_count: usize, index: usize) -> Transmission {
        let n = self.factor.dim();
        let mut rng = ChaCha12Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index as u64);
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut draw = |mode: usize, pol: usize| {
            rng.set_word_pos(((mode * 2 + pol) as u128) << SUBSTREAM_SHIFT);
            for zi in z.iter_mut() {
                let x: f64 = rng.sample(StandardNormal);
                let y: f64 = rng.sample(StandardNormal);
                *zi = Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2;
            }
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            self.factor.apply(&z, &mut out);
            out
        };
        let mut t_o = Vec::with_capacity(mode_count);
        let mut t_e = Vec::with_capacity(mode_count);
        for mode in 0..mode_count {
            t_o.push(draw(mode, 0));
            t_e.push(draw(mode, 1));
        }
        Transmission { t_o, t_e }
    }

    /// Per-realization same-mode rate `<:n^2:> / (2 t_bar^2)` at delay `tau`.
    pub fn realizations(&self, state: &StateSpec, tau: f64) -> Result<Vec<f64>> {
        let obs = Observable::new(state, &self.cfg.grid)?;
        let phase = delay_phases(&self.cfg.grid, tau);
        let norm = 2.0 * self.cfg.t_bar * self.cfg.t_bar;
        Ok(self.map(|i| {
            let tr = self.sample(1, i);
            let te = delayed(&tr.t_e[0], &phase);
            obs.same_mode(&tr.t_o[0], &te) / norm
        }))
    }

    pub fn correlator(&self, state: &StateSpec, tau: f64) -> Result<McEstimate> {
        self.finish(&self.realizations(state, tau)?)
    }

    /// Cross-mode rate `<:n_1 n_2:> / t_bar^2` from two independent output modes.
    pub fn correlator_cross(&self, state: &StateSpec, tau: f64) -> Result<McEstimate> {
        let obs = Observable::new(state, &self.cfg.grid)?;
        let phase = delay_phases(&self.cfg.grid, tau);
        let norm = self.cfg.t_bar * self.cfg.t_bar;
        let values = self.map(|i| {
            let tr = self.sample(2, i);
            let te0 = delayed(&tr.t_e[0], &phase);
            let te1 = delayed(&tr.t_e[1], &phase);
            obs.cross_mode(&tr.t_o[0], &te0, &tr.t_o[1], &te1) / norm
        });
        self.finish(&values)
    }

    /// Mean photocount of one output mode over `t_bar`.
    pub fn mean_photocount(&self, state: &StateSpec) -> Result<McEstimate> {
        let obs = Observable::new(state, &self.cfg.grid)?;
        let values = self.map(|i| {
            let tr = self.sample(1, i);
            obs.photocount(&tr.t_o[0], &tr.t_e[0]) / self.cfg.t_bar
        });
        self.finish(&values)
    }

    fn map<F: Fn(usize) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        map_indexed(self.cfg.execution, self.cfg.n_realizations, f)
    }

    fn finish(&self, values: &[f64]) -> Result<McEstimate> {
        let est = McEstimate::from_samples(values)?;
        if let Some(requested) = self.cfg.max_std_error {
            if est.std_error > requested {
                return Err(Error::InsufficientRealizations { std_error: est.std_error, requested });
            }
        }
        Ok(est)
    }
}

fn delay_phases(grid: &FrequencyGrid, tau: f64) -> Vec<Complex64> {
    grid.detunings().iter().map(|&d| Complex64::from_polar(1.0, -d * tau)).collect()
}

fn delayed(t: &[Complex64], phase: &[Complex64]) -> Vec<Complex64> {
    t.iter().zip(phase).map(|(a, b)| a * b).collect()
}

/// Spectral weights of a state on the grid, with the cell areas folded in.
enum Observable {
    /// `m[k l] = |B_kl|^2 h^2`, `g[k l] = B_kl conj(B_lk) h^2`.
    TwoPhoton { n: usize, m: Vec<f64>, g: Vec<Complex64> },
    /// `a[k] = |alpha_k|^2 h`.
    Coherent { a: Vec<f64> },
}

impl Observable {
    fn new(state: &StateSpec, grid: &FrequencyGrid) -> Result<Self> {
        let h = grid.spacing();
        if let StateSpec::Coherent { .. } = state {
            let a = coherent_profile(state, grid)?.into_iter().map(|v| v * h).collect();
            return Ok(Observable::Coherent { a });
        }
        let n = grid.n;
        let b = two_photon_matrix(state, grid)?;
        let h2 = h * h;
        let m = b.iter().map(|v| v.norm_sqr() * h2).collect();
        let mut g = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                g.push(b[k * n + l] * b[l * n + k].conj() * h2);
            }
        }
        Ok(Observable::TwoPhoton { n, m, g })
    }

    /// `<:n^2:>` of one output mode.
    fn same_mode(&self, t_o: &[Complex64], t_e: &[Complex64]) -> f64 {
        match self {
            Observable::TwoPhoton { .. } => self.pair(t_o, t_e, t_o, t_e),
            Observable::Coherent { a } => {
                let i = intensity(a, t_o, t_e);
                i * i
            }
        }
    }

    /// `<:n_1 n_2:>` of two output modes.
    fn cross_mode(&self, o1: &[Complex64], e1: &[Complex64], o2: &[Complex64], e2: &[Complex64]) -> f64 {
        match self {
            Observable::TwoPhoton { .. } => self.pair(o1, e1, o2, e2),
            Observable::Coherent { a } => intensity(a, o1, e1) * intensity(a, o2, e2),
        }
    }

    /// `sum_kl |t_o1(k) t_e2(l) B_kl + t_o2(l) t_e1(k) B_lk|^2 h^2`, expanded
    /// into its two direct terms and the exchange interference.
    fn pair(&self, o1: &[Complex64], e1: &[Complex64], o2: &[Complex64], e2: &[Complex64]) -> f64 {
        let Observable::TwoPhoton { n, m, g } = self else { unreachable!() };
        let n = *n;
        let abs2 = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).collect::<Vec<f64>>();
        let (po1, pe1, po2, pe2) = (abs2(o1), abs2(e1), abs2(o2), abs2(e2));
        let x: Vec<Complex64> = o1.iter().zip(e1).map(|(a, b)| a * b.conj()).collect();
        let y: Vec<Complex64> = e2.iter().zip(o2).map(|(a, b)| a * b.conj()).collect();
        let mut direct = 0.0;
        let mut exchange = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let row_m = &m[k * n..(k + 1) * n];
            let row_g = &g[k * n..(k + 1) * n];
            let mut d = 0.0;
            let mut ex = Complex64::new(0.0, 0.0);
            for l in 0..n {
                d += row_m[l] * (po1[k] * pe2[l] + po2[k] * pe1[l]);
                ex += row_g[l] * y[l];
            }
            direct += d;
            exchange += x[k] * ex;
        }
        direct + 2.0 * exchange.re
    }

    /// Photocount of one output mode.
    fn photocount(&self, t_o: &[Complex64], t_e: &[Complex64]) -> f64 {
        match self {
            Observable::TwoPhoton { n, m, .. } => {
                let n = *n;
                let mut total = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        total += m[k * n + l] * (t_o[k].norm_sqr() + t_e[l].norm_sqr());
                    }
                }
                total
            }
            Observable::Coherent { a } => intensity(a, t_o, t_e),
        }
    }
}

/// `sum_k a_k |t_o(k) + t_e(k)|^2`.
fn intensity(a: &[f64], t_o: &[Complex64], t_e: &[Complex64]) -> f64 {
    a.iter().zip(t_o.iter().zip(t_e)).map(|(w, (o, e))| w * (o + e).norm_sqr()).sum()
}

/// Draws of one realization; see [`Ensemble::sample`].
pub fn sample_transmission(cfg: &EnsembleConfig, mode_count: usize, realization_index: usize) -> Result<Transmission> {
    ensure(mode_count >= 1, || "mode_count must be at least 1".into())?;
    Ok(Ensemble::new(*cfg)?.sample(mode_count, realization_index))
}

/// Per-realization same-mode rates, in realization order.
pub fn mc_realizations(state: &StateSpec, cfg: &EnsembleConfig, tau: f64) -> Result<Vec<f64>> {
    Ensemble::new(*cfg)?.realizations(state, tau)
}

/// Monte Carlo estimate of the same-mode rate R at delay `tau`.
pub fn mc_correlator(state: &StateSpec, cfg: &EnsembleConfig, tau: f64) -> Result<McEstimate> {
    Ensemble::new(*cfg)?.correlator(state, tau)
}

/// Monte Carlo estimate of the cross-mode rate `R_ij`, `i != j`.
pub fn mc_correlator_cross(state: &StateSpec, cfg: &EnsembleConfig, tau: f64) -> Result<McEstimate> {
    Ensemble::new(*cfg)?.correlator_cross(state, tau)
}

/// Monte Carlo estimate of `n_bar / t_bar`.
pub fn mc_mean_photocount(cfg: &EnsembleConfig, state: &StateSpec) -> Result<McEstimate> {
    Ensemble::new(*cfg)?.mean_photocount(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRelation {
    /// Coincidence probability `P_2`.
    pub p2: f64,
    /// Correlation `C_ij = <:n_i n_j:> + delta_ij n_bar`.
    pub correlation: f64,
}

/// `P_2 = <:n_i n_j:> / (1 + delta_ij)`.
pub fn rate_correlation_relation(normal_ordered: f64, mean_n: f64, same_mode: bool) -> Result<CoincidenceRelation> {
    ensure(normal_ordered >= 0.0 && mean_n >= 0.0, || "moments must be non-negative".into())?;
    Ok(if same_mode {
        CoincidenceRelation { p2: normal_ordered / 2.0, correlation: normal_ordered + mean_n }
    } else {
        CoincidenceRelation { p2: normal_ordered, correlation: normal_ordered }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterReport {
    pub p2_11: f64,
    pub p2_22: f64,
    pub p2_12: f64,
    pub n1_sq_normal: f64,
    pub n1_n2_normal: f64,
    /// `P_2` recovered from the normal-ordered moments.
    pub relation_11: f64,
    pub relation_12: f64,
    pub passed: bool,
}

/// Two one-photon packets on a symmetric beam splitter, by enumerating the
/// four equally likely routings.
pub fn beam_splitter_check() -> BeamSplitterReport {
    let mut p2 = [[0.0; 2]; 2];
    let (mut n1_sq, mut n1_n2) = (0.0, 0.0);
    for first in 0..2 {
        for second in 0..2 {
            let p = 0.25;
            let n1 = [first, second].iter().filter(|&&m| m == 0).count() as f64;
            let n2 = 2.0 - n1;
            let (a, b) = if first <= second { (first, second) } else { (second, first) };
            p2[a][b] += p;
            n1_sq += p * n1 * (n1 - 1.0);
            n1_n2 += p * n1 * n2;
        }
    }
    let relation_11 = n1_sq / 2.0;
    let relation_12 = n1_n2;
    let passed = p2[0][0] == 0.25
        && p2[1][1] == 0.25
        && p2[0][1] == 0.5
        && n1_sq == 0.5
        && n1_n2 == 0.5
        && relation_11 == p2[0][0]
        && relation_12 == p2[0][1];
    BeamSplitterReport {
        p2_11: p2[0][0],
        p2_22: p2[1][1],
        p2_12: p2[0][1],
        n1_sq_normal: n1_sq,
        n1_n2_normal: n1_n2,
        relation_11,
        relation_12,
        passed,
    }
}
