//! Tabular datasets: figure curves, parameter sweeps and Monte Carlo
//! validation reports, with a CSV writer.
//!
//! Every CSV starts with `#` comment lines holding the crate version and
//! the resolved configuration as JSON, followed by one header row and the
//! data rows. Fields are comma separated, floats use the shortest
//! round-trip representation and lines end in LF.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::correlation::CorrelationModel;
use crate::error::{ensure, Error, Result};
use crate::exec::{map_slice, Execution};
use crate::oracle::{mc_correlator, mc_grid, EnsembleConfig, DEFAULT_MC_POINTS, DEFAULT_REALIZATIONS};
use crate::quad::QuadOptions;
use crate::rates::{
    linspace, rate, rate_coherent, rate_entangled, rate_entangled_cw_limit, rate_fock, rate_numeric, rate_theta,
    DimensionlessArgs, Kernel, Medium, Method,
};
use crate::spectral::{spectral_width_ratio, CrystalParams, StateSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A table with a configuration echo.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# speckle {VERSION}");
        let _ = writeln!(out, "# config {}", serde_json::to_string(&self.config).unwrap_or_default());
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Numeric column by name; empty cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().filter_map(|r| r[idx].parse().ok()).collect())
    }
}

/// Shortest round-trip float formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Parses `(tau, R)` pairs from a two-or-more column CSV, skipping `#`
/// comments and a non-numeric header. The first two columns are used.
pub fn parse_curve(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let (a, b) = (fields.next().unwrap_or(""), fields.next().unwrap_or(""));
        match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push((x, y)),
            _ if points.is_empty() => continue,
            _ => return Err(Error::Config(format!("line {}: expected two numbers", lineno + 1))),
        }
    }
    ensure(!points.is_empty(), || "curve has no data rows".into())?;
    Ok(points)
}

/// Which correlation model a figure uses for its finite-`w` curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ModelChoice {
    I,
    #[default]
    II,
}

impl ModelChoice {
    pub fn kernel(self, w: f64) -> Result<Kernel> {
        match self {
            ModelChoice::I => Kernel::model_i(w),
            ModelChoice::II => Kernel::model_ii(w),
        }
    }
}

/// Default `s` values of figure 3. The three curves' values are not given
/// numerically, so these are placeholders.
pub const FIG3_DEFAULT_S: [f64; 3] = [0.0, 2.0, 8.0];
/// Disorder strengths of figures 4-6 and 8-10.
pub const FIGURE_W: [f64; 3] = [f64::INFINITY, 1.0, 0.3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRequest {
    pub id: u32,
    #[serde(default)]
    pub model: ModelChoice,
    /// Needed by figure 2 only.
    #[serde(default)]
    pub crystal: Option<CrystalParams>,
    /// Figure 3 curves; defaults to [`FIG3_DEFAULT_S`].
    #[serde(default)]
    pub s_values: Option<Vec<f64>>,
    /// Abscissa samples; per-figure default when absent.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub execution: Execution,
}

impl FigureRequest {
    pub fn new(id: u32) -> Self {
        Self {
            id,
            model: ModelChoice::default(),
            crystal: None,
            s_values: None,
            points: None,
            execution: Execution::default(),
        }
    }
}

fn w_label(w: f64) -> String {
    if w.is_infinite() {
        "inf".into()
    } else {
        fmt_f64(w)
    }
}

struct Curve {
    name: String,
    eval: Box<dyn Fn(f64) -> Result<f64> + Sync + Send>,
}

fn curve<F: Fn(f64) -> Result<f64> + Sync + Send + 'static>(name: String, f: F) -> Curve {
    Curve { name, eval: Box::new(f) }
}

/// Abscissa range and default sample count per figure.
fn abscissa(id: u32) -> (&'static str, f64, f64, usize) {
    match id {
        2 => ("abs_sigma_eta_plus", 0.0, 10.0, 201),
        3 | 4 | 7 | 9 | 10 => ("t", -3.0, 3.0, 601),
        5 | 6 => ("tau_delta", -10.0, 10.0, 401),
        _ => ("abs_sigma_eta_plus", 0.0, 10.0, 201),
    }
}

/// Dataset behind figure `req.id` (2..=10).
pub fn run_figure(req: &FigureRequest) -> Result<Dataset> {
    ensure(req.points.is_none_or(|n| n >= 2), || "figure needs at least 2 points".into())?;
    let model = req.model;
    let model_name = match model {
        ModelChoice::I => "I",
        ModelChoice::II => "II",
    };
    let mut config = json!({ "figure": req.id, "model": model_name });
    let curves: Vec<Curve> = match req.id {
        2 => {
            let crystal = req.crystal.ok_or(Error::MissingCrystal)?;
            config.as_object_mut().map(|o| o.remove("model"));
            config["crystal"] = json!({ "nu_o": crystal.nu_o(), "nu_e": crystal.nu_e() });
            let ep = crystal.eta_plus().abs();
            vec![
                curve("ratio_o".into(), move |s| Ok(spectral_width_ratio(s / ep, &crystal).0)),
                curve("ratio_e".into(), move |s| Ok(spectral_width_ratio(s / ep, &crystal).1)),
            ]
        }
        3 => {
            let s_values = req.s_values.clone().unwrap_or_else(|| FIG3_DEFAULT_S.to_vec());
            ensure(!s_values.is_empty(), || "figure 3 needs at least one s value".into())?;
            config["s_values"] = json!(s_values);
            config["s_values_placeholder"] = json!(req.s_values.is_none());
            config["model"] = json!("cw");
            s_values
                .into_iter()
                .map(|s| curve(format!("R[s={}]", fmt_f64(s)), move |t| Ok(rate_entangled_cw_limit(t, s))))
                .collect()
        }
        4 => FIGURE_W
            .iter()
            .map(|&w| {
                curve(format!("R_ent[w={}]", w_label(w)), move |t| {
                    rate_entangled(DimensionlessArgs { t, s: 0.0, w }, model.kernel(w)?)
                })
            })
            .collect(),
        5 => FIGURE_W
            .iter()
            .map(|&w| curve(format!("R_fock[w={}]", w_label(w)), move |t| rate_fock(t, model.kernel(w)?)))
            .collect(),
        6 => FIGURE_W
            .iter()
            .map(|&w| curve(format!("R_coh[w={}]", w_label(w)), move |t| rate_coherent(t, model.kernel(w)?)))
            .collect(),
        7 => {
            let mut v = Vec::new();
            for (theta, label) in [(0.0, "0"), (PI, "pi")] {
                for w in [f64::INFINITY, 0.3] {
                    v.push(curve(format!("R[theta={label};w={}]", w_label(w)), move |t| {
                        rate_theta(DimensionlessArgs { t, s: 0.0, w }, theta, model.kernel(w)?, true)
                    }));
                }
            }
            v
        }
        8 => {
            let mut v = Vec::new();
            for (theta, label) in [(0.0, "0"), (0.5 * PI, "pi/2"), (PI, "pi")] {
                for w in FIGURE_W {
                    v.push(curve(format!("R0[theta={label};w={}]", w_label(w)), move |s| {
                        rate_theta(DimensionlessArgs { t: 0.0, s, w }, theta, model.kernel(w)?, true)
                    }));
                }
            }
            v
        }
        9 | 10 => {
            // figure 9: theta 0 vs pi/2 at s = 4; figure 10: theta 0 at s = 4 vs pi/2 at s = 0
            let second_s = if req.id == 9 { 4.0 } else { 0.0 };
            let mut v = Vec::new();
            for (theta, label, s) in [(0.0, "0", 4.0), (0.5 * PI, "pi/2", second_s)] {
                for w in FIGURE_W {
                    v.push(curve(format!("R[theta={label};s={};w={}]", fmt_f64(s), w_label(w)), move |t| {
                        rate_theta(DimensionlessArgs { t, s, w }, theta, model.kernel(w)?, true)
                    }));
                }
            }
            v
        }
        other => return Err(Error::UnknownFigure(other)),
    };
    let (x_name, lo, hi, n_default) = abscissa(req.id);
    let n = req.points.unwrap_or(n_default);
    config["abscissa"] = json!({ "name": x_name, "min": lo, "max": hi, "n": n });
    let xs = linspace(lo, hi, n);
    let rows: Result<Vec<Vec<String>>> = map_slice(req.execution, &xs, |&x| {
        let mut row = vec![fmt_f64(x)];
        for c in &curves {
            row.push(fmt_f64((c.eval)(x)?));
        }
        Ok(row)
    })
    .into_iter()
    .collect();
    let mut columns = vec![x_name.to_string()];
    columns.extend(curves.iter().map(|c| c.name.clone()));
    Ok(Dataset { config, columns, rows: rows? })
}

/// Closed-interval tau grid, `n >= 1` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl TauGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        ensure(self.n >= 1, || "tau grid needs at least one point".into())?;
        ensure(self.min.is_finite() && self.max.is_finite(), || "tau bounds must be finite".into())?;
        ensure(self.n == 1 || self.max > self.min, || "tau max must exceed min".into())?;
        Ok(linspace(self.min, self.max, self.n))
    }
}

/// Cartesian sweep over states, media and delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub states: Vec<StateSpec>,
    pub media: Vec<Medium>,
    pub tau: TauGrid,
    #[serde(default = "closed_form")]
    pub method: Method,
    #[serde(default)]
    pub tolerances: Option<QuadOptions>,
    #[serde(default)]
    pub execution: Execution,
}

fn closed_form() -> Method {
    Method::ClosedForm
}

const STATE_COLUMNS: [&str; 8] = ["state", "omega_bar", "sigma", "delta", "theta", "nu_o", "nu_e", "medium"];

fn state_cells(state: &StateSpec) -> Vec<String> {
    let blank = String::new;
    let (sigma, delta, theta, crystal) = match *state {
        StateSpec::Entangled { pump, crystal } => (fmt_f64(pump.sigma), blank(), blank(), Some(crystal)),
        StateSpec::Symmetrized { pump, crystal, theta } => {
            (fmt_f64(pump.sigma), blank(), fmt_f64(theta), Some(crystal))
        }
        StateSpec::Fock { delta, .. } | StateSpec::Coherent { delta, .. } => (blank(), fmt_f64(delta), blank(), None),
    };
    vec![
        state.name().to_string(),
        fmt_f64(state.omega_bar()),
        sigma,
        delta,
        theta,
        crystal.map(|c| fmt_f64(c.nu_o())).unwrap_or_default(),
        crystal.map(|c| fmt_f64(c.nu_e())).unwrap_or_default(),
    ]
}

fn medium_cells(medium: &Medium) -> Vec<String> {
    match medium {
        Medium::Cw => vec!["cw".into(), String::new()],
        Medium::Correlated(m) => vec![m.label().to_string(), fmt_f64(m.scale())],
    }
}

/// Long-format sweep, one row per (state, medium, tau).
pub fn run_sweep(cfg: &SweepConfig) -> Result<Dataset> {
    ensure(!cfg.states.is_empty() && !cfg.media.is_empty(), || "sweep needs states and media".into())?;
    ensure(cfg.method != Method::MonteCarlo, || "use mc-validate for Monte Carlo runs".into())?;
    let taus = cfg.tau.values()?;
    for s in &cfg.states {
        s.validate()?;
    }
    let mut jobs = Vec::new();
    for state in &cfg.states {
        for medium in &cfg.media {
            if cfg.method == Method::Quadrature {
                ensure(matches!(medium, Medium::Correlated(_)), || "quadrature needs a correlation model".into())?;
            }
            for &tau in &taus {
                jobs.push((*state, *medium, tau));
            }
        }
    }
    let opts = cfg.tolerances.unwrap_or_else(crate::rates::numeric_options);
    let method = cfg.method;
    let rows: Result<Vec<Vec<String>>> = map_slice(cfg.execution, &jobs, |(state, medium, tau)| {
        let args = crate::rates::dimensionless(state, medium, *tau);
        let (value, error) = match (method, medium) {
            (Method::Quadrature, Medium::Correlated(m)) => {
                let e = rate_numeric(state, m, *tau, &opts)?;
                (e.value, fmt_f64(e.error))
            }
            _ => (rate(state, medium, *tau)?, String::new()),
        };
        let mut row = state_cells(state);
        row.extend(medium_cells(medium));
        row.extend([*tau, args.t, args.s, args.w, value].map(fmt_f64));
        row.push(error);
        Ok(row)
    })
    .into_iter()
    .collect();
    let mut columns: Vec<String> = STATE_COLUMNS.iter().map(|s| s.to_string()).collect();
    columns.push("scale".into());
    columns.extend(["tau", "t", "s", "w", "rate", "error"].map(String::from));
    let config = json!({ "command": "sweep", "method": cfg.method.label(), "config": cfg });
    Ok(Dataset { config, columns, rows: rows? })
}

/// Monte Carlo validation against the Model I closed forms over
/// `states x w_values x t_values`, in that nesting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McValidateConfig {
    pub states: Vec<StateSpec>,
    /// Dimensionless correlation widths `|Omega eta_-|` or `Omega / delta`.
    pub w_values: Vec<f64>,
    /// Dimensionless delays `tau / eta_-` or `tau delta`.
    pub t_values: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default = "default_points")]
    pub grid_points: usize,
    #[serde(default = "default_t_bar")]
    pub t_bar: f64,
    /// Case `k` uses `seed + k`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
    /// Added to every closed-form value; exercises the failure path.
    #[serde(default)]
    pub corrupt_closed_form: Option<f64>,
}

fn default_realizations() -> usize {
    DEFAULT_REALIZATIONS
}
fn default_points() -> usize {
    DEFAULT_MC_POINTS
}
fn default_t_bar() -> f64 {
    0.01
}

/// `|z|` above which mc-validate reports a failure.
pub const MC_Z_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCase {
    pub state: StateSpec,
    pub w: f64,
    pub t: f64,
    pub tau: f64,
    pub omega: f64,
    pub seed: u64,
    pub closed_form: f64,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McCase {
    pub fn z(&self) -> f64 {
        (self.mean - self.closed_form) / self.std_error
    }
}

/// Physical `(tau, Omega)` of dimensionless `(t, w)` for `state`.
pub fn physical_delay_and_width(state: &StateSpec, t: f64, w: f64) -> (f64, f64) {
    match *state {
        StateSpec::Entangled { crystal, .. } | StateSpec::Symmetrized { crystal, .. } => {
            (t * crystal.eta_minus(), w / crystal.eta_minus().abs())
        }
        StateSpec::Fock { delta, .. } | StateSpec::Coherent { delta, .. } => (t / delta, w * delta),
    }
}

/// Runs every case of `cfg`; cases are independent and seeded `seed + k`.
pub fn run_mc_cases(cfg: &McValidateConfig) -> Result<Vec<McCase>> {
    ensure(!cfg.states.is_empty() && !cfg.w_values.is_empty() && !cfg.t_values.is_empty(), || {
        "mc-validate needs states, w_values and t_values".into()
    })?;
    ensure(cfg.w_values.iter().all(|w| *w > 0.0 && w.is_finite()), || "w values must be positive and finite".into())?;
    let mut cases = Vec::new();
    let mut k = 0u64;
    for state in &cfg.states {
        state.validate()?;
        for &w in &cfg.w_values {
            for &t in &cfg.t_values {
                let (tau, omega) = physical_delay_and_width(state, t, w);
                let model = CorrelationModel::model_i(omega)?;
                let closed = rate(state, &Medium::Correlated(model), tau)? + cfg.corrupt_closed_form.unwrap_or(0.0);
                let mut ens = EnsembleConfig::new(
                    mc_grid(state, cfg.grid_points),
                    model,
                    cfg.t_bar,
                    cfg.n_realizations,
                    cfg.seed.wrapping_add(k),
                );
                ens.execution = cfg.execution;
                let est = mc_correlator(state, &ens, tau)?;
                cases.push(McCase {
                    state: *state,
                    w,
                    t,
                    tau,
                    omega,
                    seed: ens.seed,
                    closed_form: closed,
                    mean: est.mean,
                    std_error: est.std_error,
                    n: est.n,
                });
                k += 1;
            }
        }
    }
    Ok(cases)
}

/// Report rows for [`run_mc_cases`].
pub fn mc_dataset(cfg: &McValidateConfig, cases: &[McCase]) -> Dataset {
    let mut columns: Vec<String> = STATE_COLUMNS.iter().map(|s| s.to_string()).collect();
    columns.push("scale".into());
    columns.extend(["t", "w", "tau", "closed_form", "mean", "std_error", "n", "seed", "z"].map(String::from));
    let rows = cases
        .iter()
        .map(|c| {
            let mut row = state_cells(&c.state);
            row.extend(["I".to_string(), fmt_f64(c.omega)]);
            row.extend([c.t, c.w, c.tau, c.closed_form, c.mean, c.std_error].map(fmt_f64));
            row.push(c.n.to_string());
            row.push(c.seed.to_string());
            row.push(fmt_f64(c.z()));
            row
        })
        .collect();
    Dataset { config: json!({ "command": "mc-validate", "config": cfg }), columns, rows }
}
