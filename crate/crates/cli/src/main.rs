use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use speckle_core::datasets::{
    fmt_f64, mc_dataset, parse_curve, run_figure, run_mc_cases, run_sweep, Dataset, FigureRequest, McValidateConfig,
    ModelChoice, SweepConfig, MC_Z_LIMIT,
};
use speckle_core::rates::{
    classify_semiclassical, linspace, numeric_options, rate_curve, rate_curve_numeric, visibility_of_points, Medium,
};
use speckle_core::{CrystalParams, Error, Execution, StateSpec};

/// Seed used by `mc-validate` when neither the config nor the environment sets one.
const DEFAULT_SEED: u64 = 20240611;

#[derive(Parser)]
#[command(name = "speckle", version, about = "Two-photon coincidence rates behind a random medium")]
struct Cli {
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate curve R(tau) for one state and medium.
    Rate {
        /// State as JSON, or a path to a JSON file.
        #[arg(long)]
        state: String,
        /// `"cw"` or a model object such as `{"model":"I","scale":2.0}`.
        #[arg(long)]
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        tau_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau_max: f64,
        #[arg(long)]
        tau_n: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::ClosedForm)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dataset behind one of figures 2 to 10.
    Figure {
        #[arg(long)]
        id: u32,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, allow_hyphen_values = true)]
        nu_o: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        nu_e: Option<f64>,
        /// Figure 3 curve parameters `s`, comma separated.
        #[arg(long, value_delimiter = ',')]
        s: Option<Vec<f64>>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cartesian sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo oracle against the Model I closed forms.
    McValidate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed and `SPECKLE_SEED`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Visibility of a (tau, R) curve CSV.
    Visibility {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
}

enum Failure {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match run(cli.command, exec) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command, exec: Execution) -> Outcome {
    match command {
        Command::Rate { state, model, tau_min, tau_max, tau_n, method, out } => {
            let state: StateSpec = parse_json(&state, "state")?;
            let medium: Medium = if model.trim() == "cw" { Medium::Cw } else { parse_json(&model, "model")? };
            if tau_n < 2 || tau_max <= tau_min {
                return Err(Failure::Config("tau grid needs tau-n >= 2 and tau-max > tau-min".into()));
            }
            let taus = linspace(tau_min, tau_max, tau_n);
            let curve = match (method, medium) {
                (MethodArg::ClosedForm, _) => rate_curve(&state, &medium, &taus, exec)?,
                (MethodArg::Quadrature, Medium::Correlated(m)) => {
                    rate_curve_numeric(&state, &m, &taus, &numeric_options(), exec)?
                }
                (MethodArg::Quadrature, Medium::Cw) => {
                    return Err(Failure::Config("quadrature needs a correlation model".into()))
                }
            };
            let dataset = Dataset {
                config: json!({
                    "command": "rate",
                    "state": curve.state,
                    "model": curve.medium,
                    "tau_grid": { "min": tau_min, "max": tau_max, "n": tau_n },
                    "method": curve.method.label(),
                    "tolerances": curve.tolerances,
                }),
                columns: vec!["tau".into(), "rate".into()],
                rows: curve.points.iter().map(|&(t, r)| vec![fmt_f64(t), fmt_f64(r)]).collect(),
            };
            write_atomic(&out, &dataset.to_csv())
        }
        Command::Figure { id, model, nu_o, nu_e, s, points, out } => {
            let crystal = match (nu_o, nu_e) {
                (Some(o), Some(e)) => Some(CrystalParams::new(o, e)?),
                (None, None) => None,
                _ => return Err(Failure::Config("give both --nu-o and --nu-e".into())),
            };
            let model = match model {
                Some(ModelArg::I) => ModelChoice::I,
                Some(ModelArg::II) | None => ModelChoice::II,
            };
            let req = FigureRequest { id, model, crystal, s_values: s, points, execution: exec };
            write_atomic(&out, &run_figure(&req)?.to_csv())
        }
        Command::Sweep { config, out } => {
            let mut cfg: SweepConfig = serde_json::from_value(read_config(&config)?)
                .map_err(|e| Failure::Config(format!("sweep config: {e}")))?;
            cfg.execution = exec;
            write_atomic(&out, &run_sweep(&cfg)?.to_csv())
        }
        Command::McValidate { config, seed, out } => {
            let mut value = read_config(&config)?;
            if !value.is_object() {
                return Err(Failure::Config("mc-validate config must be a JSON object".into()));
            }
            let seed = match seed {
                Some(s) => s,
                None => match value.get("seed") {
                    Some(v) => {
                        v.as_u64().ok_or_else(|| Failure::Config("seed must be a non-negative integer".into()))?
                    }
                    None => env_seed()?,
                },
            };
            value["seed"] = json!(seed);
            let mut cfg: McValidateConfig =
                serde_json::from_value(value).map_err(|e| Failure::Config(format!("mc-validate config: {e}")))?;
            cfg.execution = exec;
            let cases = run_mc_cases(&cfg)?;
            write_atomic(&out, &mc_dataset(&cfg, &cases).to_csv())?;
            let worst = cases.iter().map(|c| c.z().abs()).fold(0.0, f64::max);
            let failed = cases.iter().filter(|c| c.z().is_nan() || c.z().abs() > MC_Z_LIMIT).count();
            println!("cases {} max |z| {:.3} failures {}", cases.len(), worst, failed);
            if failed > 0 {
                return Err(Failure::Validation(format!("{failed} case(s) with |z| > {MC_Z_LIMIT}")));
            }
            Ok(())
        }
        Command::Visibility { input } => {
            let text = fs::read_to_string(&input).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
            let points = parse_curve(&text)?;
            let v = visibility_of_points(&points)?;
            let r0 = points.iter().find(|p| p.0 == 0.0).map(|p| p.1).unwrap_or(f64::NAN);
            let class = classify_semiclassical(r0)?;
            println!("visibility {}", fmt_f64(v));
            println!("r0 {}", fmt_f64(r0));
            println!("class {}", serde_json::to_value(class.class).unwrap_or(Value::Null).as_str().unwrap_or(""));
            Ok(())
        }
    }
}

fn env_seed() -> std::result::Result<u64, Failure> {
    match std::env::var("SPECKLE_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Config(format!("SPECKLE_SEED is not an integer: {s:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// Inline JSON, or the contents of the named file.
fn parse_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> std::result::Result<T, Failure> {
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg).map_err(|e| Failure::Config(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{what}: {e}")))
}

fn read_config(path: &Path) -> std::result::Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Outcome {
    let io = |e: std::io::Error| Failure::Config(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
