use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const FOCK: &str = r#"{"kind":"fock","omega_bar":100.0,"delta":1.0}"#;

fn speckle(args: &[&str]) -> Output {
    speckle_env(args, None)
}

fn speckle_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_speckle"));
    cmd.args(args).env_remove("SPECKLE_SEED");
    if let Some(s) = seed {
        cmd.env("SPECKLE_SEED", s);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_json(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, value.to_string()).unwrap();
    p
}

/// Header config echo and the data rows as (header, rows of cells).
fn read_csv(p: &Path) -> (Value, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# speckle "));
    let config = serde_json::from_str(lines.next().unwrap().strip_prefix("# config ").unwrap()).unwrap();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (config, header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn mc_config(n_realizations: usize, t_values: Vec<f64>) -> Value {
    json!({
        "states": [serde_json::from_str::<Value>(FOCK).unwrap()],
        "w_values": [1.0],
        "t_values": t_values,
        "n_realizations": n_realizations,
        "grid_points": 64,
    })
}

#[test]
fn rate_then_visibility() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fock.csv");
    let args =
        ["rate", "--state", FOCK, "--model", "cw", "--tau-min", "-200", "--tau-max", "200", "--tau-n", "4001", "--out"];
    let r = speckle(&[&args[..], &[path_str(&out)]].concat());
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let (config, header, rows) = read_csv(&out);
    assert_eq!(header, ["tau", "rate"]);
    assert_eq!(rows.len(), 4001);
    assert_eq!(config["method"], "closed-form");
    assert_eq!(config["tau_grid"]["n"], 4001);

    let v = speckle(&["visibility", "--in", path_str(&out)]);
    assert_eq!(code(&v), 0);
    let text = String::from_utf8(v.stdout).unwrap();
    let vis: f64 = text.lines().next().unwrap().strip_prefix("visibility ").unwrap().parse().unwrap();
    assert!((vis - 1.0 / 3.0).abs() < 1e-3, "{text}");
    assert!(text.contains("r0 2\n"));
    assert!(text.contains("class consistent-with-classical"));

    let disordered = dir.path().join("fock2.csv");
    let args = [
        "rate",
        "--state",
        FOCK,
        "--model",
        r#"{"model":"II","scale":1.0}"#,
        "--tau-min",
        "-200",
        "--tau-max",
        "200",
        "--tau-n",
        "4001",
        "--out",
        path_str(&disordered),
    ];
    assert_eq!(code(&speckle(&args)), 0);
    let v = speckle(&["visibility", "--in", path_str(&disordered)]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stderr));
    assert!(String::from_utf8(v.stdout).unwrap().contains("class nonclassical"));
}

#[test]
fn rate_from_state_file_with_quadrature() {
    let dir = TempDir::new().unwrap();
    let state = write_json(&dir, "state.json", &serde_json::from_str(FOCK).unwrap());
    let out = dir.path().join("q.csv");
    let r = speckle(&[
        "rate",
        "--state",
        path_str(&state),
        "--model",
        r#"{"model":"I","scale":1.0}"#,
        "--tau-min",
        "0",
        "--tau-max",
        "2",
        "--tau-n",
        "3",
        "--method",
        "quadrature",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let (config, header, rows) = read_csv(&out);
    assert_eq!(config["method"], "quadrature");
    let rates = column(&header, &rows, "rate");
    assert!(rates[0] > rates[2] && rates.iter().all(|r| (1.0..=2.0).contains(r)));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let o = path_str(&out);

    let bad_state = speckle(&[
        "rate",
        "--state",
        "{not json",
        "--model",
        "cw",
        "--tau-min",
        "0",
        "--tau-max",
        "1",
        "--tau-n",
        "3",
        "--out",
        o,
    ]);
    assert_eq!(code(&bad_state), 2);
    let bad_grid = speckle(&[
        "rate",
        "--state",
        FOCK,
        "--model",
        "cw",
        "--tau-min",
        "1",
        "--tau-max",
        "0",
        "--tau-n",
        "3",
        "--out",
        o,
    ]);
    assert_eq!(code(&bad_grid), 2);
    assert_eq!(code(&speckle(&["figure", "--id", "12", "--out", o])), 2);
    assert_eq!(code(&speckle(&["figure", "--id", "2", "--out", o])), 2);
    assert_eq!(code(&speckle(&["no-such-command"])), 2);
    assert!(!out.exists());

    // a Model I coherent curve keeps a slow tail well beyond this range
    let coh = r#"{"kind":"coherent","omega_bar":100.0,"delta":1.0}"#;
    let curve = dir.path().join("coh.csv");
    let r = speckle(&[
        "rate",
        "--state",
        coh,
        "--model",
        r#"{"model":"I","scale":1.0}"#,
        "--tau-min",
        "-60",
        "--tau-max",
        "60",
        "--tau-n",
        "241",
        "--out",
        path_str(&curve),
    ]);
    assert_eq!(code(&r), 0);
    assert_eq!(code(&speckle(&["visibility", "--in", path_str(&curve)])), 3);

    let mut cfg = mc_config(500, vec![0.0, 1.0]);
    cfg["corrupt_closed_form"] = json!(0.5);
    let cfg_path = write_json(&dir, "corrupt.json", &cfg);
    let r = speckle(&["mc-validate", "--config", path_str(&cfg_path), "--seed", "3", "--out", o]);
    assert_eq!(code(&r), 4, "{}", String::from_utf8_lossy(&r.stdout));
    assert!(String::from_utf8_lossy(&r.stdout).contains("failures 2"));

    let not_object = write_json(&dir, "list.json", &json!([1, 2]));
    assert_eq!(code(&speckle(&["mc-validate", "--config", path_str(&not_object), "--out", o])), 2);
}

#[test]
fn healthy_mc_validate_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_json(&dir, "mc.json", &mc_config(2_000, vec![0.0, 0.5, 2.0]));
    let out = dir.path().join("mc.csv");
    let r = speckle(&["mc-validate", "--config", path_str(&cfg), "--seed", "11", "--out", path_str(&out)]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stdout));
    let (_, header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 3);
    assert_eq!(column(&header, &rows, "seed"), [11.0, 12.0, 13.0]);
    assert!(column(&header, &rows, "z").iter().all(|z| z.abs() <= 4.0));
}

#[test]
fn seed_resolution_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let cfg = write_json(&dir, "mc.json", &mc_config(300, vec![0.0, 1.0]));
    let run = |name: &str, extra: &[&str], env: Option<&str>| {
        let out = dir.path().join(name);
        let args = [&["mc-validate", "--config", path_str(&cfg), "--out", path_str(&out)][..], extra].concat();
        assert_eq!(code(&speckle_env(&args, env)), 0);
        out
    };
    let a = run("a.csv", &[], Some("4242"));
    let b = run("b.csv", &[], Some("4242"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (config, header, rows) = read_csv(&a);
    assert_eq!(config["config"]["seed"], 4242);
    assert_eq!(column(&header, &rows, "seed"), [4242.0, 4243.0]);

    let flag = run("c.csv", &["--seed", "7"], Some("4242"));
    assert_eq!(read_csv(&flag).0["config"]["seed"], 7);

    let default = run("d.csv", &[], None);
    let default_seed = read_csv(&default).0["config"]["seed"].as_u64().unwrap();
    assert_ne!(default_seed, 4242);

    let seq = dir.path().join("seq.csv");
    let args = ["--sequential", "mc-validate", "--config", path_str(&cfg), "--out", path_str(&seq)];
    assert_eq!(code(&speckle_env(&args, Some("4242"))), 0);
    let (seq_config, _, seq_rows) = read_csv(&seq);
    assert_eq!(seq_config["config"]["execution"], "sequential");
    assert_eq!(seq_rows, rows);

    assert_eq!(code(&speckle_env(&["mc-validate", "--config", path_str(&cfg), "--out", path_str(&seq)], Some("x"))), 2);
}

/// RMS standard error over many 10-realization runs against one 10^4 run.
#[test]
fn standard_error_scales_with_realizations() {
    let dir = TempDir::new().unwrap();
    let small = write_json(&dir, "small.json", &mc_config(10, vec![0.0; 200]));
    let large = write_json(&dir, "large.json", &mc_config(10_000, vec![0.0]));
    let (so, lo) = (dir.path().join("s.csv"), dir.path().join("l.csv"));
    // ten draws give ragged z-scores, so exit 4 is allowed here; only the errors are used
    let r = speckle(&["mc-validate", "--config", path_str(&small), "--seed", "100", "--out", path_str(&so)]);
    assert!(matches!(code(&r), 0 | 4));
    assert_eq!(
        code(&speckle(&["mc-validate", "--config", path_str(&large), "--seed", "900", "--out", path_str(&lo)])),
        0
    );
    let (_, h, rows) = read_csv(&so);
    let se = column(&h, &rows, "std_error");
    let rms = (se.iter().map(|s| s * s).sum::<f64>() / se.len() as f64).sqrt();
    let (_, h, rows) = read_csv(&lo);
    let big = column(&h, &rows, "std_error")[0];
    let ratio = rms / big / 1000f64.sqrt();
    assert!((ratio - 1.0).abs() < 0.3, "ratio / sqrt(1000) = {ratio}");
}

#[test]
fn figure_and_sweep_commands() {
    let dir = TempDir::new().unwrap();
    let fig = dir.path().join("fig3.csv");
    let r = speckle(&["figure", "--id", "3", "--s", "1,4", "--points", "11", "--out", path_str(&fig)]);
    assert_eq!(code(&r), 0);
    let (config, header, rows) = read_csv(&fig);
    assert_eq!(header, ["t", "R[s=1]", "R[s=4]"]);
    assert_eq!(rows.len(), 11);
    assert_eq!(config["s_values_placeholder"], false);

    let fig2 = dir.path().join("fig2.csv");
    let r = speckle(&["figure", "--id", "2", "--nu-o", "-0.073", "--nu-e", "-0.264", "--out", path_str(&fig2)]);
    assert_eq!(code(&r), 0);
    assert_eq!(read_csv(&fig2).0["crystal"]["nu_e"], -0.264);

    let fig6 = dir.path().join("fig6.csv");
    assert_eq!(code(&speckle(&["figure", "--id", "6", "--model", "I", "--points", "5", "--out", path_str(&fig6)])), 0);
    assert_eq!(read_csv(&fig6).0["model"], "I");

    let cfg = write_json(
        &dir,
        "sweep.json",
        &json!({
            "states": [serde_json::from_str::<Value>(FOCK).unwrap()],
            "media": ["cw", {"model": "II", "scale": 2.0}],
            "tau": {"min": 0.0, "max": 1.0, "n": 3},
        }),
    );
    let out = dir.path().join("sweep.csv");
    assert_eq!(code(&speckle(&["sweep", "--config", path_str(&cfg), "--out", path_str(&out)])), 0);
    let (_, header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 6);
    assert!(header.contains(&"rate".to_string()));
}
