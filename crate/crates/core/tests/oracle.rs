use std::f64::consts::PI;

use speckle_core::datasets::physical_delay_and_width;
use speckle_core::oracle::{
    beam_splitter_check, mc_correlator, mc_correlator_cross, mc_grid, mc_mean_photocount, mc_realizations,
    rate_correlation_relation, sample_transmission, Ensemble, EnsembleConfig, McEstimate,
};
use speckle_core::rates::rate_fock_model_i;
use speckle_core::{CorrelationModel, CrystalParams, Error, Execution, PumpParams, StateSpec};

const OMEGA_BAR: f64 = 100.0;
const T_BAR: f64 = 0.01;
const SEED: u64 = 31;

fn fock() -> StateSpec {
    StateSpec::Fock { omega_bar: OMEGA_BAR, delta: 1.0 }
}

fn coherent() -> StateSpec {
    StateSpec::Coherent { omega_bar: OMEGA_BAR, delta: 1.0 }
}

fn entangled() -> StateSpec {
    let crystal = CrystalParams::bbo();
    StateSpec::Entangled { pump: PumpParams::new(OMEGA_BAR, 1.0 / crystal.eta_plus().abs()).unwrap(), crystal }
}

fn symmetric(theta: f64) -> StateSpec {
    let crystal = CrystalParams::bbo();
    StateSpec::Symmetrized { pump: PumpParams::new(OMEGA_BAR, 2.0 / crystal.eta_plus().abs()).unwrap(), crystal, theta }
}

fn config(state: &StateSpec, omega: f64, n: usize) -> EnsembleConfig {
    EnsembleConfig::new(mc_grid(state, 128), CorrelationModel::model_i(omega).unwrap(), T_BAR, n, SEED)
}

fn assert_within(est: &McEstimate, target: f64, what: &str) {
    assert!(
        est.within(target, 3.0),
        "{what}: {} +- {} vs {target} (z = {:.2})",
        est.mean,
        est.std_error,
        est.z_score(target)
    );
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    for state in [fock(), entangled(), coherent()] {
        let mut cfg = config(&state, 2.0, 2_000);
        cfg.execution = Execution::Sequential;
        let seq = mc_realizations(&state, &cfg, 0.3).unwrap();
        let seq_est = mc_correlator(&state, &cfg, 0.3).unwrap();
        cfg.execution = Execution::Parallel;
        let par = mc_realizations(&state, &cfg, 0.3).unwrap();
        let par_est = mc_correlator(&state, &cfg, 0.3).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq_est, par_est);
        assert_eq!(seq_est.mean.to_bits(), mc_correlator(&state, &cfg, 0.3).unwrap().mean.to_bits());
    }
}

#[test]
fn draws_are_keyed_by_seed_and_index() {
    let cfg = config(&fock(), 1.0, 10);
    let a = sample_transmission(&cfg, 2, 5).unwrap();
    let b = sample_transmission(&cfg, 2, 5).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, sample_transmission(&cfg, 2, 6).unwrap());
    assert_ne!(a.t_o[0], a.t_e[0]);
    assert_ne!(a.t_o[0], a.t_o[1]);
    // adding a mode leaves the existing sub-streams alone
    let one = sample_transmission(&cfg, 1, 5).unwrap();
    assert_eq!(one.t_o[0], a.t_o[0]);
    assert_eq!(one.t_e[0], a.t_e[0]);
    let mut other = cfg;
    other.seed += 1;
    assert_ne!(a, sample_transmission(&other, 2, 5).unwrap());
}

#[test]
fn fock_matches_closed_form() {
    let state = fock();
    let (tau, omega) = physical_delay_and_width(&state, 0.0, 1.0);
    let est = mc_correlator(&state, &config(&state, omega, 10_000), tau).unwrap();
    assert_within(&est, rate_fock_model_i(0.0, 1.0).unwrap(), "fock (0, 1)");
    assert!(est.std_error < 0.02 * est.mean);
}

#[test]
fn weak_disorder_limits() {
    let coh = mc_correlator(&coherent(), &config(&coherent(), 1e4, 10_000), 0.0).unwrap();
    assert_within(&coh, 4.0, "coherent peak");
    let state = entangled();
    let eta = CrystalParams::bbo().eta_minus().abs();
    let far = mc_correlator(&state, &config(&state, 1e4, 10_000), 5.0 * eta).unwrap();
    assert_within(&far, 1.0, "entangled separated");
}

#[test]
fn photocount_is_state_independent() {
    let states = [entangled(), symmetric(0.0), symmetric(PI), fock(), coherent()];
    for state in &states {
        let cfg = config(state, 1.0, 10_000);
        let est = mc_mean_photocount(&cfg, state).unwrap();
        assert_within(&est, 2.0, state.name());
        let mut half = cfg;
        half.t_bar = 0.5 * cfg.t_bar;
        let halved = mc_mean_photocount(&half, state).unwrap();
        assert!(
            (halved.mean - est.mean).abs() <= 1e-10 * est.mean,
            "{}: {} vs {}",
            state.name(),
            halved.mean,
            est.mean
        );
    }
}

#[test]
fn states_share_draws() {
    let a = config(&symmetric(0.0), 1.0, 100);
    let b = config(&symmetric(PI), 1.0, 100);
    assert_eq!(a.grid, b.grid);
    for i in [0, 17, 99] {
        assert_eq!(sample_transmission(&a, 1, i).unwrap(), sample_transmission(&b, 1, i).unwrap());
    }
    let ea = mc_mean_photocount(&a, &symmetric(0.0)).unwrap();
    let eb = mc_mean_photocount(&b, &symmetric(PI)).unwrap();
    assert_ne!(ea.mean, eb.mean);
}

#[test]
fn standard_error_halves_when_n_quadruples() {
    let state = fock();
    let small = mc_correlator(&state, &config(&state, 1.0, 2_500), 0.0).unwrap();
    let large = mc_correlator(&state, &config(&state, 1.0, 10_000), 0.0).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn single_realizations_fluctuate() {
    let state = fock();
    let cfg = config(&state, 1.0, 4_000);
    let values = mc_realizations(&state, &cfg, 0.0).unwrap();
    let est = McEstimate::from_samples(&values).unwrap();
    let sd = est.std_error * (est.n as f64).sqrt();
    assert!(sd > 0.1 * est.mean, "per-realization spread {sd}");
    let mut other = cfg;
    other.seed += 1000;
    let again = mc_correlator(&state, &other, 0.0).unwrap();
    assert!((again.mean - est.mean).abs() < 4.0 * (est.std_error.powi(2) + again.std_error.powi(2)).sqrt());
}

#[test]
fn cross_mode_rates() {
    for (state, target) in [(entangled(), 2.0), (fock(), 2.0), (coherent(), 4.0)] {
        let cfg = config(&state, 1.0, 10_000);
        let est = mc_correlator_cross(&state, &cfg, 0.0).unwrap();
        assert_within(&est, target, state.name());
    }
}

#[test]
fn tolerance_and_config_errors() {
    let state = fock();
    let mut cfg = config(&state, 1.0, 50);
    cfg.max_std_error = Some(1e-6);
    assert!(matches!(mc_correlator(&state, &cfg, 0.0), Err(Error::InsufficientRealizations { .. })));
    let mut bad = config(&state, 1.0, 1);
    assert!(Ensemble::new(bad).is_err());
    bad.n_realizations = 10;
    bad.t_bar = 0.0;
    assert!(Ensemble::new(bad).is_err());
}

#[test]
fn config_round_trips_through_json() {
    let cfg = config(&entangled(), 3.0, 1_000);
    let text = serde_json::to_string(&cfg).unwrap();
    let back: EnsembleConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn beam_splitter_table() {
    let r = beam_splitter_check();
    assert!(r.passed);
    assert_eq!((r.p2_11, r.p2_22, r.p2_12), (0.25, 0.25, 0.5));
    assert_eq!((r.n1_sq_normal, r.n1_n2_normal), (0.5, 0.5));
    assert_eq!(rate_correlation_relation(0.5, 1.0, true).unwrap().p2, 0.25);
    assert_eq!(rate_correlation_relation(0.5, 1.0, false).unwrap().p2, 0.5);
    assert_eq!(rate_correlation_relation(0.0, 1.0, true).unwrap().p2, 0.0);
    assert_eq!(rate_correlation_relation(0.0, 1.0, false).unwrap().p2, 0.0);
}
