use std::f64::consts::PI;

use proptest::prelude::*;
use speckle_core::spectral::{
    phase_matching, pump_envelope, spectral_width_ratio, two_photon_matrix, BiphotonAmplitude, SymmetrizedAmplitude,
};
use speckle_core::{CrystalParams, PumpParams, StateSpec};

const OMEGA_BAR: f64 = 2355.0;

fn pump_for_s(s: f64) -> PumpParams {
    PumpParams::new(OMEGA_BAR, s / CrystalParams::bbo().eta_plus().abs()).unwrap()
}

#[test]
fn symmetrized_norm_on_default_grid() {
    let crystal = CrystalParams::bbo();
    for theta in [0.0, 0.5 * PI, PI] {
        for s in [0.5, 2.0, 4.0] {
            let state = StateSpec::Symmetrized { pump: pump_for_s(s), crystal, theta };
            let grid = state.default_grid();
            let b = two_photon_matrix(&state, &grid).unwrap();
            let h = grid.spacing();
            let mass: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h;
            assert!((mass - 1.0).abs() < 1e-4, "theta={theta} s={s} mass={mass}");
        }
    }
}

#[test]
fn swap_symmetry_of_phase_matching() {
    let crystal = CrystalParams::bbo();
    for i in 0..50 {
        let d = -30.0 + 1.2 * i as f64;
        let a = phase_matching(OMEGA_BAR + d, OMEGA_BAR - d, OMEGA_BAR, &crystal);
        let b = phase_matching(OMEGA_BAR - d, OMEGA_BAR + d, OMEGA_BAR, &crystal);
        let x = crystal.eta_minus() * d;
        let expected = if x == 0.0 { 1.0 } else { x.sin() / x };
        assert!((a - expected).abs() < 1e-12, "{a} vs {expected}");
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exchange_identity(s in 0.3f64..6.0, d1 in -25.0f64..25.0, d2 in -25.0f64..25.0) {
        let crystal = CrystalParams::bbo();
        let pump = pump_for_s(s);
        let grid = StateSpec::Symmetrized { pump, crystal, theta: 0.0 }.default_grid();
        let (w1, w2) = (OMEGA_BAR + d1, OMEGA_BAR + d2);
        let sym = SymmetrizedAmplitude::new(0.0, pump, crystal, &grid).unwrap();
        let a = sym.eval(w1, w2);
        let b = sym.eval(w2, w1);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        let anti = SymmetrizedAmplitude::new(PI, pump, crystal, &grid).unwrap();
        let a = anti.eval(w1, w2);
        let b = anti.eval(w2, w1);
        prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn width_ratio_nondecreasing(s1 in 0.0f64..50.0, ds in 0.0f64..50.0) {
        let crystal = CrystalParams::bbo();
        let (o1, e1) = spectral_width_ratio(s1, &crystal);
        let (o2, e2) = spectral_width_ratio(s1 + ds, &crystal);
        prop_assert!(o2 >= o1 && e2 >= e1);
    }

    #[test]
    fn amplitudes_are_pure(s in 0.5f64..4.0, d1 in -10.0f64..10.0, d2 in -10.0f64..10.0) {
        let crystal = CrystalParams::bbo();
        let pump = pump_for_s(s);
        let grid = StateSpec::Entangled { pump, crystal }.default_grid();
        let a = BiphotonAmplitude::new(pump, crystal, &grid).unwrap();
        let b = BiphotonAmplitude::new(pump, crystal, &grid).unwrap();
        prop_assert_eq!(a.eval(OMEGA_BAR + d1, OMEGA_BAR + d2), b.eval(OMEGA_BAR + d1, OMEGA_BAR + d2));
        let v = a.eval(OMEGA_BAR + d1, OMEGA_BAR + d2);
        prop_assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn pump_envelope_in_unit_interval(s in 0.1f64..10.0, x in -5.0f64..5.0) {
        let pump = PumpParams::new(OMEGA_BAR, s).unwrap();
        let v = pump_envelope(2.0 * OMEGA_BAR + x * s, &pump).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0);
    }
}
