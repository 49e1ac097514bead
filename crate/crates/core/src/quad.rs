//! Globally adaptive 15-point Gauss–Kronrod quadrature (QUADPACK QAG rule).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`]. Converged when the summed error estimate
/// is below `max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, rel_tol: 0.0, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && round > error {
        error = round;
    }
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrate over `[points[0], points.last()]`, seeding the adaptive
/// partition with every listed point (kinks, peaks). `points` must be sorted.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: &QuadOptions) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1]));
            evaluations += 15;
        }
    }
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || heap.is_empty() {
            return QuadResult { value, error, converged: true, evaluations };
        }
        if heap.len() >= opts.max_intervals {
            return QuadResult { value, error, converged: false, evaluations };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod(&mut f, worst.a, mid));
        heap.push(kronrod(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

/// Sorted, deduplicated breakpoints clipped to `[a, b]`.
pub fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    pts.extend(interior.iter().copied().filter(|&x| x > a && x < b));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &QuadOptions::default());
        assert!((r.value - 8.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, &QuadOptions::default());
        assert!((r.value - PI.sqrt()).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn kink_with_breakpoint() {
        let pts = breakpoints(-1.0, 1.0, &[0.0]);
        let r = integrate_with_breaks(|x: f64| x.abs(), &pts, &QuadOptions::default());
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.evaluations, 30);
    }

    #[test]
    fn lorentzian_peak() {
        let w = 500.0;
        let r = integrate_with_breaks(
            |x: f64| 2.0 * w / (4.0 + w * w * x * x),
            &breakpoints(-1.0, 1.0, &[0.0]),
            &QuadOptions::default(),
        );
        let exact = 2.0 * (w / 2.0).atan();
        assert!((r.value - exact).abs() < 1e-11, "{} vs {exact}", r.value);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions { max_intervals: 3, ..QuadOptions::default() };
        let r = integrate(|x: f64| (1.0 / (x + 1e-9)).sin(), 0.0, 1.0, &opts);
        assert!(!r.converged);
    }
}
