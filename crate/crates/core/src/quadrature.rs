//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and
//! on the real line through an algebraic compactifying map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights at the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal panels the domain is cut into before adapting.
    pub initial_panels: usize,
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadratureConfig { abs_tol, ..Default::default() }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-10, rel_tol: 0.0, max_intervals: 4000, initial_panels: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of per-panel |Kronrod − Gauss| estimates.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    if value.is_finite() && error.is_finite() {
        (value, error)
    } else {
        (f64::NAN, f64::INFINITY)
    }
}

/// Integrates `f` over the finite interval [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Integral {
    let panels = cfg.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(cfg.max_intervals + panels);
    let mut evaluations = 0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (value, error) = gk15(&f, lo, hi);
        evaluations += 15;
        heap.push(Panel { a: lo, b: hi, value, error });
    }
    let (mut total, mut err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if err <= target {
            return Integral { value: total, error: err, evaluations, converged: true };
        }
        if heap.len() >= cfg.max_intervals || !total.is_finite() {
            return Integral { value: total, error: err, evaluations, converged: false };
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Integral { value: total, error: err, evaluations, converged: false };
        }
        total -= worst.value;
        err -= worst.error;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            evaluations += 15;
            total += value;
            err += error;
            heap.push(Panel { a: lo, b: hi, value, error });
        }
        if heap.len() % 64 == 0 {
            // refresh running sums to stop cancellation drift
            (total, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        }
        err = err.max(0.0);
    }
}

/// Integrates `f` over ℝ with the substitution u = center + scale·t/(1−t²),
/// t ∈ (−1, 1). `center` and `scale` should describe where the mass of `f` lives.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Integral {
    let g = |t: f64| {
        let d = 1.0 - t * t;
        if d <= 0.0 {
            return 0.0;
        }
        let u = center + scale * t / d;
        if !u.is_finite() {
            return 0.0;
        }
        let jac = scale * (1.0 + t * t) / (d * d);
        let v = f(u);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate(g, -1.0, 1.0, cfg)
}
