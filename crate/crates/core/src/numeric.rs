//! One-dimensional numerical building blocks shared by every module:
//! Gauss–Legendre rules, adaptive Gauss–Kronrod integration, half-line
//! integration, compensated summation, bracketed bisection and least-squares
//! line fits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// Neumaier's variant of Kahan summation.
///
/// Reduction order is whatever order values are pushed in, so callers keep
/// that order fixed to get reproducible results.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of complex values, real and imaginary parts separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: num_complex::Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (value, |K15 - G7|).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Result of a one-dimensional adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-11, max_panels: 4000 }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self { rel, ..Self::default() }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
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

/// Globally adaptive Gauss–Kronrod integration over [a, b], optionally
/// pre-split at interior breakpoints (kinks, known singular points).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0, converged: true };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);

    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        let (value, error) = gauss_kronrod_15(&f, w[0], w[1]);
        heap.push(Panel { a: w[0], b: w[1], value, error });
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        let mut panels: Vec<&Panel> = heap.iter().collect();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let v = compensated_sum(panels.iter().map(|p| p.value));
        let e = compensated_sum(panels.iter().map(|p| p.error));
        (v, e)
    };
    let (mut value, mut error) = totals(&heap);
    while error > tol.abs.max(tol.rel * value.abs()) && heap.len() < tol.max_panels {
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gauss_kronrod_15(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(&f, mid, worst.b);
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        if heap.len() % 64 == 0 {
            (value, error) = totals(&heap);
        }
    }
    let (value, error) = totals(&heap);
    let converged = error <= tol.abs.max(tol.rel * value.abs()) && value.is_finite();
    Integral { value: sign * value, error, converged }
}

/// Integral over [0, ∞) using geometrically growing panels
/// [0,1], [1,3], [3,7], ... each integrated adaptively. Stops once two
/// consecutive panels contribute below `tol.rel` of the running total, or
/// after `max_panels` panels (flagged unconverged).
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, tol: Tolerance, max_panels: usize) -> Integral {
    let mut total = CompensatedSum::new();
    let mut error = 0.0;
    let mut lo: f64 = 0.0;
    let mut quiet = 0;
    let mut converged = true;
    for k in 0..max_panels {
        let hi = 2.0 * lo + 1.0;
        let panel = integrate_adaptive(&f, lo, hi, &[], Tolerance { abs: 0.0, ..tol });
        converged &= panel.converged || panel.error <= tol.abs;
        total.add(panel.value);
        error += panel.error;
        let t = total.value();
        if panel.value.abs() <= tol.rel * t.abs() || (t == 0.0 && panel.value == 0.0 && k > 4) {
            quiet += 1;
            if quiet >= 2 {
                return Integral { value: t, error, converged };
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        if !lo.is_finite() {
            break;
        }
    }
    Integral { value: total.value(), error, converged: false }
}

/// Bisection on a bracket where `g(lo)` and `g(hi)` have opposite signs.
/// Returns the final midpoint; stops when the bracket is below `rel_tol`
/// relative width (or 200 halvings).
pub fn bisect<F: FnMut(f64) -> f64>(mut g: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) || mid == lo || mid == hi {
            return mid;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ordinary least-squares line y = slope·x + intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    /// Standard error of the slope (zero for two points or an exact fit).
    pub slope_stderr: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = compensated_sum(x.iter().copied()) / nf;
    let my = compensated_sum(y.iter().copied()) / nf;
    let sxx = compensated_sum(x.iter().map(|&v| (v - mx) * (v - mx)));
    if sxx == 0.0 {
        return None;
    }
    let sxy = compensated_sum(x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)));
    let syy = compensated_sum(y.iter().map(|&v| (v - my) * (v - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(&a, &b)| b - (slope * a + intercept)).collect();
    let ss_res = compensated_sum(residuals.iter().map(|r| r * r));
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let slope_stderr = if n > 2 { (ss_res / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Some(LinearFit { slope, intercept, r_squared, residuals, slope_stderr })
}

/// `per_decade` log-spaced points from 10^lo to 10^hi inclusive. Integer
/// powers of ten are hit exactly.
pub fn logspace(lo: i32, hi: i32, per_decade: usize) -> Vec<f64> {
    let steps = ((hi - lo) as usize) * per_decade;
    (0..=steps)
        .map(|k| {
            let e = lo as f64 + k as f64 / per_decade as f64;
            if k % per_decade == 0 {
                10f64.powi(lo + (k / per_decade) as i32)
            } else {
                10f64.powf(e)
            }
        })
        .collect()
}
