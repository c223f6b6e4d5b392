//! The exponential integral E₁(x) = ∫ₓ^∞ t⁻¹e⁻ᵗ dt.

use crate::error::{invalid, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Power series −γ − ln x + Σ (−1)^{n+1} xⁿ/(n·n!), with ln x passed in so
/// that arguments below the double range stay usable.
fn series(x: f64, ln_x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..200 {
        term *= -x / n as f64;
        let t = -term / n as f64;
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - ln_x + sum
}

/// eˣE₁(x) by the modified Lentz continued fraction, for x > 1.
fn scaled_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("E₁ needs a positive finite argument, got {x}"));
    }
    Ok(if x <= 1.0 { series(x, x.ln()) } else { scaled_fraction(x) * (-x).exp() })
}

/// eˣE₁(x), finite for large x where E₁ itself underflows.
pub fn scaled_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!("E₁ needs a positive finite argument, got {x}"));
    }
    Ok(if x <= 1.0 { x.exp() * series(x, x.ln()) } else { scaled_fraction(x) })
}

/// E₁(e^{ln_x}) for ln_x ≤ 0; works when e^{ln_x} underflows to zero.
pub fn exp_integral_e1_ln(ln_x: f64) -> Result<f64> {
    if !(ln_x <= 0.0) {
        return invalid(format!("log-argument form covers x ≤ 1, got ln x = {ln_x}"));
    }
    Ok(series(ln_x.exp(), ln_x))
}

/// The bounds ½e⁻ˣ log(1 + 2/x) < E₁(x) < e⁻ˣ log(1 + 1/x).
pub fn e1_bounds(x: f64) -> (f64, f64) {
    let e = (-x).exp();
    (0.5 * e * (2.0 / x).ln_1p(), e * (1.0 / x).ln_1p())
}
