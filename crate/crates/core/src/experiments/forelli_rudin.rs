//! The model integrals a_{ε,δ}(w) = ∫_𝔻 (1−|η|²)^{−ε} |1 − wη̄|^{−(2−ε−δ)} dV(η)
//! and b_δ(w) = ∫_{S¹} |1 − wη̄|^{−(1−δ)} dσ(η), with their growth regimes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::{integrate_adaptive, linear_fit, Tolerance};

const FR_TOL: Tolerance = Tolerance { abs: 1e-300, rel: 1e-9, max_panels: 4000 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrKind {
    AreaIntegral,
    CircleIntegral,
}

/// Boundary behaviour as |w| → 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    Bounded,
    /// Comparable to −log(1 − |w|²).
    Logarithmic,
    /// Comparable to (1 − |w|²)^exponent.
    Power { exponent: f64 },
}

impl Regime {
    /// The regime predicted for a given δ.
    pub fn predicted(delta: f64) -> Self {
        if delta > 0.0 {
            Regime::Bounded
        } else if delta == 0.0 {
            Regime::Logarithmic
        } else {
            Regime::Power { exponent: delta }
        }
    }

    pub fn profile(&self, w_abs: f64) -> f64 {
        let gap = (1.0 - w_abs) * (1.0 + w_abs);
        match *self {
            Regime::Bounded => 1.0,
            Regime::Logarithmic => -gap.ln(),
            Regime::Power { exponent } => gap.powf(exponent),
        }
    }

    pub fn same_kind(&self, other: &Regime) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrValue {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub regime: Regime,
    /// value / profile(|w|) for the predicted regime.
    pub ratio: f64,
}

/// ∫₀^{2π} |1 − t e^{iθ}|^{−β} dθ with t = 1 − gap.
fn angular(gap: f64, beta: f64) -> (f64, f64, bool) {
    let t = 1.0 - gap;
    let f = |theta: f64| {
        let s = (0.5 * theta).sin();
        (gap * gap + 4.0 * t * s * s).powf(-0.5 * beta)
    };
    let breaks: Vec<f64> = (0..24).map(|k| gap * 4f64.powi(k)).filter(|&b| b < PI).collect();
    let r = integrate_adaptive(f, 0.0, PI, &breaks, FR_TOL);
    (2.0 * r.value, 2.0 * r.error, r.converged)
}

fn area_integral(eps: f64, delta: f64, w: f64) -> (f64, f64, bool) {
    let beta = 2.0 - eps - delta;
    // u = 1 − ρ² = v^{1/(1−ε)} turns ρ(1−ρ²)^{−ε} dρ into dv/(2(1−ε))
    let k = 1.0 / (1.0 - eps);
    let g = |v: f64| {
        let u = v.powf(k);
        let rho = (1.0 - u).sqrt();
        let gap = (1.0 - w) + w * u / (1.0 + rho);
        angular(gap, beta).0
    };
    let edge = 2.0 * (1.0 - w);
    let breaks: Vec<f64> = (0..24).map(|j| (edge * 4f64.powi(j)).powf(1.0 - eps)).filter(|&b| b > 0.0 && b < 1.0).collect();
    let r = integrate_adaptive(g, 0.0, 1.0, &breaks, FR_TOL);
    (r.value * 0.5 * k, r.error * 0.5 * k, r.converged)
}

pub fn forelli_rudin(eps: f64, delta: f64, w: Complex64, kind: FrKind) -> Result<FrValue> {
    if !(eps < 1.0) {
        return invalid(format!("ε must be below 1, got {eps}"));
    }
    let r = w.norm();
    if !(r < 1.0) {
        return invalid(format!("w = {w} must lie in the unit disc"));
    }
    let (value, error, converged) = match kind {
        FrKind::AreaIntegral => area_integral(eps, delta, r),
        FrKind::CircleIntegral => angular(1.0 - r, 1.0 - delta),
    };
    let regime = Regime::predicted(delta);
    Ok(FrValue { value, error, converged, regime, ratio: value / regime.profile(r) })
}

/// Reads the regime off samples near the boundary: flat when the values
/// change by less than 1.5×, otherwise whichever of the power model
/// (log a linear in x = −log(1−|w|²)) and the log model (a linear in x)
/// fits better.
pub fn classify(samples: &[(f64, f64)]) -> Option<Regime> {
    if samples.len() < 3 {
        return None;
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s.1), b.max(s.1)));
    if hi / lo < 1.5 {
        return Some(Regime::Bounded);
    }
    let x: Vec<f64> = samples.iter().map(|s| -((1.0 - s.0) * (1.0 + s.0)).ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let power = linear_fit(&x, &ly)?;
    let log = linear_fit(&x, &y)?;
    Some(if power.r_squared > log.r_squared {
        Regime::Power { exponent: -power.slope }
    } else {
        Regime::Logarithmic
    })
}
