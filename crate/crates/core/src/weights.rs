//! Carleson tents, Bekollé–Bonami constants and the iterated-logarithm
//! weights on the disc.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{CPoint, Domain, QuadratureRule};
use crate::norms::{lens_area, WeightSpec};
use crate::numeric::{integrate_adaptive, integrate_half_line, Tolerance};

const TENT_TOL: Tolerance = Tolerance { abs: 1e-300, rel: 1e-10, max_panels: 4000 };

/// Truncation depths in x = −ln r used to detect divergence at the origin.
pub const DIVERGENCE_LADDER: [f64; 5] = [4.0, 32.0, 256.0, 2048.0, 16384.0];
/// Growth factor per ladder step that counts as divergence.
pub const DIVERGENCE_GROWTH: f64 = 3.0;

/// The Carleson tent T_z = {w : |1 − w̄ z/|z|| < 1 − |z|}, with T_0 = 𝔻.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentSpec {
    pub center: Complex64,
}

impl TentSpec {
    pub fn new(center: Complex64) -> Result<Self> {
        if !(center.norm() < 1.0) {
            return invalid(format!("tent center {center} must lie in the unit disc"));
        }
        Ok(Self { center })
    }

    pub fn contains(&self, w: Complex64) -> bool {
        let r = self.center.norm();
        if r == 0.0 {
            return true;
        }
        (Complex64::new(1.0, 0.0) - w.conj() * (self.center / r)).norm() < 1.0 - r
    }

    /// Lebesgue measure of T_z ∩ 𝔻.
    pub fn area(&self) -> f64 {
        let r = self.center.norm();
        if r == 0.0 {
            PI
        } else {
            lens_area(1.0, 1.0 - r, 1.0)
        }
    }

    /// Angular measure of the circle |w| = ρ inside the tent, given ρ and
    /// the gap ρ − |z| separately so that thin tents keep full precision.
    fn arc(&self, rho: f64, gap: f64) -> f64 {
        let r = self.center.norm();
        // 1 − cos(θ/2) = gap(2 − |z| − ρ)/(2ρ), fed to a half-angle arcsine
        let s = (gap * (2.0 - r - rho) / (4.0 * rho)).clamp(0.0, 1.0);
        4.0 * s.sqrt().asin()
    }
}

pub fn tent_contains(tent: &TentSpec, w: Complex64) -> Result<bool> {
    if !(w.norm() < 1.0) {
        return invalid(format!("{w} is not in the unit disc"));
    }
    Ok(tent.contains(w))
}

/// ∫_{T_z} w^q dV, or a divergence verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TentIntegral {
    pub value: f64,
    pub divergent: bool,
    /// Truncated integrals over |w| > e^{−X} for X in [`DIVERGENCE_LADDER`];
    /// filled only for the tent at the origin, where the truncation matters.
    pub ladder: Vec<f64>,
}

fn radial_disc_integral(weight: &WeightSpec, q: f64) -> TentIntegral {
    let density = |x: f64| 2.0 * PI * (q * weight.ln_at_log_radius(x).expect("radial weight") - 2.0 * x).exp();
    let mut ladder = Vec::with_capacity(DIVERGENCE_LADDER.len());
    let mut lo = 0.0;
    let mut acc = 0.0;
    for &x in &DIVERGENCE_LADDER {
        acc += integrate_adaptive(density, lo, x, &[], TENT_TOL).value;
        ladder.push(acc);
        lo = x;
    }
    if let Some(v) = weight.disc_moment(q) {
        return TentIntegral { value: v, divergent: !v.is_finite(), ladder };
    }
    let growing = ladder.windows(2).rev().take(3).all(|w| w[1] >= DIVERGENCE_GROWTH * w[0]);
    let full = integrate_half_line(density, TENT_TOL, 400);
    let divergent = growing || !full.converged || !full.value.is_finite();
    TentIntegral { value: if divergent { f64::INFINITY } else { full.value }, divergent, ladder }
}

/// ∫_{T_z} w^q dV for a radial weight.
pub fn radial_tent_integral(weight: &WeightSpec, q: f64, tent: &TentSpec) -> Result<TentIntegral> {
    if !weight.is_radial() {
        return invalid(format!("weight {} is not radial", weight.label()));
    }
    let r0 = tent.center.norm();
    if r0 == 0.0 {
        return Ok(radial_disc_integral(weight, q));
    }
    // ρ = r0 + (1 − r0)t² absorbs the square-root edge of the arc at ρ = r0
    let f = |t: f64| {
        let gap = (1.0 - r0) * t * t;
        let rho = r0 + gap;
        let w = (q * weight.ln_at_log_radius(-rho.ln()).expect("radial weight")).exp();
        w * tent.arc(rho, gap) * rho * 2.0 * (1.0 - r0) * t
    };
    let r = integrate_adaptive(f, 0.0, 1.0, &[], TENT_TOL);
    let divergent = !r.value.is_finite();
    Ok(TentIntegral { value: r.value, divergent, ladder: vec![] })
}

/// ∫_{T_z} w^q dV by masking a polar rule on 𝔻; the error is the change
/// under refinement.
fn masked_tent_integral(weight: &WeightSpec, q: f64, tent: &TentSpec, rule: &QuadratureRule) -> Result<(f64, f64)> {
    let f = |w: &CPoint| if tent.contains(w[0]) { weight.eval(w).powf(q) } else { 0.0 };
    let coarse = rule.sum_real(f)?;
    let fine = rule.refined().sum_real(f)?;
    Ok((fine, (fine - coarse).abs()))
}

/// One tent of a Bekollé–Bonami computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbRow {
    pub center: Complex64,
    /// Average of the weight over the tent.
    pub mean: f64,
    /// Average of w^{−1/(p−1)} over the tent.
    pub dual_mean: f64,
    pub ratio: f64,
    pub divergent: bool,
    pub ladder: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbResult {
    pub label: String,
    pub p: f64,
    /// Maximum ratio over the grid; infinite when some tent integral diverges.
    pub value: f64,
    pub argmax: Complex64,
    pub divergent: bool,
    pub rows: Vec<BbRow>,
}

impl BbResult {
    /// Columns weight_label, p, center_re, center_im, ratio.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
        out.write_record(["weight_label", "p", "center_re", "center_im", "ratio"]).map_err(io)?;
        for r in &self.rows {
            out.write_record([
                self.label.clone(),
                format!("{:.16e}", self.p),
                format!("{:.16e}", r.center.re),
                format!("{:.16e}", r.center.im),
                format!("{:.16e}", r.ratio),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))
    }
}

/// |z| ∈ {0, 0.5, 0.9, 0.99, 0.999} with 8 phases each (the origin once).
pub fn default_center_grid() -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0)];
    for r in [0.5, 0.9, 0.99, 0.999] {
        for k in 0..8 {
            g.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / 8.0));
        }
    }
    g
}

/// sup over the grid of ⟨w⟩_T ⟨w^{−1/(p−1)}⟩_T^{p−1}. Radial weights use
/// exact arc-length integration in the radius; other weights a masked rule.
pub fn bb_constant(weight: &WeightSpec, p: f64, centers: &[Complex64], rule: &QuadratureRule) -> Result<BbResult> {
    if !(p > 1.0) {
        return invalid(format!("Bekollé–Bonami exponent must exceed 1, got {p}"));
    }
    if centers.is_empty() {
        return invalid("empty center grid");
    }
    if rule.domain() != Domain::UnitDisc {
        return invalid("tent averages need a rule on the unit disc");
    }
    let tents: Vec<TentSpec> = centers.iter().map(|&c| TentSpec::new(c)).collect::<Result<_>>()?;
    let q = -1.0 / (p - 1.0);
    let rows: Vec<BbRow> = tents
        .par_iter()
        .map(|t| -> Result<BbRow> {
            let area = t.area();
            let (a, b, ladder) = if weight.is_radial() {
                let a = radial_tent_integral(weight, 1.0, t)?;
                let b = radial_tent_integral(weight, q, t)?;
                let ladder = if b.ladder.is_empty() { a.ladder.clone() } else { b.ladder.clone() };
                ((a.value, a.divergent), (b.value, b.divergent), ladder)
            } else {
                let (a, ea) = masked_tent_integral(weight, 1.0, t, rule)?;
                let (b, eb) = masked_tent_integral(weight, q, t, rule)?;
                ((a, ea > 0.5 * a), (b, eb > 0.5 * b), vec![])
            };
            let divergent = a.1 || b.1;
            let (mean, dual_mean) = (a.0 / area, b.0 / area);
            let ratio = if divergent { f64::INFINITY } else { mean * dual_mean.powf(p - 1.0) };
            Ok(BbRow { center: t.center, mean, dual_mean, ratio, divergent, ladder })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.ratio > rows[best].ratio {
            best = i;
        }
    }
    let divergent = rows.iter().any(|r| r.divergent);
    Ok(BbResult {
        label: weight.label().to_string(),
        p,
        value: rows[best].ratio,
        argmax: rows[best].center,
        divergent,
        rows,
    })
}

/// f_{α,j}(z) = |z|⁻² h_j^α ∏_{k<j} h_k⁻¹ with h₁ = −log|z| + 1 and
/// h_{k+1} = log(h_k + 1) + 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IteratedLogWeight {
    pub j: u32,
    pub alpha: f64,
}

impl IteratedLogWeight {
    /// Rejects j = 0 and exponents for which ∫_𝔻 f dV fails to converge.
    pub fn new(j: u32, alpha: f64) -> Result<Self> {
        if j == 0 {
            return invalid("iteration depth j starts at 1");
        }
        if !alpha.is_finite() {
            return invalid("α must be finite");
        }
        let w = Self { j, alpha };
        if !w.disc_integral_checked().1 {
            return invalid(format!("f_(α={alpha}, j={j}) is not integrable on the disc (needs α < −1)"));
        }
        Ok(w)
    }

    /// h_1, …, h_j at x = −ln r.
    pub fn h_values(&self, x: f64) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.j as usize);
        let mut v = x + 1.0;
        h.push(v);
        for _ in 1..self.j {
            v = v.ln_1p() + 1.0;
            h.push(v);
        }
        h
    }

    /// ln f at x = −ln r.
    pub fn ln_at_log_radius(&self, x: f64) -> f64 {
        let h = self.h_values(x);
        let (last, rest) = h.split_last().expect("j ≥ 1");
        2.0 * x + self.alpha * last.ln() - rest.iter().map(|v| v.ln()).sum::<f64>()
    }

    pub fn eval(&self, z: Complex64) -> Result<f64> {
        let r = z.norm();
        if !(r > 0.0 && r < 1.0) {
            return invalid(format!("f_(α,j) needs 0 < |z| < 1, got |z| = {r}"));
        }
        Ok(self.ln_at_log_radius(-r.ln()).exp())
    }

    /// ∫_𝔻 f dV via y = h_j, where dy = dx ∏_{k<j} (h_k + 1)⁻¹; this leaves
    /// 2π ∫ y^α ∏_{k<j} (1 + 1/h_k) dy over y ≥ h_j(0).
    fn disc_integral_checked(&self) -> (f64, bool) {
        let y0 = *self.h_values(0.0).last().expect("j ≥ 1");
        let j = self.j;
        let alpha = self.alpha;
        let g = |t: f64| {
            let y = y0 + t;
            let mut factor = 1.0;
            let mut h = y;
            for _ in 1..j {
                h = (h - 1.0).exp_m1();
                if !h.is_finite() {
                    break;
                }
                factor *= 1.0 + 1.0 / h;
            }
            y.powf(alpha) * factor
        };
        let r = integrate_half_line(g, Tolerance { abs: 1e-300, rel: 1e-12, max_panels: 2000 }, 200);
        (2.0 * PI * r.value, r.converged && r.value.is_finite() && alpha < -1.0)
    }

    pub fn disc_integral(&self) -> f64 {
        self.disc_integral_checked().0
    }

    /// The weight f_{α,j} itself, radial with an exact first moment.
    pub fn weight(&self) -> WeightSpec {
        let me = *self;
        let total = self.disc_integral();
        WeightSpec::ln_radial(format!("f_(alpha={},j={})", self.alpha, self.j), move |x| me.ln_at_log_radius(x))
            .with_disc_moment(move |q| ((q - 1.0).abs() < 1e-12).then_some(total))
    }
}

/// Bekollé–Bonami constant of f_{α,j}^{−1/3} at p = 4/3.
pub fn bb_constant_iterated(j: u32, alpha: f64, centers: &[Complex64], rule: &QuadratureRule) -> Result<BbResult> {
    if !(alpha < -1.0) {
        return invalid(format!("α must be below −1, got {alpha}"));
    }
    let w = IteratedLogWeight::new(j, alpha)?.weight().powf(-1.0 / 3.0);
    let w = w.with_label(format!("f_(alpha={alpha},j={j})^(-1/3)"));
    bb_constant(&w, 4.0 / 3.0, centers, rule)
}
