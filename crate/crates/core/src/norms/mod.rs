//! L^p (weighted), weak-L^p, Lorentz L^{p,1} and Orlicz L^p(log⁺L)^k norms,
//! and distribution functions.

mod distribution;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{CPoint, Domain, QuadratureRule};
use crate::numeric::{bisect, integrate_adaptive, integrate_half_line, linear_fit, CompensatedSum, Tolerance};
use crate::projector::FunctionHandle;

pub use distribution::{
    analytic_measure, distribution, inverse_product_squared_measure, lens_area, DistributionCurve, DistributionSample,
    Estimator, Superlevel, DEFAULT_MC_COUNT, DEFAULT_MC_SEED,
};

/// Relative change between a rule and its coarse sibling above which an
/// integral is reported as unconverged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

type WeightFn = Arc<dyn Fn(&CPoint) -> f64 + Send + Sync>;
type LnRadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type MomentFn = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

/// A positive weight. Radial weights carry ln w as a function of
/// x = −ln|z| (the last coordinate), which stays accurate at radii far below
/// the smallest normal double and keeps powers of the weight overflow-free.
#[derive(Clone)]
pub struct WeightSpec {
    label: String,
    eval: WeightFn,
    ln_radial: Option<LnRadialFn>,
    disc_moment: Option<MomentFn>,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec").field("label", &self.label).field("radial", &self.ln_radial.is_some()).finish()
    }
}

impl WeightSpec {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&CPoint) -> f64 + Send + Sync + 'static,
    {
        Self { label: label.into(), eval: Arc::new(f), ln_radial: None, disc_moment: None }
    }

    /// w(z) = exp(g(−ln|z_last|)).
    pub fn ln_radial<G>(label: impl Into<String>, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g: LnRadialFn = Arc::new(g);
        let h = g.clone();
        Self {
            label: label.into(),
            eval: Arc::new(move |z| h(-z[z.dim() - 1].norm().ln()).exp()),
            ln_radial: Some(g),
            disc_moment: None,
        }
    }

    /// Attaches an exact evaluator of ∫_𝔻 w^q dV, used where the generic
    /// radial integration would converge too slowly. It may decline (None)
    /// for exponents it does not cover.
    pub fn with_disc_moment<M>(mut self, m: M) -> Self
    where
        M: Fn(f64) -> Option<f64> + Send + Sync + 'static,
    {
        self.disc_moment = Some(Arc::new(m));
        self
    }

    pub fn unit() -> Self {
        Self::ln_radial("1", |_| 0.0)
    }

    /// |z_last|^β.
    pub fn modulus_power(beta: f64) -> Self {
        Self::ln_radial(format!("|z|^{beta}"), move |x| -beta * x)
    }

    /// |z₂|^{−ε}.
    pub fn power_z2(eps: f64) -> Self {
        Self::ln_radial(format!("|z2|^{{-{eps}}}"), move |x| eps * x)
    }

    /// (−log|z₂| + 1)^ε.
    pub fn log_z2(eps: f64) -> Self {
        Self::ln_radial(format!("(-log|z2|+1)^{{{eps}}}"), move |x| eps * x.ln_1p())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn eval(&self, z: &CPoint) -> f64 {
        (self.eval)(z)
    }

    /// ln w as a function of x = −ln r, for radial weights.
    pub fn ln_at_log_radius(&self, x: f64) -> Option<f64> {
        self.ln_radial.as_ref().map(|g| g(x))
    }

    /// w as a function of x = −ln r, for radial weights.
    pub fn at_log_radius(&self, x: f64) -> Option<f64> {
        self.ln_at_log_radius(x).map(f64::exp)
    }

    pub fn is_radial(&self) -> bool {
        self.ln_radial.is_some()
    }

    /// Exact ∫_𝔻 w^q dV when an evaluator is attached and covers q.
    pub fn disc_moment(&self, q: f64) -> Option<f64> {
        self.disc_moment.as_ref().and_then(|m| m(q))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let e = self.eval.clone();
        let lc = c.ln();
        Self {
            label: format!("{c}*{}", self.label),
            eval: Arc::new(move |z| c * e(z)),
            ln_radial: self.ln_radial.clone().map(|g| Arc::new(move |x| lc + g(x)) as LnRadialFn),
            disc_moment: self.disc_moment.clone().map(|m| Arc::new(move |q| m(q).map(|v| c.powf(q) * v)) as MomentFn),
        }
    }

    /// w^q, e.g. the dual weight w^{−1/(p−1)}.
    pub fn powf(&self, q: f64) -> Self {
        let e = self.eval.clone();
        Self {
            label: format!("({})^{{{q}}}", self.label),
            eval: Arc::new(move |z| e(z).powf(q)),
            ln_radial: self.ln_radial.clone().map(|g| Arc::new(move |x| q * g(x)) as LnRadialFn),
            disc_moment: self.disc_moment.clone().map(|m| Arc::new(move |r| m(q * r)) as MomentFn),
        }
    }

    /// Checks positivity at the rule's nodes and convergence of ∫ w dV.
    pub fn check_integrable(&self, domain: Domain, rule: &QuadratureRule) -> Result<NormEstimate> {
        if rule.domain() != domain {
            return invalid("rule built for another domain");
        }
        let bad = rule.collect(|z| self.eval(z)).into_iter().any(|(_, v)| !(v > 0.0 && v.is_finite()));
        if bad {
            return invalid(format!("weight {} is not positive and finite at every node", self.label));
        }
        let one = FunctionHandle::constant(domain, num_complex::Complex64::new(1.0, 0.0));
        let n = lp_norm(&one, domain, 1.0, Some(self), rule)?;
        if !n.converged {
            return Err(Error::Unsupported(format!("∫ {} dV does not settle under refinement", self.label)));
        }
        Ok(n)
    }
}

/// A norm or integral with the coarse-rule error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// ∫|f|^p w dV.
    pub integral: f64,
    pub error: f64,
    pub converged: bool,
}

/// (∫|f|^p w dV)^{1/p}.
pub fn lp_norm(f: &FunctionHandle, domain: Domain, p: f64, weight: Option<&WeightSpec>, rule: &QuadratureRule) -> Result<NormEstimate> {
    if !(p > 0.0) {
        return invalid(format!("exponent p must be positive, got {p}"));
    }
    if f.domain() != domain || rule.domain() != domain {
        return invalid("function, rule and domain must agree");
    }
    let (fine, coarse) = match (f.factors(), weight) {
        (Some(factors), None) => {
            let mut acc = (1.0, 1.0);
            for (j, g) in factors.iter().enumerate() {
                let rule = g.adapted_rule(&rule.factor(j)?);
                let h = |z: &CPoint| g.value(z).norm().powf(p);
                acc = (acc.0 * rule.sum_real(h)?, acc.1 * rule.coarsened().sum_real(h)?);
            }
            acc
        }
        _ => {
            let rule = f.adapted_rule(rule);
            let g = |z: &CPoint| {
                let w = weight.map_or(1.0, |w| w.eval(z));
                f.value(z).norm().powf(p) * w
            };
            (rule.sum_real(g)?, rule.coarsened().sum_real(g)?)
        }
    };
    let err = (fine - coarse).abs();
    let value = fine.powf(1.0 / p);
    let rel = if fine > 0.0 { err / fine } else { 0.0 };
    Ok(NormEstimate { value, integral: fine, error: value * rel / p, converged: rel <= CONVERGENCE_TOL })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakNorm {
    pub value: f64,
    pub argmax: f64,
    /// The maximum sits at an end of the grid, so the supremum may be larger.
    pub at_edge: bool,
}

/// max over the grid of λ·μ{|f| > λ}^{1/p}.
pub fn weak_lp_quasinorm(f: &FunctionHandle, domain: Domain, p: f64, lambda_grid: &[f64], estimator: Estimator) -> Result<WeakNorm> {
    if !(p > 0.0) {
        return invalid("exponent p must be positive");
    }
    let (lo, hi) = match (lambda_grid.first(), lambda_grid.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return invalid("empty λ grid"),
    };
    if hi / lo < 1e3 * (1.0 - 1e-12) {
        return invalid("λ grid must span at least three decades");
    }
    let curve = distribution(f, domain, lambda_grid, estimator)?;
    let mut best = (f64::NEG_INFINITY, lo, 0usize);
    for (i, s) in curve.samples.iter().enumerate() {
        let v = s.t * s.measure.powf(1.0 / p);
        if v > best.0 {
            best = (v, s.t, i);
        }
    }
    let at_edge = best.2 == 0 || best.2 == lambda_grid.len() - 1;
    Ok(WeakNorm { value: best.0, argmax: best.1, at_edge })
}

/// λ^q·μ / ‖f‖^q, the quantity bounded by weak-type (p, q) inequalities.
pub fn weak_ratio(lambda: f64, measure: f64, input_norm: f64, q: f64) -> f64 {
    lambda.powf(q) * measure / input_norm.powf(q)
}

/// λ^q·μ{|image| > λ} / input_norm^q.
pub fn weak_type_ratio(
    image: &FunctionHandle,
    domain_out: Domain,
    input_norm: f64,
    p: f64,
    q: f64,
    lambda: f64,
    estimator: Estimator,
) -> Result<f64> {
    if !(input_norm > 0.0) || !(lambda > 0.0) {
        return invalid("input norm and λ must be positive");
    }
    if !(p >= 1.0 && q > 0.0) {
        return invalid("need p ≥ 1 and q > 0");
    }
    let (measure, _) = Superlevel::new(image, domain_out, estimator)?.measure(lambda)?;
    Ok(weak_ratio(lambda, measure, input_norm, q))
}

/// The Orlicz class L^p(log⁺L)^k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczSpec {
    pub p: f64,
    pub k: u32,
}

impl OrliczSpec {
    pub fn new(p: f64, k: u32) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return invalid(format!("Orlicz exponent must be ≥ 1, got {p}"));
        }
        Ok(Self { p, k })
    }

    /// φ(u) = u^p (log⁺u)^k.
    pub fn phi(&self, u: f64) -> f64 {
        if self.k == 0 {
            u.powf(self.p)
        } else if u <= 1.0 {
            0.0
        } else {
            u.powf(self.p) * u.ln().powi(self.k as i32)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrliczFlag {
    /// f vanishes at every node, so Φ ≡ 0.
    ZeroFunction,
    /// Φ stayed below 1 over the whole expanded bracket; the value is the
    /// lower bracket edge.
    BracketExhausted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczNorm {
    pub value: f64,
    /// ∫ φ(|f|) dV agrees between the rule and its coarse sibling.
    pub converged: bool,
    pub flag: Option<OrliczFlag>,
    /// Every (λ, Φ(λ)) evaluated, in evaluation order.
    pub trace: Vec<(f64, f64)>,
}

impl OrliczNorm {
    /// Φ is nonincreasing along the evaluated λ values.
    pub fn trace_is_monotone(&self) -> bool {
        let mut t = self.trace.clone();
        t.sort_by(|a, b| a.0.total_cmp(&b.0));
        t.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

/// Root of Φ(λ) = 1 by bracketing and bisection in log λ.
fn solve_orlicz<F: FnMut(f64) -> f64>(mut phi: F, start: f64, tol: f64) -> (f64, Option<OrliczFlag>, Vec<(f64, f64)>) {
    let mut trace = Vec::new();
    let mut eval = |l: f64, trace: &mut Vec<(f64, f64)>| {
        let v = phi(l);
        trace.push((l, v));
        v
    };
    let mut lo = start;
    let mut hi = start;
    let mut ok = false;
    for _ in 0..400 {
        if eval(lo, &mut trace) >= 1.0 {
            ok = true;
            break;
        }
        lo *= 0.5;
    }
    if !ok {
        return (lo, Some(OrliczFlag::BracketExhausted), trace);
    }
    while eval(hi, &mut trace) > 1.0 {
        hi *= 2.0;
    }
    let x = bisect(|l| eval(l, &mut trace) - 1.0, lo, hi, tol);
    (x, None, trace)
}

/// Orlicz norm from any evaluator of Φ(λ) = ∫ φ(|f|/λ) dV.
pub fn orlicz_norm_from_phi<F: FnMut(f64) -> f64>(phi: F, scale_hint: f64, tol: f64) -> Result<OrliczNorm> {
    if !(scale_hint > 0.0) {
        return invalid("scale hint must be positive");
    }
    let (value, flag, trace) = solve_orlicz(phi, scale_hint, tol);
    Ok(OrliczNorm { value, converged: true, flag, trace })
}

/// Luxemburg norm inf{λ : ∫ φ(|f|/λ) dV ≤ 1} with φ(u) = u^p (log⁺u)^k.
pub fn orlicz_norm(f: &FunctionHandle, domain: Domain, spec: OrliczSpec, tol: f64, rule: &QuadratureRule) -> Result<OrliczNorm> {
    if f.domain() != domain || rule.domain() != domain {
        return invalid("function, rule and domain must agree");
    }
    let rule = f.adapted_rule(rule);
    let nodes = rule.collect(|z| f.value(z).norm());
    if let Some((_, v)) = nodes.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { point: format!("|f| = {v}") });
    }
    let phi_of = |nodes: &[(f64, f64)], l: f64| {
        let mut acc = CompensatedSum::new();
        for (w, v) in nodes {
            acc.add(w * spec.phi(v / l));
        }
        acc.value()
    };
    // finiteness check of ∫ φ(|f|) at the scale of f
    let coarse = rule.coarsened().collect(|z| f.value(z).norm());
    let lp = phi_of(&nodes, 1.0);
    let lp_norm = {
        let mut acc = CompensatedSum::new();
        for (w, v) in &nodes {
            acc.add(w * v.powf(spec.p));
        }
        acc.value().powf(1.0 / spec.p)
    };
    if lp_norm == 0.0 {
        return Ok(OrliczNorm { value: 0.0, converged: true, flag: Some(OrliczFlag::ZeroFunction), trace: vec![] });
    }
    let scale = lp_norm * (-(spec.k as f64)).exp();
    let fine_s = phi_of(&nodes, scale);
    let coarse_s = phi_of(&coarse, scale);
    let converged = (fine_s - coarse_s).abs() <= 1e-4 * fine_s.abs().max(1e-300) && lp.is_finite();
    let (value, flag, trace) = solve_orlicz(|l| phi_of(&nodes, l), scale, tol);
    Ok(OrliczNorm { value, converged, flag, trace })
}

/// Φ(λ) = ∫₀^∞ φ′(u) μ(λu) du from a distribution function μ.
pub fn orlicz_phi_from_measure<M: Fn(f64) -> f64>(mu: &M, spec: OrliczSpec, lambda: f64) -> f64 {
    let p = spec.p;
    let k = spec.k as i32;
    let tol = Tolerance { abs: 1e-300, rel: 1e-11, max_panels: 2000 };
    // u = e^y on u > 1
    let upper = integrate_half_line(
        |y| {
            let dphi = if k == 0 { p } else { p * y.powi(k) + k as f64 * y.powi(k - 1) };
            (p * y).exp() * dphi * mu(lambda * y.exp())
        },
        tol,
        200,
    );
    let lower = if k == 0 {
        integrate_adaptive(|u| p * u.powf(p - 1.0) * mu(lambda * u), 0.0, 1.0, &[], tol).value
    } else {
        0.0
    };
    upper.value + lower
}

/// Orlicz norm from a distribution function (layer-cake route).
pub fn orlicz_norm_from_measure<M: Fn(f64) -> f64>(mu: &M, spec: OrliczSpec, scale_hint: f64, tol: f64) -> Result<OrliczNorm> {
    if !(scale_hint > 0.0) {
        return invalid("scale hint must be positive");
    }
    if mu(0.0) == 0.0 {
        return Ok(OrliczNorm { value: 0.0, converged: true, flag: Some(OrliczFlag::ZeroFunction), trace: vec![] });
    }
    let (value, flag, trace) = solve_orlicz(|l| orlicz_phi_from_measure(mu, spec, l), scale_hint, tol);
    Ok(OrliczNorm { value, converged: true, flag, trace })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzNorm {
    pub value: f64,
    /// Contribution of the power-law extrapolation beyond the grid.
    pub tail: f64,
    /// Fitted tail exponent of μ^{1/p}; divergence when ≥ −1.
    pub tail_exponent: Option<f64>,
    pub divergent: bool,
}

/// ∫₀^∞ μ{|f| > t}^{1/p} dt with power-law interpolation between grid points
/// and a power-law tail fitted on the last decade.
pub fn lorentz_p1_norm(f: &FunctionHandle, domain: Domain, p: f64, t_grid: &[f64], estimator: Estimator) -> Result<LorentzNorm> {
    if !(p > 1.0) {
        return invalid("Lorentz exponent must exceed 1");
    }
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] <= 0.0 {
        return invalid("t grid must be positive and strictly increasing");
    }
    let sl = Superlevel::new(f, domain, estimator)?;
    let g = |t: f64| sl.measure(t).map(|(m, _)| m.max(0.0).powf(1.0 / p));
    let vals: Vec<f64> = t_grid.iter().map(|&t| g(t)).collect::<Result<_>>()?;
    let segment = |t0: f64, g0: f64, t1: f64, g1: f64| {
        let ratio = t1 / t0;
        let b = (g1 / g0).ln() / ratio.ln();
        if (b + 1.0).abs() < 1e-12 {
            g0 * t0 * ratio.ln()
        } else {
            g0 * t0 / (b + 1.0) * (ratio.powf(b + 1.0) - 1.0)
        }
    };
    let mut acc = CompensatedSum::new();
    acc.add(t_grid[0] * vals[0]);
    for i in 0..t_grid.len() - 1 {
        let (t0, t1, g0, g1) = (t_grid[i], t_grid[i + 1], vals[i], vals[i + 1]);
        if g0 == 0.0 {
            break;
        }
        if g1 > 0.0 {
            acc.add(segment(t0, g0, t1, g1));
            continue;
        }
        // locate ess sup |f| inside (t0, t1), then refine the last stretch
        let edge = bisect(|t| if g(t).unwrap_or(0.0) > 0.0 { -1.0 } else { 1.0 }, t0, t1, 1e-15);
        let sub: Vec<f64> = (0..16).map(|j| t0 * (edge / t0).powf(j as f64 / 16.0)).collect();
        let gs: Vec<f64> = sub.iter().map(|&t| g(t)).collect::<Result<_>>()?;
        for j in 0..15 {
            if gs[j + 1] > 0.0 {
                acc.add(segment(sub[j], gs[j], sub[j + 1], gs[j + 1]));
            } else {
                acc.add(gs[j] * (sub[j + 1] - sub[j]));
            }
        }
        acc.add(gs[15] * (edge - sub[15]));
        return Ok(LorentzNorm { value: acc.value(), tail: 0.0, tail_exponent: None, divergent: false });
    }
    let last = *vals.last().expect("grid has two points");
    if last == 0.0 {
        return Ok(LorentzNorm { value: acc.value(), tail: 0.0, tail_exponent: None, divergent: false });
    }
    let t_max = *t_grid.last().expect("grid has two points");
    let (lx, ly): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&vals)
        .filter(|(&t, &v)| t >= t_max / 10.0 * (1.0 - 1e-12) && v > 0.0)
        .map(|(&t, &v)| (t.ln(), v.ln()))
        .unzip();
    let fit = linear_fit(&lx, &ly).ok_or_else(|| Error::InvalidArgument("tail fit needs two points in the last decade".into()))?;
    let b = fit.slope;
    if b >= -1.0 {
        return Ok(LorentzNorm { value: acc.value(), tail: f64::INFINITY, tail_exponent: Some(b), divergent: true });
    }
    let tail = last * t_max / (-b - 1.0);
    Ok(LorentzNorm { value: acc.value() + tail, tail, tail_exponent: Some(b), divergent: false })
}

#[cfg(test)]
mod tests;
