//! Weak-type sweeps on 𝔻² and ℍ: the blow-up families and the bounded
//! suites.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::families::{
    family_function, fp_log_weighted_norm43, fp_norm43, lambda_from_s, projection_function, Coupling,
    CounterexampleFamily, FamilyKind, HartogsExponent,
};
use super::sweep::{RowFlag, SweepFit, SweepResult, SweepRow};
use crate::error::{invalid, Result};
use crate::geometry::{Domain, QuadratureRule};
use crate::norms::{lp_norm, Estimator, Superlevel, WeightSpec};
use crate::projector::{default_series_rule, project_series, FunctionHandle};

/// Monte Carlo rows whose relative standard error exceeds this are flagged.
pub const MC_REL_TOL: f64 = 0.1;

fn check_grid(grid: &[f64], name: &str, lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return invalid(format!("{name} grid is empty"));
    }
    if grid.iter().any(|&x| !(x > lo && x < hi)) {
        return invalid(format!("{name} grid must lie in ({lo}, {hi})"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid(format!("{name} grid must be strictly increasing"));
    }
    Ok(())
}

fn check_decades(grid: &[f64], decades: f64) -> Result<()> {
    check_grid(grid, "λ", 0.0, f64::INFINITY)?;
    if grid[grid.len() - 1] / grid[0] < 10f64.powf(decades) * (1.0 - 1e-12) {
        return invalid(format!("λ grid must span at least {decades} decades"));
    }
    Ok(())
}

fn measure_flag(measure: f64, error: f64) -> Option<RowFlag> {
    (measure > 0.0 && error > MC_REL_TOL * measure).then_some(RowFlag::Unconverged)
}

/// λ·μ{|P f_s| > λ}/‖f_s‖₁ with λ = (1 − s)⁻²/16, ‖f_s‖₁ = π².
pub fn weak11_failure_sweep(s_list: &[f64], estimator: Estimator) -> Result<SweepResult> {
    check_grid(s_list, "s", 0.0, 1.0)?;
    let rows = s_list
        .par_iter()
        .map(|&s| {
            let fam = CounterexampleFamily::new(FamilyKind::FsBidisc { s }, Coupling::LambdaFromS)?;
            let image = projection_function(&fam)?;
            let lambda = lambda_from_s(s);
            let (m, e) = Superlevel::new(&image, Domain::Polydisc(2), estimator)?.measure(lambda)?;
            Ok(SweepRow::new("f_s", s, lambda, m, e, PI * PI, 1.0).flagged(measure_flag(m, e)))
        })
        .collect::<Result<Vec<_>>>()?;
    let family = CounterexampleFamily::new(FamilyKind::FsBidisc { s: s_list[0] }, Coupling::LambdaFromS)?;
    let mut res = SweepResult::new("weak11", Some(family), 1.0, rows);
    let (x, y): (Vec<f64>, Vec<f64>) = res.usable_rows(None).map(|r| (-(1.0 - r.param).ln(), r.ratio)).unzip();
    if let Some(fit) = SweepFit::new("log(1/(1-s))", "ratio", &x, &y) {
        res.fits.insert("log_growth".into(), fit);
    }
    let increasing = res.rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    res.summary.insert("strictly_increasing".into(), increasing as u8 as f64);
    Ok(res)
}

/// How p is chosen in the L^{4/3} sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weak43Mode {
    /// p = 4/3 + λ^{−9/10}.
    Coupled,
    Fixed(f64),
}

/// λ^{4/3}μ{|P f_p| > λ}/‖f_p‖_{4/3}^{4/3} on ℍ with the analytic
/// distribution of c/|z₂|.
pub fn weak43_failure_sweep(lambda_list: &[f64], mode: Weak43Mode) -> Result<SweepResult> {
    check_decades(lambda_list, 4.0)?;
    let base = match mode {
        Weak43Mode::Coupled => FamilyKind::FpHartogs { p: HartogsExponent::from_p(2.0)? },
        Weak43Mode::Fixed(p) => FamilyKind::FpHartogs { p: HartogsExponent::from_p(p)? },
    };
    let coupling = if mode == Weak43Mode::Coupled { Coupling::PFromLambdaPower } else { Coupling::None };
    let rows = lambda_list
        .par_iter()
        .map(|&lambda| {
            let fam = CounterexampleFamily::coupled(base, coupling, lambda)?;
            let FamilyKind::FpHartogs { p } = fam.kind else { unreachable!("f_p family") };
            let c = fam.projection_constant()?.value;
            let (m, e) = Superlevel::new(&projection_function(&fam)?, Domain::HartogsTriangle, Estimator::Analytic)?.measure(lambda)?;
            let norm = fp_norm43(&p).powf(0.75);
            let flag = (c / lambda >= 1.0).then_some(RowFlag::ThresholdInvalid);
            Ok(SweepRow::new("f_p", lambda, lambda, m, e, norm, 4.0 / 3.0).flagged(flag))
        })
        .collect::<Result<Vec<_>>>()?;
    let family = CounterexampleFamily::new(base, coupling)?;
    let mut res = SweepResult::new("weak43", Some(family), 4.0 / 3.0, rows);
    finish_threshold_sweep(&mut res, lambda_list, |l| {
        let fam = CounterexampleFamily::coupled(base, coupling, l)?;
        Ok(fam.projection_constant()?.value / l)
    })?;
    Ok(res)
}

fn finish_threshold_sweep<F: Fn(f64) -> Result<f64>>(res: &mut SweepResult, lambdas: &[f64], threshold: F) -> Result<()> {
    if let Some(fit) = res.loglog_fit(None) {
        res.fits.insert("loglog".into(), fit);
    }
    let mut worst: f64 = 0.0;
    for &l in lambdas {
        worst = worst.max(threshold(l)?);
    }
    res.summary.insert("threshold_max".into(), worst);
    Ok(())
}

/// The log-modified family with p = 4/3 + exp(−λ^{9/10}) against the
/// weight (1 − log|z₂|)^{1/3}; norms from the E₁ closed form.
pub fn orlicz_weight_failure_sweep(lambda_list: &[f64]) -> Result<SweepResult> {
    check_decades(lambda_list, 3.0)?;
    let base = FamilyKind::FpLogHartogs { p: HartogsExponent::from_p(2.0)? };
    let rows = lambda_list
        .par_iter()
        .map(|&lambda| {
            let fam = CounterexampleFamily::coupled(base, Coupling::PFromLambdaExp, lambda)?;
            let FamilyKind::FpLogHartogs { p } = fam.kind else { unreachable!("log family") };
            let c = fam.projection_constant()?.value;
            let (m, e) = Superlevel::new(&projection_function(&fam)?, Domain::HartogsTriangle, Estimator::Analytic)?.measure(lambda)?;
            let norm = fp_log_weighted_norm43(&p)?.powf(0.75);
            let flag = (c / lambda >= 1.0).then_some(RowFlag::ThresholdInvalid);
            Ok(SweepRow::new("f_p_log", lambda, lambda, m, e, norm, 4.0 / 3.0).flagged(flag))
        })
        .collect::<Result<Vec<_>>>()?;
    let family = CounterexampleFamily::new(base, Coupling::PFromLambdaExp)?;
    let mut res = SweepResult::new("orlicz_weight", Some(family), 4.0 / 3.0, rows);
    finish_threshold_sweep(&mut res, lambda_list, |l| {
        let fam = CounterexampleFamily::coupled(base, Coupling::PFromLambdaExp, l)?;
        Ok(fam.projection_constant()?.value / l)
    })?;
    // weighted norm^{4/3} against log(1/(3p − 4))
    let mut x = Vec::new();
    let mut y = Vec::new();
    for r in res.usable_rows(None) {
        let p = super::families::p_from_lambda_exp(r.lambda)?;
        x.push(p.ln_inverse_gap());
        y.push(r.norm.powf(4.0 / 3.0));
    }
    if let Some(fit) = SweepFit::new("log(1/(3p-4))", "weighted norm^(4/3)", &x, &y) {
        res.fits.insert("norm_growth".into(), fit);
    }
    Ok(res)
}

/// Weighted norm^{4/3} of the log family by the E₁ formula and by
/// quadrature on ℍ.
pub fn log_family_norm_check(p: f64, rule: &QuadratureRule) -> Result<(f64, f64)> {
    let e = HartogsExponent::from_p(p)?;
    let formula = fp_log_weighted_norm43(&e)?;
    let f = family_function(&CounterexampleFamily::fp_log(p)?);
    let q = lp_norm(&f, Domain::HartogsTriangle, 4.0 / 3.0, Some(&WeightSpec::log_z2(1.0 / 3.0)), rule)?;
    Ok((formula, q.integral))
}

/// A test function together with its projection and the estimator used for
/// the projection's distribution.
#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub f: FunctionHandle,
    pub image: FunctionHandle,
    pub estimator: Estimator,
}

impl SuiteCase {
    pub fn family(fam: &CounterexampleFamily) -> Result<Self> {
        Ok(Self { f: family_function(fam), image: projection_function(fam)?, estimator: Estimator::Analytic })
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        let h = FunctionHandle::constant(domain, Complex64::new(c, 0.0));
        Self { f: h.clone(), image: h, estimator: Estimator::Analytic }
    }
}

pub const SUITE_RAY_ORDERS: (usize, usize) = (16, 12);

/// Five functions in L⁴(ℍ): 1, f_p at p = 6, 3, 5/2, and
/// z₁z₂ + z̄₂ + 1/2 whose projection comes from the series path.
pub fn default_weak44_suite() -> Result<Vec<SuiteCase>> {
    let mut suite = vec![SuiteCase::constant(Domain::HartogsTriangle, 1.0)];
    for p in [6.0, 3.0, 2.5] {
        suite.push(SuiteCase::family(&CounterexampleFamily::fp(p)?)?);
    }
    let f = FunctionHandle::new(Domain::HartogsTriangle, "z1z2+conj(z2)+1/2", |z| z[0] * z[1] + z[1].conj() + 0.5);
    let n = 8;
    let co = project_series(Domain::HartogsTriangle, &f, n, &default_series_rule(Domain::HartogsTriangle, n)?)?;
    let image = co.to_function().with_label("P[z1z2+conj(z2)+1/2]");
    let (radial_order, angular_order) = SUITE_RAY_ORDERS;
    suite.push(SuiteCase { f, image, estimator: Estimator::Quadrature { radial_order, angular_order } });
    Ok(suite)
}

/// Quadrature rule for input norms on ℍ; graded toward z₂ = 0 where the
/// suite functions are singular.
pub fn hartogs_norm_rule() -> Result<QuadratureRule> {
    Ok(QuadratureRule::new(Domain::HartogsTriangle, 40, 8)?.with_origin_grading(30))
}

fn suite_sweep(
    name: &str,
    suite: &[SuiteCase],
    lambda_grid: &[f64],
    p: f64,
    weight: Option<&WeightSpec>,
    rule: &QuadratureRule,
) -> Result<SweepResult> {
    check_decades(lambda_grid, 3.0)?;
    if suite.is_empty() {
        return invalid("test suite is empty");
    }
    let mut rows = Vec::new();
    for (i, case) in suite.iter().enumerate() {
        let norm = lp_norm(&case.f, Domain::HartogsTriangle, p, weight, rule)?;
        let sl = Superlevel::new(&case.image, Domain::HartogsTriangle, case.estimator)?;
        for &lambda in lambda_grid {
            let (m, e) = sl.measure(lambda)?;
            let flag = if !norm.converged { Some(RowFlag::Unconverged) } else { measure_flag(m, e) };
            rows.push(SweepRow::new(case.f.label(), i as f64, lambda, m, e, norm.value, p).flagged(flag));
        }
    }
    let mut res = SweepResult::new(name, None, p, rows);
    let curve: Vec<(f64, f64)> = res.suite_max_curve().into_iter().filter(|c| c.1 > 0.0).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = curve.iter().map(|c| (c.0.ln(), c.1.ln())).unzip();
    if let Some(fit) = SweepFit::new("log lambda", "log suite max", &x, &y) {
        res.summary.insert("suite_slope".into(), fit.slope);
        res.fits.insert("suite_max".into(), fit);
    }
    res.summary.insert("suite_max".into(), curve.iter().map(|c| c.1).fold(0.0, f64::max));
    Ok(res)
}

/// λ⁴μ{|P f| > λ}/‖f‖₄⁴ over a suite in L⁴(ℍ).
pub fn weak44_bound_check(suite: &[SuiteCase], lambda_grid: &[f64], rule: &QuadratureRule) -> Result<SweepResult> {
    suite_sweep("weak44", suite, lambda_grid, 4.0, None, rule)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    /// |z₂|^{−ε}, ε > 0.
    PowerZ2(f64),
    /// (1 − log|z₂|)^ε, ε ≥ 1/3.
    LogZ2(f64),
}

impl WeightKind {
    pub fn spec(&self) -> WeightSpec {
        match *self {
            WeightKind::PowerZ2(e) => WeightSpec::power_z2(e),
            WeightKind::LogZ2(e) => WeightSpec::log_z2(e),
        }
    }

    fn is_endpoint(&self) -> bool {
        matches!(*self, WeightKind::LogZ2(e) if (e - 1.0 / 3.0).abs() < 1e-12)
    }
}

/// Three f_p members (p = 2, 3/2, 3) and the constant 1.
pub fn default_weighted_suite() -> Result<Vec<SuiteCase>> {
    let mut suite = vec![SuiteCase::constant(Domain::HartogsTriangle, 1.0)];
    for p in [2.0, 1.5, 3.0] {
        suite.push(SuiteCase::family(&CounterexampleFamily::fp(p)?)?);
    }
    Ok(suite)
}

/// λ^{4/3}μ{|P f| > λ}/‖f‖^{4/3} in the weighted space; at the log
/// endpoint ε = 1/3 the coupled log family is appended as series "coupled"
/// and a blow-up verdict is recorded.
pub fn weighted_weak_check(
    weight: WeightKind,
    suite: &[SuiteCase],
    lambda_grid: &[f64],
    coupled_lambdas: &[f64],
    rule: &QuadratureRule,
) -> Result<SweepResult> {
    match weight {
        WeightKind::PowerZ2(e) if !(e > 0.0) => return invalid("power weight needs ε > 0"),
        WeightKind::LogZ2(e) if !(e > 1.0 / 3.0) && !weight.is_endpoint() => return invalid("log weight needs ε ≥ 1/3"),
        _ => {}
    }
    let spec = weight.spec();
    let mut res = suite_sweep("weighted", suite, lambda_grid, 4.0 / 3.0, Some(&spec), rule)?;
    if weight.is_endpoint() {
        let coupled = orlicz_weight_failure_sweep(coupled_lambdas)?;
        let slope = coupled.fits.get("loglog").map(|f| f.slope);
        let increasing = coupled.usable_rows(None).collect::<Vec<_>>().windows(2).all(|w| w[1].ratio > w[0].ratio);
        let blowup = increasing && slope.is_some_and(|s| s > 0.0);
        res.summary.insert("blowup_detected".into(), blowup as u8 as f64);
        if let Some(fit) = coupled.fits.get("loglog") {
            res.fits.insert("coupled".into(), fit.clone());
        }
        let offset = suite.len() as f64;
        res.rows.extend(coupled.rows.into_iter().map(|mut r| {
            r.series = "coupled".into();
            r.param += offset;
            r
        }));
        res.family = coupled.family;
    }
    res.name = format!("weighted[{}]", spec.label());
    Ok(res)
}

/// Exact weighted norm^{4/3} of f_p against |z₂|^{−ε}: 2π²/(b − ε), b = 4a/3.
pub fn fp_power_weighted_norm43(p: &HartogsExponent, eps: f64) -> Result<f64> {
    let b = 4.0 * p.a() / 3.0;
    if !(b > eps) {
        return invalid("weighted norm diverges");
    }
    Ok(2.0 * PI * PI / (b - eps))
}
