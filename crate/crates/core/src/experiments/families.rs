//! The counterexample families f_s on 𝔻² and f_p on ℍ, their projections
//! and the λ couplings used by the blow-up sweeps.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::e1::exp_integral_e1_ln;
use crate::error::{invalid, Error, Result};
use crate::geometry::{CPoint, Domain};
use crate::numeric::{integrate_half_line, Tolerance};
use crate::projector::{FunctionHandle, ModulusProfile, PolarTerm};

/// p = 4/3 + δ stored through ln δ, so that δ far below the double
/// resolution of p (or below the smallest double) keeps full precision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HartogsExponent {
    ln_delta: f64,
}

impl HartogsExponent {
    pub fn from_p(p: f64) -> Result<Self> {
        if !(p > 4.0 / 3.0 && p.is_finite()) {
            return invalid(format!("p must exceed 4/3, got {p}"));
        }
        Self::from_ln_delta((p - 4.0 / 3.0).ln())
    }

    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return invalid(format!("δ must be positive, got {delta}"));
        }
        Self::from_ln_delta(delta.ln())
    }

    pub fn from_ln_delta(ln_delta: f64) -> Result<Self> {
        if !ln_delta.is_finite() {
            return invalid("ln δ must be finite");
        }
        Ok(Self { ln_delta })
    }

    /// p to nine places, or 4/3+exp(ln δ) once δ is lost in the rounding.
    pub fn describe(&self) -> String {
        if self.ln_delta() > -18.0 {
            let t = format!("{:.9}", self.p());
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            format!("4/3+exp({:.6})", self.ln_delta())
        }
    }

    pub fn ln_delta(&self) -> f64 {
        self.ln_delta
    }

    pub fn delta(&self) -> f64 {
        self.ln_delta.exp()
    }

    pub fn p(&self) -> f64 {
        4.0 / 3.0 + self.delta()
    }

    /// p′ = p/(p − 1).
    pub fn conjugate(&self) -> f64 {
        let d = self.delta();
        (4.0 / 3.0 + d) / (1.0 / 3.0 + d)
    }

    /// 1 − p′ = −1/(p − 1), the exponent of |z₂| in |f_p|.
    pub fn modulus_exponent(&self) -> f64 {
        -1.0 / (1.0 / 3.0 + self.delta())
    }

    /// ln a with a = 4 − p′ = 3δ/(1/3 + δ).
    pub fn ln_a(&self) -> f64 {
        3f64.ln() + self.ln_delta - (1.0 / 3.0 + self.delta()).ln()
    }

    pub fn a(&self) -> f64 {
        self.ln_a().exp()
    }

    /// ln(1/(3p − 4)).
    pub fn ln_inverse_gap(&self) -> f64 {
        -(3f64.ln() + self.ln_delta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// (1 − s²)⁴|1 − sw₁|⁻⁴|1 − sw₂|⁻⁴ on 𝔻².
    FsBidisc { s: f64 },
    /// w̄₂|w₂|^{−p′} on ℍ.
    FpHartogs { p: HartogsExponent },
    /// w̄₂|w₂|^{−p′}(1 − log|w₂|)⁻¹ on ℍ.
    FpLogHartogs { p: HartogsExponent },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    None,
    /// λ = (1 − s)⁻²/16.
    LambdaFromS,
    /// p = 4/3 + λ^{−9/10}.
    PFromLambdaPower,
    /// p = 4/3 + exp(−λ^{9/10}).
    PFromLambdaExp,
}

pub fn lambda_from_s(s: f64) -> f64 {
    (1.0 - s).powi(-2) / 16.0
}

pub fn p_from_lambda_power(lambda: f64) -> Result<HartogsExponent> {
    HartogsExponent::from_ln_delta(-0.9 * lambda.ln())
}

pub fn p_from_lambda_exp(lambda: f64) -> Result<HartogsExponent> {
    HartogsExponent::from_ln_delta(-lambda.powf(0.9))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleFamily {
    pub kind: FamilyKind,
    pub coupling: Coupling,
}

impl CounterexampleFamily {
    pub fn new(kind: FamilyKind, coupling: Coupling) -> Result<Self> {
        let ok = match (kind, coupling) {
            (FamilyKind::FsBidisc { s }, c) => {
                if !(s > 0.0 && s < 1.0) {
                    return invalid(format!("s must lie in (0, 1), got {s}"));
                }
                matches!(c, Coupling::None | Coupling::LambdaFromS)
            }
            (_, c) => matches!(c, Coupling::None | Coupling::PFromLambdaPower | Coupling::PFromLambdaExp),
        };
        if !ok {
            return invalid(format!("coupling {coupling:?} does not apply to {kind:?}"));
        }
        Ok(Self { kind, coupling })
    }

    pub fn fs(s: f64) -> Result<Self> {
        Self::new(FamilyKind::FsBidisc { s }, Coupling::None)
    }

    pub fn fp(p: f64) -> Result<Self> {
        Self::new(FamilyKind::FpHartogs { p: HartogsExponent::from_p(p)? }, Coupling::None)
    }

    pub fn fp_log(p: f64) -> Result<Self> {
        Self::new(FamilyKind::FpLogHartogs { p: HartogsExponent::from_p(p)? }, Coupling::None)
    }

    /// The family member selected by the coupling at level λ.
    pub fn coupled(kind: FamilyKind, coupling: Coupling, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("λ must be positive, got {lambda}"));
        }
        let kind = match (kind, coupling) {
            (FamilyKind::FpHartogs { .. }, Coupling::PFromLambdaPower) => FamilyKind::FpHartogs { p: p_from_lambda_power(lambda)? },
            (FamilyKind::FpHartogs { .. }, Coupling::PFromLambdaExp) => FamilyKind::FpHartogs { p: p_from_lambda_exp(lambda)? },
            (FamilyKind::FpLogHartogs { .. }, Coupling::PFromLambdaPower) => FamilyKind::FpLogHartogs { p: p_from_lambda_power(lambda)? },
            (FamilyKind::FpLogHartogs { .. }, Coupling::PFromLambdaExp) => FamilyKind::FpLogHartogs { p: p_from_lambda_exp(lambda)? },
            (k, _) => k,
        };
        Self::new(kind, coupling)
    }

    pub fn domain(&self) -> Domain {
        match self.kind {
            FamilyKind::FsBidisc { .. } => Domain::Polydisc(2),
            _ => Domain::HartogsTriangle,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            FamilyKind::FsBidisc { s } => format!("f_s(s={s})"),
            FamilyKind::FpHartogs { p } => format!("f_p(p={})", p.describe()),
            FamilyKind::FpLogHartogs { p } => format!("f_p_log(p={})", p.describe()),
        }
    }

    /// Projection constant c with P f = c/z₂ on ℍ.
    pub fn projection_constant(&self) -> Result<ProjectionConstant> {
        match self.kind {
            FamilyKind::FsBidisc { .. } => Err(Error::Unsupported("f_s projects to (1 − sz₁)⁻²(1 − sz₂)⁻²".into())),
            FamilyKind::FpHartogs { p } => {
                let a = p.a();
                let closed = 2.0 / a;
                Ok(ProjectionConstant { value: closed, closed_form: closed, reference: 0.5 * closed })
            }
            FamilyKind::FpLogHartogs { p } => {
                let ln_a = p.ln_a();
                let a = ln_a.exp();
                let value = 2.0 * a.exp() * e1_of_ln(ln_a)?;
                // comparability profile log(1/(3p − 4))
                Ok(ProjectionConstant { value, closed_form: value, reference: p.ln_inverse_gap() })
            }
        }
    }
}

/// E₁(e^{ln_x}) for any ln_x.
pub(crate) fn e1_of_ln(ln_x: f64) -> Result<f64> {
    if ln_x <= 0.0 {
        exp_integral_e1_ln(ln_x)
    } else {
        super::e1::exp_integral_e1(ln_x.exp())
    }
}

/// c in P f = c/z₂ with a reference value for comparison: (p − 1)/(3p − 4)
/// for f_p, which is half of c, and the comparability profile
/// log(1/(3p − 4)) for the log family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConstant {
    pub value: f64,
    pub closed_form: f64,
    pub reference: f64,
}

/// c = π⁻²⟨f, 1/z₂⟩ by quadrature of the radial integral
/// 2∫₀¹ r^{3−p′}(1 − log r)^{−j} dr in t = −log r, j = 0 or 1.
pub fn projection_constant_oracle(p: f64, log_factor: bool) -> Result<f64> {
    let e = HartogsExponent::from_p(p)?;
    let a = e.a();
    let tol = Tolerance { abs: 1e-300, rel: 1e-12, max_panels: 2000 };
    let r = if log_factor {
        integrate_half_line(|t| (-a * t).exp() / (1.0 + t), tol, 400)
    } else {
        integrate_half_line(|t| (-a * t).exp(), tol, 400)
    };
    if !r.converged {
        return Err(Error::InvalidArgument(format!("radial oracle did not converge at p = {p}")));
    }
    Ok(2.0 * r.value)
}

fn check_domain(family: &CounterexampleFamily, w: &CPoint) -> Result<()> {
    family.domain().require_interior(w)
}

pub fn family_eval(family: &CounterexampleFamily, w: &CPoint) -> Result<Complex64> {
    check_domain(family, w)?;
    Ok(raw_eval(family.kind, w))
}

fn raw_eval(kind: FamilyKind, w: &CPoint) -> Complex64 {
    match kind {
        FamilyKind::FsBidisc { s } => {
            let one = Complex64::new(1.0, 0.0);
            let q = (one - w[0] * s).norm() * (one - w[1] * s).norm();
            Complex64::new((1.0 - s * s).powi(4) * q.powi(-4), 0.0)
        }
        FamilyKind::FpHartogs { p } => {
            let r = w[1].norm();
            w[1].conj() / r * r.powf(p.modulus_exponent())
        }
        FamilyKind::FpLogHartogs { p } => {
            let r = w[1].norm();
            w[1].conj() / r * r.powf(p.modulus_exponent()) / (1.0 - r.ln())
        }
    }
}

pub fn closed_form_projection(family: &CounterexampleFamily, z: &CPoint) -> Result<Complex64> {
    check_domain(family, z)?;
    Ok(match family.kind {
        FamilyKind::FsBidisc { s } => {
            let one = Complex64::new(1.0, 0.0);
            ((one - z[0] * s) * (one - z[1] * s)).powi(-2)
        }
        _ => family.projection_constant()?.value / z[1],
    })
}

/// The family member as a function handle, with polar data and modulus
/// metadata where available.
pub fn family_function(family: &CounterexampleFamily) -> FunctionHandle {
    let kind = family.kind;
    let h = FunctionHandle::new(family.domain(), family.label(), move |w| raw_eval(kind, w));
    match kind {
        FamilyKind::FsBidisc { s } => {
            let one = Complex64::new(1.0, 0.0);
            let g = FunctionHandle::new(Domain::UnitDisc, format!("(1-s^2)^2|1-sz|^-4(s={s})"), move |z| {
                Complex64::new((1.0 - s * s).powi(2) * (one - z[0] * s).norm().powi(-4), 0.0)
            })
            .with_singularity(s);
            h.with_singularity(s).with_factors(vec![g.clone(), g]).expect("two disc factors on the bidisc")
        }
        FamilyKind::FpHartogs { p } => {
            let e = p.modulus_exponent();
            h.with_polar(vec![PolarTerm { modes: vec![0, -1], radial: Arc::new(move |r| Complex64::new(r[1].powf(e), 0.0)) }])
                .with_profile(ModulusProfile::RadialPower { coord: 1, coeff: 1.0, exponent: e })
        }
        FamilyKind::FpLogHartogs { p } => {
            let e = p.modulus_exponent();
            h.with_polar(vec![PolarTerm {
                modes: vec![0, -1],
                radial: Arc::new(move |r| Complex64::new(r[1].powf(e) / (1.0 - r[1].ln()), 0.0)),
            }])
        }
    }
}

/// The closed-form projection as a function handle with its modulus profile.
pub fn projection_function(family: &CounterexampleFamily) -> Result<FunctionHandle> {
    Ok(match family.kind {
        FamilyKind::FsBidisc { s } => {
            let one = Complex64::new(1.0, 0.0);
            FunctionHandle::new(Domain::Polydisc(2), format!("P f_s(s={s})"), move |z| ((one - z[0] * s) * (one - z[1] * s)).powi(-2))
                .with_singularity(s)
                .with_profile(ModulusProfile::InverseProductSquared { s })
        }
        _ => {
            let c = family.projection_constant()?.value;
            inverse_z2(c).with_label(format!("P {}", family.label()))
        }
    })
}

/// c/z₂ on ℍ.
pub fn inverse_z2(c: f64) -> FunctionHandle {
    FunctionHandle::new(Domain::HartogsTriangle, format!("{c}/z2"), move |z| c / z[1])
        .with_polar(vec![PolarTerm { modes: vec![0, -1], radial: Arc::new(move |r| Complex64::new(c / r[1], 0.0)) }])
        .with_profile(ModulusProfile::RadialPower { coord: 1, coeff: c.abs(), exponent: -1.0 })
}

/// ‖f_p‖^{4/3} in L^{4/3}(ℍ) for the plain family: 2π²/b, b = 4a/3.
pub fn fp_norm43(p: &HartogsExponent) -> f64 {
    1.5 * PI * PI / p.a()
}

/// ∫_ℍ |f|^{4/3}(1 − log|z₂|)^{1/3} dV for the log family: 2π²e^b E₁(b).
pub fn fp_log_weighted_norm43(p: &HartogsExponent) -> Result<f64> {
    let ln_b = p.ln_a() + (4.0f64 / 3.0).ln();
    let b = ln_b.exp();
    Ok(2.0 * PI * PI * b.exp() * e1_of_ln(ln_b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample, QuadratureRule};
    use crate::norms::{lp_norm, WeightSpec};
    use crate::projector::{default_series_rule, eval_projection, project_series};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponent_representation() {
        let e = HartogsExponent::from_p(2.0).unwrap();
        assert!((e.conjugate() - 2.0).abs() < 1e-14);
        assert!((e.a() - 2.0).abs() < 1e-14);
        assert!((e.modulus_exponent() + 1.0).abs() < 1e-14);
        // δ below the resolution of p itself
        let tiny = HartogsExponent::from_ln_delta(-1e4).unwrap();
        assert_eq!(tiny.p(), 4.0 / 3.0);
        assert!((tiny.ln_a() - (9f64.ln() - 1e4)).abs() < 1e-9);
        assert!(HartogsExponent::from_p(4.0 / 3.0).is_err());
        assert!(HartogsExponent::from_p(1.2).is_err());
        let pw = p_from_lambda_power(1e4).unwrap();
        assert!((pw.delta() - 1e4f64.powf(-0.9)).abs() < 1e-18);
        let ex = p_from_lambda_exp(100.0).unwrap();
        assert!((ex.ln_delta() + 100f64.powf(0.9)).abs() < 1e-12);
        assert!((lambda_from_s(0.75) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        let fs = CounterexampleFamily::fs(0.5).unwrap();
        let v = family_eval(&fs, &CPoint::two(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
        assert!((v.re - 0.75f64.powi(4)).abs() < 1e-15);
        let fp = CounterexampleFamily::fp(2.0).unwrap();
        let v = family_eval(&fp, &CPoint::two(c(0.1, 0.0), c(0.0, 0.5))).unwrap();
        assert!((v.norm() - 2.0).abs() < 1e-14);
        // w̄₂ phase
        assert!((v / v.norm() - c(0.0, -1.0)).norm() < 1e-14);
        let lg = CounterexampleFamily::fp_log(2.0).unwrap();
        let v = family_eval(&lg, &CPoint::two(c(0.1, 0.0), c(0.5, 0.0))).unwrap();
        assert!((v.re - 2.0 / (1.0 + 2f64.ln())).abs() < 1e-14);
        // outside ℍ
        assert!(family_eval(&fp, &CPoint::two(c(0.5, 0.0), c(0.4, 0.0))).is_err());
        assert!(family_eval(&fp, &CPoint::two(c(0.0, 0.0), c(0.0, 0.0))).is_err());
        assert!(CounterexampleFamily::fs(1.0).is_err());
        assert!(CounterexampleFamily::new(FamilyKind::FsBidisc { s: 0.5 }, Coupling::PFromLambdaExp).is_err());
        // polar data agrees with the evaluator
        for f in [fp, lg] {
            let h = family_function(&f);
            for z in sample(Domain::HartogsTriangle, 10, 3).unwrap().points {
                assert!((h.polar_eval(&z).unwrap() - h.value(&z)).norm() < 1e-12 * h.value(&z).norm());
            }
        }
    }

    #[test]
    fn fs_l1_norm_is_pi_squared() {
        let f = family_function(&CounterexampleFamily::fs(0.5).unwrap());
        let rule = QuadratureRule::new(Domain::Polydisc(2), 40, 64).unwrap();
        let n = lp_norm(&f, Domain::Polydisc(2), 1.0, None, &rule).unwrap();
        assert!((n.value / (PI * PI) - 1.0).abs() < 1e-8, "{}", n.value);
        let z0 = CPoint::two(c(0.0, 0.0), c(0.0, 0.0));
        let fam = CounterexampleFamily::fs(0.5).unwrap();
        assert!((closed_form_projection(&fam, &z0).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn projection_constants_match_oracle() {
        for p in [1.4, 1.5, 2.0, 3.0, 6.0] {
            let fam = CounterexampleFamily::fp(p).unwrap();
            let pc = fam.projection_constant().unwrap();
            let oracle = projection_constant_oracle(p, false).unwrap();
            assert!((pc.value / oracle - 1.0).abs() < 1e-10, "p = {p}");
            assert!((pc.reference - (p - 1.0) / (3.0 * p - 4.0)).abs() < 1e-12);
            let lg = CounterexampleFamily::fp_log(p).unwrap().projection_constant().unwrap();
            let oracle = projection_constant_oracle(p, true).unwrap();
            assert!((lg.value / oracle - 1.0).abs() < 1e-10, "log p = {p}: {} vs {oracle}", lg.value);
        }
        // z₂·P f is constant
        let fam = CounterexampleFamily::fp(1.7).unwrap();
        let c0 = fam.projection_constant().unwrap().value;
        for z in sample(Domain::HartogsTriangle, 20, 5).unwrap().points {
            let v = closed_form_projection(&fam, &z).unwrap() * z[1];
            assert!((v - c(c0, 0.0)).norm() < 1e-13 * c0);
        }
    }

    #[test]
    fn closed_forms_match_series() {
        let n = 24;
        for p in [1.5, 2.0, 3.0] {
            for fam in [CounterexampleFamily::fp(p).unwrap(), CounterexampleFamily::fp_log(p).unwrap()] {
                let f = family_function(&fam);
                let rule = default_series_rule(Domain::HartogsTriangle, n).unwrap().with_origin_grading(40);
                let co = project_series(Domain::HartogsTriangle, &f, n, &rule).unwrap();
                for z in sample(Domain::HartogsTriangle, 20, 11).unwrap().points {
                    let a = eval_projection(&co, &z).unwrap();
                    let b = closed_form_projection(&fam, &z).unwrap();
                    assert!((a - b).norm() / b.norm() < 1e-6, "{} at {z}: {a} vs {b}", fam.label());
                }
            }
        }
        for s in [0.3, 0.5] {
            let fam = CounterexampleFamily::fs(s).unwrap();
            let n = 40;
            let co = project_series(Domain::Polydisc(2), &family_function(&fam), n, &default_series_rule(Domain::Polydisc(2), n).unwrap()).unwrap();
            for z in sample(Domain::Polydisc(2), 20, 12).unwrap().points {
                let a = eval_projection(&co, &z).unwrap();
                let b = closed_form_projection(&fam, &z).unwrap();
                assert!((a - b).norm() / b.norm() < 1e-6, "s = {s} at {z}");
            }
        }
    }

    #[test]
    fn norm_formulas_match_quadrature() {
        let rule = QuadratureRule::new(Domain::HartogsTriangle, 40, 8).unwrap().with_origin_grading(30);
        let e = HartogsExponent::from_p(2.0).unwrap();
        let f = family_function(&CounterexampleFamily::fp(2.0).unwrap());
        let n = lp_norm(&f, Domain::HartogsTriangle, 4.0 / 3.0, None, &rule).unwrap();
        assert!((n.integral / fp_norm43(&e) - 1.0).abs() < 1e-8, "{} vs {}", n.integral, fp_norm43(&e));
        let e = HartogsExponent::from_p(1.5).unwrap();
        let f = family_function(&CounterexampleFamily::fp_log(1.5).unwrap());
        let w = WeightSpec::log_z2(1.0 / 3.0);
        let n = lp_norm(&f, Domain::HartogsTriangle, 4.0 / 3.0, Some(&w), &rule).unwrap();
        let exact = fp_log_weighted_norm43(&e).unwrap();
        assert!((n.integral / exact - 1.0).abs() < 1e-6, "{} vs {exact}", n.integral);
    }
}
