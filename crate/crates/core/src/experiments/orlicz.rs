//! Orlicz-scale checks for the polydisc and the disc: the weak L log⁺L
//! ratio along f_s, and the mapping P : L(log⁺L)^{k+1}(𝔻) → L(log⁺L)^k(𝔻).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{lambda_from_s, Coupling, CounterexampleFamily, FamilyKind};
use super::sweep::{RowFlag, SweepFit, SweepResult, SweepRow};
use crate::error::{invalid, Result};
use crate::geometry::{CPoint, Domain};
use crate::norms::{inverse_product_squared_measure, orlicz_norm_from_measure, orlicz_norm_from_phi, OrliczSpec};
use std::sync::atomic::{AtomicBool, Ordering};

use crate::numeric::{integrate_adaptive, Tolerance};
use crate::projector::{FunctionHandle, ModulusProfile};

const ORLICZ_TOL: f64 = 1e-10;

/// ‖f_s‖ in L^p(log⁺L)^k(𝔻²) by the layer-cake route: f_s > t exactly
/// where |1 − sz₁|⁻²|1 − sz₂|⁻² > √t/(1 − s²)².
pub fn fs_orlicz_norm(s: f64, spec: OrliczSpec) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("s must lie in (0, 1), got {s}"));
    }
    let scale = (1.0 - s * s).powi(2);
    let mu = move |t: f64| if t <= 0.0 { PI * PI } else { inverse_product_squared_measure(s, t.sqrt() / scale) };
    let hint = PI * PI * (1.0 + spec.k as f64 * (-(1.0 - s).ln()).max(1.0));
    Ok(orlicz_norm_from_measure(&mu, spec, hint, ORLICZ_TOL)?.value)
}

/// λ(s)·μ{|P f_s| > λ(s)}/‖f_s‖_{L log⁺L}, with the L¹ ratio kept in the
/// summary fit "l1_growth" for comparison.
pub fn llogl_weak_sweep(s_list: &[f64]) -> Result<SweepResult> {
    if s_list.is_empty() || s_list.iter().any(|&s| !(s > 0.0 && s < 1.0)) || s_list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("s grid must be nonempty, increasing and inside (0, 1)");
    }
    let spec = OrliczSpec::new(1.0, 1)?;
    let rows = s_list
        .par_iter()
        .map(|&s| {
            let lambda = lambda_from_s(s);
            let m = inverse_product_squared_measure(s, lambda);
            let norm = fs_orlicz_norm(s, spec)?;
            Ok(SweepRow::new("f_s", s, lambda, m, 0.0, norm, 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let family = CounterexampleFamily::new(FamilyKind::FsBidisc { s: s_list[0] }, Coupling::LambdaFromS)?;
    let mut res = SweepResult::new("llogl_weak", Some(family), 1.0, rows);
    let x: Vec<f64> = res.rows.iter().map(|r| -(1.0 - r.param).ln()).collect();
    let y: Vec<f64> = res.rows.iter().map(|r| r.ratio).collect();
    let l1: Vec<f64> = res.rows.iter().map(|r| r.lambda * r.measure / (PI * PI)).collect();
    if let Some(fit) = SweepFit::new("log(1/(1-s))", "ratio", &x, &y) {
        res.fits.insert("llogl_growth".into(), fit);
    }
    if let Some(fit) = SweepFit::new("log(1/(1-s))", "L1 ratio", &x, &l1) {
        res.fits.insert("l1_growth".into(), fit);
    }
    res.summary.insert("ratio_max".into(), y.iter().copied().fold(0.0, f64::max));
    res.summary.insert("ratio_min".into(), y.iter().copied().fold(f64::INFINITY, f64::min));
    res.summary.insert("l1_ratio_max".into(), l1.iter().copied().fold(0.0, f64::max));
    // f ≡ 1: weak ratio at λ = 1/2, finite
    let one = orlicz_norm_from_measure(&|t: f64| if t < 1.0 { PI * PI } else { 0.0 }, spec, 1.0, ORLICZ_TOL)?;
    let row = SweepRow::new("one", 0.0, 0.5, PI * PI, 0.0, one.value, 1.0).flagged(one.flag.map(|_| RowFlag::Unconverged));
    res.rows.insert(0, row);
    Ok(res)
}

/// A disc function with its projection in closed form.
#[derive(Clone, Debug)]
pub struct MappingCase {
    pub f: FunctionHandle,
    pub image: FunctionHandle,
}

/// (1 − s²)²|1 − sz|⁻⁴, whose projection is (1 − sz)⁻².
pub fn disc_peak(s: f64) -> MappingCase {
    let one = Complex64::new(1.0, 0.0);
    let f = FunctionHandle::new(Domain::UnitDisc, format!("disc_peak(s={s})"), move |z| {
        Complex64::new((1.0 - s * s).powi(2) * (one - z[0] * s).norm().powi(-4), 0.0)
    })
    .with_singularity(s);
    let image = FunctionHandle::new(Domain::UnitDisc, format!("(1-{s}z)^-2"), move |z| (one - z[0] * s).powi(-2)).with_singularity(s);
    MappingCase { f, image }
}

/// 1, z + z̄², |z|² + z̄z³ and two peaks (s = 1/2, 4/5); projections from
/// P(z^j z̄^k) = (j − k + 1)/(j + 1)·z^{j−k} for j ≥ k and 0 otherwise.
pub fn default_mapping_suite() -> Vec<MappingCase> {
    let d = Domain::UnitDisc;
    let one = FunctionHandle::constant(d, Complex64::new(1.0, 0.0));
    vec![
        MappingCase { f: one.clone(), image: one.with_profile(ModulusProfile::Constant(1.0)) },
        MappingCase {
            f: FunctionHandle::new(d, "z+conj(z)^2", |z| z[0] + z[0].conj().powi(2)),
            image: FunctionHandle::new(d, "z", |z| z[0]),
        },
        MappingCase {
            f: FunctionHandle::new(d, "|z|^2+conj(z)z^3", |z| z[0].norm_sqr() + z[0].conj() * z[0].powi(3)),
            image: FunctionHandle::new(d, "1/2+3z^2/4", |z| 0.5 + 0.75 * z[0].powi(2)),
        },
        disc_peak(0.5),
        disc_peak(0.8),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingRow {
    pub label: String,
    pub k: u32,
    /// ‖P f‖ in L(log⁺L)^k.
    pub image_norm: f64,
    /// ‖f‖ in L(log⁺L)^{k+1}.
    pub input_norm: f64,
    pub ratio: f64,
    pub converged: bool,
}

/// Φ(λ) = ∫_𝔻 φ(|f|/λ) dV by nested adaptive integration in θ and r, so
/// the kink of log⁺ at |f| = λ and the edges of the angular sectors where
/// |f| exceeds λ are both resolved by subdivision. Returns (Φ, converged).
fn disc_phi(f: &FunctionHandle, spec: OrliczSpec, lambda: f64) -> (f64, bool) {
    let tol = Tolerance { abs: 1e-300, rel: 1e-10, max_panels: 2000 };
    let breaks: Vec<f64> = f.singularity().map_or(vec![], |s| (1..40).map(|k| 1.0 - (1.0 - s) * 0.5f64.powi(k - 4)).collect());
    let inner_ok = AtomicBool::new(true);
    let radial = |theta: f64| {
        let e = Complex64::from_polar(1.0, theta);
        let r = integrate_adaptive(|r| spec.phi(f.value(&CPoint::one(e * r)).norm() / lambda) * r, 0.0, 1.0, &breaks, tol);
        if !r.converged && r.error > 1e-300 {
            inner_ok.store(false, Ordering::Relaxed);
        }
        r.value
    };
    let sectors: Vec<f64> = (1..16).map(|j| 2.0 * PI * j as f64 / 16.0).collect();
    let outer = integrate_adaptive(radial, 0.0, 2.0 * PI, &sectors, tol);
    (outer.value, outer.converged && inner_ok.load(Ordering::Relaxed))
}

/// Orlicz norm on the disc; the flag reports whether every Φ evaluation
/// met its tolerance.
pub fn disc_orlicz_norm(f: &FunctionHandle, spec: OrliczSpec) -> Result<(f64, bool)> {
    if f.domain() != Domain::UnitDisc {
        return invalid("disc Orlicz norms need a function on the unit disc");
    }
    let hint = (disc_phi(f, OrliczSpec::new(1.0, 0)?, 1.0).0 * (-(spec.k as f64)).exp()).max(f64::MIN_POSITIVE);
    let mut ok = true;
    let n = orlicz_norm_from_phi(
        |l| {
            let (v, c) = disc_phi(f, spec, l);
            ok &= c;
            v
        },
        hint,
        ORLICZ_TOL,
    )?;
    if n.flag.is_some() {
        return invalid(format!("Orlicz solve failed for {}", f.label()));
    }
    Ok((n.value, ok))
}

pub fn disc_mapping_check(k: u32, suite: &[MappingCase]) -> Result<Vec<MappingRow>> {
    let out_spec = OrliczSpec::new(1.0, k)?;
    let in_spec = OrliczSpec::new(1.0, k + 1)?;
    suite
        .par_iter()
        .map(|c| {
            let (a, ea) = disc_orlicz_norm(&c.image, out_spec)?;
            let (b, eb) = disc_orlicz_norm(&c.f, in_spec)?;
            Ok(MappingRow {
                label: c.f.label().to_string(),
                k,
                image_norm: a,
                input_norm: b,
                ratio: a / b,
                converged: ea && eb,
            })
        })
        .collect()
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolydiscOrliczCheck {
    pub weak: SweepResult,
    pub mapping: Vec<MappingRow>,
    pub mapping_max: f64,
}

/// The weak L log⁺L sweep along f_s together with the disc mapping ratios
/// for every k in `ks`.
pub fn polydisc_orlicz_check(ks: &[u32], s_list: &[f64], suite: &[MappingCase]) -> Result<PolydiscOrliczCheck> {
    let weak = llogl_weak_sweep(s_list)?;
    let mut mapping = Vec::new();
    for &k in ks {
        mapping.extend(disc_mapping_check(k, suite)?);
    }
    let mapping_max = mapping.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(PolydiscOrliczCheck { weak, mapping, mapping_max })
}
