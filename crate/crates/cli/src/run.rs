//! Command execution: each command maps its validated configuration onto
//! the library and collects one table.

use bergman_core::experiments::{
    classify, closed_form_projection, default_mapping_suite, default_transport_suite, default_weak44_suite,
    default_weighted_suite, disc_peak, e1_bounds, exp_integral_e1, family_function, forelli_rudin,
    hartogs_norm_rule, polydisc_orlicz_check, projection_function, transport_check, weak11_failure_sweep,
    weak43_failure_sweep, weak44_bound_check, weighted_weak_check, Regime, RowFlag, SweepResult, Weak43Mode,
    WeightKind,
};
use bergman_core::geometry::{sample, CPoint, Domain, QuadratureRule};
use bergman_core::kernels::{abs_kernel, kernel};
use bergman_core::norms::{distribution, lp_norm, orlicz_norm, OrliczSpec, WeightSpec};
use bergman_core::projector::{default_series_rule, eval_projection, project_series, FunctionHandle, MonomialIndex};
use bergman_core::weights::{bb_constant, bb_constant_iterated, default_center_grid};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{BbWeight, Command, FunctionSpec, NormWeight, RunConfig, WeightedWeight};
use crate::output::{Cell, Outcome};
use crate::Failure;

const ORLICZ_TOL: f64 = 1e-10;

pub fn run(config: &RunConfig) -> Result<Outcome, Failure> {
    match &config.command {
        Command::KernelEval { domain, z, w, absolute } => kernel_eval(*domain, z, w, *absolute),
        Command::Project { function, domain, truncation, grading, points, seed } => {
            project(function, *domain, *truncation, *grading, *points, *seed)
        }
        Command::Norm { function, domain, p, weight, orlicz_k, radial_order, angular_order } => {
            norm(function, *domain, *p, *weight, *orlicz_k, *radial_order, *angular_order)
        }
        Command::Distribution { function, domain, projected, lambda, estimator } => {
            let f = if *projected { image_of(function, *domain)? } else { function_of(function, *domain)? };
            let curve = distribution(&f, *domain, lambda, *estimator)?;
            let mut out = Outcome::new(&["t", "measure", "error"]);
            for s in &curve.samples {
                out.push(vec![s.t.into(), s.measure.into(), s.error.into()]);
            }
            out.note("function", f.label());
            if !curve.is_monotone(1e-12) {
                out.warn("distribution samples are not monotone; increase the sample count or quadrature order");
            }
            Ok(out)
        }
        Command::BbConstant { weight, p, radial_order, angular_order } => bb(*weight, *p, *radial_order, *angular_order),
        Command::ForelliRudin { eps, delta, w, kind } => {
            let mut out = Outcome::new(&["w_re", "w_im", "value", "error", "converged", "ratio"]);
            let mut samples = vec![];
            for &x in w {
                let v = forelli_rudin(*eps, *delta, x, *kind)?;
                if !v.converged {
                    out.warn(format!("integral at w = {x} did not converge"));
                }
                samples.push((x.norm(), v.value));
                out.push(vec![x.re.into(), x.im.into(), v.value.into(), v.error.into(), v.converged.into(), v.ratio.into()]);
            }
            out.note("predicted", regime_name(&Regime::predicted(*delta)));
            let boundary: Vec<(f64, f64)> = samples.into_iter().filter(|s| s.0 >= 0.9).collect();
            out.note("classified", classify(&boundary).map_or("undetermined".to_string(), |r| regime_name(&r)));
            Ok(out)
        }
        Command::E1 { x } => {
            let mut out = Outcome::new(&["x", "e1", "lower", "upper"]);
            for &x in x {
                let (lo, hi) = e1_bounds(x);
                let v = exp_integral_e1(x)?;
                out.push(vec![x.into(), v.into(), lo.into(), hi.into()]);
                out.note(&format!("E1({x})"), v);
            }
            Ok(out)
        }
        Command::SweepWeak11 { s, estimator } => Ok(sweep(weak11_failure_sweep(s, *estimator)?)),
        Command::SweepWeak43 { lambda, fixed_p } => {
            let mode = fixed_p.map_or(Weak43Mode::Coupled, Weak43Mode::Fixed);
            Ok(sweep(weak43_failure_sweep(lambda, mode)?))
        }
        Command::SweepWeak44 { lambda } => {
            Ok(sweep(weak44_bound_check(&default_weak44_suite()?, lambda, &hartogs_norm_rule()?)?))
        }
        Command::SweepWeighted { weight, lambda, coupled_lambda } => {
            let kind = match *weight {
                WeightedWeight::Power(e) => WeightKind::PowerZ2(e),
                WeightedWeight::Log(e) => WeightKind::LogZ2(e),
            };
            let res = weighted_weak_check(kind, &default_weighted_suite()?, lambda, coupled_lambda, &hartogs_norm_rule()?)?;
            Ok(sweep(res))
        }
        Command::SweepOrliczPolydisc { k, s } => orlicz_polydisc(k, s),
        Command::TransportCheck { truncation, points, seed } => {
            let mut out = Outcome::new(&["label", "hartogs_norm", "bidisc_norm", "isometry_error", "conjugation_error", "points"]);
            let mut worst = (0.0f64, 0.0f64);
            for f in default_transport_suite()? {
                let c = transport_check(&f, *truncation, *points, *seed)?;
                worst = (worst.0.max(c.isometry_error), worst.1.max(c.conjugation_error));
                out.push(vec![
                    c.label.into(),
                    c.hartogs_norm.into(),
                    c.bidisc_norm.into(),
                    c.isometry_error.into(),
                    c.conjugation_error.into(),
                    c.points.into(),
                ]);
            }
            out.note("max_isometry_error", worst.0);
            out.note("max_conjugation_error", worst.1);
            Ok(out)
        }
    }
}

fn regime_name(r: &Regime) -> String {
    match r {
        Regime::Bounded => "bounded".into(),
        Regime::Logarithmic => "logarithmic".into(),
        Regime::Power { exponent } => format!("power({exponent:.6})"),
    }
}

fn kernel_eval(domain: Domain, z: &[Complex64], w: &[Complex64], absolute: bool) -> Result<Outcome, Failure> {
    let (z, w) = (CPoint::new(z)?, CPoint::new(w)?);
    let v = if absolute { Complex64::new(abs_kernel(domain, &z, &w)?, 0.0) } else { kernel(domain, &z, &w)? };
    let mut out = Outcome::new(&["re", "im", "abs"]);
    out.push(vec![v.re.into(), v.im.into(), v.norm().into()]);
    let im = if v.im == 0.0 { 0.0 } else { v.im };
    out.note("value", if absolute { json!(v.re) } else { json!(format!("{}{:+}i", v.re, im)) });
    Ok(out)
}

fn function_of(spec: &FunctionSpec, domain: Domain) -> Result<FunctionHandle, Failure> {
    Ok(match spec {
        FunctionSpec::One => FunctionHandle::constant(domain, Complex64::new(1.0, 0.0)).with_label("1"),
        FunctionSpec::Monomial(e) => FunctionHandle::monomial(domain, MonomialIndex::new(e)?)?,
        FunctionSpec::DiscPeak(s) => disc_peak(*s).f,
        family => family_function(&family.family().expect("validated family")),
    })
}

/// The projection when it is known in closed form.
fn image_of(spec: &FunctionSpec, domain: Domain) -> Result<FunctionHandle, Failure> {
    Ok(match spec {
        FunctionSpec::One | FunctionSpec::Monomial(_) => function_of(spec, domain)?,
        FunctionSpec::DiscPeak(s) => disc_peak(*s).image,
        family => projection_function(&family.family().expect("validated family"))?,
    })
}

fn closed_form(spec: &FunctionSpec, domain: Domain, z: &CPoint) -> Result<Complex64, Failure> {
    Ok(match spec {
        FunctionSpec::Fs(_) | FunctionSpec::Fp(_) | FunctionSpec::FpLog(_) => {
            closed_form_projection(&spec.family().expect("validated family"), z)?
        }
        _ => image_of(spec, domain)?.eval(z)?,
    })
}

fn project(spec: &FunctionSpec, domain: Domain, truncation: usize, grading: usize, points: usize, seed: u64) -> Result<Outcome, Failure> {
    let f = function_of(spec, domain)?;
    let mut rule = default_series_rule(domain, truncation)?;
    if domain == Domain::HartogsTriangle {
        rule = rule.with_origin_grading(grading);
    }
    let co = project_series(domain, &f, truncation, &rule)?;
    let d = domain.dimension();
    let mut cols: Vec<String> = (1..=d).flat_map(|j| [format!("z{j}_re"), format!("z{j}_im")]).collect();
    cols.extend(["series_re", "series_im", "closed_re", "closed_im", "rel_err"].map(String::from));
    let mut out = Outcome { columns: cols, ..Default::default() };
    let mut worst = 0.0f64;
    for z in sample(domain, points, seed)?.points {
        let s = eval_projection(&co, &z)?;
        let c = closed_form(spec, domain, &z)?;
        let rel = (s - c).norm() / c.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        let mut row: Vec<Cell> = z.coords().iter().flat_map(|c| [c.re.into(), c.im.into()]).collect();
        row.extend([s.re.into(), s.im.into(), c.re.into(), c.im.into(), rel.into()]);
        out.push(row);
    }
    out.note("function", f.label());
    out.note("max_rel_err", worst);
    out.note("tail_estimate", co.tail_estimate);
    out.note("coefficients", co.entries.len());
    out.detail = Some(co.to_json());
    Ok(out)
}

fn norm(
    spec: &FunctionSpec,
    domain: Domain,
    p: f64,
    weight: NormWeight,
    orlicz_k: Option<u32>,
    radial_order: usize,
    angular_order: usize,
) -> Result<Outcome, Failure> {
    let f = function_of(spec, domain)?;
    let mut rule = QuadratureRule::new(domain, radial_order, angular_order)?;
    if domain == Domain::HartogsTriangle {
        rule = rule.with_origin_grading(30);
    }
    let mut out = Outcome::new(&["p", "k", "weight", "value", "error", "converged"]);
    match orlicz_k {
        Some(k) => {
            let n = orlicz_norm(&f, domain, OrliczSpec::new(p, k)?, ORLICZ_TOL, &rule)?;
            if let Some(flag) = n.flag {
                out.warn(format!("Orlicz solve flagged: {flag:?}"));
            }
            if !n.converged {
                out.warn("Orlicz modular did not converge under rule coarsening");
            }
            out.push(vec![p.into(), k.into(), "none".into(), n.value.into(), Cell::Empty, n.converged.into()]);
            out.note("value", n.value);
        }
        None => {
            let w = match weight {
                NormWeight::None => None,
                NormWeight::PowerZ2(e) => Some(WeightSpec::power_z2(e)),
                NormWeight::LogZ2(e) => Some(WeightSpec::log_z2(e)),
                NormWeight::Modulus(b) => Some(WeightSpec::modulus_power(b)),
            };
            let n = lp_norm(&f, domain, p, w.as_ref(), &rule)?;
            if !n.converged {
                out.warn(format!("norm changed by {:.3e} under rule coarsening", n.error));
            }
            let label = w.as_ref().map_or("none".to_string(), |w| w.label().to_string());
            out.push(vec![p.into(), Cell::Empty, label.into(), n.value.into(), n.error.into(), n.converged.into()]);
            out.note("value", n.value);
        }
    }
    out.note("function", f.label());
    Ok(out)
}

fn bb(weight: BbWeight, p: f64, radial_order: usize, angular_order: usize) -> Result<Outcome, Failure> {
    let rule = QuadratureRule::new(Domain::UnitDisc, radial_order, angular_order)?;
    let centers = default_center_grid();
    let res = match weight {
        BbWeight::Unit => bb_constant(&WeightSpec::unit(), p, &centers, &rule)?,
        BbWeight::Modulus(b) => bb_constant(&WeightSpec::modulus_power(b), p, &centers, &rule)?,
        BbWeight::Iterated { j, alpha } => bb_constant_iterated(j, alpha, &centers, &rule)?,
    };
    let mut out = Outcome::new(&["center_re", "center_im", "mean", "dual_mean", "ratio", "divergent"]);
    for r in &res.rows {
        out.push(vec![r.center.re.into(), r.center.im.into(), r.mean.into(), r.dual_mean.into(), r.ratio.into(), r.divergent.into()]);
    }
    out.note("weight", res.label.clone());
    out.note("value", if res.value.is_finite() { json!(res.value) } else { json!("inf") });
    out.note("divergent", res.divergent);
    if let Some(origin) = res.rows.iter().find(|r| r.center.norm() == 0.0) {
        out.note("origin_ladder", origin.ladder.clone());
    }
    Ok(out)
}

const SWEEP_COLUMNS: [&str; 7] = ["param", "lambda", "measure", "norm", "ratio", "flag", "series"];

fn sweep(res: SweepResult) -> Outcome {
    let mut out = Outcome::new(&SWEEP_COLUMNS);
    let mut unconverged = 0;
    for r in &res.rows {
        unconverged += (r.flag == Some(RowFlag::Unconverged)) as usize;
        out.push(vec![
            r.param.into(),
            r.lambda.into(),
            r.measure.into(),
            r.norm.into(),
            r.ratio.into(),
            r.flag.map(|f| f.as_str()).unwrap_or("").into(),
            r.series.as_str().into(),
        ]);
    }
    if unconverged > 0 {
        out.warn(format!("{unconverged} row(s) flagged unconverged and excluded from fits"));
    }
    out.note("name", res.name.clone());
    for (k, v) in &res.summary {
        out.note(k, *v);
    }
    for (k, f) in &res.fits {
        out.note(&format!("{k}.slope"), f.slope);
        out.note(&format!("{k}.r_squared"), f.r_squared);
    }
    out.detail = Some(res.to_json());
    out
}

fn orlicz_polydisc(k: &[u32], s: &[f64]) -> Result<Outcome, Failure> {
    let check = polydisc_orlicz_check(k, s, &default_mapping_suite())?;
    let mut out = sweep(check.weak.clone());
    out.columns.push("image_norm".into());
    for row in &mut out.rows {
        row.push(Cell::Empty);
    }
    for m in &check.mapping {
        if !m.converged {
            out.warn(format!("mapping ratio for {} at k = {} did not converge", m.label, m.k));
        }
        out.push(vec![
            m.k.into(),
            Cell::Empty,
            Cell::Empty,
            m.input_norm.into(),
            m.ratio.into(),
            (if m.converged { "" } else { RowFlag::Unconverged.as_str() }).into(),
            format!("mapping:{}", m.label).into(),
            m.image_norm.into(),
        ]);
    }
    out.note("mapping_max", check.mapping_max);
    if let Some(d) = out.detail.as_mut() {
        d["mapping"] = serde_json::to_value(&check.mapping).expect("rows serialize");
    }
    Ok(out)
}
