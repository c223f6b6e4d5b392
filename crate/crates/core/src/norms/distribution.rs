use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample, Domain, QuadratureRule, MAX_DIM};
use crate::numeric::{bisect, integrate_adaptive, CompensatedSum, Tolerance};
use crate::projector::{FunctionHandle, ModulusProfile};

pub const DEFAULT_MC_SEED: u64 = 0x5EED;
pub const DEFAULT_MC_COUNT: usize = 1_000_000;

/// How superlevel-set measures are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Estimator {
    /// Exact formulas from the function's [`ModulusProfile`].
    Analytic,
    /// Uniform samples; errors are binomial standard errors.
    MonteCarlo { seed: u64, count: usize },
    /// Ray casting along the radius of the last polar coordinate, with
    /// bisection of each level-set crossing and a tensor rule over the rest.
    Quadrature { radial_order: usize, angular_order: usize },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::MonteCarlo { seed: DEFAULT_MC_SEED, count: DEFAULT_MC_COUNT }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSample {
    pub t: f64,
    pub measure: f64,
    pub error: f64,
}

/// Sampled t ↦ μ{|f| > t}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub samples: Vec<DistributionSample>,
    pub estimator: Estimator,
}

impl DistributionCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
        out.write_record(["t", "measure", "error"]).map_err(io)?;
        for s in &self.samples {
            out.write_record([format!("{:.16e}", s.t), format!("{:.16e}", s.measure), format!("{:.16e}", s.error)])
                .map_err(io)?;
        }
        out.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("distribution curves serialize")
    }

    /// The curve is nonincreasing up to `slack` error bars.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.samples.windows(2).all(|w| w[1].measure <= w[0].measure + slack * (w[0].error + w[1].error))
    }
}

/// Area of the intersection of the discs |w| < r1 and |w − d| < r2.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 {
        return 0.0;
    }
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    // half-angle forms: 1 − cos a1 = (r1 + r2 − d)(d + r2 − r1)/(2 d r1)
    let (e, f, g) = (r1 + r2 - d, d + r2 - r1, d + r1 - r2);
    let a1 = 2.0 * (e * f / (4.0 * d * r1)).clamp(0.0, 1.0).sqrt().asin();
    let a2 = 2.0 * (e * g / (4.0 * d * r2)).clamp(0.0, 1.0).sqrt().asin();
    let k = e * g * f * (d + r1 + r2);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.max(0.0).sqrt()
}

/// μ{z ∈ 𝔻² : |1 − s z₁|⁻²|1 − s z₂|⁻² > λ}.
///
/// With q = |1 − s z₁|, the image 1 − s𝔻 is the disc of radius s about 1, so
/// μ = s⁻⁴ ∫ 2q·arccos((q² + 1 − s²)/(2q)) · lens(1/(q√λ), s, 1) dq over
/// q ∈ (1 − s, 1 + s).
pub fn inverse_product_squared_measure(s: f64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return PI * PI;
    }
    if lambda * (1.0 + s).powi(4) < 1.0 {
        return PI * PI;
    }
    let rl = lambda.sqrt();
    let (a, b) = (1.0 - s, 1.0 + s);
    let arc = |q: f64| 2.0 * q * ((q * q + 1.0 - s * s) / (2.0 * q)).clamp(-1.0, 1.0).acos();
    let g = |q: f64| arc(q) * lens_area(1.0 / (q * rl), s, 1.0);
    let top = (1.0 / (a * rl)).min(b);
    if top <= a {
        return 0.0;
    }
    let breaks = [1.0 / (b * rl), 1.0];
    let r = integrate_adaptive(&g, a, top, &breaks, Tolerance { abs: 1e-300, rel: 1e-12, max_panels: 4000 });
    (r.value / s.powi(4)).min(PI * PI)
}

/// Exact superlevel measure from a modulus profile.
pub fn analytic_measure(profile: &ModulusProfile, domain: Domain, t: f64) -> Result<f64> {
    Ok(match *profile {
        ModulusProfile::Constant(c) => {
            if c > t {
                domain.volume()
            } else {
                0.0
            }
        }
        ModulusProfile::RadialPower { coord, coeff, exponent } => {
            if t <= 0.0 {
                domain.volume()
            } else if exponent < 0.0 {
                domain.ball_measure(coord, (coeff / t).powf(-1.0 / exponent))?
            } else if exponent > 0.0 {
                domain.volume() - domain.ball_measure(coord, (t / coeff).powf(1.0 / exponent))?
            } else if coeff > t {
                domain.volume()
            } else {
                0.0
            }
        }
        ModulusProfile::InverseProductSquared { s } => {
            if domain != Domain::Polydisc(2) {
                return Err(Error::Unsupported(format!("product profile on {domain}")));
            }
            inverse_product_squared_measure(s, t)
        }
    })
}

/// Ray sample radii: geometric toward 0 and 1, uniform in between.
fn ray_radii() -> Vec<f64> {
    let mut r: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
    r.extend((1..64).map(|j| j as f64 / 64.0));
    r.extend((7..=40).map(|k| 1.0 - 0.5f64.powi(k)));
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

struct Ray {
    prefix: [Complex64; MAX_DIM],
    phase: Complex64,
    weight: f64,
    values: Vec<f64>,
}

struct RayCast<'a> {
    f: &'a FunctionHandle,
    rule: QuadratureRule,
    radii: Vec<f64>,
    rays: Vec<Ray>,
    power: i32,
}

impl<'a> RayCast<'a> {
    fn new(f: &'a FunctionHandle, rule: QuadratureRule) -> Self {
        let d = rule.angular_counts().len();
        let radii = ray_radii();
        let radial = rule.radial_rules();
        let counts = rule.angular_counts();
        let phases = rule.phases();
        // outer nodes: (radius, angle) for coordinates before the last, angle of the last
        let mut outer: Vec<([Complex64; MAX_DIM], Complex64, f64)> = Vec::new();
        let mut idx = vec![0usize; 2 * (d - 1) + 1];
        let mut lens = Vec::new();
        for j in 0..d - 1 {
            lens.push(radial[j].len());
            lens.push(counts[j]);
        }
        lens.push(counts[d - 1]);
        'outer: loop {
            let mut prefix = [Complex64::default(); MAX_DIM];
            let mut w = 1.0;
            for j in 0..d - 1 {
                let (ri, ai) = (idx[2 * j], idx[2 * j + 1]);
                let theta = 2.0 * PI * ai as f64 / counts[j] as f64 + phases[j];
                prefix[j] = Complex64::from_polar(radial[j].nodes()[ri], theta);
                w *= radial[j].weights()[ri] * 2.0 * PI / counts[j] as f64;
            }
            let m = counts[d - 1];
            let theta = 2.0 * PI * idx[2 * (d - 1)] as f64 / m as f64 + phases[d - 1];
            w *= 2.0 * PI / m as f64;
            outer.push((prefix, Complex64::from_polar(1.0, theta), w));
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < lens[k] {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        let power = if rule.domain() == Domain::HartogsTriangle { 3 } else { 1 };
        let mut this = Self { f, rule, radii, rays: Vec::new(), power };
        let rays: Vec<Ray> = outer
            .into_par_iter()
            .map(|(prefix, phase, weight)| {
                let values = this.radii.iter().map(|&r| this.modulus(&prefix, phase, r)).collect();
                Ray { prefix, phase, weight, values }
            })
            .collect();
        this.rays = rays;
        this
    }

    fn modulus(&self, prefix: &[Complex64; MAX_DIM], phase: Complex64, r: f64) -> f64 {
        let d = self.rule.angular_counts().len();
        let mut u = *prefix;
        u[d - 1] = phase * r;
        let (z, _) = self.rule.map_base(&u[..d]);
        self.f.value(&z).norm()
    }

    fn segment(&self, a: f64, b: f64) -> f64 {
        let k = self.power + 1;
        (b.powi(k) - a.powi(k)) / k as f64
    }

    fn measure(&self, t: f64) -> f64 {
        let partial: Vec<f64> = self
            .rays
            .par_iter()
            .map(|ray| {
                let mut acc = CompensatedSum::new();
                let v = &ray.values;
                let r = &self.radii;
                if v[0] > t {
                    acc.add(self.segment(0.0, r[0]));
                }
                for i in 0..r.len() - 1 {
                    let (above_a, above_b) = (v[i] > t, v[i + 1] > t);
                    if above_a && above_b {
                        acc.add(self.segment(r[i], r[i + 1]));
                    } else if above_a != above_b {
                        let g = |x: f64| self.modulus(&ray.prefix, ray.phase, x) - t;
                        let x = bisect(g, r[i], r[i + 1], 1e-13);
                        if above_a {
                            acc.add(self.segment(r[i], x));
                        } else {
                            acc.add(self.segment(x, r[i + 1]));
                        }
                    }
                }
                if *v.last().expect("rays are nonempty") > t {
                    acc.add(self.segment(*r.last().expect("radii are nonempty"), 1.0));
                }
                ray.weight * acc.value()
            })
            .collect();
        let mut total = CompensatedSum::new();
        for p in partial {
            total.add(p);
        }
        total.value()
    }
}

/// Evaluates μ{|f| > t} for many t with one preparation pass.
pub struct Superlevel<'a> {
    kind: Kind<'a>,
    domain: Domain,
}

enum Kind<'a> {
    Analytic(ModulusProfile),
    MonteCarlo { sorted: Vec<f64> },
    Quadrature { fine: RayCast<'a>, coarse: RayCast<'a> },
}

impl<'a> Superlevel<'a> {
    pub fn new(f: &'a FunctionHandle, domain: Domain, estimator: Estimator) -> Result<Self> {
        if f.domain() != domain {
            return Err(Error::InvalidArgument(format!("function lives on {}, not {domain}", f.domain())));
        }
        let kind = match estimator {
            Estimator::Analytic => {
                let profile = f.profile().cloned().ok_or_else(|| {
                    Error::Unsupported(format!("no analytic modulus profile for '{}'", f.label()))
                })?;
                Kind::Analytic(profile)
            }
            Estimator::MonteCarlo { seed, count } => {
                let cloud = sample(domain, count, seed)?;
                let mut sorted: Vec<f64> = cloud.points.par_iter().map(|z| f.value(z).norm()).collect();
                if sorted.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { point: "sample cloud".into() });
                }
                sorted.sort_by(f64::total_cmp);
                Kind::MonteCarlo { sorted }
            }
            Estimator::Quadrature { radial_order, angular_order } => {
                let rule = f.adapted_rule(&QuadratureRule::new(domain, radial_order, angular_order)?);
                let coarse = RayCast::new(f, rule.coarsened());
                Kind::Quadrature { fine: RayCast::new(f, rule), coarse }
            }
        };
        Ok(Self { kind, domain })
    }

    /// (measure, error).
    pub fn measure(&self, t: f64) -> Result<(f64, f64)> {
        Ok(match &self.kind {
            Kind::Analytic(p) => (analytic_measure(p, self.domain, t)?, 0.0),
            Kind::MonteCarlo { sorted } => {
                let n = sorted.len() as f64;
                let above = sorted.len() - sorted.partition_point(|&v| v <= t);
                let q = above as f64 / n;
                let vol = self.domain.volume();
                (vol * q, vol * (q * (1.0 - q) / n).sqrt())
            }
            Kind::Quadrature { fine, coarse } => {
                let a = fine.measure(t);
                let b = coarse.measure(t);
                (a, (a - b).abs())
            }
        })
    }
}

/// μ{|f| > t} on every grid point.
pub fn distribution(f: &FunctionHandle, domain: Domain, t_grid: &[f64], estimator: Estimator) -> Result<DistributionCurve> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("t grid must be nonempty, positive and finite".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("t grid must be strictly increasing".into()));
    }
    let sl = Superlevel::new(f, domain, estimator)?;
    let samples = t_grid
        .iter()
        .map(|&t| sl.measure(t).map(|(measure, error)| DistributionSample { t, measure, error }))
        .collect::<Result<Vec<_>>>()?;
    Ok(DistributionCurve { samples, estimator })
}
