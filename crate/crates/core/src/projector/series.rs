use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{admissible_indices, monomial_norm_sq, FunctionHandle, MonomialIndex, SpectralCoefficients};
use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain, QuadratureRule, MAX_DIM};
use crate::numeric::ComplexSum;

pub const DEFAULT_TRUNCATION: usize = 64;

/// Rule that integrates every retained monomial against a polynomial f
/// exactly: radial order N + 2, angular node count 2N + 2.
pub fn default_series_rule(domain: Domain, truncation: usize) -> Result<QuadratureRule> {
    QuadratureRule::new(domain, truncation + 2, truncation.max(1))
}

struct Target {
    idx: MonomialIndex,
    modes: [i32; MAX_DIM],
    flat: usize,
    phase: Complex64,
}

/// In-place multidimensional forward DFT of a row-major grid.
fn fft_nd(grid: &mut [Complex64], dims: &[usize], plans: &[Arc<dyn Fft<f64>>], line: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
    let total: usize = dims.iter().product();
    for (axis, plan) in plans.iter().enumerate() {
        let m = dims[axis];
        let stride: usize = dims[axis + 1..].iter().product();
        line.resize(m, Complex64::default());
        scratch.resize(plan.get_inplace_scratch_len(), Complex64::default());
        let block = m * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = grid[base + k * stride];
                }
                plan.process_with_scratch(line, scratch);
                for (k, v) in line.iter().enumerate() {
                    grid[base + k * stride] = *v;
                }
            }
        }
    }
}

/// Coefficients ⟨f, z^idx⟩ / ‖z^idx‖² for every admissible idx of total
/// degree ≤ `truncation`.
///
/// For each tuple of radial nodes the angular grid is transformed by an FFT,
/// so angular integration is exact by discrete orthogonality and only the
/// radial rule contributes error. The rule needs at least N + 2 angular nodes
/// per factor so that the modes −1..=N do not alias.
pub fn project_series(domain: Domain, f: &FunctionHandle, truncation: usize, rule: &QuadratureRule) -> Result<SpectralCoefficients> {
    if f.domain() != domain || rule.domain() != domain {
        return Err(Error::InvalidArgument(format!(
            "domain mismatch: requested {domain}, function on {}, rule on {}",
            f.domain(),
            rule.domain()
        )));
    }
    if let (Some(factors), Domain::Polydisc(_)) = (f.factors(), domain) {
        return project_product(domain, factors, truncation, rule);
    }
    let dims = rule.angular_counts().to_vec();
    if let Some(&m) = dims.iter().find(|&&m| m < truncation + 2) {
        return Err(Error::InvalidArgument(format!(
            "{m} angular nodes cannot resolve truncation {truncation}; need at least {}",
            truncation + 2
        )));
    }
    let d = dims.len();
    let phases = rule.phases().to_vec();
    let targets: Vec<Target> = admissible_indices(domain, truncation)
        .into_iter()
        .map(|idx| {
            let modes = idx.base_modes(domain);
            let mut flat = 0;
            let mut angle = 0.0;
            for j in 0..d {
                let m = dims[j] as i32;
                flat = flat * dims[j] + modes[j].rem_euclid(m) as usize;
                angle -= modes[j] as f64 * phases[j];
            }
            Target { idx, modes, flat, phase: Complex64::from_polar(1.0, angle) }
        })
        .collect();

    let mut planner = FftPlanner::new();
    let plans: Vec<Arc<dyn Fft<f64>>> = dims.iter().map(|&m| planner.plan_fft_forward(m)).collect();
    let radial = rule.radial_rules();
    let angular_weight: f64 = dims.iter().map(|&m| 2.0 * PI / m as f64).product();
    let tables: Vec<Vec<Complex64>> = dims
        .iter()
        .zip(&phases)
        .map(|(&m, &p)| (0..m).map(|l| Complex64::from_polar(1.0, 2.0 * PI * l as f64 / m as f64 + p)).collect())
        .collect();
    let grid_len: usize = dims.iter().product();

    let partials: Vec<Result<Vec<ComplexSum>>> = (0..radial[0].len())
        .into_par_iter()
        .map(|i0| {
            let mut acc = vec![ComplexSum::new(); targets.len()];
            let mut grid = vec![Complex64::default(); grid_len];
            let (mut line, mut scratch) = (Vec::new(), Vec::new());
            let mut ridx = [0usize; MAX_DIM];
            ridx[0] = i0;
            loop {
                let mut r = [0.0; MAX_DIM];
                let mut w = angular_weight;
                for j in 0..d {
                    r[j] = radial[j].nodes()[ridx[j]];
                    w *= radial[j].weights()[ridx[j]];
                }
                let mut aidx = [0usize; MAX_DIM];
                for cell in grid.iter_mut() {
                    let mut u = [Complex64::default(); MAX_DIM];
                    for j in 0..d {
                        u[j] = tables[j][aidx[j]] * r[j];
                    }
                    let (z, jac) = rule.map_base(&u[..d]);
                    let v = f.value(&z);
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::NonFinite { point: z.to_string() });
                    }
                    *cell = v * jac;
                    for j in (0..d).rev() {
                        aidx[j] += 1;
                        if aidx[j] < dims[j] {
                            break;
                        }
                        aidx[j] = 0;
                    }
                }
                fft_nd(&mut grid, &dims, &plans, &mut line, &mut scratch);
                for (t, a) in targets.iter().zip(acc.iter_mut()) {
                    let mut rw = w;
                    for j in 0..d {
                        rw *= r[j].powi(t.modes[j]);
                    }
                    a.add(grid[t.flat] * t.phase * rw);
                }
                let mut j = d;
                loop {
                    if j <= 1 {
                        return Ok(acc);
                    }
                    j -= 1;
                    ridx[j] += 1;
                    if ridx[j] < radial[j].len() {
                        break;
                    }
                    ridx[j] = 0;
                }
            }
        })
        .collect();

    let mut totals = vec![ComplexSum::new(); targets.len()];
    for p in partials {
        for (t, v) in totals.iter_mut().zip(p?) {
            t.add(v.value());
        }
    }
    let mut entries = BTreeMap::new();
    let mut tail: f64 = 0.0;
    let outer = truncation as i32 - 1;
    for (t, total) in targets.iter().zip(&totals) {
        let c = total.value() / monomial_norm_sq(domain, t.idx)?;
        if t.idx.total_degree(domain) >= outer {
            tail = tail.max(c.norm());
        }
        entries.insert(t.idx, c);
    }
    Ok(SpectralCoefficients { domain, truncation, entries, tail_estimate: tail })
}

/// A tensor product on the polydisc has coefficients c₁(a₁)···c_d(a_d), and
/// the tensor rule's sum factorises the same way, so each factor is projected
/// on its own disc rule.
fn project_product(domain: Domain, factors: &[FunctionHandle], truncation: usize, rule: &QuadratureRule) -> Result<SpectralCoefficients> {
    let parts = factors
        .iter()
        .enumerate()
        .map(|(j, g)| project_series(Domain::UnitDisc, g, truncation, &rule.factor(j)?))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = BTreeMap::new();
    let mut tail: f64 = 0.0;
    let outer = truncation as i32 - 1;
    for idx in admissible_indices(domain, truncation) {
        let c: Complex64 = parts.iter().enumerate().map(|(j, part)| part.get(MonomialIndex::one(idx.exponents()[j]))).product();
        if idx.total_degree(domain) >= outer {
            tail = tail.max(c.norm());
        }
        entries.insert(idx, c);
    }
    Ok(SpectralCoefficients { domain, truncation, entries, tail_estimate: tail })
}

/// Σ c_idx z^idx at an interior point.
pub fn eval_projection(coeffs: &SpectralCoefficients, z: &CPoint) -> Result<Complex64> {
    coeffs.domain.require_interior(z)?;
    Ok(eval_unchecked(coeffs, z))
}

/// Evaluation through tables of successive powers of the base coordinates
/// (u = (z₁/z₂, z₂) on ℍ, where exponents go down to −1).
pub(super) fn eval_unchecked(coeffs: &SpectralCoefficients, z: &CPoint) -> Complex64 {
    let domain = coeffs.domain;
    let base: Vec<Complex64> = match domain {
        Domain::HartogsTriangle => vec![z[0] / z[1], z[1]],
        _ => z.coords().to_vec(),
    };
    let n = coeffs.truncation as i32;
    // powers[j][k + 1] = base_j^k for k = −1..=n
    let powers: Vec<Vec<Complex64>> = base
        .iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(n as usize + 2);
            p.push(if x.norm() > 0.0 { x.inv() } else { Complex64::default() });
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=n {
                p.push(acc);
                acc *= x;
            }
            p
        })
        .collect();
    let mut sum = ComplexSum::new();
    for (idx, c) in &coeffs.entries {
        let modes = idx.base_modes(domain);
        let mut term = *c;
        for (j, pw) in powers.iter().enumerate() {
            term *= match pw.get((modes[j] + 1) as usize) {
                Some(v) => *v,
                None => base[j].powi(modes[j]),
            };
        }
        sum.add(term);
    }
    sum.value()
}
