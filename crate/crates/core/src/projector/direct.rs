use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FunctionHandle;
use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain, QuadratureRule};
use crate::kernels::kernel_raw;

/// Quadrature value with the coarse-rule error estimate and a convergence
/// flag against the requested relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projected<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

fn check(domain: Domain, f: &FunctionHandle, z: &CPoint, rule: &QuadratureRule) -> Result<QuadratureRule> {
    if f.domain() != domain || rule.domain() != domain {
        return Err(Error::InvalidArgument(format!(
            "domain mismatch: requested {domain}, function on {}, rule on {}",
            f.domain(),
            rule.domain()
        )));
    }
    domain.require_interior(z)?;
    Ok(f.adapted_rule(rule))
}

/// P(f)(z) = ∫ K(z; w̄) f(w) dV(w) by direct quadrature.
pub fn project_quadrature(
    domain: Domain,
    f: &FunctionHandle,
    z: &CPoint,
    rule: &QuadratureRule,
    tol: f64,
) -> Result<Projected<Complex64>> {
    let rule = check(domain, f, z, rule)?;
    let g = |w: &CPoint| kernel_raw(domain, z, w) * f.value(w);
    let fine = rule.sum(g)?;
    let coarse = rule.coarsened().sum(g)?;
    let error = (fine - coarse).norm();
    Ok(Projected { value: fine, error, converged: error <= tol * fine.norm().max(1.0) })
}

/// P⁺(f)(z) = ∫ |K(z; w̄)| |f(w)| dV(w).
pub fn project_abs(domain: Domain, f: &FunctionHandle, z: &CPoint, rule: &QuadratureRule, tol: f64) -> Result<Projected<f64>> {
    let rule = check(domain, f, z, rule)?;
    let g = |w: &CPoint| kernel_raw(domain, z, w).norm() * f.value(w).norm();
    let fine = rule.sum_real(g)?;
    let coarse = rule.coarsened().sum_real(g)?;
    let error = (fine - coarse).abs();
    Ok(Projected { value: fine, error, converged: error <= tol * fine.abs().max(1.0) })
}
