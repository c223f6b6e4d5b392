//! Closed-form Bergman kernels K(z; w̄) of the model domains.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn require_disc(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDomain { domain: Domain::UnitDisc.to_string(), point: CPoint::one(z).to_string() })
    }
}

#[inline]
pub(crate) fn disc_raw(z: Complex64, w: Complex64) -> Complex64 {
    let d = ONE - z * w.conj();
    (d * d * PI).inv()
}

#[inline]
pub(crate) fn hartogs_raw(z: &CPoint, w: &CPoint) -> Complex64 {
    let q2 = z[1] * w[1].conj();
    let q1 = z[0] * w[0].conj();
    let a = q2 - q1;
    let b = ONE - q2;
    q2 / (a * a * b * b * (PI * PI))
}

/// Kernel value without interior checks.
#[inline]
pub(crate) fn kernel_raw(domain: Domain, z: &CPoint, w: &CPoint) -> Complex64 {
    match domain {
        Domain::UnitDisc | Domain::PuncturedDisc => disc_raw(z[0], w[0]),
        Domain::Polydisc(_) => z.coords().iter().zip(w.coords()).map(|(a, b)| disc_raw(*a, *b)).product(),
        Domain::HartogsTriangle => hartogs_raw(z, w),
    }
}

/// 1/(π(1 − z w̄)²).
pub fn kernel_disc(z: Complex64, w: Complex64) -> Result<Complex64> {
    require_disc(z)?;
    require_disc(w)?;
    Ok(disc_raw(z, w))
}

/// Product of disc kernels over the coordinates.
pub fn kernel_polydisc(z: &CPoint, w: &CPoint) -> Result<Complex64> {
    if z.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), found: w.dim() });
    }
    let mut k = ONE;
    for (a, b) in z.coords().iter().zip(w.coords()) {
        k *= kernel_disc(*a, *b)?;
    }
    Ok(k)
}

/// π⁻² z₂w̄₂ / ((z₂w̄₂ − z₁w̄₁)²(1 − z₂w̄₂)²).
pub fn kernel_hartogs(z: &CPoint, w: &CPoint) -> Result<Complex64> {
    Domain::HartogsTriangle.require_interior(z)?;
    Domain::HartogsTriangle.require_interior(w)?;
    Ok(hartogs_raw(z, w))
}

/// Kernel of any model domain. The punctured disc shares the disc kernel,
/// since removing a point does not change the Bergman space.
pub fn kernel(domain: Domain, z: &CPoint, w: &CPoint) -> Result<Complex64> {
    domain.require_interior(z)?;
    domain.require_interior(w)?;
    Ok(kernel_raw(domain, z, w))
}

pub fn abs_kernel(domain: Domain, z: &CPoint, w: &CPoint) -> Result<f64> {
    kernel(domain, z, w).map(|k| k.norm())
}
