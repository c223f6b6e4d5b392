//! The transport f ↦ g(u) = u₂·f(u₁u₂, u₂) from ℍ to 𝔻², which is an
//! isometry L^p(ℍ) → L^p(𝔻², |u₂|^{2−p}dV) and conjugates the projections.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{sample, CPoint, Domain, QuadratureRule};
use crate::norms::{lp_norm, WeightSpec};
use crate::projector::{default_series_rule, eval_projection, project_series, FunctionHandle};

/// g on 𝔻² with a link back to the source function on ℍ.
#[derive(Clone, Debug)]
pub struct Transported {
    pub source: String,
    pub handle: FunctionHandle,
}

impl Transported {
    /// g(u), rejecting u₂ = 0 where the map (u₁, u₂) ↦ (u₁u₂, u₂) leaves ℍ.
    pub fn eval(&self, u: &CPoint) -> Result<Complex64> {
        Domain::Polydisc(2).require_interior(u)?;
        if u[1] == Complex64::new(0.0, 0.0) {
            return invalid(format!("transported function is undefined at u₂ = 0 ({u})"));
        }
        self.handle.eval(u)
    }
}

pub fn transport_to_bidisc(f: &FunctionHandle) -> Result<Transported> {
    if f.domain() != Domain::HartogsTriangle {
        return Err(Error::InvalidArgument(format!("transport expects a function on ℍ, got {}", f.domain())));
    }
    let inner = f.clone();
    let handle = FunctionHandle::new(Domain::Polydisc(2), format!("T[{}]", f.label()), move |u| {
        u[1] * inner.value(&CPoint::two(u[0] * u[1], u[1]))
    });
    Ok(Transported { source: f.label().to_string(), handle })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportCheck {
    pub label: String,
    /// ‖f‖_{L⁴(ℍ)}.
    pub hartogs_norm: f64,
    /// ‖g‖_{L⁴(𝔻², |u₂|⁻²)}.
    pub bidisc_norm: f64,
    pub isometry_error: f64,
    /// max over the points of |P_ℍ f(z) − P_{𝔻²}g(z₁/z₂, z₂)/z₂| / |P_ℍ f(z)|.
    pub conjugation_error: f64,
    pub points: usize,
}

/// Isometry of the L⁴ norms and the conjugation P_ℍ f(z) = P_{𝔻²}g(z₁/z₂, z₂)/z₂
/// at `points` seeded sample points, both projections by series.
pub fn transport_check(f: &FunctionHandle, truncation: usize, points: usize, seed: u64) -> Result<TransportCheck> {
    let g = transport_to_bidisc(f)?;
    let hrule = QuadratureRule::new(Domain::HartogsTriangle, 20, 4)?.with_origin_grading(20);
    let drule = QuadratureRule::new(Domain::Polydisc(2), 20, 4)?.with_last_factor_grading(20);
    let nf = lp_norm(f, Domain::HartogsTriangle, 4.0, None, &hrule)?;
    let ng = lp_norm(&g.handle, Domain::Polydisc(2), 4.0, Some(&WeightSpec::power_z2(2.0)), &drule)?;

    let ph = project_series(Domain::HartogsTriangle, f, truncation, &default_series_rule(Domain::HartogsTriangle, truncation)?.with_origin_grading(8))?;
    let pd = project_series(Domain::Polydisc(2), &g.handle, truncation, &default_series_rule(Domain::Polydisc(2), truncation)?.with_last_factor_grading(8))?;
    let mut worst: f64 = 0.0;
    for z in sample(Domain::HartogsTriangle, points, seed)?.points {
        let lhs = eval_projection(&ph, &z)?;
        let rhs = eval_projection(&pd, &CPoint::two(z[0] / z[1], z[1]))? / z[1];
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(f64::MIN_POSITIVE));
    }
    Ok(TransportCheck {
        label: f.label().to_string(),
        hartogs_norm: nf.value,
        bidisc_norm: ng.value,
        isometry_error: (nf.value - ng.value).abs() / nf.value,
        conjugation_error: worst,
        points,
    })
}

/// Three functions in L⁴(ℍ): f_p at p = 3 and p = 6 and z₁z̄₂ + |z₂|².
pub fn default_transport_suite() -> Result<Vec<FunctionHandle>> {
    use super::families::{family_function, CounterexampleFamily};
    Ok(vec![
        family_function(&CounterexampleFamily::fp(3.0)?),
        family_function(&CounterexampleFamily::fp(6.0)?),
        FunctionHandle::new(Domain::HartogsTriangle, "z1*conj(z2)+|z2|^2", |z| z[0] * z[1].conj() + z[1].norm_sqr()),
    ])
}
