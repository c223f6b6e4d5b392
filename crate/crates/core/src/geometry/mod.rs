//! Model domains in ℂⁿ, polar tensor quadrature and seeded sampling.

mod quadrature;
mod sampling;

use std::f64::consts::PI;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use quadrature::{integrate, Estimate, QuadratureRule, RadialRule};
pub use sampling::{sample, SampleCloud};

/// Largest complex dimension handled by [`CPoint`].
pub const MAX_DIM: usize = 3;

/// A point of ℂⁿ for n ≤ 3.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CPoint {
    coords: [Complex64; MAX_DIM],
    dim: usize,
}

impl CPoint {
    pub fn new(coords: &[Complex64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "points must have between 1 and {MAX_DIM} coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("point coordinates must be finite".into()));
        }
        let mut c = [Complex64::new(0.0, 0.0); MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self { coords: c, dim: coords.len() })
    }

    pub fn one(z: Complex64) -> Self {
        Self { coords: [z, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)], dim: 1 }
    }

    pub fn two(z1: Complex64, z2: Complex64) -> Self {
        Self { coords: [z1, z2, Complex64::new(0.0, 0.0)], dim: 2 }
    }

    pub fn three(z1: Complex64, z2: Complex64, z3: Complex64) -> Self {
        Self { coords: [z1, z2, z3], dim: 3 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords[..self.dim]
    }

    /// Rotates each coordinate by its own phase.
    pub fn rotated(&self, phases: &[f64]) -> Self {
        let mut out = *self;
        for (z, &t) in out.coords[..self.dim].iter_mut().zip(phases) {
            *z *= Complex64::from_polar(1.0, t);
        }
        out
    }
}

impl Index<usize> for CPoint {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.coords()[i]
    }
}

impl fmt::Debug for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// The model domains. All of them are Reinhardt domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    UnitDisc,
    Polydisc(usize),
    PuncturedDisc,
    HartogsTriangle,
}

impl Domain {
    pub fn dimension(&self) -> usize {
        match *self {
            Domain::UnitDisc | Domain::PuncturedDisc => 1,
            Domain::Polydisc(n) => n,
            Domain::HartogsTriangle => 2,
        }
    }

    /// Number of disc factors in the polar parametrization used by quadrature
    /// (ℍ is parametrized by 𝔻² through (u₁, u₂) ↦ (u₁u₂, u₂)).
    pub(crate) fn base_factors(&self) -> usize {
        self.dimension()
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Domain::Polydisc(n) if n == 0 || n > MAX_DIM => {
                Err(Error::Unsupported(format!("polydisc of dimension {n}")))
            }
            _ => Ok(()),
        }
    }

    pub fn check_dim(&self, z: &CPoint) -> Result<()> {
        self.validate()?;
        if z.dim() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: z.dim() });
        }
        Ok(())
    }

    /// Strict membership test.
    pub fn contains(&self, z: &CPoint) -> Result<bool> {
        self.check_dim(z)?;
        Ok(match *self {
            Domain::UnitDisc => z[0].norm() < 1.0,
            Domain::PuncturedDisc => {
                let r = z[0].norm();
                r > 0.0 && r < 1.0
            }
            Domain::Polydisc(_) => z.coords().iter().all(|c| c.norm() < 1.0),
            Domain::HartogsTriangle => {
                let (a, b) = (z[0].norm(), z[1].norm());
                a < b && b < 1.0
            }
        })
    }

    pub fn require_interior(&self, z: &CPoint) -> Result<()> {
        if self.contains(z)? {
            Ok(())
        } else {
            Err(Error::OutsideDomain { domain: self.to_string(), point: z.to_string() })
        }
    }

    /// Lebesgue measure in ℝ^{2n}.
    pub fn volume(&self) -> f64 {
        match *self {
            Domain::UnitDisc | Domain::PuncturedDisc => PI,
            Domain::Polydisc(n) => PI.powi(n as i32),
            Domain::HartogsTriangle => PI * PI / 2.0,
        }
    }

    /// Measure of {z ∈ domain : |z_coord| < rho}.
    pub fn ball_measure(&self, coord: usize, rho: f64) -> Result<f64> {
        self.validate()?;
        if coord >= self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: coord + 1 });
        }
        let r = rho.clamp(0.0, 1.0);
        Ok(match *self {
            Domain::UnitDisc | Domain::PuncturedDisc => PI * r * r,
            Domain::Polydisc(n) => PI.powi(n as i32 - 1) * PI * r * r,
            Domain::HartogsTriangle if coord == 1 => PI * PI * r.powi(4) / 2.0,
            // |z₁| < ρ: ∫_𝔻 π·min(|z₂|, ρ)² dV(z₂)
            Domain::HartogsTriangle => PI * PI * (r * r - r.powi(4) / 2.0),
        })
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::UnitDisc => write!(f, "disc"),
            Domain::Polydisc(n) => write!(f, "polydisc{n}"),
            Domain::PuncturedDisc => write!(f, "punctured-disc"),
            Domain::HartogsTriangle => write!(f, "hartogs"),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "disc" | "d" | "unit-disc" => Ok(Domain::UnitDisc),
            "bidisc" | "polydisc2" | "d2" => Ok(Domain::Polydisc(2)),
            "polydisc1" => Ok(Domain::Polydisc(1)),
            "polydisc3" | "tridisc" | "d3" => Ok(Domain::Polydisc(3)),
            "punctured-disc" | "punctured" => Ok(Domain::PuncturedDisc),
            "hartogs" | "h" | "hartogs-triangle" => Ok(Domain::HartogsTriangle),
            other => Err(Error::InvalidArgument(format!("unknown domain '{other}'"))),
        }
    }
}
