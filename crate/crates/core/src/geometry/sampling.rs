use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CPoint, Domain};
use crate::error::{Error, Result};

/// Seeded uniform sample of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    pub points: Vec<CPoint>,
    pub seed: u64,
    pub count: usize,
    pub domain: Domain,
}

impl SampleCloud {
    /// Fraction of points satisfying `pred`, with its binomial standard error.
    pub fn fraction<F: Fn(&CPoint) -> bool>(&self, pred: F) -> (f64, f64) {
        let hits = self.points.iter().filter(|z| pred(z)).count() as f64;
        let n = self.count as f64;
        let q = hits / n;
        (q, (q * (1.0 - q) / n).sqrt())
    }
}

/// Radius with density ∝ r^{2k-1} on (0,1), never exactly 0.
fn radius(rng: &mut ChaCha8Rng, k: i32) -> f64 {
    // gen::<f64>() lies in [0, 1); 1 − u lies in (0, 1]
    let u = 1.0 - rng.gen::<f64>();
    let r = u.powf(1.0 / (2 * k) as f64);
    r.min(1.0 - f64::EPSILON / 2.0)
}

fn phase(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>())
}

/// Uniform Lebesgue sample by inverse CDF in the radius. On ℍ the point is
/// (u₁u₂, u₂) with u₁ uniform on 𝔻 and |u₂| having density ∝ r³.
pub fn sample(domain: Domain, count: usize, seed: u64) -> Result<SampleCloud> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    domain.check_dim(&CPoint::new(&vec![Complex64::new(0.0, 0.0); domain.dimension()])?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let z = match domain {
            Domain::UnitDisc | Domain::PuncturedDisc => CPoint::one(phase(&mut rng) * radius(&mut rng, 1)),
            Domain::Polydisc(n) => {
                let mut c = [Complex64::new(0.0, 0.0); 3];
                for x in c.iter_mut().take(n) {
                    *x = phase(&mut rng) * radius(&mut rng, 1);
                }
                CPoint::new(&c[..n])?
            }
            Domain::HartogsTriangle => {
                let u1 = phase(&mut rng) * radius(&mut rng, 1);
                let u2 = phase(&mut rng) * radius(&mut rng, 2);
                CPoint::two(u1 * u2, u2)
            }
        };
        // rounding can put a product exactly on |z₁| = |z₂|; redraw
        if domain.contains(&z)? {
            points.push(z);
        }
    }
    Ok(SampleCloud { points, seed, count, domain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadratureRule;

    #[test]
    fn disc_quarter_area() {
        let cloud = sample(Domain::UnitDisc, 100_000, 7).unwrap();
        let (q, se) = cloud.fraction(|z| z[0].norm() < 0.5);
        assert!((q - 0.25).abs() < 3.0 * se, "{q} ± {se}");
    }

    #[test]
    fn hartogs_small_z2_fraction() {
        let cloud = sample(Domain::HartogsTriangle, 100_000, 11).unwrap();
        let (q, se) = cloud.fraction(|z| z[1].norm() < 0.5);
        assert!((q - 1.0 / 16.0).abs() < 3.0 * se, "{q} ± {se}");
        assert!(cloud.points.iter().all(|z| Domain::HartogsTriangle.contains(z).unwrap()));
    }

    #[test]
    fn same_seed_same_cloud() {
        for d in [Domain::UnitDisc, Domain::Polydisc(2), Domain::HartogsTriangle, Domain::PuncturedDisc] {
            assert_eq!(sample(d, 500, 3).unwrap(), sample(d, 500, 3).unwrap());
            assert_ne!(sample(d, 500, 3).unwrap().points, sample(d, 500, 4).unwrap().points);
        }
    }

    #[test]
    fn empirical_ball_measure_matches_quadrature() {
        for d in [Domain::Polydisc(2), Domain::HartogsTriangle] {
            let cloud = sample(d, 200_000, 0x5EED).unwrap();
            let rho = 0.6;
            let (q, se) = cloud.fraction(|z| z[0].norm() < rho);
            // the indicator is discontinuous, so quadrature is only ~1e-2 accurate
            let rule = QuadratureRule::new(d, 40, 1).unwrap();
            let quad = rule.sum_real(|z| if z[0].norm() < rho { 1.0 } else { 0.0 }).unwrap() / d.volume();
            let exact = d.ball_measure(0, rho).unwrap() / d.volume();
            assert!((quad - exact).abs() < 2e-2, "{d}: {quad} vs {exact}");
            assert!((q - exact).abs() < 4.0 * se, "{d}: {q} ± {se} vs {exact}");
        }
    }

    #[test]
    fn zero_count_rejected() {
        assert!(sample(Domain::UnitDisc, 0, 1).is_err());
    }
}
