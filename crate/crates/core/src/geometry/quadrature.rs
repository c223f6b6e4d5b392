use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CPoint, Domain, MAX_DIM};
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, ComplexSum, CompensatedSum};

/// Composite Gauss–Legendre rule on (0, 1) for the measure r dr.
///
/// Panels are given by `breaks`; every panel carries `order` nodes, so the
/// rule is exact for polynomials of degree ≤ 2·order − 3 in r on each panel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialRule {
    breaks: Vec<f64>,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialRule {
    pub fn gauss(order: usize) -> Self {
        Self::with_breaks(order, vec![0.0, 1.0])
    }

    /// Geometric grading: `origin_levels` panels [2^{-k-1}, 2^{-k}] toward 0
    /// and `boundary_levels` panels [1 − 2^{-k}, 1 − 2^{-k-1}] toward 1.
    pub fn graded(order: usize, origin_levels: usize, boundary_levels: usize) -> Self {
        let mut breaks = vec![0.0, 1.0];
        for k in 1..=origin_levels {
            breaks.push(0.5f64.powi(k as i32));
        }
        for k in 1..=boundary_levels {
            breaks.push(1.0 - 0.5f64.powi(k as i32));
        }
        Self::with_breaks(order, breaks)
    }

    pub fn with_breaks(order: usize, mut breaks: Vec<f64>) -> Self {
        let order = order.max(1);
        breaks.retain(|b| (0.0..=1.0).contains(b));
        breaks.push(0.0);
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * (breaks.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            let h = 0.5 * (b - a);
            for (xi, wi) in x.iter().zip(&w) {
                let r = a + h * (xi + 1.0);
                nodes.push(r);
                weights.push(wi * h * r);
            }
        }
        Self { breaks, order, nodes, weights }
    }

    /// Boundary grading depth for integrands like |1 − s z|^{-β}: panels
    /// shrink until they are finer than (1 − s)/8.
    pub fn boundary_levels_for(s: f64) -> usize {
        if s <= 0.0 {
            return 0;
        }
        ((8.0 / (1.0 - s.min(1.0 - 1e-15))).log2().ceil() as usize).min(48)
    }

    pub fn with_order(&self, order: usize) -> Self {
        Self::with_breaks(order, self.breaks.clone())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor rule in polar coordinates, one (radial × angular) factor per disc
/// coordinate. The Hartogs triangle is covered through
/// (u₁, u₂) ↦ (u₁u₂, u₂) from 𝔻² with density |u₂|², so no node has z₂ = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    domain: Domain,
    radial: Vec<RadialRule>,
    angular: Vec<usize>,
    phases: Vec<f64>,
    radial_order: usize,
    angular_order: usize,
    origin_levels: usize,
    /// Origin grading applies to the last factor only.
    #[serde(default)]
    origin_last_only: bool,
    boundary_levels: usize,
}

/// Default origin grading depth for the u₂ factor of the Hartogs rule.
pub const HARTOGS_ORIGIN_LEVELS: usize = 8;

/// Angular order ≥ PEAK_ANGULAR_SCALE/(1 − s) for peaked integrands on the
/// disc, so that even the coarsened sibling aliases below e^{−28}.
const PEAK_ANGULAR_SCALE: f64 = 28.0;
const MAX_PEAK_ANGULAR: usize = 100_000;

impl QuadratureRule {
    /// `radial_order` nodes per radial panel; `angular_order` is the largest
    /// angular frequency the rule must resolve (node count 2·angular_order + 2).
    pub fn new(domain: Domain, radial_order: usize, angular_order: usize) -> Result<Self> {
        if radial_order == 0 || angular_order == 0 {
            return Err(Error::InvalidArgument("quadrature orders must be at least 1".into()));
        }
        domain.check_dim(&CPoint::new(&vec![Complex64::new(0.0, 0.0); domain.dimension().clamp(1, MAX_DIM)])?)?;
        let origin_levels = if domain == Domain::HartogsTriangle { HARTOGS_ORIGIN_LEVELS } else { 0 };
        let last_only = domain == Domain::HartogsTriangle;
        Ok(Self::build(domain, radial_order, angular_order, (origin_levels, last_only), 0, vec![0.0; domain.base_factors()]))
    }

    fn build(
        domain: Domain,
        radial_order: usize,
        angular_order: usize,
        (origin_levels, origin_last_only): (usize, bool),
        boundary_levels: usize,
        phases: Vec<f64>,
    ) -> Self {
        let d = domain.base_factors();
        let radial = (0..d)
            .map(|j| {
                let origin = if origin_last_only && j + 1 < d { 0 } else { origin_levels };
                RadialRule::graded(radial_order, origin, boundary_levels)
            })
            .collect();
        let m = 2 * angular_order + 2;
        Self {
            domain,
            radial,
            angular: vec![m; d],
            phases,
            radial_order,
            angular_order,
            origin_levels,
            origin_last_only,
            boundary_levels,
        }
    }

    fn rebuild(&self, radial_order: usize, angular_order: usize) -> Self {
        Self::build(
            self.domain,
            radial_order,
            angular_order,
            (self.origin_levels, self.origin_last_only),
            self.boundary_levels,
            self.phases.clone(),
        )
    }

    /// Geometric radial refinement toward the origin (the u₂ factor only on ℍ).
    pub fn with_origin_grading(&self, levels: usize) -> Self {
        self.with_levels(levels, self.boundary_levels)
    }

    /// Origin grading on the last factor only, for integrands singular
    /// along z_last = 0.
    pub fn with_last_factor_grading(&self, levels: usize) -> Self {
        let mut r = self.clone();
        r.origin_last_only = true;
        r.with_levels(levels, self.boundary_levels)
    }

    /// Geometric radial refinement toward r = 1 for integrands peaked like
    /// |1 − s z|^{-β}.
    pub fn with_boundary_grading(&self, s: f64) -> Self {
        let levels = RadialRule::boundary_levels_for(s);
        self.with_levels(self.origin_levels, levels)
    }

    /// Applies boundary grading when the singularity parameter is ≥ 0.9. On a
    /// single disc the angular order also grows like 1/(1 − s): the
    /// trapezoid error in θ decays like s^M, a cost tensor rules in several
    /// variables cannot pay.
    pub fn with_singularity(&self, s: Option<f64>) -> Self {
        match s {
            Some(s) if s >= 0.9 => {
                let graded = self.with_boundary_grading(s);
                if self.radial.len() > 1 {
                    return graded;
                }
                let need = ((PEAK_ANGULAR_SCALE / (1.0 - s.min(1.0 - 1e-12))).ceil() as usize).min(MAX_PEAK_ANGULAR);
                graded.rebuild(graded.radial_order, graded.angular_order.max(need))
            }
            _ => self.clone(),
        }
    }

    /// The disc rule of factor j of a polydisc rule. The tensor sum of a
    /// product integrand is the product of the factor sums.
    pub fn factor(&self, j: usize) -> Result<Self> {
        if !matches!(self.domain, Domain::Polydisc(_)) || j >= self.radial.len() {
            return Err(Error::InvalidArgument(format!("no factor {j} in a rule on {}", self.domain)));
        }
        let origin = if self.origin_last_only && j + 1 < self.radial.len() { 0 } else { self.origin_levels };
        Ok(Self::build(Domain::UnitDisc, self.radial_order, self.angular_order, (origin, false), self.boundary_levels, vec![self.phases[j]]))
    }

    fn with_levels(&self, origin_levels: usize, boundary_levels: usize) -> Self {
        Self::build(
            self.domain,
            self.radial_order,
            self.angular_order,
            (origin_levels, self.origin_last_only),
            boundary_levels,
            self.phases.clone(),
        )
    }

    /// Rotates every angular node of factor j by `phases[j]`.
    pub fn with_phases(&self, phases: &[f64]) -> Self {
        let mut r = self.clone();
        for (p, &q) in r.phases.iter_mut().zip(phases) {
            *p = q;
        }
        r
    }

    /// Lower-order sibling used for error estimates.
    pub fn coarsened(&self) -> Self {
        self.rebuild(((2 * self.radial_order) / 3).max(2), (self.angular_order / 2).max(1))
    }

    pub fn refined(&self) -> Self {
        self.rebuild(2 * self.radial_order, 2 * self.angular_order + 1)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn radial_order(&self) -> usize {
        self.radial_order
    }

    pub fn angular_order(&self) -> usize {
        self.angular_order
    }

    pub fn radial_rules(&self) -> &[RadialRule] {
        &self.radial
    }

    pub fn angular_counts(&self) -> &[usize] {
        &self.angular
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.radial.iter().zip(&self.angular).map(|(r, &m)| r.len() * m).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Maps base coordinates u ∈ 𝔻^d to the domain point and the Jacobian
    /// density of that map.
    #[inline]
    pub(crate) fn map_base(&self, u: &[Complex64]) -> (CPoint, f64) {
        match self.domain {
            Domain::HartogsTriangle => (CPoint::two(u[0] * u[1], u[1]), u[1].norm_sqr()),
            Domain::UnitDisc | Domain::PuncturedDisc => (CPoint::one(u[0]), 1.0),
            Domain::Polydisc(_) => (CPoint::new(u).expect("polydisc dimension checked"), 1.0),
        }
    }

    fn angle_tables(&self) -> Vec<Vec<Complex64>> {
        self.angular
            .iter()
            .zip(&self.phases)
            .map(|(&m, &phase)| {
                (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64 + phase)).collect()
            })
            .collect()
    }

    /// Visits every node with its weight, in the fixed lexicographic order
    /// (radial indices outermost, then angular indices).
    pub fn for_each_node<F: FnMut(&CPoint, f64)>(&self, mut f: F) {
        let tables = self.angle_tables();
        for i0 in 0..self.radial[0].len() {
            self.visit_slice(i0, &tables, &mut f);
        }
    }

    fn visit_slice<F: FnMut(&CPoint, f64)>(&self, i0: usize, tables: &[Vec<Complex64>], f: &mut F) {
        let d = self.radial.len();
        let mut ridx = [0usize; MAX_DIM];
        ridx[0] = i0;
        loop {
            let mut rw = 1.0;
            for j in 0..d {
                rw *= self.radial[j].weights()[ridx[j]] * (2.0 * PI / self.angular[j] as f64);
            }
            let mut aidx = [0usize; MAX_DIM];
            loop {
                let mut u = [Complex64::new(0.0, 0.0); MAX_DIM];
                for j in 0..d {
                    u[j] = tables[j][aidx[j]] * self.radial[j].nodes()[ridx[j]];
                }
                let (z, jac) = self.map_base(&u[..d]);
                f(&z, rw * jac);
                if !advance(&mut aidx[..d], &self.angular, 0) {
                    break;
                }
            }
            let radial_lens: Vec<usize> = self.radial.iter().map(RadialRule::len).collect();
            if !advance(&mut ridx[..d], &radial_lens, 1) {
                break;
            }
        }
    }

    /// Σ wᵢ f(zᵢ) with compensated, schedule-independent reduction.
    pub fn sum<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&CPoint) -> Complex64 + Sync,
    {
        let tables = self.angle_tables();
        let partials: Vec<Result<Complex64>> = (0..self.radial[0].len())
            .into_par_iter()
            .map(|i0| {
                let mut acc = ComplexSum::new();
                let mut bad = None;
                self.visit_slice(i0, &tables, &mut |z, w| {
                    if bad.is_some() {
                        return;
                    }
                    let v = f(z);
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        bad = Some(*z);
                    } else {
                        acc.add(v * w);
                    }
                });
                match bad {
                    Some(z) => Err(Error::NonFinite { point: z.to_string() }),
                    None => Ok(acc.value()),
                }
            })
            .collect();
        let mut total = ComplexSum::new();
        for p in partials {
            total.add(p?);
        }
        Ok(total.value())
    }

    pub fn sum_real<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&CPoint) -> f64 + Sync,
    {
        let tables = self.angle_tables();
        let partials: Vec<Result<f64>> = (0..self.radial[0].len())
            .into_par_iter()
            .map(|i0| {
                let mut acc = CompensatedSum::new();
                let mut bad = None;
                self.visit_slice(i0, &tables, &mut |z, w| {
                    if bad.is_some() {
                        return;
                    }
                    let v = f(z);
                    if !v.is_finite() {
                        bad = Some(*z);
                    } else {
                        acc.add(v * w);
                    }
                });
                match bad {
                    Some(z) => Err(Error::NonFinite { point: z.to_string() }),
                    None => Ok(acc.value()),
                }
            })
            .collect();
        let mut total = CompensatedSum::new();
        for p in partials {
            total.add(p?);
        }
        Ok(total.value())
    }

    /// (weight, f(node)) for every node, in the fixed node order.
    pub fn collect<T, F>(&self, f: F) -> Vec<(f64, T)>
    where
        T: Send,
        F: Fn(&CPoint) -> T + Sync,
    {
        let tables = self.angle_tables();
        let chunks: Vec<Vec<(f64, T)>> = (0..self.radial[0].len())
            .into_par_iter()
            .map(|i0| {
                let mut out = Vec::new();
                self.visit_slice(i0, &tables, &mut |z, w| out.push((w, f(z))));
                out
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.sum_real(|_| 1.0).expect("constant integrand is finite")
    }
}

/// Odometer increment over `idx[start..]`; false when it wraps.
fn advance(idx: &mut [usize], lens: &[usize], start: usize) -> bool {
    for j in (start..idx.len()).rev() {
        idx[j] += 1;
        if idx[j] < lens[j] {
            return true;
        }
        idx[j] = 0;
    }
    false
}

/// Integral value with an error estimate from a lower-order sibling rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// ∫ f dV over the rule's domain. The error is |I(rule) − I(coarsened rule)|.
pub fn integrate<F>(f: F, rule: &QuadratureRule) -> Result<Estimate>
where
    F: Fn(&CPoint) -> Complex64 + Sync,
{
    let fine = rule.sum(&f)?;
    let coarse = rule.coarsened().sum(&f)?;
    Ok(Estimate { value: fine, error: (fine - coarse).norm() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weights_sum_to_volume() {
        for d in [Domain::UnitDisc, Domain::PuncturedDisc, Domain::Polydisc(2), Domain::HartogsTriangle, Domain::Polydisc(3)] {
            let rule = QuadratureRule::new(d, 6, 3).unwrap();
            assert!((rule.total_weight() / d.volume() - 1.0).abs() < 1e-13, "{d}");
        }
    }

    #[test]
    fn node_count_and_angular_parity() {
        let rule = QuadratureRule::new(Domain::Polydisc(2), 5, 4).unwrap();
        assert_eq!(rule.angular_counts(), &[10, 10]);
        assert_eq!(rule.len(), 50 * 50);
        let mut n = 0;
        rule.for_each_node(|z, w| {
            assert!(Domain::Polydisc(2).contains(z).unwrap());
            assert!(w > 0.0);
            n += 1;
        });
        assert_eq!(n, rule.len());
    }

    #[test]
    fn hartogs_nodes_are_interior() {
        let rule = QuadratureRule::new(Domain::HartogsTriangle, 4, 2).unwrap();
        rule.for_each_node(|z, _| {
            assert!(Domain::HartogsTriangle.contains(z).unwrap());
            assert!(z[1].norm() > 0.0);
        });
    }

    #[test]
    fn moment_examples() {
        let d = QuadratureRule::new(Domain::UnitDisc, 8, 4).unwrap();
        let v = integrate(|_| c(1.0, 0.0), &d).unwrap();
        assert!((v.value.re - PI).abs() < 1e-14);
        let v = integrate(|z| c(z[0].norm_sqr(), 0.0), &d).unwrap();
        assert!((v.value.re - PI / 2.0).abs() < 1e-14);
        let v = integrate(|z| z[0], &d).unwrap();
        assert!(v.value.norm() < 1e-15);
    }

    #[test]
    fn hartogs_inverse_modulus_moment() {
        // ∫_ℍ |z₂|^{-1} dV = ∫_𝔻 π|z₂| dV(z₂) = 2π²/3 ; the 1-D oracle
        let n = 400_000;
        let h = 1.0 / n as f64;
        let oracle = 2.0 * PI * PI * (0..n).map(|i| ((i as f64 + 0.5) * h).powi(2) * h).sum::<f64>();
        assert!((oracle - 2.0 * PI * PI / 3.0).abs() < 1e-9);
        let rule = QuadratureRule::new(Domain::HartogsTriangle, 10, 2).unwrap();
        let v = integrate(|z| c(1.0 / z[1].norm(), 0.0), &rule).unwrap();
        assert!((v.value.re - oracle).abs() < 1e-9);
    }

    #[test]
    fn non_finite_value_is_reported() {
        let rule = QuadratureRule::new(Domain::UnitDisc, 3, 2).unwrap();
        let err = integrate(|z| if z[0].re > 0.5 { c(f64::NAN, 0.0) } else { c(0.0, 0.0) }, &rule);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn boundary_grading_resolves_peaked_integrand() {
        // ∫_𝔻 |1 − s z|^{-4} dV = π/(1 − s²)²
        let s = 0.95;
        let rule = QuadratureRule::new(Domain::UnitDisc, 16, 400).unwrap().with_singularity(Some(s));
        let v = integrate(|z| c((c(1.0, 0.0) - z[0] * s).norm().powi(-4), 0.0), &rule).unwrap();
        let exact = PI / (1.0 - s * s).powi(2);
        assert!((v.value.re / exact - 1.0).abs() < 1e-10, "{}", v.value.re / exact);
        assert!(v.error < 1e-3 * exact);
    }

    #[test]
    fn radial_integral_is_phase_invariant() {
        let rule = QuadratureRule::new(Domain::Polydisc(2), 6, 3).unwrap();
        let f = |z: &CPoint| c((z[0].norm() + 1.0).ln() * z[1].norm_sqr(), 0.0);
        let a = rule.sum(f).unwrap();
        let b = rule.with_phases(&[0.37, 1.9]).sum(f).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn doubling_orders_stays_within_error_estimate() {
        let tests: Vec<Box<dyn Fn(&CPoint) -> Complex64 + Sync>> = vec![
            Box::new(|z: &CPoint| (z[0] * 0.5).exp()),
            Box::new(|z: &CPoint| c(1.0 / (1.0 + z[0].norm_sqr()), 0.0)),
            Box::new(|z: &CPoint| c((z[0].re * 2.0).cos(), z[0].im)),
        ];
        let rule = QuadratureRule::new(Domain::UnitDisc, 4, 3).unwrap();
        for f in &tests {
            let est = integrate(f, &rule).unwrap();
            let finer = rule.refined().sum(f).unwrap();
            assert!((finer - est.value).norm() <= est.error.max(1e-15), "{} > {}", (finer - est.value).norm(), est.error);
        }
    }

    #[test]
    fn reduction_is_independent_of_thread_count() {
        let rule = QuadratureRule::new(Domain::Polydisc(2), 7, 5).unwrap();
        let f = |z: &CPoint| (z[0] * z[1].conj() + 0.3).inv();
        let a = rule.sum(f).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| rule.sum(f).unwrap());
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}
