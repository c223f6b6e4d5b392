use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::sample;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fs_bidisc(s: f64) -> FunctionHandle {
    let one = c(1.0, 0.0);
    FunctionHandle::new(Domain::Polydisc(2), "f_s", move |w| {
        c((1.0 - s * s).powi(4) * (one - w[0] * s).norm().powi(-4) * (one - w[1] * s).norm().powi(-4), 0.0)
    })
    .with_singularity(s)
}

/// Midpoint rule on (0,1) with many cells; used as a plain 1-D oracle.
fn midpoint<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn monomial_norms() {
    assert!((monomial_norm_sq(Domain::UnitDisc, MonomialIndex::one(0)).unwrap() - PI).abs() < 1e-15);
    // ∫_ℍ |z₁|^{2a}|z₂|^{2b} dV = 2π²/(a+1) ∫₀¹ r^{2a+2b+3} dr
    for (a, b) in [(0, -1), (1, 0), (2, -3), (0, 2)] {
        let oracle = 2.0 * PI * PI / (a + 1) as f64 * midpoint(|r| r.powi(2 * a + 2 * b + 3), 400_000);
        let exact = monomial_norm_sq(Domain::HartogsTriangle, MonomialIndex::two(a, b)).unwrap();
        assert!((exact / oracle - 1.0).abs() < 1e-9, "({a},{b})");
    }
    assert!((monomial_norm_sq(Domain::HartogsTriangle, MonomialIndex::two(0, -1)).unwrap() - PI * PI).abs() < 1e-14);
    assert!((monomial_norm_sq(Domain::HartogsTriangle, MonomialIndex::two(1, 0)).unwrap() - PI * PI / 6.0).abs() < 1e-14);
    assert!(matches!(
        monomial_norm_sq(Domain::HartogsTriangle, MonomialIndex::two(1, -3)),
        Err(Error::Inadmissible { .. })
    ));
    assert!(monomial_norm_sq(Domain::UnitDisc, MonomialIndex::two(0, 0)).is_err());
}

#[test]
fn index_enumeration() {
    assert_eq!(admissible_indices(Domain::UnitDisc, 5).len(), 6);
    assert_eq!(admissible_indices(Domain::Polydisc(2), 4).len(), 15);
    assert_eq!(admissible_indices(Domain::Polydisc(3), 2).len(), 10);
    let h = admissible_indices(Domain::HartogsTriangle, 6);
    assert!(h.iter().all(|i| i.is_admissible(Domain::HartogsTriangle) && i.total_degree(Domain::HartogsTriangle) <= 6));
    // degrees 0..=6 of the transported monomials u₁^a u₂^{m+1}, m ≥ −1
    assert_eq!(h.len(), (1..=7).sum::<usize>());
}

#[test]
fn series_is_identity_on_monomials() {
    let n = 12;
    let rule = default_series_rule(Domain::UnitDisc, n).unwrap();
    for a in 0..=n as i32 {
        let f = FunctionHandle::monomial(Domain::UnitDisc, MonomialIndex::one(a)).unwrap();
        let co = project_series(Domain::UnitDisc, &f, n, &rule).unwrap();
        assert!((co.get(MonomialIndex::one(a)) - 1.0).norm() < 1e-12);
        assert!(co.max_abs_excluding(&[MonomialIndex::one(a)]) < 1e-12);
    }
    let f = FunctionHandle::monomial(Domain::UnitDisc, MonomialIndex::one(2)).unwrap();
    let co = project_series(Domain::UnitDisc, &f, n, &rule).unwrap();
    assert!((eval_projection(&co, &CPoint::one(c(0.3, 0.0))).unwrap() - 0.09).norm() < 1e-14);
}

#[test]
fn fs_projection_matches_closed_form() {
    let s = 0.5;
    let n = 40;
    let co = project_series(Domain::Polydisc(2), &fs_bidisc(s), n, &default_series_rule(Domain::Polydisc(2), n).unwrap()).unwrap();
    let z = CPoint::two(c(0.2, 0.0), c(-0.3, 0.0));
    let expect = 1.0 / (0.9f64.powi(2) * 1.15f64.powi(2));
    assert!((eval_projection(&co, &z).unwrap().re / expect - 1.0).abs() < 1e-8);
    for z in sample(Domain::Polydisc(2), 30, 9).unwrap().points {
        let exact = ((c(1.0, 0.0) - z[0] * s) * (c(1.0, 0.0) - z[1] * s)).powi(-2);
        let v = eval_projection(&co, &z).unwrap();
        assert!((v - exact).norm() / exact.norm() < 1e-6, "{z}");
    }
    assert!(co.tail_estimate < 1e-8);
}

#[test]
fn hartogs_fp_has_single_mode() {
    let p = 2.0f64;
    let pp = p / (p - 1.0);
    let f = FunctionHandle::new(Domain::HartogsTriangle, "f_p", move |w| w[1].conj() * w[1].norm().powf(-pp));
    let n = 8;
    let co = project_series(Domain::HartogsTriangle, &f, n, &default_series_rule(Domain::HartogsTriangle, n).unwrap()).unwrap();
    let k = MonomialIndex::two(0, -1);
    // π⁻²∫_ℍ |w₂|^{−p′} dV = 2∫₀¹ r^{3−p′} dr
    let oracle = 2.0 * midpoint(|r| r.powf(3.0 - pp), 200_000);
    assert!((co.get(k).re / oracle - 1.0).abs() < 1e-8, "{} vs {oracle}", co.get(k));
    assert!(co.max_abs_excluding(&[k]) < 1e-12);
}

#[test]
fn quadrature_path_examples() {
    let rule = QuadratureRule::new(Domain::UnitDisc, 20, 60).unwrap();
    let one = FunctionHandle::constant(Domain::UnitDisc, c(1.0, 0.0));
    for z in [c(0.0, 0.0), c(0.3, -0.4), c(-0.6, 0.1)] {
        let v = project_quadrature(Domain::UnitDisc, &one, &CPoint::one(z), &rule, 1e-6).unwrap();
        assert!((v.value - 1.0).norm() < 1e-10 && v.converged, "{v:?}");
    }
    let rule2 = QuadratureRule::new(Domain::Polydisc(2), 24, 24).unwrap();
    let z0 = CPoint::two(c(0.0, 0.0), c(0.0, 0.0));
    let v = project_quadrature(Domain::Polydisc(2), &fs_bidisc(0.5), &z0, &rule2, 1e-6).unwrap();
    assert!((v.value - 1.0).norm() < 1e-8);
}

#[test]
fn quadrature_and_series_agree() {
    let f = fs_bidisc(0.5);
    let n = 40;
    let co = project_series(Domain::Polydisc(2), &f, n, &default_series_rule(Domain::Polydisc(2), n).unwrap()).unwrap();
    let rule = QuadratureRule::new(Domain::Polydisc(2), 28, 40).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let z = CPoint::two(
            Complex64::from_polar(0.6 * rng.gen::<f64>().sqrt(), 6.3 * rng.gen::<f64>()),
            Complex64::from_polar(0.6 * rng.gen::<f64>().sqrt(), 6.3 * rng.gen::<f64>()),
        );
        let q = project_quadrature(Domain::Polydisc(2), &f, &z, &rule, 1e-6).unwrap();
        let s = eval_projection(&co, &z).unwrap();
        assert!((q.value - s).norm() / s.norm() < 1e-6, "{z}: {} vs {}", q.value, s);
    }
}

#[test]
fn absolute_projection() {
    let one = FunctionHandle::constant(Domain::UnitDisc, c(1.0, 0.0));
    let rule = QuadratureRule::new(Domain::UnitDisc, 20, 40).unwrap();
    let v = project_abs(Domain::UnitDisc, &one, &CPoint::one(c(0.0, 0.0)), &rule, 1e-8).unwrap();
    assert!((v.value - 1.0).abs() < 1e-12);
    // P⁺(1)(z) = −log(1 − |z|²)/|z|² on the disc
    let r = 0.9;
    let fine = QuadratureRule::new(Domain::UnitDisc, 24, 200).unwrap().with_singularity(Some(r));
    let v = project_abs(Domain::UnitDisc, &one, &CPoint::one(c(r, 0.0)), &fine, 1e-6).unwrap();
    let reference = -(1.0 - r * r).ln();
    assert!((v.value / (reference / (r * r)) - 1.0).abs() < 1e-6);
    assert!((0.1..10.0).contains(&(v.value / reference)));
    let g = FunctionHandle::new(Domain::UnitDisc, "g", |w| c(1.0 + w[0].re * w[0].im, 0.0).powi(2));
    for z in sample(Domain::UnitDisc, 10, 4).unwrap().points {
        let z = CPoint::one(z[0] * 0.7);
        let pa = project_abs(Domain::UnitDisc, &g, &z, &rule, 1e-4).unwrap().value;
        let p = project_quadrature(Domain::UnitDisc, &g, &z, &rule, 1e-4).unwrap().value;
        assert!(pa >= p.norm());
    }
}

fn random_polynomial(domain: Domain, degree: usize, seed: u64) -> Vec<(MonomialIndex, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    admissible_indices(domain, degree).into_iter().map(|i| (i, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))).collect()
}

#[test]
fn idempotence() {
    for (domain, n) in [(Domain::UnitDisc, 10), (Domain::Polydisc(2), 8), (Domain::HartogsTriangle, 6)] {
        let rule = default_series_rule(domain, n).unwrap();
        let g = FunctionHandle::new(domain, "mixed", |w| {
            let z = w[w.dim() - 1];
            c(1.0, 0.0) / (c(2.0, 0.0) - z.conj() * 0.5) + w[0] * w[0].conj() * w[0]
        });
        let first = project_series(domain, &g, n, &rule).unwrap();
        let second = project_series(domain, &first.to_function(), n, &rule).unwrap();
        for (k, v) in &first.entries {
            assert!((second.get(*k) - v).norm() < 1e-10, "{domain} {k}");
        }
    }
}

#[test]
fn antiholomorphic_monomials_are_annihilated() {
    let n = 10;
    let rule = default_series_rule(Domain::UnitDisc, n).unwrap();
    for a in 1..=6 {
        let f = FunctionHandle::new(Domain::UnitDisc, "conj", move |w| w[0].conj().powi(a));
        let co = project_series(Domain::UnitDisc, &f, n, &rule).unwrap();
        assert!(co.max_abs_excluding(&[]) < 1e-12);
    }
}

#[test]
fn conjugation_identity() {
    let tests: Vec<(FunctionHandle, FunctionHandle)> = vec![
        (
            FunctionHandle::new(Domain::HartogsTriangle, "f6", |w| w[1].conj() * w[1].norm().powf(-1.2)),
            FunctionHandle::new(Domain::Polydisc(2), "g6", |u| c(u[1].norm().powf(0.8), 0.0)),
        ),
        (
            FunctionHandle::new(Domain::HartogsTriangle, "poly", |w| w[0] * w[1].conj() + w[1].norm_sqr()),
            FunctionHandle::new(Domain::Polydisc(2), "gpoly", |u| u[1] * (u[0] * u[1] * u[1].conj() + u[1].norm_sqr())),
        ),
        (
            FunctionHandle::new(Domain::HartogsTriangle, "z1cz2sq", |w| w[0] * w[1].conj().powi(2)),
            FunctionHandle::new(Domain::Polydisc(2), "gz", |u| u[0] * u[1].norm_sqr().powi(2)),
        ),
    ];
    let n = 8;
    let hrule = default_series_rule(Domain::HartogsTriangle, n).unwrap();
    let drule = default_series_rule(Domain::Polydisc(2), n).unwrap().with_origin_grading(8);
    for (f, g) in &tests {
        let ph = project_series(Domain::HartogsTriangle, f, n, &hrule).unwrap();
        let pd = project_series(Domain::Polydisc(2), g, n, &drule).unwrap();
        for z in sample(Domain::HartogsTriangle, 20, 77).unwrap().points {
            let lhs = eval_projection(&ph, &z).unwrap().norm();
            let rhs = eval_projection(&pd, &CPoint::two(z[0] / z[1], z[1])).unwrap().norm() / z[1].norm();
            assert!((lhs - rhs).abs() / rhs < 1e-6, "{}: {lhs} vs {rhs}", f.label());
        }
    }
}

#[test]
fn self_adjoint_on_disc() {
    // f = p·q̄ with P(z^j z̄^k) = (j−k+1)/(j+1) z^{j−k} for j ≥ k
    let n = 12;
    let rule = default_series_rule(Domain::UnitDisc, n).unwrap();
    for seed in 0..4 {
        let p = random_polynomial(Domain::UnitDisc, 4, seed);
        let q = random_polynomial(Domain::UnitDisc, 3, seed + 100);
        let r = random_polynomial(Domain::UnitDisc, 3, seed + 200);
        let s = random_polynomial(Domain::UnitDisc, 4, seed + 300);
        let poly = |terms: Vec<(MonomialIndex, Complex64)>| FunctionHandle::polynomial(Domain::UnitDisc, terms).unwrap();
        let (p, q, r, s) = (poly(p), poly(q), poly(r), poly(s));
        let f = {
            let (p, q) = (p.clone(), q.clone());
            FunctionHandle::new(Domain::UnitDisc, "pq", move |z| p.value(z) * q.value(z).conj())
        };
        let g = FunctionHandle::new(Domain::UnitDisc, "rs", move |z| r.value(z) * s.value(z).conj());
        let pf = project_series(Domain::UnitDisc, &f, n, &rule).unwrap().to_function();
        let pg = project_series(Domain::UnitDisc, &g, n, &rule).unwrap().to_function();
        let lhs = rule.sum(|z| pf.value(z) * g.value(z).conj()).unwrap();
        let rhs = rule.sum(|z| f.value(z) * pg.value(z).conj()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }
}

#[test]
fn argument_errors() {
    let f = FunctionHandle::constant(Domain::UnitDisc, c(1.0, 0.0));
    let coarse = QuadratureRule::new(Domain::UnitDisc, 4, 2).unwrap();
    assert!(project_series(Domain::UnitDisc, &f, 10, &coarse).is_err());
    let wrong = QuadratureRule::new(Domain::Polydisc(2), 4, 8).unwrap();
    assert!(project_series(Domain::UnitDisc, &f, 4, &wrong).is_err());
    let bad = FunctionHandle::new(Domain::UnitDisc, "pole", |z| c(1.0, 0.0) / (z[0] - z[0]));
    assert!(matches!(
        project_series(Domain::UnitDisc, &bad, 4, &default_series_rule(Domain::UnitDisc, 4).unwrap()),
        Err(Error::NonFinite { .. })
    ));
    let co = project_series(Domain::UnitDisc, &f, 4, &default_series_rule(Domain::UnitDisc, 4).unwrap()).unwrap();
    assert!(matches!(eval_projection(&co, &CPoint::one(c(1.2, 0.0))), Err(Error::OutsideDomain { .. })));
}

#[test]
fn json_round_trip() {
    let n = 6;
    let f = FunctionHandle::new(Domain::HartogsTriangle, "h", |w| w[0] / w[1] + w[1].conj());
    let co = project_series(Domain::HartogsTriangle, &f, n, &default_series_rule(Domain::HartogsTriangle, n).unwrap()).unwrap();
    let doc = co.to_json();
    assert_eq!(doc["entries"][0].as_array().unwrap().len(), 4);
    assert_eq!(SpectralCoefficients::from_json(&doc).unwrap(), co);
    assert!(co.tail_estimate >= co.entries.iter().filter(|(k, _)| k.total_degree(Domain::HartogsTriangle) == n as i32).map(|(_, v)| v.norm()).fold(0.0, f64::max));
}

#[test]
fn polydisc3_structure() {
    // P on 𝔻³ factors coordinatewise: P(z₁ z̄₂² |z₃|²) = 0, P(z₁|z₂|²|z₃|²) = z₁/4
    let n = 4;
    let rule = default_series_rule(Domain::Polydisc(3), n).unwrap();
    let f = FunctionHandle::new(Domain::Polydisc(3), "t", |z| z[0] * z[1].norm_sqr() * z[2].norm_sqr());
    let co = project_series(Domain::Polydisc(3), &f, n, &rule).unwrap();
    let k = MonomialIndex::new(&[1, 0, 0]).unwrap();
    assert!((co.get(k) - 0.25).norm() < 1e-12);
    assert!(co.max_abs_excluding(&[k]) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn polar_data_matches_evaluator(r1 in 0.01f64..0.99, t1 in -3.1f64..3.1, r2 in 0.01f64..0.99, t2 in -3.1f64..3.1, e in 0.1f64..1.9) {
        let f = FunctionHandle::new(Domain::HartogsTriangle, "f", move |w| w[1].conj() * w[1].norm().powf(-e))
            .with_polar(vec![PolarTerm { modes: vec![0, -1], radial: Arc::new(move |r| c(r[1].powf(1.0 - e), 0.0)) }]);
        let z = CPoint::two(Complex64::from_polar(r1 * r2, t1), Complex64::from_polar(r2, t2));
        let a = f.eval(&z).unwrap();
        let b = f.polar_eval(&z).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn series_reproduces_random_polynomials(seed in 0u64..1000) {
        let terms = random_polynomial(Domain::Polydisc(2), 5, seed);
        let f = FunctionHandle::polynomial(Domain::Polydisc(2), terms.clone()).unwrap();
        let co = project_series(Domain::Polydisc(2), &f, 6, &default_series_rule(Domain::Polydisc(2), 6).unwrap()).unwrap();
        for (k, v) in terms {
            prop_assert!((co.get(k) - v).norm() < 1e-10);
        }
    }
}

#[test]
fn product_projection_matches_tensor_pass() {
    let one = Complex64::new(1.0, 0.0);
    let g = |s: f64| FunctionHandle::new(Domain::UnitDisc, format!("g{s}"), move |z| (one - z[0] * s).powi(-2) * z[0].conj());
    let (a, b) = (g(0.4), g(-0.7));
    let (ga, gb) = (a.clone(), b.clone());
    let plain = FunctionHandle::new(Domain::Polydisc(2), "g⊗g", move |z| ga.value(&CPoint::one(z[0])) * gb.value(&CPoint::one(z[1])));
    let product = plain.clone().with_factors(vec![a, b]).unwrap();
    let d = Domain::Polydisc(2);
    let rule = default_series_rule(d, 12).unwrap();
    let tensor = project_series(d, &plain, 12, &rule).unwrap();
    let split = project_series(d, &product, 12, &rule).unwrap();
    assert_eq!(tensor.entries.len(), split.entries.len());
    for (idx, c) in &tensor.entries {
        assert!((split.get(*idx) - c).norm() < 1e-13, "{idx}");
    }
    assert!((split.tail_estimate - tensor.tail_estimate).abs() < 1e-13);
}
