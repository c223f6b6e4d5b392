//! Bergman projection P and absolute projection P⁺, by Laurent-monomial
//! series and by direct kernel quadrature.

mod direct;
mod series;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{CPoint, Domain, QuadratureRule, MAX_DIM};

pub use direct::{project_abs, project_quadrature, Projected};
pub use series::{default_series_rule, eval_projection, project_series, DEFAULT_TRUNCATION};

type Evaluator = Arc<dyn Fn(&CPoint) -> Complex64 + Send + Sync>;
type RadialProfile = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Known closed form of |f|, used for exact superlevel-set measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModulusProfile {
    /// |f| ≡ value.
    Constant(f64),
    /// |f(z)| = coeff·|z_coord|^exponent.
    RadialPower { coord: usize, coeff: f64, exponent: f64 },
    /// |f(z)| = |1 − s z₁|⁻²|1 − s z₂|⁻² on the bidisc.
    InverseProductSquared { s: f64 },
}

/// One term ρ_m(|z₁|, …)·e^{i m·θ} of a polar-separable function.
#[derive(Clone)]
pub struct PolarTerm {
    pub modes: Vec<i32>,
    pub radial: RadialProfile,
}

/// A complex-valued function on a domain plus the metadata the numerical
/// routines can exploit.
#[derive(Clone)]
pub struct FunctionHandle {
    domain: Domain,
    label: String,
    eval: Evaluator,
    polar: Option<Vec<PolarTerm>>,
    singularity: Option<f64>,
    profile: Option<ModulusProfile>,
    factors: Option<Arc<[FunctionHandle]>>,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("domain", &self.domain)
            .field("label", &self.label)
            .field("polar_terms", &self.polar.as_ref().map(Vec::len))
            .field("singularity", &self.singularity)
            .field("profile", &self.profile)
            .field("factors", &self.factors.as_ref().map(|f| f.len()))
            .finish()
    }
}

impl FunctionHandle {
    pub fn new<F>(domain: Domain, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&CPoint) -> Complex64 + Send + Sync + 'static,
    {
        Self { domain, label: label.into(), eval: Arc::new(f), polar: None, singularity: None, profile: None, factors: None }
    }

    pub fn constant(domain: Domain, c: Complex64) -> Self {
        Self::new(domain, format!("{c}"), move |_| c).with_profile(ModulusProfile::Constant(c.norm())).with_polar(vec![
            PolarTerm { modes: vec![0; domain.dimension()], radial: Arc::new(move |_| c) },
        ])
    }

    /// z^idx.
    pub fn monomial(domain: Domain, idx: MonomialIndex) -> Result<Self> {
        idx.check_admissible(domain)?;
        Ok(Self::new(domain, format!("z^{idx}"), move |z| idx.eval(z)))
    }

    /// Σ c·z^idx over the listed terms.
    pub fn polynomial(domain: Domain, terms: Vec<(MonomialIndex, Complex64)>) -> Result<Self> {
        for (idx, _) in &terms {
            idx.check_admissible(domain)?;
        }
        let label = format!("polynomial[{} terms]", terms.len());
        Ok(Self::new(domain, label, move |z| terms.iter().map(|(idx, c)| c * idx.eval(z)).sum()))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_polar(mut self, terms: Vec<PolarTerm>) -> Self {
        self.polar = Some(terms);
        self
    }

    /// Peak parameter s of a |1 − s z|^{-β}-type factor.
    pub fn with_singularity(mut self, s: f64) -> Self {
        self.singularity = Some(s);
        self
    }

    pub fn with_profile(mut self, profile: ModulusProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    /// Records f(z) = g₁(z₁)⋯g_n(z_n) on 𝔻ⁿ with every g_j on the disc.
    pub fn with_factors(mut self, factors: Vec<FunctionHandle>) -> Result<Self> {
        let Domain::Polydisc(n) = self.domain else {
            return Err(Error::InvalidArgument("product factors need a polydisc".into()));
        };
        if factors.len() != n || factors.iter().any(|g| g.domain != Domain::UnitDisc) {
            return Err(Error::InvalidArgument(format!("a product on {} needs {n} disc factors", self.domain)));
        }
        self.factors = Some(factors.into());
        Ok(self)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn singularity(&self) -> Option<f64> {
        self.singularity
    }

    pub fn profile(&self) -> Option<&ModulusProfile> {
        self.profile.as_ref()
    }

    pub fn factors(&self) -> Option<&[FunctionHandle]> {
        self.factors.as_deref()
    }

    pub fn polar_terms(&self) -> Option<&[PolarTerm]> {
        self.polar.as_deref()
    }

    /// Evaluates after checking that z is interior.
    pub fn eval(&self, z: &CPoint) -> Result<Complex64> {
        self.domain.require_interior(z)?;
        let v = (self.eval)(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { point: z.to_string() })
        }
    }

    /// Evaluates without any checks; quadrature nodes are interior by construction.
    #[inline]
    pub fn value(&self, z: &CPoint) -> Complex64 {
        (self.eval)(z)
    }

    /// Reconstruction Σ ρ_m(|z|)·e^{i m·θ} from the polar data.
    pub fn polar_eval(&self, z: &CPoint) -> Option<Complex64> {
        let terms = self.polar.as_ref()?;
        let radii: Vec<f64> = z.coords().iter().map(|c| c.norm()).collect();
        let angles: Vec<f64> = z.coords().iter().map(|c| c.arg()).collect();
        Some(
            terms
                .iter()
                .map(|t| {
                    let phase: f64 = t.modes.iter().zip(&angles).map(|(&m, &a)| m as f64 * a).sum();
                    (t.radial)(&radii) * Complex64::from_polar(1.0, phase)
                })
                .sum(),
        )
    }

    /// The rule adjusted for the recorded singularity parameter.
    pub fn adapted_rule(&self, rule: &QuadratureRule) -> QuadratureRule {
        rule.with_singularity(self.singularity)
    }

    /// Applies g(z, f(z)) to every value.
    pub fn map<G>(&self, label: impl Into<String>, g: G) -> Self
    where
        G: Fn(&CPoint, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        Self {
            domain: self.domain,
            label: label.into(),
            eval: Arc::new(move |z| g(z, inner(z))),
            polar: None,
            singularity: self.singularity,
            profile: None,
            factors: None,
        }
    }
}

/// Exponent tuple of a (Laurent) monomial z₁^{a}z₂^{b}⋯.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialIndex {
    exps: [i32; MAX_DIM],
    dim: u8,
}

impl Ord for MonomialIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.dim, self.exps).cmp(&(other.dim, other.exps))
    }
}

impl PartialOrd for MonomialIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MonomialIndex {
    pub fn new(exps: &[i32]) -> Result<Self> {
        if exps.is_empty() || exps.len() > MAX_DIM {
            return Err(Error::InvalidArgument(format!("monomial index needs 1..={MAX_DIM} exponents")));
        }
        let mut e = [0; MAX_DIM];
        e[..exps.len()].copy_from_slice(exps);
        Ok(Self { exps: e, dim: exps.len() as u8 })
    }

    pub fn one(a: i32) -> Self {
        Self { exps: [a, 0, 0], dim: 1 }
    }

    pub fn two(a: i32, b: i32) -> Self {
        Self { exps: [a, b, 0], dim: 2 }
    }

    pub fn exponents(&self) -> &[i32] {
        &self.exps[..self.dim as usize]
    }

    pub fn is_admissible(&self, domain: Domain) -> bool {
        if self.dim as usize != domain.dimension() {
            return false;
        }
        match domain {
            Domain::HartogsTriangle => self.exps[0] >= 0 && self.exps[0] + self.exps[1] >= -1,
            _ => self.exponents().iter().all(|&e| e >= 0),
        }
    }

    pub fn check_admissible(&self, domain: Domain) -> Result<()> {
        if self.is_admissible(domain) {
            Ok(())
        } else {
            Err(Error::Inadmissible { domain: domain.to_string(), index: self.to_string() })
        }
    }

    /// Degree used for truncation. On ℍ this is 2a + b + 1, the total degree
    /// of the image monomial u₁^a u₂^{a+b+1} after transport to 𝔻².
    pub fn total_degree(&self, domain: Domain) -> i32 {
        match domain {
            Domain::HartogsTriangle => 2 * self.exps[0] + self.exps[1] + 1,
            _ => self.exponents().iter().sum(),
        }
    }

    /// Angular modes of the monomial in the polar base coordinates of the
    /// domain's quadrature rule (u = (z₁/z₂, z₂) on ℍ).
    pub(crate) fn base_modes(&self, domain: Domain) -> [i32; MAX_DIM] {
        match domain {
            Domain::HartogsTriangle => [self.exps[0], self.exps[0] + self.exps[1], 0],
            _ => self.exps,
        }
    }

    #[inline]
    pub fn eval(&self, z: &CPoint) -> Complex64 {
        self.exponents().iter().zip(z.coords()).map(|(&e, c)| c.powi(e)).product()
    }
}

impl fmt::Display for MonomialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exponents().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MonomialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Exact ‖z^idx‖² in L²(domain).
pub fn monomial_norm_sq(domain: Domain, idx: MonomialIndex) -> Result<f64> {
    idx.check_admissible(domain)?;
    let e = idx.exponents();
    Ok(match domain {
        Domain::HartogsTriangle => PI * PI / (((e[0] + 1) * (e[0] + e[1] + 2)) as f64),
        _ => e.iter().map(|&a| PI / (a + 1) as f64).product(),
    })
}

/// All admissible indices of total degree ≤ n, in index order.
pub fn admissible_indices(domain: Domain, n: usize) -> Vec<MonomialIndex> {
    let n = n as i32;
    let mut out = Vec::new();
    match domain {
        Domain::HartogsTriangle => {
            for a in 0..=n {
                for m in -1..=(n - 1 - a) {
                    out.push(MonomialIndex::two(a, m - a));
                }
            }
        }
        _ => {
            let d = domain.dimension();
            let mut e = [0i32; MAX_DIM];
            loop {
                if e[..d].iter().sum::<i32>() <= n {
                    out.push(MonomialIndex::new(&e[..d]).expect("dimension within bounds"));
                }
                let mut j = d;
                loop {
                    if j == 0 {
                        out.sort();
                        return out;
                    }
                    j -= 1;
                    e[j] += 1;
                    if e[j] <= n {
                        break;
                    }
                    e[j] = 0;
                }
            }
        }
    }
    out.sort();
    out
}

/// Truncated monomial expansion of a projected function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoefficients {
    pub domain: Domain,
    pub truncation: usize,
    pub entries: BTreeMap<MonomialIndex, Complex64>,
    /// Bound on the size of the discarded tail: the largest coefficient
    /// modulus among the two outermost retained degree shells.
    pub tail_estimate: f64,
}

impl SpectralCoefficients {
    pub fn get(&self, idx: MonomialIndex) -> Complex64 {
        self.entries.get(&idx).copied().unwrap_or_default()
    }

    /// Largest coefficient modulus over indices other than `skip`.
    pub fn max_abs_excluding(&self, skip: &[MonomialIndex]) -> f64 {
        self.entries.iter().filter(|(k, _)| !skip.contains(k)).map(|(_, v)| v.norm()).fold(0.0, f64::max)
    }

    /// {domain, truncation, entries: [[exponents…, re, im], …], tail_estimate}
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(k, v)| {
                let mut row: Vec<serde_json::Value> = k.exponents().iter().map(|&e| json!(e)).collect();
                row.push(json!(v.re));
                row.push(json!(v.im));
                serde_json::Value::Array(row)
            })
            .collect();
        json!({
            "domain": self.domain.to_string(),
            "truncation": self.truncation,
            "entries": entries,
            "tail_estimate": self.tail_estimate,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = || Error::InvalidArgument("malformed coefficient document".into());
        let domain: Domain = v["domain"].as_str().ok_or_else(bad)?.parse()?;
        let truncation = v["truncation"].as_u64().ok_or_else(bad)? as usize;
        let tail_estimate = v["tail_estimate"].as_f64().ok_or_else(bad)?;
        let d = domain.dimension();
        let mut entries = BTreeMap::new();
        for row in v["entries"].as_array().ok_or_else(bad)? {
            let row = row.as_array().ok_or_else(bad)?;
            if row.len() != d + 2 {
                return Err(bad());
            }
            let exps: Vec<i32> = row[..d].iter().map(|e| e.as_i64().map(|x| x as i32)).collect::<Option<_>>().ok_or_else(bad)?;
            let idx = MonomialIndex::new(&exps)?;
            idx.check_admissible(domain)?;
            let re = row[d].as_f64().ok_or_else(bad)?;
            let im = row[d + 1].as_f64().ok_or_else(bad)?;
            entries.insert(idx, Complex64::new(re, im));
        }
        Ok(Self { domain, truncation, entries, tail_estimate })
    }

    /// The expansion as an evaluable function.
    pub fn to_function(&self) -> FunctionHandle {
        let c = self.clone();
        FunctionHandle::new(self.domain, "projection", move |z| series::eval_unchecked(&c, z))
    }
}

#[cfg(test)]
mod tests;
