//! Validated run configuration. Flags and config files both end up here, and
//! the hash of its JSON form is stamped into every output file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bergman_core::experiments::{CounterexampleFamily, FrKind};
use bergman_core::geometry::Domain;
use bergman_core::norms::Estimator;
use bergman_core::numeric::logspace;
use clap::CommandFactory;
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cli::{Cli, Cmd, EstimatorKind, Format, FrKindArg, KernelCmd, SweepCmd};
use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub format: Format,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    KernelEval { domain: Domain, z: Vec<Complex64>, w: Vec<Complex64>, absolute: bool },
    Project { function: FunctionSpec, domain: Domain, truncation: usize, grading: usize, points: usize, seed: u64 },
    Norm { function: FunctionSpec, domain: Domain, p: f64, weight: NormWeight, orlicz_k: Option<u32>, radial_order: usize, angular_order: usize },
    Distribution { function: FunctionSpec, domain: Domain, projected: bool, lambda: Vec<f64>, estimator: Estimator },
    BbConstant { weight: BbWeight, p: f64, radial_order: usize, angular_order: usize },
    ForelliRudin { eps: f64, delta: f64, w: Vec<Complex64>, kind: FrKind },
    E1 { x: Vec<f64> },
    SweepWeak11 { s: Vec<f64>, estimator: Estimator },
    SweepWeak43 { lambda: Vec<f64>, fixed_p: Option<f64> },
    SweepWeak44 { lambda: Vec<f64> },
    SweepWeighted { weight: WeightedWeight, lambda: Vec<f64>, coupled_lambda: Vec<f64> },
    SweepOrliczPolydisc { k: Vec<u32>, s: Vec<f64> },
    TransportCheck { truncation: usize, points: usize, seed: u64 },
}

impl Command {
    /// Short name used for default output files.
    pub fn slug(&self) -> &'static str {
        match self {
            Command::KernelEval { .. } => "kernel-eval",
            Command::Project { .. } => "project",
            Command::Norm { .. } => "norm",
            Command::Distribution { .. } => "distribution",
            Command::BbConstant { .. } => "bb-constant",
            Command::ForelliRudin { .. } => "forelli-rudin",
            Command::E1 { .. } => "e1",
            Command::SweepWeak11 { .. } => "sweep-weak11",
            Command::SweepWeak43 { .. } => "sweep-weak43",
            Command::SweepWeak44 { .. } => "sweep-weak44",
            Command::SweepWeighted { .. } => "sweep-weighted",
            Command::SweepOrliczPolydisc { .. } => "sweep-orlicz-polydisc",
            Command::TransportCheck { .. } => "transport-check",
        }
    }
}

/// Test functions addressable from the command line.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionSpec {
    One,
    Monomial(Vec<i32>),
    Fs(f64),
    Fp(f64),
    FpLog(f64),
    DiscPeak(f64),
}

impl FunctionSpec {
    pub fn family(&self) -> Option<CounterexampleFamily> {
        match *self {
            FunctionSpec::Fs(s) => CounterexampleFamily::fs(s).ok(),
            FunctionSpec::Fp(p) => CounterexampleFamily::fp(p).ok(),
            FunctionSpec::FpLog(p) => CounterexampleFamily::fp_log(p).ok(),
            _ => None,
        }
    }

    fn fixed_domain(&self) -> Option<Domain> {
        match self {
            FunctionSpec::One | FunctionSpec::Monomial(_) => None,
            FunctionSpec::DiscPeak(_) => Some(Domain::UnitDisc),
            _ => self.family().map(|f| f.domain()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormWeight {
    None,
    PowerZ2(f64),
    LogZ2(f64),
    Modulus(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BbWeight {
    Unit,
    Modulus(f64),
    Iterated { j: u32, alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightedWeight {
    Power(f64),
    Log(f64),
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form. The output path is deliberately
    /// not part of it.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Config(msg.into()))
}

/// A real number, allowing fractions such as `-1/2`.
pub fn parse_real(s: &str) -> Result<f64, Failure> {
    let t = s.trim();
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (a.trim().parse::<f64>(), b.trim().parse::<f64>());
            match (a, b) {
                (Ok(a), Ok(b)) if b != 0.0 => a / b,
                _ => return bad(format!("'{s}' is not a number")),
            }
        }
        None => t.parse::<f64>().map_err(|_| Failure::Config(format!("'{s}' is not a number")))?,
    };
    if !v.is_finite() {
        return bad(format!("'{s}' is not finite"));
    }
    Ok(v)
}

/// `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(parse_real(&t)?, 0.0));
    };
    // the imaginary part starts at the last sign that is not an exponent sign
    let split = body
        .char_indices()
        .filter(|&(i, c)| (c == '+' || c == '-') && i > 0 && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
        .map(|(i, _)| i)
        .last();
    let (re, im) = match split {
        Some(i) => (parse_real(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => parse_real(x)?,
    };
    Ok(Complex64::new(re, im))
}

fn parse_point(s: &str, name: &str) -> Result<Vec<Complex64>, Failure> {
    let coords: Vec<Complex64> = s.split(',').map(parse_complex).collect::<Result<_, _>>()?;
    if coords.is_empty() {
        return bad(format!("--{name} needs at least one coordinate"));
    }
    Ok(coords)
}

/// Comma list, `logspace:lo:hi:per_decade` or `dyadic:m0:m1` (the points
/// 1 − 2^{−m}); the result must be nonempty and strictly increasing.
pub fn parse_grid(s: &str, name: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let int = |x: &str| x.trim().parse::<i32>().map_err(|_| Failure::Config(format!("--{name}: '{x}' is not an integer")));
    let grid = match parts.as_slice() {
        ["logspace", lo, hi, n] => {
            let (lo, hi, n) = (int(lo)?, int(hi)?, int(n)?);
            if hi <= lo || n < 1 {
                return bad(format!("--{name}: logspace needs lo < hi and at least one point per decade"));
            }
            logspace(lo, hi, n as usize)
        }
        ["dyadic", m0, m1] => {
            let (m0, m1) = (int(m0)?, int(m1)?);
            if m0 < 1 || m1 < m0 || m1 > 52 {
                return bad(format!("--{name}: dyadic needs 1 ≤ m0 ≤ m1 ≤ 52"));
            }
            (m0..=m1).map(|m| 1.0 - 0.5f64.powi(m)).collect()
        }
        [_] => s.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?,
        _ => return bad(format!("--{name}: unrecognized grid '{s}'")),
    };
    if grid.is_empty() {
        return bad(format!("--{name} grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return bad(format!("--{name} grid must be strictly increasing"));
    }
    Ok(grid)
}

fn in_range(grid: &[f64], name: &str, lo: f64, hi: f64) -> Result<(), Failure> {
    match grid.iter().find(|&&x| !(x > lo && x < hi)) {
        Some(x) => bad(format!("--{name}: {x} lies outside ({lo}, {hi})")),
        None => Ok(()),
    }
}

fn decades(grid: &[f64], name: &str, n: f64) -> Result<(), Failure> {
    in_range(grid, name, 0.0, f64::INFINITY)?;
    if grid[grid.len() - 1] / grid[0] < 10f64.powf(n) * (1.0 - 1e-12) {
        return bad(format!("--{name} must span at least {n} decades"));
    }
    Ok(())
}

fn parse_domain(s: &str) -> Result<Domain, Failure> {
    s.parse::<Domain>().map_err(|e| Failure::Config(e.to_string()))
}

fn tagged<'a>(s: &'a str, tag: &str) -> Option<&'a str> {
    s.strip_prefix(tag).and_then(|r| r.strip_prefix(':'))
}

pub fn parse_function(s: &str) -> Result<FunctionSpec, Failure> {
    let s = s.trim();
    let spec = if s == "one" || s == "1" {
        FunctionSpec::One
    } else if let Some(r) = tagged(s, "monomial") {
        let e = r.split(',').map(|x| x.trim().parse::<i32>()).collect::<Result<Vec<_>, _>>();
        FunctionSpec::Monomial(e.map_err(|_| Failure::Config(format!("bad monomial exponents '{r}'")))?)
    } else if let Some(r) = tagged(s, "fs") {
        FunctionSpec::Fs(parse_real(r)?)
    } else if let Some(r) = tagged(s, "fp-log") {
        FunctionSpec::FpLog(parse_real(r)?)
    } else if let Some(r) = tagged(s, "fp") {
        FunctionSpec::Fp(parse_real(r)?)
    } else if let Some(r) = tagged(s, "disc-peak") {
        FunctionSpec::DiscPeak(parse_real(r)?)
    } else {
        return bad(format!("unknown function '{s}' (one, monomial:a,b, fs:s, fp:p, fp-log:p, disc-peak:s)"));
    };
    match spec {
        FunctionSpec::Fs(_) | FunctionSpec::Fp(_) | FunctionSpec::FpLog(_) if spec.family().is_none() => {
            bad(format!("'{s}': parameter outside the family's range"))
        }
        FunctionSpec::DiscPeak(x) if !(0.0..1.0).contains(&x) => bad(format!("'{s}': need 0 ≤ s < 1")),
        _ => Ok(spec),
    }
}

fn resolve_domain(f: &FunctionSpec, domain: Option<&str>) -> Result<Domain, Failure> {
    let given = domain.map(parse_domain).transpose()?;
    let d = match (f.fixed_domain(), given) {
        (Some(a), Some(b)) if a != b => return bad(format!("this function lives on {a}, not {b}")),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => Domain::UnitDisc,
    };
    if let FunctionSpec::Monomial(e) = f {
        if e.len() != d.dimension() {
            return bad(format!("monomial has {} exponents but {d} has dimension {}", e.len(), d.dimension()));
        }
    }
    Ok(d)
}

fn estimator(kind: EstimatorKind, seed: u64, count: usize, radial_order: usize, angular_order: usize) -> Result<Estimator, Failure> {
    Ok(match kind {
        EstimatorKind::Analytic => Estimator::Analytic,
        EstimatorKind::MonteCarlo if count == 0 => return bad("--count must be positive"),
        EstimatorKind::MonteCarlo => Estimator::MonteCarlo { seed, count },
        EstimatorKind::Quadrature if radial_order == 0 || angular_order == 0 => return bad("quadrature orders must be positive"),
        EstimatorKind::Quadrature => Estimator::Quadrature { radial_order, angular_order },
    })
}

fn orders(radial: usize, angular: usize) -> Result<(), Failure> {
    if radial == 0 || angular == 0 {
        return bad("quadrature orders must be positive");
    }
    Ok(())
}

fn one_value<'a>(s: &'a str, tag: &str) -> Option<&'a str> {
    tagged(s.trim(), tag)
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let format = cli.format.unwrap_or(Format::Csv);
        let command = match &cli.command {
            Cmd::Kernel(KernelCmd::Eval(a)) => {
                let domain = parse_domain(&a.domain)?;
                let (z, w) = (parse_point(&a.z, "z")?, parse_point(&a.w, "w")?);
                for (name, p) in [("z", &z), ("w", &w)] {
                    if p.len() != domain.dimension() {
                        return bad(format!("--{name} has {} coordinates but {domain} has dimension {}", p.len(), domain.dimension()));
                    }
                }
                Command::KernelEval { domain, z, w, absolute: a.absolute }
            }
            Cmd::Project(a) => {
                let function = parse_function(&a.function)?;
                let domain = resolve_domain(&function, a.domain.as_deref())?;
                let truncation = a.truncation.unwrap_or(bergman_core::projector::DEFAULT_TRUNCATION);
                if truncation == 0 || a.points == 0 {
                    return bad("--truncation and --points must be positive");
                }
                Command::Project { function, domain, truncation, grading: a.grading, points: a.points, seed: a.seed }
            }
            Cmd::Norm(a) => {
                let function = parse_function(&a.function)?;
                let domain = resolve_domain(&function, a.domain.as_deref())?;
                let p = parse_real(&a.p)?;
                if !(p > 0.0) {
                    return bad("--p must be positive");
                }
                orders(a.radial_order, a.angular_order)?;
                let w = a.weight.trim();
                let weight = if w == "none" {
                    NormWeight::None
                } else if let Some(e) = one_value(w, "power-z2") {
                    NormWeight::PowerZ2(parse_real(e)?)
                } else if let Some(e) = one_value(w, "log-z2") {
                    NormWeight::LogZ2(parse_real(e)?)
                } else if let Some(b) = one_value(w, "modulus") {
                    NormWeight::Modulus(parse_real(b)?)
                } else {
                    return bad(format!("unknown weight '{w}' (none, power-z2:ε, log-z2:ε, modulus:β)"));
                };
                if matches!(weight, NormWeight::PowerZ2(_) | NormWeight::LogZ2(_)) && domain.dimension() < 2 {
                    return bad("z₂ weights need a two-dimensional domain");
                }
                if a.orlicz_k.is_some() && weight != NormWeight::None {
                    return bad("weighted Orlicz norms are not supported");
                }
                Command::Norm {
                    function,
                    domain,
                    p,
                    weight,
                    orlicz_k: a.orlicz_k,
                    radial_order: a.radial_order,
                    angular_order: a.angular_order,
                }
            }
            Cmd::Distribution(a) => {
                let function = parse_function(&a.function)?;
                let domain = resolve_domain(&function, a.domain.as_deref())?;
                if a.projected && function.family().is_none() && !matches!(function, FunctionSpec::DiscPeak(_)) {
                    return bad("--projected needs fs, fp, fp-log or disc-peak");
                }
                let lambda = parse_grid(&a.lambda, "lambda")?;
                in_range(&lambda, "lambda", 0.0, f64::INFINITY)?;
                let estimator = estimator(a.estimator, a.seed, a.count, a.radial_order, a.angular_order)?;
                Command::Distribution { function, domain, projected: a.projected, lambda, estimator }
            }
            Cmd::BbConstant(a) => {
                let p = parse_real(&a.p)?;
                if !(p > 1.0) {
                    return bad("--p must exceed 1");
                }
                orders(a.radial_order, a.angular_order)?;
                let w = a.weight.trim();
                let weight = if w == "unit" {
                    BbWeight::Unit
                } else if let Some(b) = one_value(w, "modulus") {
                    BbWeight::Modulus(parse_real(b)?)
                } else if let Some(r) = one_value(w, "iterated") {
                    let Some((j, alpha)) = r.split_once(',') else {
                        return bad("iterated weights are written iterated:j,α");
                    };
                    let j = j.trim().parse::<u32>().map_err(|_| Failure::Config(format!("bad iteration depth '{j}'")))?;
                    BbWeight::Iterated { j, alpha: parse_real(alpha)? }
                } else {
                    return bad(format!("unknown weight '{w}' (unit, modulus:β, iterated:j,α)"));
                };
                if matches!(weight, BbWeight::Iterated { .. }) && (p - 4.0 / 3.0).abs() > 1e-12 {
                    return bad("iterated-log weights are tested at p = 4/3");
                }
                Command::BbConstant { weight, p, radial_order: a.radial_order, angular_order: a.angular_order }
            }
            Cmd::ForelliRudin(a) => {
                let (eps, delta) = (parse_real(&a.eps)?, parse_real(&a.delta)?);
                if eps >= 1.0 {
                    return bad("--eps must be below 1");
                }
                let w: Vec<Complex64> = a.w.split(',').map(parse_complex).collect::<Result<_, _>>()?;
                if let Some(x) = w.iter().find(|x| x.norm() >= 1.0) {
                    return bad(format!("--w: {x} is not inside the unit disc"));
                }
                let kind = match a.kind {
                    FrKindArg::Area => FrKind::AreaIntegral,
                    FrKindArg::Circle => FrKind::CircleIntegral,
                };
                Command::ForelliRudin { eps, delta, w, kind }
            }
            Cmd::E1(a) => {
                let x = parse_grid(&a.x, "x")?;
                in_range(&x, "x", 0.0, f64::INFINITY)?;
                Command::E1 { x }
            }
            Cmd::Sweep(SweepCmd::Weak11(a)) => {
                let s = parse_grid(&a.s, "s")?;
                in_range(&s, "s", 0.0, 1.0)?;
                Command::SweepWeak11 { s, estimator: estimator(a.estimator, a.seed, a.count, a.radial_order, a.angular_order)? }
            }
            Cmd::Sweep(SweepCmd::Weak43(a)) => {
                let lambda = parse_grid(&a.lambda, "lambda")?;
                decades(&lambda, "lambda", 4.0)?;
                let fixed_p = match a.mode.trim() {
                    "coupled" => None,
                    m => match one_value(m, "fixed") {
                        Some(p) => {
                            let p = parse_real(p)?;
                            if !(p > 4.0 / 3.0) {
                                return bad("fixed p must exceed 4/3");
                            }
                            Some(p)
                        }
                        None => return bad(format!("unknown mode '{m}' (coupled, fixed:p)")),
                    },
                };
                Command::SweepWeak43 { lambda, fixed_p }
            }
            Cmd::Sweep(SweepCmd::Weak44(a)) => {
                let lambda = parse_grid(&a.lambda, "lambda")?;
                decades(&lambda, "lambda", 3.0)?;
                Command::SweepWeak44 { lambda }
            }
            Cmd::Sweep(SweepCmd::Weighted(a)) => {
                let w = a.weight.trim();
                let weight = if let Some(e) = one_value(w, "power") {
                    let e = parse_real(e)?;
                    if !(e > 0.0) {
                        return bad("power weight needs ε > 0");
                    }
                    WeightedWeight::Power(e)
                } else if let Some(e) = one_value(w, "log") {
                    let e = parse_real(e)?;
                    if e < 1.0 / 3.0 - 1e-12 {
                        return bad("log weight needs ε ≥ 1/3");
                    }
                    WeightedWeight::Log(e)
                } else {
                    return bad(format!("unknown weight '{w}' (power:ε, log:ε)"));
                };
                let lambda = parse_grid(&a.lambda, "lambda")?;
                in_range(&lambda, "lambda", 0.0, f64::INFINITY)?;
                let coupled_lambda = parse_grid(&a.coupled_lambda, "coupled-lambda")?;
                decades(&coupled_lambda, "coupled-lambda", 3.0)?;
                Command::SweepWeighted { weight, lambda, coupled_lambda }
            }
            Cmd::Sweep(SweepCmd::OrliczPolydisc(a)) => {
                let k = a.k.split(',').map(|x| x.trim().parse::<u32>()).collect::<Result<Vec<_>, _>>();
                let k = k.map_err(|_| Failure::Config(format!("--k: bad list '{}'", a.k)))?;
                if k.is_empty() || k.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("--k must be nonempty and strictly increasing");
                }
                let s = parse_grid(&a.s, "s")?;
                in_range(&s, "s", 0.0, 1.0)?;
                Command::SweepOrliczPolydisc { k, s }
            }
            Cmd::TransportCheck(a) => {
                if a.truncation == 0 || a.points == 0 {
                    return bad("--truncation and --points must be positive");
                }
                Command::TransportCheck { truncation: a.truncation, points: a.points, seed: a.seed }
            }
        };
        Ok(RunConfig { format, command })
    }

    pub fn output_path(&self, out: Option<&Path>) -> PathBuf {
        out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(format!("{}.{}", self.command.slug(), self.format.extension())))
    }
}

/// `key = value` lines; `#` starts a comment. Keys may use `_` for `-`.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return bad(format!("{}:{}: expected key = value", path.display(), n + 1));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || out.insert(key.clone(), v.trim().to_string()).is_some() {
            return bad(format!("{}:{}: empty or repeated key '{key}'", path.display(), n + 1));
        }
    }
    Ok(out)
}

/// Rebuilds the argument vector with config-file entries placed after the
/// subcommand words, skipping keys that are also given as flags.
pub fn merge_args(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut config = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--config" {
            config = args.get(i + 1).cloned();
        } else if let Some(v) = args[i].strip_prefix("--config=") {
            config = Some(v.to_string());
        }
        i += 1;
    }
    let Some(path) = config else { return Ok(args) };
    let mut entries = read_config_file(Path::new(&path))?;

    // subcommand words lead, possibly after global options and their values
    const GLOBAL: [&str; 3] = ["--config", "--out", "--format"];
    let mut user_words: Vec<String> = vec![];
    let mut rest: Vec<String> = vec![];
    let mut it = args[1..].iter();
    while let Some(a) = it.next() {
        if GLOBAL.contains(&a.as_str()) {
            rest.push(a.clone());
            rest.extend(it.next().cloned());
        } else if a.starts_with('-') {
            rest.push(a.clone());
            rest.extend(it.by_ref().cloned());
        } else {
            user_words.push(a.clone());
        }
    }
    let words: Vec<String> = match entries.remove("command") {
        Some(c) if user_words.is_empty() => c.split_whitespace().map(str::to_string).collect(),
        _ => user_words.clone(),
    };
    if words.is_empty() {
        return bad("no subcommand given on the command line or in the config file");
    }

    // find the clap definition of the leaf subcommand to tell flags from options
    let mut cmd = Cli::command();
    cmd.build();
    let mut leaf = &cmd;
    for w in &words {
        match leaf.find_subcommand(w) {
            Some(c) => leaf = c,
            None => return bad(format!("unknown subcommand '{w}'")),
        }
    }
    let given = |key: &str| args.iter().any(|a| a == &format!("--{key}") || a.starts_with(&format!("--{key}=")));

    let mut out = vec![args[0].clone()];
    out.extend(words.iter().cloned());
    for (key, value) in &entries {
        if given(key) {
            continue;
        }
        let arg = leaf.get_arguments().chain(cmd.get_arguments()).find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            return bad(format!("{path}: '{key}' is not an option of '{}'", words.join(" ")));
        };
        if arg.get_action().takes_values() {
            out.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => out.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                v => return bad(format!("{path}: '{key}' expects true or false, found '{v}'")),
            }
        }
    }
    out.extend(rest);
    Ok(out)
}
