//! Command-line grammar. Every flag is also accepted as `key = value` in a
//! config file; explicit flags win over file entries.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bergman", version, about = "Bergman projection experiments on the disc, polydisc and Hartogs triangle")]
pub struct Cli {
    /// Plain-text `key = value` file; `command = sweep weak11` selects the
    /// subcommand when none is given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Result file; the manifest goes next to it as `<out>.manifest.json`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Bergman kernels.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Series projection of a test function, checked against closed forms.
    Project(ProjectArgs),
    /// L^p, weighted L^p or L^p(log⁺L)^k norm of a test function.
    Norm(NormArgs),
    /// Distribution function μ{|f| > λ} over a λ grid.
    Distribution(DistributionArgs),
    /// Bekollé–Bonami constant of a weight on the disc.
    BbConstant(BbArgs),
    /// Forelli–Rudin integrals and their boundary regime.
    ForelliRudin(FrArgs),
    /// Exponential integral E₁ with its sandwich bounds.
    E1(E1Args),
    /// Weak-type sweeps.
    #[command(subcommand)]
    Sweep(SweepCmd),
    /// Isometry and conjugation between ℍ and the bidisc.
    TransportCheck(TransportArgs),
}

#[derive(Subcommand, Debug)]
pub enum KernelCmd {
    /// K(z, w), or |K(z, w)| with --absolute.
    Eval(KernelArgs),
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long, default_value = "disc")]
    pub domain: String,
    /// Coordinates separated by commas, each `a`, `bi` or `a+bi`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    #[arg(long, allow_hyphen_values = true)]
    pub w: String,
    #[arg(long)]
    pub absolute: bool,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// one | monomial:a[,b[,c]] | fs:<s> | fp:<p> | fp-log:<p> | disc-peak:<s>
    #[arg(long)]
    pub function: String,
    /// Needed for `one` and `monomial`; families carry their own domain.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Extra radial grading levels toward z₂ = 0 on ℍ.
    #[arg(long, default_value_t = 40)]
    pub grading: usize,
    /// Number of seeded interior evaluation points.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub domain: Option<String>,
    /// Real number or fraction.
    #[arg(long)]
    pub p: String,
    /// none | power-z2:ε | log-z2:ε | modulus:β
    #[arg(long, default_value = "none")]
    pub weight: String,
    /// L^p(log⁺L)^k instead of L^p.
    #[arg(long)]
    pub orlicz_k: Option<u32>,
    #[arg(long, default_value_t = 24)]
    pub radial_order: usize,
    #[arg(long, default_value_t = 48)]
    pub angular_order: usize,
}

#[derive(Args, Debug)]
pub struct DistributionArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub domain: Option<String>,
    /// Use the closed-form projection of a family instead of the family.
    #[arg(long)]
    pub projected: bool,
    /// Comma list, `logspace:lo:hi:per_decade` or `dyadic:m0:m1`.
    #[arg(long)]
    pub lambda: String,
    #[arg(long, value_enum, default_value = "monte-carlo")]
    pub estimator: EstimatorKind,
    #[arg(long, default_value_t = bergman_core::norms::DEFAULT_MC_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = bergman_core::norms::DEFAULT_MC_COUNT)]
    pub count: usize,
    #[arg(long, default_value_t = 24)]
    pub radial_order: usize,
    #[arg(long, default_value_t = 48)]
    pub angular_order: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Analytic,
    MonteCarlo,
    Quadrature,
}

#[derive(Args, Debug)]
pub struct BbArgs {
    /// unit | modulus:β | iterated:j,α
    #[arg(long)]
    pub weight: String,
    #[arg(long, default_value = "4/3")]
    pub p: String,
    #[arg(long, default_value_t = 24)]
    pub radial_order: usize,
    #[arg(long, default_value_t = 48)]
    pub angular_order: usize,
}

#[derive(Args, Debug)]
pub struct FrArgs {
    /// Real number or fraction such as -1/2.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: String,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: String,
    /// Evaluation points in the disc, comma separated.
    #[arg(long, default_value = "0,0.9,0.95,0.99,0.995,0.999", allow_hyphen_values = true)]
    pub w: String,
    #[arg(long, value_enum, default_value = "area")]
    pub kind: FrKindArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrKindArg {
    Area,
    Circle,
}

#[derive(Args, Debug)]
pub struct E1Args {
    /// Grid of positive arguments.
    #[arg(long)]
    pub x: String,
}

#[derive(Subcommand, Debug)]
pub enum SweepCmd {
    /// λ·μ{|P f_s| > λ}/‖f_s‖₁ along λ = (1 − s)⁻²/16 on the bidisc.
    Weak11(Weak11Args),
    /// λ^{4/3}μ{|P f_p| > λ}/‖f_p‖^{4/3} on ℍ.
    Weak43(Weak43Args),
    /// λ⁴μ{|P f| > λ}/‖f‖⁴ over a suite in L⁴(ℍ).
    Weak44(Weak44Args),
    /// Weighted L^{4/3} weak-type ratios on ℍ.
    Weighted(WeightedArgs),
    /// Weak L log⁺L along f_s and the disc L(log⁺L)^{k+1} → L(log⁺L)^k ratios.
    OrliczPolydisc(OrliczArgs),
}

#[derive(Args, Debug)]
pub struct Weak11Args {
    #[arg(long, default_value = "dyadic:3:10")]
    pub s: String,
    #[arg(long, value_enum, default_value = "analytic")]
    pub estimator: EstimatorKind,
    #[arg(long, default_value_t = bergman_core::norms::DEFAULT_MC_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = bergman_core::norms::DEFAULT_MC_COUNT)]
    pub count: usize,
    #[arg(long, default_value_t = 24)]
    pub radial_order: usize,
    #[arg(long, default_value_t = 48)]
    pub angular_order: usize,
}

#[derive(Args, Debug)]
pub struct Weak43Args {
    #[arg(long, default_value = "logspace:2:6:4")]
    pub lambda: String,
    /// `coupled` (p = 4/3 + λ^{−9/10}) or `fixed:<p>`.
    #[arg(long, default_value = "coupled")]
    pub mode: String,
}

#[derive(Args, Debug)]
pub struct Weak44Args {
    #[arg(long, default_value = "logspace:1:4:3")]
    pub lambda: String,
}

#[derive(Args, Debug)]
pub struct WeightedArgs {
    /// power:ε for |z₂|^{−ε} or log:ε for (1 − log|z₂|)^ε.
    #[arg(long)]
    pub weight: String,
    #[arg(long, default_value = "logspace:1:4:2")]
    pub lambda: String,
    /// λ grid of the coupled log family, used at the endpoint log:1/3.
    #[arg(long, default_value = "logspace:4:7:3")]
    pub coupled_lambda: String,
}

#[derive(Args, Debug)]
pub struct OrliczArgs {
    #[arg(long, default_value = "0,1")]
    pub k: String,
    #[arg(long, default_value = "dyadic:3:10")]
    pub s: String,
}

#[derive(Args, Debug)]
pub struct TransportArgs {
    #[arg(long, default_value_t = 8)]
    pub truncation: usize,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}
