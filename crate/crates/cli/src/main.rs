use std::env;
use std::fmt;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

mod cli;
mod config;
mod output;
mod run;

use cli::Cli;
use config::{merge_args, RunConfig};
use output::{manifest_path, write_atomic};

/// Why a run stopped. Config errors exit with 2, numerical ones with 3.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 3,
        }
    }
}

impl From<bergman_core::Error> for Failure {
    fn from(e: bergman_core::Error) -> Self {
        use bergman_core::Error as E;
        match e {
            E::NonFinite { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<Option<usize>, Failure> {
    let Ok(v) = env::var("BERGMAN_THREADS") else { return Ok(None) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure::Config(format!("BERGMAN_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("cannot size the thread pool: {e}")))?;
    Ok(Some(n))
}

fn main() -> ExitCode {
    let args = match merge_args(env::args().collect()) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: Failure) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let t0 = Instant::now();
    let threads = configure_threads()?;
    let config = RunConfig::from_cli(cli)?;
    let hash = config.hash();
    let path = config.output_path(cli.out.as_deref());
    let validated = t0.elapsed();

    let outcome = run::run(&config)?;
    let computed = t0.elapsed();

    let echo = config.to_json();
    let bytes = outcome.render(config.format, &hash, &echo)?;
    write_atomic(&path, &bytes)?;
    let manifest = json!({
        "config_hash": hash,
        "config": echo,
        "result_file": path.display().to_string(),
        "bergman_core_version": bergman_core::VERSION,
        "bergman_cli_version": env!("CARGO_PKG_VERSION"),
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
        "timings_s": {
            "validate": validated.as_secs_f64(),
            "compute": (computed - validated).as_secs_f64(),
            "total": t0.elapsed().as_secs_f64(),
        },
        "summary": outcome.summary,
        "warnings": outcome.warnings,
    });
    let mut m = serde_json::to_vec_pretty(&manifest).expect("manifest renders");
    m.push(b'\n');
    write_atomic(&manifest_path(&path), &m)?;

    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for (k, v) in &outcome.summary {
        match v {
            serde_json::Value::String(s) => println!("{k} = {s}"),
            v => println!("{k} = {v}"),
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}
