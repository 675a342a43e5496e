//! Command-line experiment runner.
//!
//! `geovi run` builds an example, fits it with one method and writes CSV
//! tables plus a JSON manifest; `list-examples`, `check` and `compare`
//! cover discovery, self-tests and side-by-side KL tables.

mod check;
mod config;
mod output;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use check::{run_checks, CheckResult};
pub use config::{ExperimentConfig, HmcOverrides, RunMethod, VariationalOverrides, DEFAULT_SAMPLES};
pub use output::hex_digest;
pub use run::{compare_runs, histogram, run_experiment, KlRow, RunReport};

use crate::cfmodel::{make_example, EXAMPLE_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "geovi", version, about = "Geometric variational inference experiments")]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one example with one method and write its artifacts.
    Run(RunArgs),
    /// List the available examples.
    ListExamples,
    /// Derivative, adjoint and metric self-tests.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Join the KL tables of two run directories.
    Compare { first: PathBuf, second: PathBuf },
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub example: Option<String>,
    /// geovi, mgvi, direct or hmc.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid length per axis (field examples) or latent dimension (linear).
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of final posterior samples.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl RunArgs {
    /// Merges the config file with the flags and validates the result.
    pub fn resolve(&self, threads: Option<usize>) -> Result<ExperimentConfig> {
        let mut table = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => toml::Table::new(),
        };
        let mut set = |k: &str, v: toml::Value| {
            table.insert(k.into(), v);
        };
        if let Some(v) = &self.example {
            set("example", toml::Value::String(v.clone()));
        }
        if let Some(v) = &self.method {
            set("method", toml::Value::String(v.clone()));
        }
        if let Some(v) = self.seed {
            set("seed", toml::Value::Integer(to_int(v)?));
        }
        if let Some(v) = self.size {
            set("size", toml::Value::Integer(to_int(v as u64)?));
        }
        if let Some(v) = &self.out {
            set("out", toml::Value::String(v.display().to_string()));
        }
        if let Some(v) = self.samples {
            set("samples", toml::Value::Integer(to_int(v as u64)?));
        }
        if let Some(v) = threads {
            set("threads", toml::Value::Integer(to_int(v as u64)?));
        }
        if !table.contains_key("example") {
            return Err(Error::Config("no example given (use --example or a config file)".into()));
        }
        ExperimentConfig::from_table(table)
    }
}

fn to_int(v: u64) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Config(format!("{v} is too large")))
}

/// Exit status for an error: 2 for usage problems, 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownExample(_) | Error::UnknownMethod(_) | Error::Config(_) => 2,
        _ => 1,
    }
}

/// Machine-readable error record.
pub fn error_record(e: &Error) -> serde_json::Value {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() })
}

/// Executes a parsed command, printing results to stdout.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run(args) => {
            let cfg = args.resolve(cli.threads)?;
            let report = run_experiment(&cfg)?;
            println!("wrote {}", report.out_dir.display());
            for r in &report.kl_table {
                println!("KL {:<14} P;Q {:.5}  Q;P {:.5}", r.approximation, r.kl_pq, r.kl_qp);
            }
            if let Some(e) = report.elbo {
                println!("ELBO {:.5} +- {:.5}", e.value, e.std_error);
            }
            Ok(0)
        }
        Command::ListExamples => {
            for name in EXAMPLE_NAMES {
                let b = make_example(name, None, 0)?;
                let s = b.summary();
                println!(
                    "{:<20} latent dim {:>5}  data {:>5}  oracle {}",
                    s.name,
                    s.latent_dim,
                    s.data_dim,
                    if s.oracle { "grid" } else { "-" }
                );
            }
            Ok(0)
        }
        Command::Check { seed } => {
            let results = run_checks(*seed)?;
            let mut failed = 0;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            println!("{} checks, {failed} failed", results.len());
            Ok(i32::from(failed > 0))
        }
        Command::Compare { first, second } => {
            println!("approximation,{},{},difference", first.display(), second.display());
            for (label, a, b) in compare_runs(first, second)? {
                let fmt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
                let diff = a.zip(b).map(|(a, b)| b - a);
                println!("{label},{},{},{}", fmt(a), fmt(b), fmt(diff));
            }
            Ok(0)
        }
    }
}
