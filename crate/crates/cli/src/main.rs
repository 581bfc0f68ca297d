//! `quantctl`: runs named quantization and covering-growth experiments from
//! TOML configs and writes CSV tables, a bound ledger and a manifest.

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use quantgrowth::bounds::BoundLedger;

#[derive(Parser)]
#[command(name = "quantctl", version, about = "Run quantization and covering-growth experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its outputs.
    Run {
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the config and exit without running or writing anything.
        #[arg(long)]
        validate_only: bool,
    },
    /// List the shipped experiments.
    List,
    /// Describe an experiment and print its config schema and an example.
    Describe { name: String },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

/// Distinguishes bad input (exit 2) from failures while running (exit 1).
#[derive(Debug)]
struct InvalidConfig(anyhow::Error);

impl std::fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for InvalidConfig {}

#[derive(Serialize)]
struct FileRecord {
    name: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest {
    experiment: String,
    seed: u64,
    config_path: String,
    config_sha256: String,
    library_version: &'static str,
    quantctl_version: &'static str,
    threads: usize,
    wall_time_secs: f64,
    ledger_entries: usize,
    ledger_failures: usize,
    files: Vec<FileRecord>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn ledger_csv(ledger: &BoundLedger) -> String {
    let mut out = String::from("name,lhs,rhs,margin,passed\n");
    for e in &ledger.entries {
        out.push_str(&format!("{},{},{},{},{}\n", e.name, e.lhs, e.rhs, e.margin, e.passed()));
    }
    out
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("QUANTCTL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| InvalidConfig(anyhow::anyhow!("QUANTCTL_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn load_valid(path: &Path, seed: Option<u64>) -> Result<(config::ExperimentConfig, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = config::parse(&text).map_err(|e| InvalidConfig(e.context(format!("invalid config {}", path.display()))))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    config::validate(&cfg).map_err(|e| InvalidConfig(e.context(format!("invalid config {}", path.display()))))?;
    Ok((cfg, text))
}

fn run(path: &Path, seed: Option<u64>, out: Option<PathBuf>, validate_only: bool) -> Result<()> {
    let (cfg, text) = load_valid(path, seed)?;
    if validate_only {
        println!("{}: valid {} config", path.display(), cfg.experiment);
        return Ok(());
    }
    configure_threads()?;
    let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment));
    let start = Instant::now();
    let outputs = experiments::run(&cfg).with_context(|| format!("running {}", cfg.experiment))?;
    let wall = start.elapsed().as_secs_f64();

    let mut files = outputs.files;
    files.push(("ledger.csv".into(), ledger_csv(&outputs.ledger)));
    files.push(("ledger.json".into(), outputs.ledger.to_json() + "\n"));
    files.push(("summary.json".into(), serde_json::to_string_pretty(&outputs.summary)? + "\n"));

    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut records = Vec::new();
    for (name, body) in &files {
        let target = dir.join(name);
        fs::write(&target, body).with_context(|| format!("writing {}", target.display()))?;
        records.push(FileRecord { name: name.clone(), sha256: sha256_hex(body.as_bytes()), bytes: body.len() });
    }
    let manifest = Manifest {
        experiment: cfg.experiment.clone(),
        seed: cfg.seed,
        config_path: path.display().to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        library_version: quantgrowth::VERSION,
        quantctl_version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        wall_time_secs: wall,
        ledger_entries: outputs.ledger.len(),
        ledger_failures: outputs.ledger.failures(),
        files: records,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!(
        "{}: wrote {} files to {} in {:.2}s; ledger {} entries, {} failures",
        cfg.experiment,
        files.len() + 1,
        dir.display(),
        wall,
        manifest.ledger_entries,
        manifest.ledger_failures
    );
    Ok(())
}

fn describe(name: &str) -> Result<()> {
    let e = experiments::find(name)?;
    println!("{}: {}\n", e.name, e.summary);
    println!("checks:\n  {}\n", e.checks);
    let spaces = if e.spaces.is_empty() { "none (omit [space])".to_string() } else { e.spaces.join(", ") };
    println!("space kinds: {spaces}");
    println!("measure: {}", if e.measure { "required" } else { "not used" });
    println!("solver: {}", if e.solver { "required" } else { "not used" });
    println!("grids required: {}", if e.required.is_empty() { "none".into() } else { e.required.join(", ") });
    println!("grids optional: {}", if e.optional.is_empty() { "none".into() } else { e.optional.join(", ") });
    let mut outputs: Vec<&str> = e.outputs.to_vec();
    outputs.extend(["ledger.csv (name,lhs,rhs,margin,passed)", "ledger.json", "summary.json", "manifest.json"]);
    println!("outputs:\n  {}\n", outputs.join("\n  "));
    println!("schema:\n{}\n", experiments::SCHEMA);
    println!("example:\n{}", e.example.trim_end());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out, validate_only } => run(&config, seed, out, validate_only),
        Command::List => {
            for e in &experiments::EXPERIMENTS {
                println!("{:<18} {}", e.name, e.summary);
            }
            Ok(())
        }
        Command::Describe { name } => describe(&name).map_err(|e| InvalidConfig(e).into()),
        Command::Validate { config } => {
            let (cfg, _) = load_valid(&config, None)?;
            println!("{}: valid {} config", config.display(), cfg.experiment);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidConfig>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
