//! Batch orchestration binary: validates semigroup specs and runs the
//! counting, spectral, expander, Zaremba and identity-suite experiments
//! with deterministic, machine-readable outputs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "congcount",
    about = "Counting and spectral experiments for Schottky and continued-fractions semigroups",
    version
)]
struct Cli {
    /// Run configuration (JSON, schema_version 1).
    #[arg(long, global = true, default_value = "configs/cf_12.json")]
    config: PathBuf,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized probes (mandatory for spectral, verify,
    /// probe-lnic).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Thread cap for per-modulus parallel work (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Override the enumeration budget of the count command.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the ping-pong data of the spec (exit 1 on violations).
    Validate,
    /// Bowen bisection for the critical exponent with a pressure curve.
    Delta,
    /// Norm-ball counting per congruence class with exponent fit and
    /// equidistribution report.
    Count,
    /// Congruence transfer-operator decay probe.
    Spectral,
    /// Return-trajectory Cayley graph spectral gaps with controls.
    Expander,
    /// Bounded-partial-quotient denominator sets and densities.
    Zaremba,
    /// Exact identity suites: trace cases, translation-length lemma,
    /// hyperbolicity sandwich, renewal equations.
    Verify,
    /// Local non-integrability probe over section pairs.
    ProbeLnic,
    /// Print the largest dyadic trim parameter for the spec's alphabet.
    FindEpsilon,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // The thread cap exists for the per-modulus parallel maps; every merge
    // is ordered, so results are identical for any cap.
    if cli.threads != 1 {
        let threads = if cli.threads == 0 { 0 } else { cli.threads };
        let mut builder = rayon::ThreadPoolBuilder::new();
        if threads > 0 {
            builder = builder.num_threads(threads);
        }
        if let Err(e) = builder.build_global() {
            eprintln!("warning: thread pool setup failed: {e}");
        }
    }
    let cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Validate => commands::cmd_validate(&cfg, &cli.out),
        Command::Delta => commands::cmd_delta(&cfg, &cli.out),
        Command::Count => commands::cmd_count(&cfg, &cli.out, cli.budget),
        Command::Spectral => commands::cmd_spectral(&cfg, &cli.out, cli.seed),
        Command::Expander => commands::cmd_expander(&cfg, &cli.out),
        Command::Zaremba => commands::cmd_zaremba(&cfg, &cli.out),
        Command::Verify => commands::cmd_verify(&cfg, &cli.out, cli.seed),
        Command::ProbeLnic => commands::cmd_probe_lnic(&cfg, &cli.out, cli.seed),
        Command::FindEpsilon => commands::cmd_find_epsilon(&cfg),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
