use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcurv_cli::commands::{analyze, scan, AnalyzeOptions, ScanOptions};
use pcurv_cli::{parse_args, parse_prime_range, run, CommandEcho};
use serde_json::json;

/// p-curvature scans and q-adic analysis of connections.
#[derive(Parser)]
#[command(name = "pcurv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the p-curvature of a connection over Q(x) for each prime in a range.
    Scan {
        /// JSON connection spec.
        spec: PathBuf,
        /// Inclusive prime range `A..B`.
        #[arg(long, value_parser = parse_prime_range, default_value = "2..100")]
        primes: (u64, u64),
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include each p-curvature matrix in the report.
        #[arg(long)]
        with_psi: bool,
    },
    /// Newton polygon and nonvanishing prediction for a connection over Q(q)(x).
    Analyze {
        /// JSON companion spec.
        spec: PathBuf,
        /// Inclusive prime range `A..B`; overrides the spec's `prime`.
        #[arg(long, value_parser = parse_prime_range)]
        primes: Option<(u64, u64)>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Seeds the cyclic vector search when the spec gives a full matrix.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli: Cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    match cli.command {
        Command::Scan {
            spec,
            primes,
            jobs,
            seed,
            with_psi,
        } => {
            let echo = CommandEcho {
                program: "pcurv".into(),
                command: "scan".into(),
                spec: spec.display().to_string(),
                options: [
                    ("primes", json!(format!("{}..{}", primes.0, primes.1))),
                    ("jobs", json!(jobs)),
                    ("seed", json!(seed)),
                    ("with_psi", json!(with_psi)),
                ]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            };
            let opts = ScanOptions {
                p_min: primes.0,
                p_max: primes.1,
                jobs,
                with_psi,
            };
            run(echo, |s| scan(s, &opts))
        }
        Command::Analyze {
            spec,
            primes,
            jobs,
            seed,
        } => {
            let echo = CommandEcho {
                program: "pcurv".into(),
                command: "analyze".into(),
                spec: spec.display().to_string(),
                options: [
                    ("primes", json!(primes.map(|(a, b)| format!("{a}..{b}")))),
                    ("jobs", json!(jobs)),
                    ("seed", json!(seed)),
                ]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            };
            let opts = AnalyzeOptions { primes, seed, jobs };
            run(echo, |s| analyze(s, &opts))
        }
    }
}
