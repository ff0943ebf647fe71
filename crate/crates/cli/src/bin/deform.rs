use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcurv_cli::commands::{conjugate, normalize};
use pcurv_cli::{parse_args, run, CommandEcho};
use serde_json::json;

/// Deformations of connections and of generator matrices in q.
#[derive(Parser)]
#[command(name = "deform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gauge a truncated family to be constant in q, layer by layer.
    Normalize {
        /// JSON family spec.
        spec: PathBuf,
        /// Degree bound on the polynomial entries of each gauge.
        #[arg(long, default_value_t = 2)]
        ansatz_degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find I + q^m M conjugating lifts back to the constant matrices.
    Conjugate {
        /// JSON conjugation spec.
        spec: PathBuf,
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
        Command::Normalize {
            spec,
            ansatz_degree,
            seed,
        } => {
            let echo = CommandEcho {
                program: "deform".into(),
                command: "normalize".into(),
                spec: spec.display().to_string(),
                options: [("ansatz_degree", json!(ansatz_degree)), ("seed", json!(seed))]
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
            };
            run(echo, |s| normalize(s, ansatz_degree))
        }
        Command::Conjugate { spec, seed } => {
            let echo = CommandEcho {
                program: "deform".into(),
                command: "conjugate".into(),
                spec: spec.display().to_string(),
                options: [("seed", json!(seed))]
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect(),
            };
            run(echo, conjugate)
        }
    }
}
