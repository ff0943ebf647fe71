use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcurv_cli::commands::{certify, CertifyFlags};
use pcurv_cli::{parse_args, run, CommandEcho};
use serde_json::json;

/// Finiteness certificates for surface-group representations.
#[derive(Parser)]
#[command(name = "rep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the image of a representation is finite.
    Certify {
        /// JSON representation spec.
        spec: PathBuf,
        /// Overrides the spec's `max_elements`.
        #[arg(long)]
        max_elements: Option<usize>,
        /// Overrides the spec's `max_order`.
        #[arg(long)]
        max_order: Option<u64>,
        /// Bits allowed when isolating complex embeddings.
        #[arg(long)]
        precision_cap: Option<u32>,
        /// Identify matrices up to scalars.
        #[arg(long)]
        projective: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli: Cli = match parse_args() {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Command::Certify {
        spec,
        max_elements,
        max_order,
        precision_cap,
        projective,
        jobs,
        seed,
    } = cli.command;
    let echo = CommandEcho {
        program: "rep".into(),
        command: "certify".into(),
        spec: spec.display().to_string(),
        options: [
            ("max_elements", json!(max_elements)),
            ("max_order", json!(max_order)),
            ("precision_cap", json!(precision_cap)),
            ("projective", json!(projective)),
            ("jobs", json!(jobs)),
            ("seed", json!(seed)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect(),
    };
    let flags = CertifyFlags {
        max_elements,
        max_order,
        precision_cap,
        projective,
        jobs,
    };
    run(echo, |s| certify(s, &flags))
}
