//! Batch front end: JSON specification documents in, JSON reports out.
//!
//! Three binaries share this library: `pcurv` (`scan`, `analyze`), `rep`
//! (`certify`) and `deform` (`normalize`, `conjugate`).

pub mod commands;
pub mod report;
pub mod spec;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde::de::DeserializeOwned;
use thiserror::Error;

pub use report::{CommandEcho, Report, Results, Timing};

pub const EXIT_OK: u8 = 0;
pub const EXIT_OBSTRUCTED: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_PARSE: u8 = 65;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    /// Bad invocation or a violated precondition (for instance `p <= r`).
    #[error("{0}")]
    Usage(String),
    /// Malformed or inconsistent specification document.
    #[error("{0}")]
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
        }
    }
}

/// What a command produced, before the report envelope is added.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub results: Results,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub status: u8,
}

pub fn load_spec<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}:{m}", path.display())),
        other => other,
    })
}

/// Parses a spec document; errors carry `line:column`.
pub fn parse_spec<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = match msg.rfind(" at line ") {
            Some(i) => msg[..i].to_string(),
            None => msg,
        };
        CliError::Parse(format!("{}:{}: {msg}", e.line(), e.column()))
    })
}

/// Loads the spec, runs the command, prints the report and maps the status.
pub fn run<T: DeserializeOwned>(
    echo: CommandEcho,
    command: impl FnOnce(T) -> Result<Outcome, CliError>,
) -> ExitCode {
    let start = Instant::now();
    let outcome = load_spec(Path::new(&echo.spec)).and_then(command);
    match outcome {
        Ok(out) => {
            let report = Report::new(echo, out.results, out.summary, start.elapsed());
            // A closed pipe downstream is not our failure.
            let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Parses arguments, sending clap's usage errors to exit status 64.
pub fn parse_args<C: clap::Parser>() -> Result<C, ExitCode> {
    C::try_parse().map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(EXIT_USAGE)
        } else {
            ExitCode::SUCCESS
        }
    })
}

/// `A..B` (inclusive) or a single prime `A`.
pub fn parse_prime_range(s: &str) -> Result<(u64, u64), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| format!("'{t}' is not a nonnegative integer"))
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = parse(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok((a, b))
}
