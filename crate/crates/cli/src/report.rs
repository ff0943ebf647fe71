//! Report envelope and per-command result records.
//!
//! Exact values are strings: rationals as `"n/d"`, rational functions in
//! the spec's variable names. Number-field elements are coordinate arrays
//! in the power basis of the generator.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: CommandEcho,
    pub results: Results,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandEcho {
    pub program: String,
    pub command: String,
    pub spec: String,
    /// Effective flag values, including the seed.
    pub options: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_us: u64,
}

impl Report {
    pub fn new(
        command: CommandEcho,
        results: Results,
        summary: BTreeMap<String, serde_json::Value>,
        elapsed: Duration,
    ) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            results,
            summary,
            timing: Timing {
                elapsed_us: elapsed.as_micros() as u64,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn without_timing(mut self) -> Self {
        self.timing = Timing { elapsed_us: 0 };
        self
    }
}

/// Matrix of exact entries, row by row.
pub type MatrixText = Vec<Vec<String>>;

/// 2×2 matrix over a number field: each entry is its coordinate vector.
pub type NfMatrixText = Vec<Vec<Vec<String>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Scan(ScanResults),
    Analyze(AnalyzeResults),
    Certify(CertifyResults),
    Normalize(NormalizeResults),
    Conjugate(ConjugateResults),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResults {
    pub rank: usize,
    pub derivation: String,
    pub primes: Vec<ScanRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub prime: u64,
    pub good_prime: bool,
    pub vanishes: bool,
    /// Number of nonzero entries of `ψ_p`.
    pub nonzero_entries: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<MatrixText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResults {
    pub rank: usize,
    /// `(f_0, …, f_{r−1})` over `ℚ(q)(x)`.
    pub last_column: Vec<String>,
    /// Present when the spec gave a full matrix and a cyclic vector was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic_gauge: Option<MatrixText>,
    pub primes: Vec<AnalyzeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyzeStatus {
    Ok,
    BadReduction,
    PreconditionFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeRow {
    pub prime: u64,
    pub status: AnalyzeStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<PolygonText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Whether `ψ_p ≠ 0`, computed directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonText {
    /// `ν(f_m)` as integers, or `"inf"` for a zero entry.
    pub valuations: Vec<String>,
    pub min_valuation: Option<i64>,
    pub vertices: Vec<(usize, i64)>,
    pub slopes: Vec<String>,
    pub eigenvalue_valuation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyResults {
    pub min_poly: String,
    pub genus: usize,
    pub punctures: usize,
    pub group: String,
    pub generators: Vec<NfMatrixText>,
    pub verdict: VerdictText,
    pub element_count: usize,
    pub max_order_seen: u64,
    pub projective: bool,
    pub det_orders: Vec<Option<u64>>,
    /// Trace tests on simple-loop products. These are evidence only: the
    /// verdict comes from the closure computation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_evidence: Option<TraceEvidence>,
    pub words: Vec<String>,
    pub elements: Vec<NfMatrixText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum VerdictText {
    Finite { order: usize },
    Obstructed { word: String, reason: String },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvidence {
    pub integrality: TraceCheckText,
    pub real_bound: TraceCheckText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCheckText {
    pub passed: bool,
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessText {
    pub word: String,
    pub trace: String,
    pub min_poly: String,
    /// Approximate complex conjugates of the trace, `[re, im]`.
    pub values: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizeResults {
    pub order: usize,
    pub rank: usize,
    pub ansatz_degree: usize,
    pub gauges: Vec<GaugeText>,
    pub constant_through: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionText>,
    pub layers: Vec<MatrixText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeText {
    pub layer: usize,
    pub y: MatrixText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionText {
    pub layer: usize,
    pub b: MatrixText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateResults {
    pub m: usize,
    pub generators: usize,
    pub found: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<MatrixText>,
    pub verified: bool,
}
