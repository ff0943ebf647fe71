//! The five commands. Each takes a parsed spec and its options and returns
//! an [`Outcome`]; the binaries add the report envelope.

use std::collections::BTreeMap;

use num_traits::Zero;
use pcurv_core::deformation::{normalize_family, step_conjugate, verify_step_conjugation, DeformationError};
use pcurv_core::surface_group::{certify_finiteness, CertifyOptions, TraceCheck, Verdict};
use pcurv_core::valuation::{
    predict_nonvanishing, reduce_companion, verify_prediction, Bivariate, ValuationError,
};
use pcurv_core::scan_primes;
use pcurv_exact::field::format_rational;
use pcurv_exact::prime_field::{is_prime, primes_in_range};
use pcurv_exact::{Field, Matrix, NumberFieldElement as Nf, Rational, RationalFunction as RF, Valuation};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::*;
use crate::spec::{CompanionSpec, ConjugateSpec, ConnectionSpec, FamilySpec, RepresentationSpec};
use crate::{CliError, Outcome, EXIT_INCONCLUSIVE, EXIT_OBSTRUCTED, EXIT_OK};

type Q = Rational;

fn text_matrix<T>(m: &Matrix<T>, f: impl Fn(&T) -> String) -> MatrixText
where
    T: Field,
{
    m.to_rows().iter().map(|r| r.iter().map(&f).collect()).collect()
}

fn nf_text(e: &Nf) -> Vec<String> {
    e.coordinates().iter().map(format_rational).collect()
}

fn nf_matrix(m: &Matrix<Nf>) -> NfMatrixText {
    m.to_rows().iter().map(|r| r.iter().map(nf_text).collect()).collect()
}

fn bivariate(e: &Bivariate<Q>, var: &str, par: &str) -> String {
    e.fmt_with(var, &|c: &RF<Q>| c.fmt_var(par))
}

fn summary(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    pub p_min: u64,
    pub p_max: u64,
    pub jobs: Option<usize>,
    /// Include every `ψ_p` in the report.
    pub with_psi: bool,
}

pub fn scan(spec: ConnectionSpec, opts: &ScanOptions) -> Result<Outcome, CliError> {
    let a = spec.build()?;
    let var = spec.variable.as_str();
    let reports = scan_primes(&a, opts.p_min, opts.p_max, opts.jobs);
    let rows: Vec<ScanRow> = reports
        .iter()
        .map(|r| ScanRow {
            prime: r.prime,
            good_prime: r.good_prime,
            vanishes: r.vanishes,
            nonzero_entries: r.psi.as_ref().map_or(0, |m| m.entries().iter().filter(|e| !e.is_zero()).count()),
            psi: r
                .psi
                .as_ref()
                .filter(|_| opts.with_psi)
                .map(|m| text_matrix(m, |e| e.fmt_var(var))),
        })
        .collect();
    let good = rows.iter().filter(|r| r.good_prime).count();
    let vanishing = rows.iter().filter(|r| r.vanishes).count();
    let summary = summary(&[
        ("primes", json!(rows.len())),
        ("bad", json!(rows.len() - good)),
        ("vanishing", json!(vanishing)),
        ("nonvanishing", json!(good - vanishing)),
    ]);
    Ok(Outcome {
        results: Results::Scan(ScanResults {
            rank: a.rank(),
            derivation: a.derivation().describe(),
            primes: rows,
        }),
        summary,
        status: EXIT_OK,
    })
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Overrides the spec's `prime`.
    pub primes: Option<(u64, u64)>,
    pub seed: u64,
    pub jobs: Option<usize>,
}

fn valuation_text(v: &Valuation) -> String {
    match v {
        Valuation::Finite(n) => n.to_string(),
        Valuation::Infinite => "inf".into(),
        Valuation::Undecided => "undecided".into(),
    }
}

pub fn analyze(spec: CompanionSpec, opts: &AnalyzeOptions) -> Result<Outcome, CliError> {
    let primes = match (opts.primes, spec.prime) {
        (Some((lo, hi)), _) => primes_in_range(lo, hi),
        (None, Some(p)) if is_prime(p) => vec![p],
        (None, Some(p)) => return Err(CliError::Usage(format!("{p} is not a prime"))),
        (None, None) => {
            return Err(CliError::Usage("no prime given: set 'prime' in the spec or pass --primes".into()))
        }
    };
    let (c, gauge) = spec.build(opts.seed)?;
    let r = c.rank();
    if let Some(&p) = primes.iter().find(|&&p| p <= r as u64) {
        return Err(CliError::Usage(ValuationError::PrimeTooSmall { p, r }.to_string()));
    }
    let (var, par) = (spec.variable.as_str(), spec.parameter.as_str());
    let row = |p: u64| {
        let base = AnalyzeRow {
            prime: p,
            status: AnalyzeStatus::Ok,
            message: None,
            polygon: None,
            predicted: None,
            reason: None,
            confirmed: None,
        };
        let Some(cp) = reduce_companion(&c, p) else {
            return AnalyzeRow {
                status: AnalyzeStatus::BadReduction,
                message: Some(format!("the spec does not reduce modulo {p}")),
                ..base
            };
        };
        match predict_nonvanishing(&cp, p) {
            Err(e) => AnalyzeRow {
                status: AnalyzeStatus::PreconditionFailed,
                message: Some(e.to_string()),
                ..base
            },
            Ok(pred) => AnalyzeRow {
                polygon: Some(PolygonText {
                    valuations: pred.profile.valuations.iter().map(valuation_text).collect(),
                    min_valuation: pred.profile.min_valuation,
                    vertices: pred.polygon.vertices.clone(),
                    slopes: pred.polygon.slopes().iter().map(format_rational).collect(),
                    eigenvalue_valuation: pred.polygon.eigenvalue_valuation().as_ref().map(format_rational),
                }),
                predicted: Some(pred.predicted),
                reason: Some(pred.reason),
                confirmed: Some(verify_prediction(&cp, p)),
                ..base
            },
        }
    };
    let rows: Vec<AnalyzeRow> = in_pool(opts.jobs, || primes.par_iter().map(|&p| row(p)).collect());
    let count = |f: &dyn Fn(&AnalyzeRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let summary = summary(&[
        ("primes", json!(rows.len())),
        ("predicted_nonvanishing", json!(count(&|r| r.predicted == Some(true)))),
        ("confirmed_nonvanishing", json!(count(&|r| r.confirmed == Some(true)))),
        (
            "contradictions",
            json!(count(&|r| r.predicted == Some(true) && r.confirmed == Some(false))),
        ),
        ("bad_reduction", json!(count(&|r| r.status == AnalyzeStatus::BadReduction))),
        (
            "precondition_failed",
            json!(count(&|r| r.status == AnalyzeStatus::PreconditionFailed)),
        ),
    ]);
    Ok(Outcome {
        results: Results::Analyze(AnalyzeResults {
            rank: r,
            last_column: c.last_column().iter().map(|e| bivariate(e, var, par)).collect(),
            cyclic_gauge: gauge.map(|g| text_matrix(&g, |e| bivariate(e, var, par))),
            primes: rows,
        }),
        summary,
        status: EXIT_OK,
    })
}

#[derive(Debug, Clone, Default)]
pub struct CertifyFlags {
    pub max_elements: Option<usize>,
    pub max_order: Option<u64>,
    pub precision_cap: Option<u32>,
    pub projective: bool,
    pub jobs: Option<usize>,
}

fn check_text(c: &TraceCheck) -> TraceCheckText {
    TraceCheckText {
        passed: c.passed,
        checked: c.checked,
        witness: c.witness.as_ref().map(|w| WitnessText {
            word: w.word.clone(),
            trace: w.trace.clone(),
            min_poly: w.min_poly.clone(),
            values: w.values.iter().map(|(re, im)| (format!("{re:.6}"), format!("{im:.6}"))).collect(),
        }),
    }
}

pub fn certify(spec: RepresentationSpec, flags: &CertifyFlags) -> Result<Outcome, CliError> {
    let rep = spec.build(flags.precision_cap)?;
    let defaults = CertifyOptions::default();
    let opts = CertifyOptions {
        max_elements: flags.max_elements.or(spec.max_elements).unwrap_or(defaults.max_elements),
        max_order: flags.max_order.or(spec.max_order).unwrap_or(defaults.max_order),
        projective: flags.projective || spec.projective,
    };
    let pres = rep.presentation();
    let mut results = CertifyResults {
        min_poly: rep.field().min_poly().fmt_var(&spec.variable),
        genus: pres.genus,
        punctures: pres.punctures,
        group: spec.group.to_ascii_uppercase(),
        generators: rep.matrices().iter().map(nf_matrix).collect(),
        verdict: VerdictText::Inconclusive { reason: String::new() },
        element_count: 0,
        max_order_seen: 0,
        projective: opts.projective,
        det_orders: Vec::new(),
        trace_evidence: None,
        words: Vec::new(),
        elements: Vec::new(),
    };
    match in_pool(flags.jobs, || certify_finiteness(&rep, &opts)) {
        Ok(cert) => {
            results.verdict = match &cert.verdict {
                Verdict::Finite(n) => VerdictText::Finite { order: *n },
                Verdict::Obstructed { word, reason } => VerdictText::Obstructed {
                    word: word.clone(),
                    reason: reason.clone(),
                },
                Verdict::Inconclusive(reason) => VerdictText::Inconclusive { reason: reason.clone() },
            };
            results.element_count = cert.element_count;
            results.max_order_seen = cert.max_order_seen;
            results.projective = cert.projective;
            results.det_orders = cert.det_orders.clone();
            results.trace_evidence = cert.nonarch.as_ref().zip(cert.arch.as_ref()).map(|(na, ar)| TraceEvidence {
                integrality: check_text(na),
                real_bound: check_text(ar),
            });
            results.words = cert.words.iter().map(|w| pres.format_word(w)).collect();
            results.elements = cert.elements.iter().map(nf_matrix).collect();
        }
        // Exact decisions that ran out of precision leave the question open.
        Err(e) => results.verdict = VerdictText::Inconclusive { reason: e.to_string() },
    }
    let (label, status) = match results.verdict {
        VerdictText::Finite { .. } => ("finite", EXIT_OK),
        VerdictText::Obstructed { .. } => ("obstructed", EXIT_OBSTRUCTED),
        VerdictText::Inconclusive { .. } => ("inconclusive", EXIT_INCONCLUSIVE),
    };
    let summary = summary(&[
        ("verdict", json!(label)),
        ("element_count", json!(results.element_count)),
        ("max_order_seen", json!(results.max_order_seen)),
    ]);
    Ok(Outcome {
        results: Results::Certify(results),
        summary,
        status,
    })
}

pub fn normalize(spec: FamilySpec, ansatz_degree: usize) -> Result<Outcome, CliError> {
    let fam = spec.build()?;
    let var = spec.variable.as_str();
    let fmt = |e: &RF<Q>| e.fmt_var(var);
    let norm = normalize_family(&fam, ansatz_degree);
    let results = NormalizeResults {
        order: fam.order(),
        rank: fam.rank(),
        ansatz_degree,
        gauges: norm
            .gauges
            .iter()
            .map(|(k, y)| GaugeText {
                layer: *k,
                y: text_matrix(y, fmt),
            })
            .collect(),
        constant_through: norm.constant_through,
        obstruction: norm.obstruction.as_ref().map(|o| ObstructionText {
            layer: o.layer,
            b: text_matrix(&o.b, fmt),
        }),
        layers: norm.family.layers.iter().map(|l| text_matrix(l, fmt)).collect(),
    };
    let status = if results.obstruction.is_some() { EXIT_OBSTRUCTED } else { EXIT_OK };
    let summary = summary(&[
        ("gauges", json!(results.gauges.len())),
        ("constant_through", json!(results.constant_through)),
        ("obstruction_layer", json!(results.obstruction.as_ref().map(|o| o.layer))),
    ]);
    Ok(Outcome {
        results: Results::Normalize(results),
        summary,
        status,
    })
}

pub fn conjugate(spec: ConjugateSpec) -> Result<Outcome, CliError> {
    let (sigma, tau) = spec.build()?;
    let m = spec.m;
    let found = step_conjugate(&sigma, &tau, m).map_err(|e| match e {
        DeformationError::NotCongruent { .. } => CliError::Usage(e.to_string()),
        other => CliError::Parse(other.to_string()),
    })?;
    let verified = found.as_ref().is_some_and(|mm| {
        let r = sigma[0].rows();
        let padded: Vec<Vec<Matrix<Q>>> = tau
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.resize(m + 1, Matrix::zeros(r, r));
                t
            })
            .collect();
        verify_step_conjugation(&sigma, &padded, m, mm)
    });
    let results = ConjugateResults {
        m,
        generators: sigma.len(),
        found: found.is_some(),
        conjugator: found.as_ref().map(|mm| text_matrix(mm, format_rational)),
        verified,
    };
    let status = if results.found { EXIT_OK } else { EXIT_OBSTRUCTED };
    let summary = summary(&[("found", json!(results.found)), ("verified", json!(verified))]);
    Ok(Outcome {
        results: Results::Conjugate(results),
        summary,
        status,
    })
}
