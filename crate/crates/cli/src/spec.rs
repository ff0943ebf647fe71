//! Specification documents and their conversion to core types.
//!
//! Matrix entries are strings in the expression grammar (integers, the
//! declared variable names, `+ - * / ^ ( )`) or plain JSON integers.
//! Derivations are written `d/dx`, `x*d/dx` or `<expr>*d/dx`.

use std::sync::Arc;

use pcurv_core::deformation::TruncatedFamily;
use pcurv_core::surface_group::{MatrixGroup, Representation, SurfacePresentation};
use pcurv_core::valuation::Bivariate;
use pcurv_core::{cyclic_vector, CompanionConnection, ConnectionMatrix, Derivation};
use pcurv_exact::expr::parse_expr;
use pcurv_exact::field::parse_rational;
use pcurv_exact::number_field::DEFAULT_PRECISION_CAP;
use pcurv_exact::{Field, Matrix, NumberField, NumberFieldElement as Nf, Rational, RationalFunction as RF};
use serde::{Deserialize, Serialize};

use crate::CliError;

type Q = Rational;

/// Attempts made by the cyclic vector search in `analyze`.
pub const CYCLIC_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    pub fn source(&self) -> String {
        match self {
            Scalar::Int(n) => n.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Scalar>>;

fn default_field() -> String {
    "Q".into()
}

fn default_variable() -> String {
    "x".into()
}

fn default_parameter() -> String {
    "q".into()
}

fn default_generator() -> String {
    "t".into()
}

fn default_group() -> String {
    "SL2".into()
}

fn parse_err(at: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{at}: {msg}"))
}

fn check_field(field: &str) -> Result<(), CliError> {
    match field {
        "Q" | "QQ" => Ok(()),
        other => Err(parse_err("field", format!("unsupported base field '{other}' (only Q)"))),
    }
}

fn check_name(name: &str, at: &str) -> Result<(), CliError> {
    let mut cs = name.chars();
    let ok = cs.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(parse_err(at, format!("'{name}' is not an identifier")))
    }
}

fn entry<T: Field>(src: &Scalar, at: &str, ident: &dyn Fn(&str) -> Option<T>) -> Result<T, CliError> {
    parse_expr(&src.source(), ident).map_err(|e| parse_err(at, e))
}

fn vector<T: Field>(
    v: &[Scalar],
    at: &str,
    ident: &dyn Fn(&str) -> Option<T>,
) -> Result<Vec<T>, CliError> {
    v.iter()
        .enumerate()
        .map(|(i, s)| entry(s, &format!("{at}[{i}]"), ident))
        .collect()
}

fn matrix<T: Field>(
    rows: &MatrixSpec,
    at: &str,
    ident: &dyn Fn(&str) -> Option<T>,
) -> Result<Matrix<T>, CliError> {
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 {
        return Err(parse_err(at, "empty matrix"));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(parse_err(
                &format!("{at}[{i}]"),
                format!("row has {} entries, expected {cols}", row.len()),
            ));
        }
        out.push(vector(row, &format!("{at}[{i}]"), ident)?);
    }
    Ok(Matrix::from_rows(out))
}

fn square<T: Field>(m: Matrix<T>, at: &str) -> Result<Matrix<T>, CliError> {
    if m.is_square() {
        Ok(m)
    } else {
        Err(parse_err(at, format!("matrix must be square, got {}x{}", m.rows(), m.cols())))
    }
}

/// `d/dx`, `x*d/dx` or `<expr>*d/dx`, with the multiplier parsed by `ident`.
fn derivation<F: Field>(
    desc: &str,
    var: &str,
    ident: &dyn Fn(&str) -> Option<RF<F>>,
) -> Result<Derivation<F>, CliError> {
    let bad = || {
        parse_err(
            "derivation",
            format!("expected 'd/d{var}', '{var}*d/d{var}' or '<expr>*d/d{var}', got '{desc}'"),
        )
    };
    let head = desc.trim().strip_suffix(&format!("d/d{var}")).ok_or_else(bad)?.trim_end();
    if head.is_empty() {
        return Ok(Derivation::plain(var));
    }
    let u = head.strip_suffix('*').ok_or_else(bad)?;
    let u = parse_expr(u, ident).map_err(|e| parse_err("derivation", e))?;
    Derivation::new(var, u).map_err(|e| parse_err("derivation", e))
}

enum Body<'a> {
    Matrix(&'a MatrixSpec),
    Column(&'a [Scalar]),
}

fn body<'a>(
    matrix: &'a Option<MatrixSpec>,
    companion: Option<bool>,
    last_column: &'a Option<Vec<Scalar>>,
) -> Result<Body<'a>, CliError> {
    match (matrix, last_column, companion) {
        (Some(_), Some(_), _) => Err(parse_err("matrix", "give either 'matrix' or 'last_column', not both")),
        (Some(_), None, Some(true)) => Err(parse_err("companion", "companion form takes 'last_column'")),
        (None, Some(_), Some(false)) => Err(parse_err("companion", "'last_column' needs companion form")),
        (Some(m), None, _) => Ok(Body::Matrix(m)),
        (None, Some(c), _) if c.is_empty() => Err(parse_err("last_column", "empty column")),
        (None, Some(c), _) => Ok(Body::Column(c)),
        (None, None, _) => Err(parse_err("matrix", "missing 'matrix' or 'last_column'")),
    }
}

/// A connection `∇ = D + A` over `ℚ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_variable")]
    pub variable: String,
    pub derivation: String,
    #[serde(default)]
    pub matrix: Option<MatrixSpec>,
    /// Read `last_column` as the companion column `(f_0, …, f_{r−1})`.
    #[serde(default)]
    pub companion: Option<bool>,
    #[serde(default)]
    pub last_column: Option<Vec<Scalar>>,
}

impl ConnectionSpec {
    pub fn build(&self) -> Result<ConnectionMatrix<Q>, CliError> {
        check_field(&self.field)?;
        check_name(&self.variable, "variable")?;
        let var = self.variable.clone();
        let ident = move |s: &str| (s == var).then(RF::<Q>::x);
        let d = derivation(&self.derivation, &self.variable, &ident)?;
        match body(&self.matrix, self.companion, &self.last_column)? {
            Body::Matrix(m) => {
                let a = square(matrix(m, "matrix", &ident)?, "matrix")?;
                ConnectionMatrix::new(a, d).map_err(|e| parse_err("matrix", e))
            }
            Body::Column(c) => {
                let col = vector(c, "last_column", &ident)?;
                let c = CompanionConnection::new(col, d).map_err(|e| parse_err("last_column", e))?;
                Ok(c.to_connection())
            }
        }
    }
}

/// A connection over `ℚ(q)(x)` for q-adic analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompanionSpec {
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_variable")]
    pub variable: String,
    #[serde(default = "default_parameter")]
    pub parameter: String,
    pub derivation: String,
    /// Used when no `--primes` range is given.
    #[serde(default)]
    pub prime: Option<u64>,
    #[serde(default)]
    pub matrix: Option<MatrixSpec>,
    #[serde(default)]
    pub companion: Option<bool>,
    #[serde(default)]
    pub last_column: Option<Vec<Scalar>>,
}

/// A companion connection, with the gauge used when it came from a matrix.
pub type BuiltCompanion = (CompanionConnection<RF<Q>>, Option<Matrix<Bivariate<Q>>>);

impl CompanionSpec {
    /// Matrices are brought to companion form by a cyclic vector search
    /// seeded with `seed`.
    pub fn build(&self, seed: u64) -> Result<BuiltCompanion, CliError> {
        check_field(&self.field)?;
        check_name(&self.variable, "variable")?;
        check_name(&self.parameter, "parameter")?;
        if self.variable == self.parameter {
            return Err(parse_err("parameter", "must differ from the variable"));
        }
        let (var, par) = (self.variable.clone(), self.parameter.clone());
        let ident = move |s: &str| -> Option<Bivariate<Q>> {
            if s == var {
                Some(RF::x())
            } else if s == par {
                Some(RF::constant(RF::x()))
            } else {
                None
            }
        };
        let d = derivation(&self.derivation, &self.variable, &ident)?;
        match body(&self.matrix, self.companion, &self.last_column)? {
            Body::Column(c) => {
                let col = vector(c, "last_column", &ident)?;
                let c = CompanionConnection::new(col, d).map_err(|e| parse_err("last_column", e))?;
                Ok((c, None))
            }
            Body::Matrix(m) => {
                let a = square(matrix(m, "matrix", &ident)?, "matrix")?;
                let a = ConnectionMatrix::new(a, d).map_err(|e| parse_err("matrix", e))?;
                let (g, c) = cyclic_vector(&a, CYCLIC_ATTEMPTS, seed).map_err(|e| CliError::Usage(e.to_string()))?;
                Ok((c, Some(g)))
            }
        }
    }
}

/// A family `A_0 + q·A_1 + … + q^(m−1)·A_{m−1}` over `ℚ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_variable")]
    pub variable: String,
    #[serde(default = "default_parameter")]
    pub parameter: String,
    pub derivation: String,
    /// Truncation order `m`; missing layers are zero.
    #[serde(default)]
    pub order: Option<usize>,
    pub layers: Vec<MatrixSpec>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<TruncatedFamily<Q>, CliError> {
        check_field(&self.field)?;
        check_name(&self.variable, "variable")?;
        check_name(&self.parameter, "parameter")?;
        let var = self.variable.clone();
        let ident = move |s: &str| (s == var).then(RF::<Q>::x);
        let d = derivation(&self.derivation, &self.variable, &ident)?;
        let mut layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let at = format!("layers[{k}]");
                square(matrix(l, &at, &ident)?, &at)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(m) = self.order {
            if m < layers.len() || m == 0 {
                return Err(parse_err(
                    "order",
                    format!("order {m} is incompatible with {} layers", layers.len()),
                ));
            }
            let r = layers.first().map_or(0, Matrix::rows);
            layers.resize(m, Matrix::zeros(r, r));
        }
        TruncatedFamily::new(self.parameter.clone(), d, layers).map_err(|e| parse_err("layers", e))
    }
}

/// Generator images `σ_i` over `ℚ` and lifts `τ_i` given by layers `0..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateSpec {
    #[serde(default = "default_field")]
    pub field: String,
    pub m: usize,
    pub sigma: Vec<MatrixSpec>,
    pub tau: Vec<Vec<MatrixSpec>>,
}

pub type ConjugateData = (Vec<Matrix<Q>>, Vec<Vec<Matrix<Q>>>);

impl ConjugateSpec {
    pub fn build(&self) -> Result<ConjugateData, CliError> {
        check_field(&self.field)?;
        let none = |_: &str| None::<Q>;
        let sigma = self
            .sigma
            .iter()
            .enumerate()
            .map(|(i, s)| matrix(s, &format!("sigma[{i}]"), &none))
            .collect::<Result<Vec<_>, _>>()?;
        let tau = self
            .tau
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.iter()
                    .enumerate()
                    .map(|(k, l)| matrix(l, &format!("tau[{i}][{k}]"), &none))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((sigma, tau))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MinPolySpec {
    /// Coefficients from the constant term up.
    Coefficients(Vec<Scalar>),
    Expression(String),
}

impl Default for MinPolySpec {
    fn default() -> Self {
        MinPolySpec::Coefficients(vec![Scalar::Int(0), Scalar::Int(1)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NfEntry {
    Int(i64),
    Text(String),
    Coordinates(Vec<Scalar>),
}

/// A representation of the surface group of genus `g` with `n` punctures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    #[serde(default)]
    pub min_poly: MinPolySpec,
    /// Name of the field generator in entry expressions.
    #[serde(default = "default_generator")]
    pub variable: String,
    pub genus: usize,
    #[serde(default)]
    pub punctures: usize,
    #[serde(default = "default_group")]
    pub group: String,
    pub generators: Vec<Vec<Vec<NfEntry>>>,
    #[serde(default)]
    pub max_elements: Option<usize>,
    #[serde(default)]
    pub max_order: Option<u64>,
    #[serde(default)]
    pub projective: bool,
    /// Bits of precision allowed when isolating complex embeddings.
    #[serde(default)]
    pub precision_cap: Option<u32>,
}

impl RepresentationSpec {
    pub fn number_field(&self, precision_cap: Option<u32>) -> Result<Arc<NumberField>, CliError> {
        check_name(&self.variable, "variable")?;
        let poly = match &self.min_poly {
            MinPolySpec::Coefficients(cs) => {
                let none = |_: &str| None::<Q>;
                pcurv_exact::Polynomial::new(vector(cs, "min_poly", &none)?)
            }
            MinPolySpec::Expression(s) => {
                let var = self.variable.clone();
                let ident = move |n: &str| (n == var).then(RF::<Q>::x);
                let f = parse_expr(s, &ident).map_err(|e| parse_err("min_poly", e))?;
                if !f.is_polynomial() {
                    return Err(parse_err("min_poly", "not a polynomial"));
                }
                f.numer().clone()
            }
        };
        let cap = precision_cap.or(self.precision_cap).unwrap_or(DEFAULT_PRECISION_CAP);
        NumberField::with_precision_cap(poly, cap).map_err(|e| parse_err("min_poly", e))
    }

    pub fn matrix_group(&self) -> Result<MatrixGroup, CliError> {
        match self.group.to_ascii_uppercase().as_str() {
            "SL2" => Ok(MatrixGroup::Sl2),
            "GL2" => Ok(MatrixGroup::Gl2),
            other => Err(parse_err("group", format!("expected SL2 or GL2, got '{other}'"))),
        }
    }

    fn element(&self, k: &Arc<NumberField>, e: &NfEntry, at: &str) -> Result<Nf, CliError> {
        match e {
            NfEntry::Int(n) => Ok(k.from_rational(Q::from_integer((*n).into()))),
            NfEntry::Text(s) => {
                let gen = k.generator();
                let var = self.variable.clone();
                let ident = move |n: &str| (n == var).then(|| gen.clone());
                let v = parse_expr(s, &ident).map_err(|e| parse_err(at, e))?;
                Ok(k.from_poly(&v.as_poly()))
            }
            NfEntry::Coordinates(cs) => {
                if cs.len() > k.degree() {
                    return Err(parse_err(
                        at,
                        format!("{} coordinates for a field of degree {}", cs.len(), k.degree()),
                    ));
                }
                let coords = cs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        parse_rational(&c.source())
                            .ok_or_else(|| parse_err(&format!("{at}[{i}]"), "not a rational number"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(k.element(coords))
            }
        }
    }

    pub fn build(&self, precision_cap: Option<u32>) -> Result<Representation, CliError> {
        let k = self.number_field(precision_cap)?;
        let group = self.matrix_group()?;
        let mut gens = Vec::with_capacity(self.generators.len());
        for (g, rows) in self.generators.iter().enumerate() {
            let at = format!("generators[{g}]");
            if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
                return Err(parse_err(&at, "expected a 2x2 matrix"));
            }
            let mut out = Vec::with_capacity(2);
            for (i, row) in rows.iter().enumerate() {
                let r = row
                    .iter()
                    .enumerate()
                    .map(|(j, e)| self.element(&k, e, &format!("{at}[{i}][{j}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(r);
            }
            gens.push(Matrix::from_rows(out));
        }
        let pres = SurfacePresentation::new(self.genus, self.punctures);
        Representation::new(k, pres, gens, group).map_err(|e| parse_err("generators", e))
    }
}
