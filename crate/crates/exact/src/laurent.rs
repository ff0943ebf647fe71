//! Truncated Laurent series in a uniformizer `q`, with pessimistic precision tracking.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::field::Field;
use crate::ratfunc::RationalFunction;

/// `q^offset · (c_0 + c_1 q + …)`, known modulo `q^(offset + precision)`.
///
/// `precision == None` marks an exact series (all unlisted coefficients are
/// zero), e.g. a Laurent polynomial. A series whose known coefficients all
/// vanish is stored with an empty coefficient list and `offset` equal to its
/// absolute precision.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedLaurentSeries<F> {
    offset: i64,
    coeffs: Vec<F>,
    precision: Option<usize>,
}

/// The valuation of an element, with the undecided and infinite cases explicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinite,
    Undecided,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl<F: Field> TruncatedLaurentSeries<F> {
    /// Series known modulo `q^(offset + precision)`; leading zeros are absorbed
    /// into the offset. `precision` must be at least 1 and at least
    /// `coeffs.len()`.
    pub fn new(offset: i64, coeffs: Vec<F>, precision: usize) -> Self {
        assert!(precision >= 1, "precision must be positive");
        assert!(coeffs.len() <= precision, "more coefficients than precision");
        Self::normalized(offset, coeffs, Some(precision))
    }

    /// An exact Laurent polynomial `q^offset · Σ c_i q^i`.
    pub fn exact(offset: i64, coeffs: Vec<F>) -> Self {
        Self::normalized(offset, coeffs, None)
    }

    /// Zero known modulo `q^abs_precision`.
    pub fn zero_to(abs_precision: i64) -> Self {
        TruncatedLaurentSeries {
            offset: abs_precision,
            coeffs: Vec::new(),
            precision: Some(0),
        }
    }

    fn normalized(offset: i64, coeffs: Vec<F>, precision: Option<usize>) -> Self {
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => match precision {
                None => TruncatedLaurentSeries {
                    offset: 0,
                    coeffs: Vec::new(),
                    precision: None,
                },
                Some(p) => Self::zero_to(offset + p as i64),
            },
            Some(k) => {
                let mut coeffs = coeffs[k..].to_vec();
                let precision = precision.map(|p| p - k);
                if precision.is_none() {
                    while coeffs.last().is_some_and(|c| c.is_zero()) {
                        coeffs.pop();
                    }
                }
                TruncatedLaurentSeries {
                    offset: offset + k as i64,
                    coeffs,
                    precision,
                }
            }
        }
    }

    /// Expansion of a rational function in `q` at `q = 0` to `precision` terms
    /// beyond its valuation.
    pub fn from_rational_function(f: &RationalFunction<F>, precision: usize) -> Self {
        assert!(precision >= 1);
        if f.is_zero() {
            return Self::exact(0, Vec::new());
        }
        let num = f.numer();
        let den = f.denom();
        let vn = num.low_degree().unwrap();
        let vd = den.low_degree().unwrap();
        let n: Vec<F> = num.coeffs()[vn..].to_vec();
        let d: Vec<F> = den.coeffs()[vd..].to_vec();
        // power-series division n/d with d[0] != 0
        let d0_inv = d[0].inv().unwrap();
        if d.len() == 1 {
            // Monomial denominator: the expansion terminates.
            let coeffs = n.iter().map(|c| c.clone() * d0_inv.clone()).collect();
            return Self::exact(vn as i64 - vd as i64, coeffs);
        }
        let mut out: Vec<F> = Vec::with_capacity(precision);
        for k in 0..precision {
            let mut acc = n.get(k).cloned().unwrap_or_else(F::zero);
            for j in 1..=k.min(d.len() - 1) {
                acc = acc - d[j].clone() * out[k - j].clone();
            }
            out.push(acc * d0_inv.clone());
        }
        Self::normalized(vn as i64 - vd as i64, out, Some(precision))
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Relative precision (`None` for exact series).
    pub fn precision(&self) -> Option<usize> {
        self.precision
    }

    /// Exponent up to which the series is known (`None` for exact series).
    pub fn absolute_precision(&self) -> Option<i64> {
        self.precision.map(|p| self.offset + p as i64)
    }

    pub fn valuation(&self) -> Valuation {
        if !self.coeffs.is_empty() {
            Valuation::Finite(self.offset)
        } else if self.precision.is_none() {
            Valuation::Infinite
        } else {
            Valuation::Undecided
        }
    }

    /// Coefficient of `q^k`, `None` beyond the known precision.
    pub fn coeff(&self, k: i64) -> Option<F> {
        if let Some(abs) = self.absolute_precision() {
            if k >= abs {
                return None;
            }
        }
        if k < self.offset {
            return Some(F::zero());
        }
        Some(
            self.coeffs
                .get((k - self.offset) as usize)
                .cloned()
                .unwrap_or_else(F::zero),
        )
    }

    fn min_abs(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn from_abs_window(lo: i64, values: Vec<F>, abs: Option<i64>) -> Self {
        match abs {
            None => Self::exact(lo, values),
            Some(abs) => {
                if abs <= lo {
                    return Self::zero_to(abs);
                }
                let mut values = values;
                values.truncate((abs - lo) as usize);
                let prec = (abs - lo) as usize;
                if values.iter().all(|c| c.is_zero()) {
                    return Self::zero_to(abs);
                }
                Self::normalized(lo, values, Some(prec))
            }
        }
    }

    /// Multiplicative inverse; `None` when the valuation is not decided or infinite.
    pub fn inv(&self) -> Option<Self> {
        if self.coeffs.is_empty() {
            return None;
        }
        let c0_inv = self.coeffs[0].inv()?;
        match self.precision {
            None if self.coeffs.len() == 1 => Some(Self::exact(-self.offset, vec![c0_inv])),
            _ => {
                // The inverse of a non-monomial exact series does not terminate;
                // keep four times the stored length.
                let prec = self.precision.unwrap_or(self.coeffs.len().max(1) * 4);
                let mut out: Vec<F> = Vec::with_capacity(prec);
                for k in 0..prec {
                    let mut acc = if k == 0 { F::one() } else { F::zero() };
                    for j in 1..=k.min(self.coeffs.len() - 1) {
                        acc = acc - self.coeffs[j].clone() * out[k - j].clone();
                    }
                    out.push(acc * c0_inv.clone());
                }
                Some(Self::normalized(-self.offset, out, Some(prec)))
            }
        }
    }

    /// Coefficient-wise map (e.g. a derivation acting on coefficients).
    pub fn map_coeffs(&self, f: impl Fn(&F) -> F) -> Self {
        Self::normalized(
            self.offset,
            self.coeffs.iter().map(f).collect(),
            self.precision,
        )
    }
}

impl<F: Field> Add for &TruncatedLaurentSeries<F> {
    type Output = TruncatedLaurentSeries<F>;
    fn add(self, rhs: &TruncatedLaurentSeries<F>) -> TruncatedLaurentSeries<F> {
        let abs = TruncatedLaurentSeries::<F>::min_abs(
            self.absolute_precision(),
            rhs.absolute_precision(),
        );
        let lo = match (self.coeffs.is_empty(), rhs.coeffs.is_empty()) {
            (true, true) => {
                return match abs {
                    Some(a) => TruncatedLaurentSeries::zero_to(a),
                    None => TruncatedLaurentSeries::exact(0, Vec::new()),
                }
            }
            (true, false) => rhs.offset,
            (false, true) => self.offset,
            (false, false) => self.offset.min(rhs.offset),
        };
        let hi = {
            let top = |s: &TruncatedLaurentSeries<F>| s.offset + s.coeffs.len() as i64;
            let mut h = top(self).max(top(rhs));
            if let Some(a) = abs {
                h = h.min(a);
            }
            h
        };
        let values: Vec<F> = (lo..hi.max(lo))
            .map(|k| {
                self.coeff(k).unwrap_or_else(F::zero) + rhs.coeff(k).unwrap_or_else(F::zero)
            })
            .collect();
        TruncatedLaurentSeries::from_abs_window(lo, values, abs)
    }
}

impl<F: Field> Neg for &TruncatedLaurentSeries<F> {
    type Output = TruncatedLaurentSeries<F>;
    fn neg(self) -> TruncatedLaurentSeries<F> {
        TruncatedLaurentSeries {
            offset: self.offset,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
            precision: self.precision,
        }
    }
}

impl<F: Field> Sub for &TruncatedLaurentSeries<F> {
    type Output = TruncatedLaurentSeries<F>;
    fn sub(self, rhs: &TruncatedLaurentSeries<F>) -> TruncatedLaurentSeries<F> {
        self + &(-rhs)
    }
}

impl<F: Field> Mul for &TruncatedLaurentSeries<F> {
    type Output = TruncatedLaurentSeries<F>;
    fn mul(self, rhs: &TruncatedLaurentSeries<F>) -> TruncatedLaurentSeries<F> {
        // Relative precision of a product is the smaller relative precision;
        // an undecided zero contaminates everything from its absolute precision on.
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            if self.valuation() == Valuation::Infinite || rhs.valuation() == Valuation::Infinite {
                return TruncatedLaurentSeries::exact(0, Vec::new());
            }
            // O(q^a) times something of valuation (or known zero order) v is O(q^(a+v)).
            let lower = |s: &TruncatedLaurentSeries<F>| {
                if s.coeffs.is_empty() {
                    s.absolute_precision().unwrap()
                } else {
                    s.offset
                }
            };
            return TruncatedLaurentSeries::zero_to(lower(self) + lower(rhs));
        }
        let rel = match (self.precision, rhs.precision) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let len = match rel {
            None => self.coeffs.len() + rhs.coeffs.len() - 1,
            Some(r) => r,
        };
        let mut out = vec![F::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j < len {
                    out[i + j] = out[i + j].clone() + a.clone() * b.clone();
                }
            }
        }
        TruncatedLaurentSeries::normalized(self.offset + rhs.offset, out, rel)
    }
}

impl<F: Field> fmt::Display for TruncatedLaurentSeries<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({c})*q^{}", self.offset + i as i64));
            }
        }
        if parts.is_empty() {
            parts.push("0".to_string());
        }
        if let Some(a) = self.absolute_precision() {
            parts.push(format!("O(q^{a})"));
        }
        f.write_str(&parts.join(" + "))
    }
}
