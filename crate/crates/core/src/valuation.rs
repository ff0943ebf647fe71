//! q-adic valuations of companion connections over κ((q)).
//!
//! Entries live in `κ(q)(x)`, stored as rational functions in `x` whose
//! coefficients are rational functions in `q`; the derivation acts on `x` and
//! kills `q`. The q-adic valuation of such an entry is the Gauss valuation.

use num_traits::{One, Zero};
use thiserror::Error;

use pcurv_exact::{Field, Polynomial, Rational, RationalFunction, TruncatedLaurentSeries, Valuation};

use crate::connection::{psi_matrix, CompanionConnection, Derivation};

type RF<F> = RationalFunction<F>;
/// An element of `κ(q)(x)`.
pub type Bivariate<F> = RF<RF<F>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("valuation undecided at the known precision (entry {0})")]
    Undecided(usize),
    #[error("prime {p} must exceed the rank {r}")]
    PrimeTooSmall { p: u64, r: usize },
    #[error("derivation is not ν-integral: ν(D(α)) = {image} < {alpha_valuation} = ν(α) for α = {alpha}")]
    NotNuIntegral { alpha: String, alpha_valuation: i64, image: i64 },
    #[error("derivation does not satisfy D^p = D modulo {0}")]
    FrobeniusIncompatible(u64),
}

pub fn q_valuation_series<F: Field>(f: &TruncatedLaurentSeries<F>) -> Valuation {
    f.valuation()
}

/// Order at `q = 0` of a rational function in `q`.
pub fn q_valuation<F: Field>(f: &RF<F>) -> Valuation {
    match f.order_at_zero() {
        None => Valuation::Infinite,
        Some(v) => Valuation::Finite(v),
    }
}

fn poly_gauss<F: Field>(p: &Polynomial<RF<F>>) -> Option<i64> {
    p.coeffs().iter().filter_map(|c| c.order_at_zero()).min()
}

/// Gauss valuation on `κ(q)(x)`: the q-adic valuation of `κ(x)((q))`
/// restricted to rational functions.
pub fn gauss_valuation<F: Field>(f: &Bivariate<F>) -> Valuation {
    match poly_gauss(f.numer()) {
        None => Valuation::Infinite,
        Some(n) => Valuation::Finite(n - poly_gauss(f.denom()).expect("nonzero denominator")),
    }
}

/// An element of `κ(q)(x)` that is constant in `x`.
pub fn bivariate_constant<F: Field>(c: RF<F>) -> Bivariate<F> {
    RF::constant(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NuWitness {
    pub index: usize,
    pub alpha: String,
    pub alpha_valuation: i64,
    pub image_valuation: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NuIntegrality {
    pub holds: bool,
    pub witness: Option<NuWitness>,
}

/// Tests `ν(D(α)) ≥ ν(α)` on each sample; stops at the first violation.
pub fn check_nu_integrality<F: Field>(
    d: &Derivation<RF<F>>,
    samples: &[Bivariate<F>],
) -> NuIntegrality {
    for (index, alpha) in samples.iter().enumerate() {
        let (Valuation::Finite(va), Valuation::Finite(vd)) =
            (gauss_valuation(alpha), gauss_valuation(&d.apply(alpha)))
        else {
            continue;
        };
        if vd < va {
            return NuIntegrality {
                holds: false,
                witness: Some(NuWitness {
                    index,
                    alpha: fmt_bivariate(alpha, d.variable(), "q"),
                    alpha_valuation: va,
                    image_valuation: vd,
                }),
            };
        }
    }
    NuIntegrality {
        holds: true,
        witness: None,
    }
}

/// Renders an element of `κ(q)(x)` with the given variable names.
pub fn fmt_bivariate<F: Field>(f: &Bivariate<F>, x: &str, q: &str) -> String {
    let fmt_poly = |p: &Polynomial<RF<F>>| {
        let mut terms = Vec::new();
        for (i, c) in p.coeffs().iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = c.fmt_var(q);
            let cs = if cs.contains([' ', '/']) && i > 0 { format!("({cs})") } else { cs };
            terms.push(match i {
                0 => cs,
                1 if cs == "1" => x.to_string(),
                1 => format!("{cs}*{x}"),
                _ if cs == "1" => format!("{x}^{i}"),
                _ => format!("{cs}*{x}^{i}"),
            });
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    };
    let n = fmt_poly(f.numer());
    if f.is_polynomial() && f.denom().coeff(0).is_one() {
        return n;
    }
    format!("({n})/({})", fmt_poly(f.denom()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValuationProfile {
    pub valuations: Vec<Valuation>,
    pub min_valuation: Option<i64>,
}

impl ValuationProfile {
    pub fn new(valuations: Vec<Valuation>) -> Result<Self, ValuationError> {
        if let Some(i) = valuations.iter().position(|v| *v == Valuation::Undecided) {
            return Err(ValuationError::Undecided(i));
        }
        let min_valuation = valuations.iter().filter_map(|v| v.finite()).min();
        Ok(ValuationProfile {
            valuations,
            min_valuation,
        })
    }

    pub fn of_companion<F: Field>(c: &CompanionConnection<RF<F>>) -> Self {
        Self::new(c.last_column().iter().map(gauss_valuation).collect()).unwrap()
    }

    pub fn of_series<F: Field>(column: &[TruncatedLaurentSeries<F>]) -> Result<Self, ValuationError> {
        Self::new(column.iter().map(q_valuation_series).collect())
    }
}

/// Lower convex hull of `(m, ν(f_m))` for `m < r` together with `(r, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygon {
    pub rank: usize,
    pub vertices: Vec<(usize, i64)>,
}

impl NewtonPolygon {
    pub fn slopes(&self) -> Vec<Rational> {
        self.vertices
            .windows(2)
            .map(|w| {
                Rational::new(
                    (w[1].1 - w[0].1).into(),
                    ((w[1].0 - w[0].0) as i64).into(),
                )
            })
            .collect()
    }

    /// Smallest valuation `s` of an eigenvalue, i.e. `ℓ = |q|^s`: minus the
    /// slope of the segment ending at `(r, 0)`. `None` when every `f_m`
    /// vanishes (all eigenvalues are zero).
    pub fn eigenvalue_valuation(&self) -> Option<Rational> {
        self.slopes().last().map(|s| -s.clone())
    }
}

pub fn newton_polygon(profile: &ValuationProfile) -> NewtonPolygon {
    let r = profile.valuations.len();
    let mut points: Vec<(usize, i64)> = profile
        .valuations
        .iter()
        .enumerate()
        .filter_map(|(m, v)| v.finite().map(|v| (m, v)))
        .collect();
    points.push((r, 0));
    let cross = |o: (usize, i64), a: (usize, i64), b: (usize, i64)| {
        let (ax, ay) = (a.0 as i128 - o.0 as i128, (a.1 - o.1) as i128);
        let (bx, by) = (b.0 as i128 - o.0 as i128, (b.1 - o.1) as i128);
        ax * by - ay * bx
    };
    let mut hull: Vec<(usize, i64)> = Vec::new();
    for pt in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    NewtonPolygon {
        rank: r,
        vertices: hull,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonvanishingPrediction {
    pub predicted: bool,
    pub reason: String,
    pub profile: ValuationProfile,
    pub polygon: NewtonPolygon,
}

/// Predicts `ψ_p ≠ 0` exactly when some `f_m` has negative valuation, after
/// checking `p > r`, ν-integrality of `D` on `x`, and `D^p = D`.
pub fn predict_nonvanishing<F: Field>(
    c: &CompanionConnection<RF<F>>,
    p: u64,
) -> Result<NonvanishingPrediction, ValuationError> {
    let r = c.rank();
    if p <= r as u64 {
        return Err(ValuationError::PrimeTooSmall { p, r });
    }
    let d = c.derivation();
    let nu = check_nu_integrality(d, &[RF::x()]);
    if let Some(w) = nu.witness {
        return Err(ValuationError::NotNuIntegral {
            alpha: w.alpha,
            alpha_valuation: w.alpha_valuation,
            image: w.image_valuation,
        });
    }
    if &d.twist_multiplier(p) != d.multiplier() {
        return Err(ValuationError::FrobeniusIncompatible(p));
    }
    let profile = ValuationProfile::of_companion(c);
    let polygon = newton_polygon(&profile);
    let predicted = profile.min_valuation.is_some_and(|m| m < 0);
    let reason = match profile.min_valuation {
        Some(m) if m < 0 => format!("an entry has q-adic valuation {m} < 0"),
        Some(m) => format!("all entries are q-integral (minimum valuation {m}); no claim"),
        None => "all entries vanish; no claim".to_string(),
    };
    Ok(NonvanishingPrediction {
        predicted,
        reason,
        profile,
        polygon,
    })
}

/// Computes `ψ_p` exactly over `κ(q)(x)` and reports whether it is nonzero.
pub fn verify_prediction<F: Field>(c: &CompanionConnection<RF<F>>, p: u64) -> bool {
    !psi_matrix(&c.to_connection(), p).is_zero()
}

/// Reduction of a companion over `ℚ(q)(x)` modulo `p`.
pub fn reduce_companion(
    c: &CompanionConnection<RF<Rational>>,
    p: u64,
) -> Option<CompanionConnection<RF<pcurv_exact::Fp>>> {
    let red = |e: &Bivariate<Rational>| {
        e.try_map(|a| a.try_map(|b| pcurv_exact::Fp::from_rational(b, p)))
    };
    let column: Option<Vec<_>> = c.last_column().iter().map(red).collect();
    let u = red(c.derivation().multiplier())?;
    let d = Derivation::new(c.derivation().variable(), u).ok()?;
    CompanionConnection::new(column?, d).ok()
}
