//! Rational functions in one variable, kept in lowest terms with monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::field::Field;
use crate::poly::Polynomial;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<F> {
    num: Polynomial<F>,
    den: Polynomial<F>,
}

impl<F: Field> RationalFunction<F> {
    /// `num/den` reduced to lowest terms. Panics on a zero denominator; see
    /// [`RationalFunction::try_new`].
    pub fn new(num: Polynomial<F>, den: Polynomial<F>) -> Self {
        Self::try_new(num, den).expect("rational function with zero denominator")
    }

    pub fn try_new(num: Polynomial<F>, den: Polynomial<F>) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::zero());
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        };
        let lc_inv = den.leading().unwrap().inv().unwrap();
        Some(RationalFunction {
            num: num.scale(&lc_inv),
            den: den.scale(&lc_inv),
        })
    }

    pub fn from_poly(p: Polynomial<F>) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: F) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn x() -> Self {
        Self::from_poly(Polynomial::x())
    }

    pub fn numer(&self) -> &Polynomial<F> {
        &self.num
    }

    pub fn denom(&self) -> &Polynomial<F> {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// The constant value when the function has degree zero.
    pub fn as_constant(&self) -> Option<F> {
        if self.num.is_zero() {
            return Some(F::zero());
        }
        (self.num.degree() == Some(0) && self.is_polynomial()).then(|| self.num.coeff(0))
    }

    /// `d/dx` by the quotient rule.
    pub fn derivative(&self) -> Self {
        if self.is_polynomial() {
            return Self::from_poly(self.num.derivative());
        }
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::new(top, &self.den * &self.den)
    }

    /// Order of vanishing at the origin (negative for a pole); `None` for zero.
    pub fn order_at_zero(&self) -> Option<i64> {
        let n = self.num.low_degree()? as i64;
        let d = self.den.low_degree().expect("nonzero denominator") as i64;
        Some(n - d)
    }

    pub fn eval(&self, x: &F) -> Option<F> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// Coefficient-wise map of numerator and denominator; `None` if a
    /// coefficient fails to map or the image denominator vanishes.
    pub fn try_map<G: Field>(&self, f: impl Fn(&F) -> Option<G>) -> Option<RationalFunction<G>> {
        let num = self.num.try_map(&f)?;
        let den = self.den.try_map(&f)?;
        RationalFunction::try_new(num, den)
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> RationalFunction<G> {
        RationalFunction::new(self.num.map(&f), self.den.map(&f))
    }

    pub fn scale(&self, c: &F) -> Self {
        RationalFunction {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn fmt_var(&self, var: &str) -> String {
        self.fmt_with(var, &|c: &F| c.to_string())
    }

    pub fn fmt_with(&self, var: &str, coeff: &dyn Fn(&F) -> String) -> String {
        let n = self.num.fmt_with(var, coeff);
        if self.is_polynomial() {
            return n;
        }
        let d = self.den.fmt_with(var, coeff);
        let wrap = |s: String, always: bool| {
            if always || s.contains([' ', '*', '/']) {
                format!("({s})")
            } else {
                s
            }
        };
        let n = wrap(n, false);
        let d = wrap(d, false);
        format!("{n}/{d}")
    }
}

impl<F: Field> fmt::Display for RationalFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_var("x"))
    }
}

impl<F: Field> Zero for RationalFunction<F> {
    fn zero() -> Self {
        RationalFunction {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl<F: Field> One for RationalFunction<F> {
    fn one() -> Self {
        RationalFunction {
            num: Polynomial::one(),
            den: Polynomial::one(),
        }
    }
}

impl<'a, F: Field> Add<&'a RationalFunction<F>> for &'a RationalFunction<F> {
    type Output = RationalFunction<F>;
    fn add(self, rhs: &'a RationalFunction<F>) -> RationalFunction<F> {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RationalFunction::new(&self.num + &rhs.num, self.den.clone());
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::new(num, &self.den * &rhs.den)
    }
}

impl<'a, F: Field> Sub<&'a RationalFunction<F>> for &'a RationalFunction<F> {
    type Output = RationalFunction<F>;
    fn sub(self, rhs: &'a RationalFunction<F>) -> RationalFunction<F> {
        self + &(-rhs)
    }
}

impl<'a, F: Field> Mul<&'a RationalFunction<F>> for &'a RationalFunction<F> {
    type Output = RationalFunction<F>;
    fn mul(self, rhs: &'a RationalFunction<F>) -> RationalFunction<F> {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        // Scalar factors skip the gcd, which also keeps modulus-free
        // integer constants from ever being inverted.
        for (c, other) in [(self, rhs), (rhs, self)] {
            if let Some(k) = c.as_constant() {
                let out = other.scale(&k);
                return if out.num.is_zero() { RationalFunction::zero() } else { out };
            }
        }
        if self.is_polynomial() && rhs.is_polynomial() {
            // Both denominators are the unit polynomial.
            return RationalFunction {
                num: &self.num * &rhs.num,
                den: Polynomial::one(),
            };
        }
        // Cross-cancel first to keep the intermediate degrees down.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = self.num.exact_div(&g1).unwrap();
        let d2 = rhs.den.exact_div(&g1).unwrap();
        let n2 = rhs.num.exact_div(&g2).unwrap();
        let d1 = self.den.exact_div(&g2).unwrap();
        RationalFunction::new(&n1 * &n2, &d1 * &d2)
    }
}

impl<'a, F: Field> Div<&'a RationalFunction<F>> for &'a RationalFunction<F> {
    type Output = RationalFunction<F>;
    fn div(self, rhs: &'a RationalFunction<F>) -> RationalFunction<F> {
        self * &rhs.inv().expect("rational function division by zero")
    }
}

impl<F: Field> Neg for &RationalFunction<F> {
    type Output = RationalFunction<F>;
    fn neg(self) -> RationalFunction<F> {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl<F: Field> Neg for RationalFunction<F> {
    type Output = RationalFunction<F>;
    fn neg(self) -> RationalFunction<F> {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl<F: Field> $tr for RationalFunction<F> {
            type Output = RationalFunction<F>;
            fn $m(self, rhs: RationalFunction<F>) -> RationalFunction<F> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl<F: Field> Field for RationalFunction<F> {
    fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(RationalFunction::new(self.den.clone(), self.num.clone()))
    }

    fn from_i64(n: i64) -> Self {
        Self::constant(F::from_i64(n))
    }

    fn is_bound(&self) -> bool {
        self.num.coeffs().iter().any(|c| c.is_bound())
    }

    fn same_context(&self, other: &Self) -> bool {
        let a = self.num.coeffs().iter().find(|c| c.is_bound());
        let b = other.num.coeffs().iter().find(|c| c.is_bound());
        match (a, b) {
            (Some(a), Some(b)) => a.same_context(b),
            _ => true,
        }
    }
}
