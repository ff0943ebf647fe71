//! The scalar abstraction every algebraic container in this crate is generic over.

use std::fmt;
use std::ops::{Div, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Polynomial;

/// A commutative field with exact arithmetic.
///
/// Zero tests are exact; there is no tolerance anywhere. `Zero`/`One` come from
/// `num-traits`, so implementors whose elements carry runtime context (a prime
/// modulus, a parent number field) return context-free constants there and adopt
/// the context of the other operand on first contact.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
{
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    /// Image of an integer under the canonical ring map.
    fn from_i64(n: i64) -> Self;

    /// Image of an arbitrary-precision integer.
    fn from_bigint(n: &BigInt) -> Self {
        const CHUNK: u64 = 1_000_000_000_000_000_000;
        let neg = n.is_negative();
        let digits = n.abs().to_u64_digits().1;
        if digits.is_empty() {
            return Self::zero();
        }
        // Rebuild from base-2^64 limbs via a base that fits in an i64.
        let mut value = Self::zero();
        let limb_base = Self::from_i64(1i64 << 32) * Self::from_i64(1i64 << 32);
        for &limb in digits.iter().rev() {
            let hi = (limb / CHUNK) as i64;
            let lo = (limb % CHUNK) as i64;
            let limb_value = Self::from_i64(hi) * Self::from_i64(CHUNK as i64) + Self::from_i64(lo);
            value = value * limb_base.clone() + limb_value;
        }
        if neg {
            -value
        } else {
            value
        }
    }

    /// A faster monic gcd for polynomials over this field, when one exists.
    fn poly_gcd(_a: &Polynomial<Self>, _b: &Polynomial<Self>) -> Option<Polynomial<Self>> {
        None
    }

    /// A faster product of nonempty coefficient vectors, when one exists.
    fn poly_mul(_a: &[Self], _b: &[Self]) -> Option<Vec<Self>> {
        None
    }

    /// Whether the element carries its runtime context (modulus, parent field).
    fn is_bound(&self) -> bool {
        true
    }

    /// Whether two bound elements live in the same field.
    fn same_context(&self, _other: &Self) -> bool {
        true
    }

    /// `self` raised to a nonnegative power by repeated squaring.
    fn pow_u64(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base.clone();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Field for BigRational {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn poly_gcd(a: &Polynomial<Self>, b: &Polynomial<Self>) -> Option<Polynomial<Self>> {
        Some(crate::qpoly::gcd(a, b))
    }

    fn poly_mul(a: &[Self], b: &[Self]) -> Option<Vec<Self>> {
        Some(crate::qpoly::mul(a, b))
    }
}

/// Parses `"a"` or `"a/b"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Renders a rational as `"num/den"`, or `"num"` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
