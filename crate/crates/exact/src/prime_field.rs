//! Residue arithmetic modulo a runtime prime.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::field::Field;

/// An element of 𝔽_p for a prime `p` chosen at runtime.
///
/// Constants produced without a modulus in scope (`zero()`, `one()`,
/// `from_i64`) are *unbound*: they hold a plain integer and take the modulus
/// of whatever bound element they meet. Unbound-only arithmetic is integer
/// arithmetic, so code working in characteristic p must seed its inputs with
/// bound values (see [`Fp::new`] and [`Fp::bind`]).
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    value: i64,
    modulus: u64,
}

impl Fp {
    /// The residue of `value` modulo `p`. `p` must be a prime below 2^31.
    pub fn new(value: i64, p: u64) -> Self {
        debug_assert!(p >= 2 && p < (1 << 31));
        Fp {
            value: value.rem_euclid(p as i64),
            modulus: p,
        }
    }

    /// Reduces a rational modulo `p`; `None` when `p` divides the denominator.
    pub fn from_rational(q: &BigRational, p: u64) -> Option<Self> {
        let pb = BigInt::from(p);
        let den = q.denom().mod_floor(&pb).to_i64()?;
        if den == 0 {
            return None;
        }
        let num = q.numer().mod_floor(&pb).to_i64()?;
        Some(Fp::new(num, p) / Fp::new(den, p))
    }

    /// Canonical representative in `[0, p)`, or the raw integer when unbound.
    pub fn value(&self) -> i64 {
        self.value
    }

    /// The modulus, or `None` for an unbound constant.
    pub fn modulus(&self) -> Option<u64> {
        (self.modulus != 0).then_some(self.modulus)
    }

    /// Attaches modulus `p` to an unbound constant; bound values must already agree.
    pub fn bind(self, p: u64) -> Self {
        if self.modulus == 0 {
            Fp::new(self.value, p)
        } else {
            assert_eq!(self.modulus, p, "mixing residues of different primes");
            self
        }
    }

    fn merged_modulus(a: &Fp, b: &Fp) -> u64 {
        match (a.modulus, b.modulus) {
            (0, m) | (m, 0) => m,
            (m, n) => {
                assert_eq!(m, n, "mixing residues of different primes");
                m
            }
        }
    }

    fn combine(a: Fp, b: Fp, op: impl Fn(i128, i128) -> i128) -> Fp {
        let m = Fp::merged_modulus(&a, &b);
        let r = op(a.value as i128, b.value as i128);
        if m == 0 {
            Fp {
                value: i64::try_from(r).expect("unbound residue constant overflow"),
                modulus: 0,
            }
        } else {
            Fp {
                value: r.rem_euclid(m as i128) as i64,
                modulus: m,
            }
        }
    }

    fn pow_mod(base: i64, mut exp: u64, m: u64) -> i64 {
        let m = m as i128;
        let mut b = (base as i128).rem_euclid(m);
        let mut acc: i128 = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            exp >>= 1;
        }
        acc as i64
    }
}

impl PartialEq for Fp {
    fn eq(&self, other: &Self) -> bool {
        match (self.modulus, other.modulus) {
            (0, 0) => self.value == other.value,
            (0, m) => self.value.rem_euclid(m as i64) == other.value,
            (m, 0) => other.value.rem_euclid(m as i64) == self.value,
            (m, n) => m == n && self.value == other.value,
        }
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        Fp::combine(self, rhs, |a, b| a + b)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        Fp::combine(self, rhs, |a, b| a - b)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        Fp::combine(self, rhs, |a, b| a * b)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.modulus == 0 {
            Fp {
                value: -self.value,
                modulus: 0,
            }
        } else {
            Fp::new(-self.value, self.modulus)
        }
    }
}

impl Div for Fp {
    type Output = Fp;
    fn div(self, rhs: Fp) -> Fp {
        let m = Fp::merged_modulus(&self, &rhs);
        let inv = if m == 0 {
            rhs.inv().expect("division by zero in F_p")
        } else {
            rhs.bind(m).inv().expect("division by zero in F_p")
        };
        self * inv
    }
}

impl Zero for Fp {
    fn zero() -> Self {
        Fp { value: 0, modulus: 0 }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fp {
    fn one() -> Self {
        Fp { value: 1, modulus: 0 }
    }
}

impl Field for Fp {
    fn inv(&self) -> Option<Self> {
        if self.modulus == 0 {
            // Only the units of ℤ have a modulus-free inverse.
            return match self.value {
                1 | -1 => Some(*self),
                0 => None,
                v => panic!("cannot invert unbound residue constant {v} without a modulus"),
            };
        }
        if self.value == 0 {
            return None;
        }
        Some(Fp {
            value: Fp::pow_mod(self.value, self.modulus - 2, self.modulus),
            modulus: self.modulus,
        })
    }

    fn from_i64(n: i64) -> Self {
        Fp { value: n, modulus: 0 }
    }

    fn from_bigint(n: &BigInt) -> Self {
        let v = n
            .to_i64()
            .expect("integer too large for an unbound residue; reduce with Fp::from_rational");
        Fp::from_i64(v)
    }

    fn is_bound(&self) -> bool {
        self.modulus != 0
    }

    fn same_context(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }

    fn pow_u64(&self, exp: u64) -> Self {
        if self.modulus == 0 {
            let mut acc = Fp::one();
            for _ in 0..exp {
                acc = acc * *self;
            }
            acc
        } else {
            Fp {
                value: Fp::pow_mod(self.value, exp, self.modulus),
                modulus: self.modulus,
            }
        }
    }
}

/// Deterministic primality test for word-sized integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes in `[lo, hi]`, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&n| is_prime(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermat_little_theorem() {
        for p in primes_in_range(2, 60) {
            for a in 1..p as i64 {
                assert_eq!(Fp::new(a, p).pow_u64(p - 1), Fp::new(1, p));
            }
        }
    }

    #[test]
    fn unbound_constants_adopt_modulus() {
        let a = Fp::new(3, 7);
        assert_eq!((Fp::one() + a).modulus(), Some(7));
        assert_eq!(Fp::from_i64(10) * a, Fp::new(2, 7));
        assert_eq!(Fp::from_i64(8), Fp::new(1, 7));
        assert_eq!(a / Fp::from_i64(3), Fp::new(1, 7));
        assert!(Fp::from_i64(7).bind(7).is_zero());
    }

    #[test]
    fn rational_reduction() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(Fp::from_rational(&half, 5), Some(Fp::new(3, 5)));
        assert_eq!(Fp::from_rational(&half, 2), None);
    }

    #[test]
    fn bigint_embedding_small() {
        let n = BigInt::from(-1000);
        assert_eq!(Fp::from_bigint(&n).bind(101), Fp::new(-1000, 101));
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = primes_in_range(0, 50);
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    #[should_panic(expected = "different primes")]
    fn mixing_moduli_panics() {
        let _ = Fp::new(1, 5) + Fp::new(1, 7);
    }
}
