//! Fast paths for ℚ[x]: products over a common integer denominator, and a
//! modular gcd (images modulo word-sized primes, Chinese remaindering, trial
//! division to confirm).

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::poly::Polynomial;
use crate::prime_field::is_prime;
use crate::Rational;

/// Integer polynomial with content one, proportional to `f`.
fn primitive_integer(f: &Polynomial<Rational>) -> Vec<BigInt> {
    let (ints, _) = clear_denominators(f.coeffs());
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    ints.into_iter().map(|c| c / &content).collect()
}

/// Integer numerators over the least common denominator.
fn clear_denominators(f: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let lcm = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints = f.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    (ints, lcm)
}

/// Coefficients of the product, with one normalization per output coefficient.
pub(crate) fn mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (ia, da) = clear_denominators(a);
    let (ib, db) = clear_denominators(b);
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in ia.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in ib.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    let d = da * db;
    out.into_iter().map(|c| Rational::new(c, d.clone())).collect()
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn reduce(f: &[BigInt], p: u64) -> Vec<u64> {
    let pb = BigInt::from(p);
    let mut v: Vec<u64> = f.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
    trim(&mut v);
    v
}

fn make_monic(v: &mut [u64], p: u64) {
    if let Some(&lc) = v.last() {
        let inv = inv_mod(lc, p);
        for c in v.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
    }
}

/// `a mod b` for monic `b`.
fn rem_monic(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let db = b.len() - 1;
    while a.len() > db {
        let c = *a.last().unwrap();
        let shift = a.len() - 1 - db;
        if c != 0 {
            for (j, &bc) in b.iter().enumerate() {
                let t = mul_mod(c, bc, p);
                a[shift + j] = (a[shift + j] + p - t) % p;
            }
        }
        a.pop();
    }
    trim(&mut a);
    a
}

fn gcd_mod(a: Vec<u64>, b: Vec<u64>, p: u64) -> Vec<u64> {
    let (mut a, mut b) = (a, b);
    make_monic(&mut a, p);
    make_monic(&mut b, p);
    while !b.is_empty() {
        let mut r = rem_monic(a, &b, p);
        make_monic(&mut r, p);
        a = b;
        b = r;
    }
    a
}

fn search_primes() -> impl Iterator<Item = u64> {
    ((1u64 << 60)..(1u64 << 61)).rev().filter(|&n| n % 2 == 1 && is_prime(n))
}

/// Word-sized primes just below `2^61`; the first few are cached.
fn primes_below_2_61() -> impl Iterator<Item = u64> {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    let cached = CACHE.get_or_init(|| search_primes().take(64).collect());
    let last = *cached.last().unwrap();
    cached.iter().copied().chain(search_primes().skip_while(move |&p| p >= last))
}

fn symmetric(v: &BigInt, m: &BigInt) -> BigInt {
    if v * 2 > *m {
        v - m
    } else {
        v.clone()
    }
}

/// Monic gcd of two rational polynomials.
pub(crate) fn gcd(a: &Polynomial<Rational>, b: &Polynomial<Rational>) -> Polynomial<Rational> {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.degree() == Some(0) || b.degree() == Some(0) {
        return Polynomial::one();
    }
    let (ia, ib) = (primitive_integer(a), primitive_integer(b));
    let (la, lb) = (ia.last().unwrap().clone(), ib.last().unwrap().clone());
    let lc = la.gcd(&lb);
    let mut deg = usize::MAX;
    let mut acc: Vec<BigInt> = Vec::new();
    let mut modulus = BigInt::one();
    let mut previous: Option<Vec<BigInt>> = None;
    for p in primes_below_2_61() {
        let pb = BigInt::from(p);
        if (&la % &pb).is_zero() || (&lb % &pb).is_zero() {
            continue;
        }
        let mut g = gcd_mod(reduce(&ia, p), reduce(&ib, p), p);
        let d = g.len() - 1;
        if d == 0 {
            return Polynomial::one();
        }
        if d > deg {
            continue;
        }
        if d < deg {
            deg = d;
            acc = vec![BigInt::zero(); d + 1];
            modulus = BigInt::one();
            previous = None;
        }
        let l = lc.mod_floor(&pb).to_u64().unwrap();
        for c in g.iter_mut() {
            *c = mul_mod(*c, l, p);
        }
        let m_inv = inv_mod(modulus.mod_floor(&pb).to_u64().unwrap(), p);
        for (x, &r) in acc.iter_mut().zip(&g) {
            let xr = x.mod_floor(&pb).to_u64().unwrap();
            let t = mul_mod((r + p - xr) % p, m_inv, p);
            *x += &modulus * BigInt::from(t);
        }
        modulus *= &pb;
        let lifted: Vec<BigInt> = acc.iter().map(|x| symmetric(x, &modulus)).collect();
        if previous.as_ref() == Some(&lifted) {
            let cand = Polynomial::new(lifted.iter().map(|c| Rational::from_integer(c.clone())).collect());
            if a.rem(&cand).is_zero() && b.rem(&cand).is_zero() {
                return cand.monic();
            }
        }
        previous = Some(lifted);
    }
    unreachable!("prime supply exhausted")
}
