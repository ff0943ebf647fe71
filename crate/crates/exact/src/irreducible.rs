//! Irreducibility over ℚ.
//!
//! Cheap filters first (degree, squarefreeness, rational roots), then
//! factor-degree patterns modulo several primes. Polynomials such as
//! `X^4 - 8X^2 + 36` split modulo every prime, so up to degree
//! [`SUBSET_SEARCH_MAX_DEGREE`] the remaining candidates are settled by
//! recombining certified complex roots into would-be integer factors.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::embedding::{isolate_roots, sqrt_bounds, ComplexRational, RootDisk};
use crate::error::ExactError;
use crate::poly::Polynomial;
use crate::prime_field::{is_prime, Fp};

type Q = BigRational;
type QPoly = Polynomial<Q>;

pub const SUBSET_SEARCH_MAX_DEGREE: usize = 8;
const PATTERN_PRIMES: usize = 24;
const ROOT_TEST_MAX: u64 = 1_000_000_000_000;
const ROOT_PRECISION_CAP: u32 = 1 << 14;

/// Primitive integer coefficients of a nonzero polynomial, with positive lead.
pub fn primitive_integer_coeffs(f: &QPoly) -> Vec<BigInt> {
    let lcm = f
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = f
        .coeffs()
        .iter()
        .map(|c| (c * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let content = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let sign = if ints.last().unwrap().is_negative() { -1 } else { 1 };
    ints.into_iter().map(|c| c / &content * sign).collect()
}

fn int_poly(cs: &[BigInt]) -> QPoly {
    Polynomial::new(cs.iter().map(|c| Q::from_integer(c.clone())).collect())
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > ROOT_TEST_MAX {
        return None;
    }
    let mut out = Vec::new();
    let mut k = 1u64;
    while k * k <= n {
        if n % k == 0 {
            out.push(BigInt::from(k));
            if k * k != n {
                out.push(BigInt::from(n / k));
            }
        }
        k += 1;
    }
    Some(out)
}

/// Some rational root, if the candidate set is small enough to enumerate.
fn rational_root(cs: &[BigInt]) -> Option<Option<Q>> {
    if cs[0].is_zero() {
        return Some(Some(Q::zero()));
    }
    let num = divisors(&cs[0])?;
    let den = divisors(cs.last().unwrap())?;
    let f = int_poly(cs);
    for a in &num {
        for b in &den {
            for s in [a.clone(), -a.clone()] {
                let r = Q::new(s, b.clone());
                if f.eval(&r).is_zero() {
                    return Some(Some(r));
                }
            }
        }
    }
    Some(None)
}

/// Degrees of the irreducible factors of a squarefree polynomial over 𝔽_p.
pub fn distinct_degree_pattern(f: &Polynomial<Fp>, p: u64) -> Vec<usize> {
    let one = Fp::new(1, p);
    let x = Polynomial::x_with(one);
    let mut rest = f.monic();
    let mut h = x.clone();
    let mut degrees = Vec::new();
    let mut i = 1;
    while let Some(d) = rest.degree() {
        if d < 2 * i {
            if d > 0 {
                degrees.push(d);
            }
            break;
        }
        h = h.pow_mod(p as u128, &rest);
        let g = rest.gcd(&(&h - &x));
        if let Some(gd) = g.degree() {
            if gd > 0 {
                degrees.extend(std::iter::repeat(i).take(gd / i));
                rest = rest.exact_div(&g).unwrap();
                h = h.rem(&rest);
            }
        }
        i += 1;
    }
    degrees
}

fn subset_sums(parts: &[usize]) -> BTreeSet<usize> {
    let mut sums = BTreeSet::from([0usize]);
    for &p in parts {
        let next: Vec<usize> = sums.iter().map(|s| s + p).collect();
        sums.extend(next);
    }
    sums
}

/// Degrees in `1..d` a rational factor could have, after mod-p patterns.
fn possible_factor_degrees(cs: &[BigInt]) -> BTreeSet<usize> {
    let d = cs.len() - 1;
    let mut possible: BTreeSet<usize> = (1..d).collect();
    let f = int_poly(cs);
    let lead = cs.last().unwrap();
    let mut used = 0;
    let mut p = 2u64;
    while used < PATTERN_PRIMES && !possible.is_empty() && p < 10_000 {
        p += 1;
        if !is_prime(p) || (lead % BigInt::from(p)).is_zero() {
            continue;
        }
        let fp = f.map(|c| Fp::from_rational(c, p).unwrap());
        if fp.gcd(&fp.derivative()).degree() != Some(0) {
            continue;
        }
        used += 1;
        let sums = subset_sums(&distinct_degree_pattern(&fp, p));
        possible.retain(|k| sums.contains(k));
    }
    possible
}

/// Elementary symmetric functions of the subset, with per-coefficient error bounds.
fn subset_product(disks: &[&RootDisk], bits: u32) -> (Vec<ComplexRational>, Vec<Q>) {
    let mut center = vec![ComplexRational::real(Q::one())];
    let mut upper = vec![Q::one()];
    let mut lower = vec![Q::one()];
    for dk in disks {
        let (_, abs_hi) = sqrt_bounds(&dk.center.norm_sq(), bits);
        let loose = &abs_hi + &dk.radius;
        // multiply running products by (Y - c), resp. (Y + |c|) bounds
        let neg_c = ComplexRational::new(-dk.center.re.clone(), -dk.center.im.clone());
        let mut next_c = vec![ComplexRational::zero(); center.len() + 1];
        let mut next_u = vec![Q::zero(); upper.len() + 1];
        let mut next_l = vec![Q::zero(); lower.len() + 1];
        for (k, c) in center.iter().enumerate() {
            next_c[k + 1] = next_c[k + 1].add(c);
            next_c[k] = next_c[k].add(&c.mul(&neg_c));
            next_u[k + 1] += &upper[k];
            next_u[k] += &upper[k] * &loose;
            next_l[k + 1] += &lower[k];
            next_l[k] += &lower[k] * &abs_hi;
        }
        center = next_c;
        upper = next_u;
        lower = next_l;
    }
    let err = upper.iter().zip(&lower).map(|(u, l)| u - l).collect();
    (center, err)
}

enum Candidate {
    Integer(Vec<BigInt>),
    NotInteger,
    Ambiguous,
}

fn round_candidate(center: &[ComplexRational], err: &[Q]) -> Candidate {
    let quarter = Q::new(1.into(), 4.into());
    let mut out = Vec::with_capacity(center.len());
    for (c, e) in center.iter().zip(err) {
        let n = c.re.round();
        let dist_re = (&c.re - &n).abs();
        let dist_im = c.im.abs();
        if &dist_re + e < quarter && &dist_im + e < quarter {
            out.push(n.to_integer());
        } else if dist_im > *e || (dist_re > *e && e < &quarter) {
            return Candidate::NotInteger;
        } else {
            return Candidate::Ambiguous;
        }
    }
    Candidate::Integer(out)
}

/// Searches root subsets for a rational factor of the monic integer `g`.
fn subset_search(g: &[BigInt], sizes: &BTreeSet<usize>) -> Result<bool, ExactError> {
    let gq = int_poly(g);
    let d = g.len() - 1;
    let mut bits = 64u32;
    loop {
        let disks = isolate_roots(&gq, bits, ROOT_PRECISION_CAP)?;
        let mut ambiguous = false;
        for &k in sizes.iter().filter(|&&k| 2 * k <= d) {
            for subset in combinations(d, k) {
                let chosen: Vec<&RootDisk> = subset.iter().map(|&i| &disks[i]).collect();
                let (center, err) = subset_product(&chosen, bits);
                match round_candidate(&center, &err) {
                    Candidate::Integer(cs) => {
                        let h = int_poly(&cs);
                        if h.divides(&gq) {
                            return Ok(false);
                        }
                    }
                    Candidate::NotInteger => {}
                    Candidate::Ambiguous => ambiguous = true,
                }
            }
        }
        if !ambiguous {
            return Ok(true);
        }
        if bits >= ROOT_PRECISION_CAP {
            return Err(ExactError::IrreducibilityUndecided(gq.fmt_var("X")));
        }
        bits *= 2;
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Decides irreducibility over ℚ of a nonzero polynomial.
pub fn is_irreducible(f: &QPoly) -> Result<bool, ExactError> {
    let d = match f.degree() {
        None | Some(0) => return Ok(false),
        Some(1) => return Ok(true),
        Some(d) => d,
    };
    let cs = primitive_integer_coeffs(f);
    let fq = int_poly(&cs);
    if fq.gcd(&fq.derivative()).degree() != Some(0) {
        return Ok(false);
    }
    match rational_root(&cs) {
        Some(Some(_)) => return Ok(false),
        Some(None) if d <= 3 => return Ok(true),
        _ => {}
    }
    let sizes = possible_factor_degrees(&cs);
    if sizes.is_empty() {
        return Ok(true);
    }
    if d > SUBSET_SEARCH_MAX_DEGREE {
        return Err(ExactError::IrreducibilityUndecided(f.fmt_var("X")));
    }
    // g(Y) = a^(d-1) f(Y/a) is monic with integer coefficients.
    let a = cs[d].clone();
    let g: Vec<BigInt> = (0..=d)
        .map(|i| {
            if i == d {
                BigInt::one()
            } else {
                &cs[i] * num_traits::pow(a.clone(), d - 1 - i)
            }
        })
        .collect();
    subset_search(&g, &sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> QPoly {
        Polynomial::from_i64s(cs)
    }

    #[test]
    fn small_cases() {
        assert!(is_irreducible(&p(&[-2, 0, 1])).unwrap());
        assert!(!is_irreducible(&p(&[-1, 0, 1])).unwrap());
        assert!(is_irreducible(&p(&[-1, -1, 1])).unwrap());
        assert!(!is_irreducible(&p(&[0, 0, 1])).unwrap());
        assert!(is_irreducible(&p(&[1, 1, 1, 1, 1])).unwrap());
        assert!(is_irreducible(&p(&[-2, 0, 0, 1])).unwrap());
    }

    #[test]
    fn split_mod_every_prime() {
        // minimal polynomial of i + √5
        assert!(is_irreducible(&p(&[36, 0, -8, 0, 1])).unwrap());
        // X^4 + 1 = Φ_8
        assert!(is_irreducible(&p(&[1, 0, 0, 0, 1])).unwrap());
        // (X^2 - 2)(X^2 - 3) has no rational root but is reducible
        assert!(!is_irreducible(&(&p(&[-2, 0, 1]) * &p(&[-3, 0, 1]))).unwrap());
    }

    #[test]
    fn non_monic_inputs() {
        // (2X^2 + 1)(3X^2 - 5)
        let f = &p(&[1, 0, 2]) * &p(&[-5, 0, 3]);
        assert!(!is_irreducible(&f).unwrap());
        assert!(is_irreducible(&p(&[1, 0, 0, 0, 2])).unwrap());
    }

    #[test]
    fn factor_patterns() {
        // X^4 + X + 1 mod 2 is irreducible
        let f = p(&[1, 1, 0, 0, 1]).map(|c| Fp::from_rational(c, 2).unwrap());
        assert_eq!(distinct_degree_pattern(&f, 2), vec![4]);
        // X^3 - X mod 3 splits completely
        let g = p(&[0, -1, 0, 1]).map(|c| Fp::from_rational(c, 3).unwrap());
        assert_eq!(distinct_degree_pattern(&g, 3), vec![1, 1, 1]);
    }
}
