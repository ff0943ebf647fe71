//! Cyclotomic polynomials and root-of-unity order detection over ℚ.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::Polynomial;

type QPoly = Polynomial<BigRational>;

pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Every `n` with `φ(n) ≤ d`, ascending. Since `φ(n) ≥ √(n/2)`, the search
/// stops at `2d²`.
pub fn orders_with_totient_at_most(d: u64) -> Vec<u64> {
    let bound = (2 * d * d).max(2);
    (1..=bound).filter(|&n| euler_phi(n) <= d).collect()
}

/// `Φ_n` as a polynomial over ℚ.
pub fn cyclotomic_polynomial(n: u64) -> QPoly {
    assert!(n >= 1);
    let mut phi = x_pow_minus_one(n);
    for d in 1..n {
        if n % d == 0 {
            phi = phi.exact_div(&cyclotomic_polynomial(d)).expect("Φ_d divides x^n - 1");
        }
    }
    phi
}

fn x_pow_minus_one(n: u64) -> QPoly {
    let mut cs = vec![BigRational::zero(); n as usize + 1];
    cs[0] = -BigRational::one();
    cs[n as usize] = BigRational::one();
    Polynomial::new(cs)
}

/// Whether `m` divides `x^n - 1`, computed as `x^n mod m == 1`.
pub fn divides_x_pow_minus_one(m: &QPoly, n: u64) -> bool {
    match m.degree() {
        None => false,
        Some(0) => true,
        Some(_) => {
            let r = Polynomial::x().pow_mod(n as u128, m);
            r == Polynomial::one()
        }
    }
}

/// For an irreducible `m`: the smallest `n` with `m | x^n - 1`, if any.
///
/// Only `n` with `φ(n) ≤ deg m` can occur, since a root of `m` of exact
/// order `n` has degree `φ(n)`.
pub fn root_of_unity_order(m: &QPoly) -> Option<u64> {
    let d = m.degree()? as u64;
    if d == 0 {
        return None;
    }
    orders_with_totient_at_most(d)
        .into_iter()
        .find(|&n| divides_x_pow_minus_one(m, n))
}

/// For a squarefree `s`: the least `n` such that every root of `s` is an
/// `n`-th root of unity, found by peeling off cyclotomic factors.
pub fn common_unity_order(s: &QPoly) -> Option<u64> {
    let d = s.degree()? as u64;
    let mut rest = s.monic();
    let mut order = 1u64;
    for n in orders_with_totient_at_most(d) {
        if rest.degree() == Some(0) {
            break;
        }
        let phi = cyclotomic_polynomial(n);
        let g = rest.gcd(&phi);
        if g.degree().unwrap_or(0) > 0 {
            rest = rest.exact_div(&g).unwrap();
            order = order.lcm(&n);
        }
    }
    (rest.degree() == Some(0)).then_some(order)
}

/// `m(x)` has integer coefficients.
pub fn has_integer_coefficients(m: &QPoly) -> bool {
    m.coeffs().iter().all(|c| c.is_integer())
}
