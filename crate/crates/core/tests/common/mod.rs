#![allow(dead_code)]

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcurv_core::connection::{CompanionConnection, ConnectionMatrix, Derivation};
use pcurv_core::surface_group::Word;
use pcurv_exact::{Field, Fp, Matrix, NumberField, NumberFieldElement, Polynomial, Rational, RationalFunction};

pub type Q = Rational;
pub type RF<F> = RationalFunction<F>;
pub type Nf = NumberFieldElement;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_poly(rng: &mut ChaCha8Rng, deg: usize, bound: i64) -> Polynomial<Q> {
    Polynomial::new((0..=deg).map(|_| Q::from_i64(rng.gen_range(-bound..=bound))).collect())
}

/// Numerator of degree ≤ 2 over a monic denominator `1`, `x + c` or `x² + c`.
pub fn q_rf(rng: &mut ChaCha8Rng) -> RF<Q> {
    let num = int_poly(rng, 2, 4);
    let den = match rng.gen_range(0..3) {
        0 => Polynomial::one(),
        1 => Polynomial::from_i64s(&[rng.gen_range(-3..=3), 1]),
        _ => Polynomial::from_i64s(&[rng.gen_range(1..=3), 0, 1]),
    };
    RF::new(num, den)
}

pub fn q_poly_rf(rng: &mut ChaCha8Rng, deg: usize) -> RF<Q> {
    RF::from_poly(int_poly(rng, deg, 3))
}

pub fn q_matrix(rng: &mut ChaCha8Rng, r: usize) -> Matrix<RF<Q>> {
    let mut m = Matrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            m[(i, j)] = q_rf(rng);
        }
    }
    m
}

pub fn q_derivation(rng: &mut ChaCha8Rng) -> Derivation<Q> {
    if rng.gen_bool(0.5) {
        Derivation::euler("x")
    } else {
        Derivation::plain("x")
    }
}

pub fn q_connection(rng: &mut ChaCha8Rng, r: usize, d: Derivation<Q>) -> ConnectionMatrix<Q> {
    ConnectionMatrix::new(q_matrix(rng, r), d).unwrap()
}

/// A random connection over `𝔽_p(x)`, drawn over `ℚ(x)` and reduced.
pub fn fp_connection(rng: &mut ChaCha8Rng, p: u64, r: usize) -> ConnectionMatrix<Fp> {
    loop {
        let d = q_derivation(rng);
        if let Some(c) = q_connection(rng, r, d).reduce(p) {
            return c;
        }
    }
}

/// An invertible gauge matrix over `𝔽_p(x)`.
pub fn fp_gauge(rng: &mut ChaCha8Rng, p: u64, r: usize) -> Matrix<RF<Fp>> {
    loop {
        let g = q_matrix(rng, r).try_map(|e| e.try_map(|c| Fp::from_rational(c, p)));
        if let Some(g) = g {
            if !g.determinant().is_zero() {
                return g;
            }
        }
    }
}

pub fn fp_one(p: u64) -> RF<Fp> {
    RF::constant(Fp::new(1, p))
}

/// `x·d/dx` on `𝔽_p(q)(x)`.
pub fn fp_euler_over_q(p: u64) -> Derivation<RF<Fp>> {
    Derivation::new("x", RF::from_poly(Polynomial::x_with(fp_one(p)))).unwrap()
}

/// A Laurent polynomial in `q` over `𝔽_p` with terms `q^lo, …, q^hi`.
pub fn fp_laurent(rng: &mut ChaCha8Rng, p: u64, lo: i64, hi: i64) -> RF<Fp> {
    let coeffs: Vec<Fp> = (lo..=hi).map(|_| Fp::new(rng.gen_range(0..p as i64), p)).collect();
    let num = Polynomial::new(coeffs);
    if lo >= 0 {
        RF::from_poly(&num * &Polynomial::monomial(Fp::new(1, p), lo as usize))
    } else {
        RF::new(num, Polynomial::monomial(Fp::new(1, p), (-lo) as usize))
    }
}

/// Rank-2 companion over `𝔽_p(q)(x)` with `f_m = a_m(q) + b_m(q)·x` and at
/// least one entry of negative q-adic valuation.
pub fn negative_companion(rng: &mut ChaCha8Rng, p: u64) -> CompanionConnection<RF<Fp>> {
    let x = RF::from_poly(Polynomial::x_with(fp_one(p)));
    loop {
        let column: Vec<RF<RF<Fp>>> = (0..2)
            .map(|_| {
                let a = fp_laurent(rng, p, -2, 1);
                let b = fp_laurent(rng, p, -1, 1);
                &RF::constant(a) + &(&RF::constant(b) * &x)
            })
            .collect();
        let c = CompanionConnection::new(column, fp_euler_over_q(p)).unwrap();
        let min = pcurv_core::valuation::ValuationProfile::of_companion(&c).min_valuation;
        if min.is_some_and(|m| m < 0) {
            return c;
        }
    }
}

pub fn gaussian_field() -> Arc<NumberField> {
    NumberField::new(Polynomial::from_i64s(&[1, 0, 1])).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng, k: &Arc<NumberField>, bound: i64) -> Nf {
    k.element(vec![
        Q::from_i64(rng.gen_range(-bound..=bound)),
        Q::from_i64(rng.gen_range(-bound..=bound)),
    ])
}

/// `[[a, b], [c, (1 + bc)/a]]` with small Gaussian-integer `a, b, c`.
pub fn sl2_gaussian(rng: &mut ChaCha8Rng, k: &Arc<NumberField>) -> Matrix<Nf> {
    loop {
        let a = gaussian(rng, k, 2);
        if a.is_zero() {
            continue;
        }
        let b = gaussian(rng, k, 2);
        let c = gaussian(rng, k, 2);
        let d = &(&Nf::one() + &(&b * &c)) / &a;
        return Matrix::from_rows(vec![vec![a, b], vec![c, d]]);
    }
}

/// Freely reduced word of length ≤ `max_len` in generators `0..gens`.
pub fn random_word(rng: &mut ChaCha8Rng, gens: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut letters: Vec<(usize, i8)> = Vec::new();
    while letters.len() < len {
        let l = (rng.gen_range(0..gens), if rng.gen_bool(0.5) { 1 } else { -1 });
        if letters.last().is_some_and(|&(g, e)| g == l.0 && e == -l.1) {
            continue;
        }
        letters.push(l);
    }
    Word::new(letters)
}

pub fn mat_product(ms: &[&Matrix<Nf>]) -> Matrix<Nf> {
    ms.iter().fold(Matrix::identity(2), |acc, m| &acc * *m)
}

/// Direct evaluation of a word: product of generator matrices and inverses.
pub fn eval_word(gens: &[Matrix<Nf>], w: &Word) -> Matrix<Nf> {
    w.letters().iter().fold(Matrix::identity(2), |acc, &(g, e)| {
        let m = if e > 0 { gens[g].clone() } else { gens[g].inverse().unwrap() };
        &acc * &m
    })
}

/// `Σ_w w(e_j)` over all `2^p` words in the letters `D` and `A`.
pub fn word_expansion(a: &ConnectionMatrix<Fp>, p: usize) -> Matrix<RF<Fp>> {
    let r = a.rank();
    let mut out = Matrix::zeros(r, r);
    for j in 0..r {
        let mut e = vec![RF::<Fp>::zero(); r];
        e[j] = RF::one();
        for word in 0u32..(1 << p) {
            let mut v = e.clone();
            for bit in 0..p {
                v = if word >> bit & 1 == 1 {
                    a.derivation().apply_vector(&v)
                } else {
                    a.matrix().mul_vec(&v)
                };
            }
            for i in 0..r {
                out[(i, j)] = &out[(i, j)] + &v[i];
            }
        }
    }
    out
}
