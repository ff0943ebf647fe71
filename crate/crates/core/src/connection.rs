//! Connections `∇(D)(v) = Av + D(v)` on trivialized bundles over an affine
//! line, and their p-curvature.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use pcurv_exact::prime_field::primes_in_range;
use pcurv_exact::{Field, Fp, Matrix, Polynomial, Rational, RationalFunction};

type RF<F> = RationalFunction<F>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnectionError {
    #[error("connection matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("derivation multiplier must be nonzero")]
    ZeroDerivation,
    #[error("derivations differ: {0} vs {1}")]
    DerivationMismatch(String, String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{0} is a bad prime for this connection")]
    BadPrime(u64),
    #[error("gauge matrix is singular")]
    SingularGauge,
    #[error("no cyclic vector found in {0} attempts")]
    NoCyclicVector(usize),
}

/// The derivation `u·d/dx` on the rational function field in `variable`.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation<F> {
    variable: String,
    multiplier: RF<F>,
}

impl<F: Field> Derivation<F> {
    pub fn new(variable: impl Into<String>, multiplier: RF<F>) -> Result<Self, ConnectionError> {
        if multiplier.is_zero() {
            return Err(ConnectionError::ZeroDerivation);
        }
        Ok(Derivation {
            variable: variable.into(),
            multiplier,
        })
    }

    /// `x·d/dx`.
    pub fn euler(variable: impl Into<String>) -> Self {
        Self::new(variable, RF::x()).unwrap()
    }

    /// `d/dx`.
    pub fn plain(variable: impl Into<String>) -> Self {
        Self::new(variable, RF::one()).unwrap()
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn multiplier(&self) -> &RF<F> {
        &self.multiplier
    }

    pub fn apply(&self, f: &RF<F>) -> RF<F> {
        if f.is_zero() {
            return RF::zero();
        }
        &self.multiplier * &f.derivative()
    }

    pub fn apply_matrix(&self, m: &Matrix<RF<F>>) -> Matrix<RF<F>> {
        m.map(|e| self.apply(e))
    }

    pub fn apply_vector(&self, v: &[RF<F>]) -> Vec<RF<F>> {
        v.iter().map(|e| self.apply(e)).collect()
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Derivation<G> {
        Derivation {
            variable: self.variable.clone(),
            multiplier: self.multiplier.map(f),
        }
    }

    /// `v = D^(p-1)(u)`: in characteristic `p`, `D^p = (v/u)·D`.
    pub fn twist_multiplier(&self, p: u64) -> RF<F> {
        let mut v = self.multiplier.clone();
        for _ in 1..p {
            v = self.apply(&v);
        }
        v
    }

    pub fn describe(&self) -> String {
        format!("({})*d/d{}", self.multiplier.fmt_var(&self.variable), self.variable)
    }
}

impl Derivation<Rational> {
    /// Reduction modulo `p`; `None` unless `u` and its leading coefficient
    /// survive.
    pub fn reduce(&self, p: u64) -> Option<Derivation<Fp>> {
        let u = self.multiplier.try_map(|c| Fp::from_rational(c, p))?;
        if u.numer().degree() != self.multiplier.numer().degree() {
            return None;
        }
        Some(Derivation {
            variable: self.variable.clone(),
            multiplier: u,
        })
    }
}

/// `D^(p-1)(u)` computed over 𝔽_p.
pub fn frobenius_twist_multiplier(
    d: &Derivation<Rational>,
    p: u64,
) -> Result<RF<Fp>, ConnectionError> {
    let dp = d.reduce(p).ok_or(ConnectionError::BadPrime(p))?;
    Ok(dp.twist_multiplier(p))
}

/// A connection matrix together with its derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionMatrix<F> {
    matrix: Matrix<RF<F>>,
    derivation: Derivation<F>,
}

impl<F: Field> ConnectionMatrix<F> {
    pub fn new(matrix: Matrix<RF<F>>, derivation: Derivation<F>) -> Result<Self, ConnectionError> {
        if !matrix.is_square() {
            return Err(ConnectionError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(ConnectionMatrix { matrix, derivation })
    }

    pub fn matrix(&self) -> &Matrix<RF<F>> {
        &self.matrix
    }

    pub fn derivation(&self) -> &Derivation<F> {
        &self.derivation
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    /// `∇(D)(v) = Av + D(v)`.
    pub fn apply(&self, v: &[RF<F>]) -> Vec<RF<F>> {
        let av = self.matrix.mul_vec(v);
        av.iter()
            .zip(v)
            .map(|(a, x)| a + &self.derivation.apply(x))
            .collect()
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self, ConnectionError> {
        self.same_derivation(other)?;
        Ok(ConnectionMatrix {
            matrix: Matrix::block_diag(&self.matrix, &other.matrix),
            derivation: self.derivation.clone(),
        })
    }

    pub fn same_derivation(&self, other: &Self) -> Result<(), ConnectionError> {
        if self.derivation != other.derivation {
            return Err(ConnectionError::DerivationMismatch(
                self.derivation.describe(),
                other.derivation.describe(),
            ));
        }
        Ok(())
    }
}

impl ConnectionMatrix<Rational> {
    /// Reduction of `A` and `D` modulo `p`, if `p` is good.
    pub fn reduce(&self, p: u64) -> Option<ConnectionMatrix<Fp>> {
        let derivation = self.derivation.reduce(p)?;
        let matrix = self
            .matrix
            .try_map(|e| e.try_map(|c| Fp::from_rational(c, p)))?;
        Some(ConnectionMatrix { matrix, derivation })
    }
}

/// The companion form: subdiagonal ones and last column `f_0, …, f_{r-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompanionConnection<F> {
    last_column: Vec<RF<F>>,
    derivation: Derivation<F>,
}

impl<F: Field> CompanionConnection<F> {
    pub fn new(last_column: Vec<RF<F>>, derivation: Derivation<F>) -> Result<Self, ConnectionError> {
        if last_column.is_empty() {
            return Err(ConnectionError::ShapeMismatch("companion of rank 0".into()));
        }
        Ok(CompanionConnection {
            last_column,
            derivation,
        })
    }

    pub fn rank(&self) -> usize {
        self.last_column.len()
    }

    pub fn last_column(&self) -> &[RF<F>] {
        &self.last_column
    }

    pub fn derivation(&self) -> &Derivation<F> {
        &self.derivation
    }

    pub fn companion_matrix(&self) -> Matrix<RF<F>> {
        let r = self.rank();
        Matrix::from_fn(r, r, |i, j| {
            if j == r - 1 {
                self.last_column[i].clone()
            } else if i == j + 1 {
                RF::one()
            } else {
                RF::zero()
            }
        })
    }

    pub fn to_connection(&self) -> ConnectionMatrix<F> {
        ConnectionMatrix {
            matrix: self.companion_matrix(),
            derivation: self.derivation.clone(),
        }
    }

    /// Reads off the last column if `a` has companion shape.
    pub fn from_connection(a: &ConnectionMatrix<F>) -> Option<Self> {
        let r = a.rank();
        let last = a.matrix.col(r - 1);
        let c = CompanionConnection {
            last_column: last,
            derivation: a.derivation.clone(),
        };
        (c.companion_matrix() == a.matrix).then_some(c)
    }
}

/// `A_1, …, A_k` with `A_{j+1} = D(A_j) + A·A_j`: the matrices of `∇(D)^j`.
///
/// The recursion runs on numerators `N_j = A_j·g^e` over one common
/// denominator `g` (divisible by every denominator of `A` and of `u = a/b`),
/// and each `A_j` is reduced on output:
/// `D(N/g^e) = u·(N'g − e·N·g')/g^(e+1)`, with an extra factor `g/b` over
/// `g^(e+2)` when `b ≠ 1`.
pub fn nabla_powers<F: Field>(a: &ConnectionMatrix<F>, k: usize) -> Vec<Matrix<RF<F>>> {
    assert!(k >= 1, "power must be positive");
    let r = a.rank();
    let u = a.derivation.multiplier();
    let b = u.denom();
    let mut g = b.clone();
    for e in a.matrix.entries() {
        let common = g.gcd(e.denom());
        g = &g * &e.denom().exact_div(&common).unwrap();
    }
    let numer = |m: &Matrix<RF<F>>| -> Vec<Polynomial<F>> {
        m.entries().iter().map(|e| e.numer() * &g.exact_div(e.denom()).unwrap()).collect()
    };
    let n1 = numer(&a.matrix);
    let dg = g.derivative();
    let unit_b = b.degree() == Some(0);
    // N_{j+1} = mult·(N_j'·g − e·N_j·g') + lift·N·N_j
    let (mult, lift, step) = if unit_b {
        (u.numer().scale(&b.coeff(0).inv().unwrap()), None, 1)
    } else {
        (u.numer() * &g.exact_div(b).unwrap(), Some(g.clone()), 2)
    };
    let mut out = vec![a.matrix.clone()];
    let (mut nj, mut e, mut gpow) = (n1.clone(), 1u64, g.clone());
    for _ in 1..k {
        let ef = F::from_i64(e as i64);
        let mut next = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let x = &nj[i * r + j];
                let dpart = &(&x.derivative() * &g) - &(x * &dg).scale(&ef);
                let mut prod = Polynomial::zero();
                for l in 0..r {
                    prod = &prod + &(&n1[i * r + l] * &nj[l * r + j]);
                }
                if let Some(lift) = &lift {
                    prod = &prod * lift;
                }
                next.push(&(&mult * &dpart) + &prod);
            }
        }
        nj = next;
        e += step;
        for _ in 0..step {
            gpow = &gpow * &g;
        }
        out.push(Matrix::new(r, r, nj.iter().map(|x| RF::new(x.clone(), gpow.clone())).collect()));
    }
    out
}

pub fn nabla_power_matrix<F: Field>(a: &ConnectionMatrix<F>, k: usize) -> Matrix<RF<F>> {
    nabla_powers(a, k).pop().unwrap()
}

/// `ψ_p = A_p - (v/u)·A` for a connection already in characteristic `p`.
pub fn psi_matrix<F: Field>(a: &ConnectionMatrix<F>, p: u64) -> Matrix<RF<F>> {
    let ap = nabla_power_matrix(a, p as usize);
    let d = &a.derivation;
    let ratio = &d.twist_multiplier(p) / d.multiplier();
    &ap - &a.matrix.scale(&ratio)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PCurvatureReport {
    pub prime: u64,
    pub good_prime: bool,
    pub psi: Option<Matrix<RF<Fp>>>,
    pub vanishes: bool,
}

pub fn p_curvature(a: &ConnectionMatrix<Rational>, p: u64) -> PCurvatureReport {
    match a.reduce(p) {
        None => PCurvatureReport {
            prime: p,
            good_prime: false,
            psi: None,
            vanishes: false,
        },
        Some(ap) => {
            let psi = psi_matrix(&ap, p);
            PCurvatureReport {
                prime: p,
                good_prime: true,
                vanishes: psi.is_zero(),
                psi: Some(psi),
            }
        }
    }
}

/// One report per prime in `[p_min, p_max]`, in increasing order. `jobs`
/// bounds the worker count (`None` uses the global pool).
pub fn scan_primes(
    a: &ConnectionMatrix<Rational>,
    p_min: u64,
    p_max: u64,
    jobs: Option<usize>,
) -> Vec<PCurvatureReport> {
    let primes = primes_in_range(p_min, p_max);
    let run = || primes.par_iter().map(|&p| p_curvature(a, p)).collect();
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    }
}

/// `G⁻¹AG + G⁻¹D(G)`.
pub fn gauge_transform<F: Field>(
    a: &ConnectionMatrix<F>,
    g: &Matrix<RF<F>>,
) -> Result<ConnectionMatrix<F>, ConnectionError> {
    if g.rows() != a.rank() || !g.is_square() {
        return Err(ConnectionError::ShapeMismatch(format!(
            "gauge {}x{} for rank {}",
            g.rows(),
            g.cols(),
            a.rank()
        )));
    }
    let gi = g.inverse().ok_or(ConnectionError::SingularGauge)?;
    let m = &(&gi * &(&a.matrix * g)) + &(&gi * &a.derivation.apply_matrix(g));
    Ok(ConnectionMatrix {
        matrix: m,
        derivation: a.derivation.clone(),
    })
}

/// Columns `v, ∇v, …, ∇^(r-1)v`, and `∇^r v`.
fn krylov<F: Field>(a: &ConnectionMatrix<F>, v: Vec<RF<F>>) -> (Matrix<RF<F>>, Vec<RF<F>>) {
    let r = a.rank();
    let mut cols = vec![v];
    for _ in 0..r {
        let next = a.apply(cols.last().unwrap());
        cols.push(next);
    }
    let last = cols.pop().unwrap();
    let g = Matrix::from_fn(r, r, |i, j| cols[j][i].clone());
    (g, last)
}

fn candidate_vectors<F: Field>(r: usize, max_attempts: usize, seed: u64) -> Vec<Vec<RF<F>>> {
    let mono = |k: usize| RF::from_poly(Polynomial::monomial(F::one(), k));
    let mut out: Vec<Vec<RF<F>>> = Vec::new();
    for i in 0..r {
        out.push((0..r).map(|j| if i == j { RF::one() } else { RF::zero() }).collect());
    }
    for d in 1..=r {
        for shift in 0..=d {
            out.push((0..r).map(|i| mono((i + shift) % (d + 1))).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < max_attempts {
        let v = (0..r)
            .map(|_| {
                let cs: Vec<F> = (0..=r).map(|_| F::from_i64(rng.gen_range(-10..=10))).collect();
                RF::from_poly(Polynomial::new(cs))
            })
            .collect();
        out.push(v);
    }
    out.truncate(max_attempts);
    out
}

/// Finds a cyclic vector and the gauge `G` taking `A` to companion form.
pub fn cyclic_vector<F: Field>(
    a: &ConnectionMatrix<F>,
    max_attempts: usize,
    seed: u64,
) -> Result<(Matrix<RF<F>>, CompanionConnection<F>), ConnectionError> {
    let r = a.rank();
    for v in candidate_vectors::<F>(r, max_attempts, seed) {
        if v.iter().all(|e| e.is_zero()) {
            continue;
        }
        let (g, last) = krylov(a, v);
        let gi = match g.inverse() {
            Some(gi) => gi,
            None => continue,
        };
        let f = gi.mul_vec(&last);
        let c = CompanionConnection {
            last_column: f,
            derivation: a.derivation.clone(),
        };
        return Ok((g, c));
    }
    Err(ConnectionError::NoCyclicVector(max_attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcurv_exact::QRatFunc;

    fn rf(num: &[i64], den: &[i64]) -> QRatFunc {
        RF::new(Polynomial::from_i64s(num), Polynomial::from_i64s(den))
    }

    fn c(n: i64) -> QRatFunc {
        RF::from_i64(n)
    }

    fn rank1(a: QRatFunc, d: Derivation<Rational>) -> ConnectionMatrix<Rational> {
        ConnectionMatrix::new(Matrix::from_rows(vec![vec![a]]), d).unwrap()
    }

    #[test]
    fn derivation_examples() {
        let e = Derivation::<Rational>::euler("x");
        assert_eq!(e.apply(&rf(&[0, 0, 0, 1], &[1])), rf(&[0, 0, 0, 3], &[1]));
        let d = Derivation::<Rational>::plain("x");
        assert_eq!(d.apply(&rf(&[1], &[0, 1])), rf(&[-1], &[0, 0, 1]));
        assert_eq!(e.apply(&rf(&[1, 1], &[0, 1])), rf(&[-1], &[0, 1]));
        assert!(Derivation::<Rational>::new("x", RF::zero()).is_err());
    }

    #[test]
    fn twist_examples() {
        let e = Derivation::<Rational>::euler("x");
        for p in [2, 3, 5, 7] {
            let v = frobenius_twist_multiplier(&e, p).unwrap();
            assert_eq!(v, e.reduce(p).unwrap().multiplier().clone());
            assert!(frobenius_twist_multiplier(&Derivation::plain("x"), p).unwrap().is_zero());
        }
        let x2 = Derivation::new("x", rf(&[0, 0, 1], &[1])).unwrap();
        assert!(frobenius_twist_multiplier(&x2, 3).unwrap().is_zero());
        let third = Derivation::new("x", rf(&[0, 1], &[3])).unwrap();
        assert_eq!(frobenius_twist_multiplier(&third, 3), Err(ConnectionError::BadPrime(3)));
    }

    #[test]
    fn nabla_power_examples() {
        let zero = ConnectionMatrix::new(Matrix::zeros(2, 2), Derivation::<Rational>::euler("x")).unwrap();
        assert!(nabla_power_matrix(&zero, 4).is_zero());
        let a = rank1(c(3), Derivation::euler("x"));
        assert_eq!(nabla_power_matrix(&a, 4)[(0, 0)], c(81));
        let one = rank1(c(1), Derivation::plain("x"));
        assert_eq!(nabla_power_matrix(&one, 5)[(0, 0)], c(1));
    }

    fn direct_powers<F: Field>(a: &ConnectionMatrix<F>, k: usize) -> Vec<Matrix<RF<F>>> {
        let mut out = vec![a.matrix().clone()];
        for _ in 1..k {
            let last = out.last().unwrap();
            let next = &a.derivation().apply_matrix(last) + &(a.matrix() * last);
            out.push(next);
        }
        out
    }

    #[test]
    fn common_denominator_recursion_matches_direct() {
        let m = Matrix::from_rows(vec![
            vec![rf(&[1, 2], &[3, 0, 1]), rf(&[0, 1], &[-1, 1])],
            vec![c(2), rf(&[5], &[1, 1])],
        ]);
        for d in [
            Derivation::euler("x"),
            Derivation::plain("x"),
            Derivation::new("x", rf(&[0, 1], &[1, 1])).unwrap(),
            Derivation::new("x", rf(&[2, 0, 1], &[0, 3])).unwrap(),
        ] {
            let a = ConnectionMatrix::new(m.clone(), d).unwrap();
            assert_eq!(nabla_powers(&a, 5), direct_powers(&a, 5));
            for p in [3u64, 5] {
                if let Some(ap) = a.reduce(p) {
                    assert_eq!(nabla_powers(&ap, p as usize), direct_powers(&ap, p as usize));
                }
            }
        }
    }

    #[test]
    fn p_curvature_examples() {
        for p in [2u64, 3, 5, 7, 11] {
            let a = rank1(c(4), Derivation::euler("x"));
            assert!(p_curvature(&a, p).vanishes);
            let e = rank1(c(1), Derivation::plain("x"));
            let rep = p_curvature(&e, p);
            assert!(rep.good_prime && !rep.vanishes);
            let half = rank1(rf(&[1], &[2]), Derivation::euler("x"));
            let rep = p_curvature(&half, p);
            assert_eq!(rep.good_prime, p != 2);
            if p != 2 {
                assert!(rep.vanishes);
            }
        }
    }

    #[test]
    fn scan_examples() {
        let a = rank1(c(-3), Derivation::euler("x"));
        let reps = scan_primes(&a, 2, 50, Some(2));
        assert_eq!(reps.len(), 15);
        assert!(reps.iter().all(|r| r.good_prime && r.vanishes));
        assert!(reps.windows(2).all(|w| w[0].prime < w[1].prime));
        let zero = ConnectionMatrix::new(Matrix::zeros(2, 2), Derivation::<Rational>::euler("x")).unwrap();
        assert!(scan_primes(&zero, 2, 30, None).iter().all(|r| r.good_prime && r.vanishes));
    }

    #[test]
    fn gauge_examples() {
        let d = Derivation::<Rational>::euler("x");
        let a = rank1(c(5), d.clone());
        assert_eq!(gauge_transform(&a, &Matrix::identity(1)).unwrap(), a);
        let g = Matrix::from_rows(vec![vec![rf(&[0, 1], &[1])]]);
        assert_eq!(gauge_transform(&a, &g).unwrap().matrix()[(0, 0)], c(6));
        let zero = ConnectionMatrix::new(Matrix::zeros(2, 2), d).unwrap();
        let g2 = Matrix::from_rows(vec![
            vec![c(1), rf(&[0, 1], &[1])],
            vec![c(0), c(1)],
        ]);
        let gi = g2.inverse().unwrap();
        let want = &gi * &zero.derivation().apply_matrix(&g2);
        assert_eq!(gauge_transform(&zero, &g2).unwrap().matrix(), &want);
        assert_eq!(gauge_transform(&zero, &Matrix::zeros(2, 2)), Err(ConnectionError::SingularGauge));
    }

    #[test]
    fn cyclic_vectors() {
        let d = Derivation::<Rational>::euler("x");
        let comp = CompanionConnection::new(vec![rf(&[1], &[0, 1]), c(2)], d.clone()).unwrap();
        let (g, found) = cyclic_vector(&comp.to_connection(), 20, 0).unwrap();
        assert_eq!(g, Matrix::identity(2));
        assert_eq!(found, comp);

        let diag = ConnectionMatrix::new(
            Matrix::from_rows(vec![vec![c(0), c(0)], vec![c(0), c(1)]]),
            d,
        )
        .unwrap();
        let (g, found) = cyclic_vector(&diag, 20, 0).unwrap();
        assert_eq!(gauge_transform(&diag, &g).unwrap().matrix(), &found.companion_matrix());

        let zero = ConnectionMatrix::new(Matrix::zeros(2, 2), Derivation::<Rational>::plain("x")).unwrap();
        let (g, found) = cyclic_vector(&zero, 20, 0).unwrap();
        assert_eq!(g.col(0), vec![c(1), rf(&[0, 1], &[1])]);
        assert_eq!(gauge_transform(&zero, &g).unwrap().matrix(), &found.companion_matrix());

        let zero_euler = ConnectionMatrix::new(Matrix::zeros(2, 2), Derivation::<Rational>::euler("x")).unwrap();
        assert!(cyclic_vector(&zero_euler, 40, 1).is_ok());
    }
}
