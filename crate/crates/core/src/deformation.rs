//! Self-extension block connections, the deformation equation
//! `B + AY − YA + D(Y) = 0`, normalization of families mod `q^m`, and
//! step conjugation of representations over `k[q]/(q^(m+1))`.

use num_traits::One;
use thiserror::Error;

use pcurv_exact::prime_field::is_prime;
use pcurv_exact::{Field, Fp, Matrix, Polynomial, Rational, RationalFunction};

use crate::connection::{nabla_power_matrix, nabla_powers, psi_matrix, ConnectionError, ConnectionMatrix, Derivation};

type RF<F> = RationalFunction<F>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeformationError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("{0} is not a prime")]
    BadPrime(u64),
    #[error("reduction modulo {0} is not defined")]
    BadReduction(u64),
    #[error("generator {generator} differs from sigma at q^{layer}")]
    NotCongruent { generator: usize, layer: usize },
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

/// The rank-`2r` connection `[[A, B], [0, A]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockExtension<F: Field> {
    a: ConnectionMatrix<F>,
    b: Matrix<RF<F>>,
    m: ConnectionMatrix<F>,
}

impl<F: Field> BlockExtension<F> {
    pub fn a(&self) -> &ConnectionMatrix<F> {
        &self.a
    }

    pub fn b(&self) -> &Matrix<RF<F>> {
        &self.b
    }

    pub fn assembled(&self) -> &ConnectionMatrix<F> {
        &self.m
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    /// Returns the four `r×r` blocks of the assembled matrix.
    pub fn blocks(&self) -> [Matrix<RF<F>>; 4] {
        split_blocks(self.m.matrix(), self.rank())
    }
}

impl BlockExtension<Rational> {
    pub fn reduce(&self, p: u64) -> Option<BlockExtension<Fp>> {
        let a = self.a.reduce(p)?;
        let b = self
            .b
            .try_map(|e| e.try_map(|c| Fp::from_rational(c, p)))?;
        build_self_extension(&a, &b).ok()
    }
}

fn split_blocks<T: Field>(m: &Matrix<T>, r: usize) -> [Matrix<T>; 4] {
    [
        m.submatrix(0, 0, r, r),
        m.submatrix(0, r, r, r),
        m.submatrix(r, 0, r, r),
        m.submatrix(r, r, r, r),
    ]
}

fn assemble<T: Field>(a: &Matrix<T>, b: &Matrix<T>, c: &Matrix<T>, d: &Matrix<T>) -> Matrix<T> {
    Matrix::from_blocks(&[vec![a, b], vec![c, d]])
}

pub fn build_self_extension<F: Field>(
    a: &ConnectionMatrix<F>,
    b: &Matrix<RF<F>>,
) -> Result<BlockExtension<F>, DeformationError> {
    let r = a.rank();
    if b.rows() != r || b.cols() != r {
        return Err(DeformationError::ShapeMismatch(format!(
            "B is {}x{}, A has rank {r}",
            b.rows(),
            b.cols()
        )));
    }
    let z = Matrix::zeros(r, r);
    let m = assemble(a.matrix(), b, &z, a.matrix());
    Ok(BlockExtension {
        a: a.clone(),
        b: b.clone(),
        m: ConnectionMatrix::new(m, a.derivation().clone())?,
    })
}

/// `(P_j, Q_j)` with `P_1 = A`, `Q_1 = B`,
/// `P_j = A·P_{j−1} + D(P_{j−1})`, `Q_j = A·Q_{j−1} + B·P_{j−1} + D(Q_{j−1})`.
pub fn block_power_pair<F: Field>(
    ext: &BlockExtension<F>,
    j: usize,
) -> (Matrix<RF<F>>, Matrix<RF<F>>) {
    assert!(j >= 1, "power must be positive");
    block_power_pairs(ext, j).pop().unwrap()
}

/// `(P_1, Q_1), …, (P_k, Q_k)`.
pub fn block_power_pairs<F: Field>(
    ext: &BlockExtension<F>,
    k: usize,
) -> Vec<(Matrix<RF<F>>, Matrix<RF<F>>)> {
    let (a, b, d) = (ext.a.matrix(), &ext.b, ext.a.derivation());
    let mut out = vec![(a.clone(), b.clone())];
    for _ in 1..k {
        let (pj, qj) = out.last().unwrap();
        let np = &(a * pj) + &d.apply_matrix(pj);
        let nq = &(&(a * qj) + &(b * pj)) + &d.apply_matrix(qj);
        out.push((np, nq));
    }
    out
}

/// Exact test that `ψ_p(M)` equals
/// `[[P_p − t·A, Q_p − t·B], [0, P_p − t·A]]` with `t = D^(p−1)(u)/u`.
pub fn block_p_curvature_check<F: Field>(
    ext: &BlockExtension<F>,
    p: u64,
) -> Result<bool, DeformationError> {
    if !is_prime(p) {
        return Err(DeformationError::BadPrime(p));
    }
    let d = ext.a.derivation();
    let t = &d.twist_multiplier(p) / d.multiplier();
    let (pp, qp) = block_power_pair(ext, p as usize);
    let diag = &pp - &ext.a.matrix().scale(&t);
    let upper = &qp - &ext.b.scale(&t);
    let expected = assemble(&diag, &upper, &Matrix::zeros(ext.rank(), ext.rank()), &diag);
    Ok(psi_matrix(&ext.m, p) == expected)
}

/// Same check for a block extension over `ℚ(x)`, after reduction mod `p`.
pub fn block_p_curvature_check_rational(
    ext: &BlockExtension<Rational>,
    p: u64,
) -> Result<bool, DeformationError> {
    if !is_prime(p) {
        return Err(DeformationError::BadPrime(p));
    }
    let red = ext.reduce(p).ok_or(DeformationError::BadReduction(p))?;
    block_p_curvature_check(&red, p)
}

/// `∇′`-power matrix compared against the block recursion.
pub fn block_identity_holds<F: Field>(ext: &BlockExtension<F>, j: usize) -> bool {
    let (pj, qj) = block_power_pair(ext, j);
    let r = ext.rank();
    nabla_power_matrix(&ext.m, j) == assemble(&pj, &qj, &Matrix::zeros(r, r), &pj)
}

/// First `j ≤ k` where the block identity fails, if any.
pub fn block_identity_failure<F: Field>(ext: &BlockExtension<F>, k: usize) -> Option<usize> {
    let r = ext.rank();
    let z = Matrix::zeros(r, r);
    let powers = nabla_powers(&ext.m, k);
    let pairs = block_power_pairs(ext, k);
    powers
        .iter()
        .zip(&pairs)
        .position(|(m, (p, q))| *m != assemble(p, q, &z, p))
        .map(|i| i + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformationSolution<F: Field> {
    pub y: Matrix<RF<F>>,
    pub residual: Matrix<RF<F>>,
}

/// `AY − YA + D(Y)`.
pub fn deformation_operator<F: Field>(a: &ConnectionMatrix<F>, y: &Matrix<RF<F>>) -> Matrix<RF<F>> {
    &(&(a.matrix() * y) - &(y * a.matrix())) + &a.derivation().apply_matrix(y)
}

pub fn deformation_residual<F: Field>(
    a: &ConnectionMatrix<F>,
    b: &Matrix<RF<F>>,
    y: &Matrix<RF<F>>,
) -> Matrix<RF<F>> {
    b + &deformation_operator(a, y)
}

fn poly_lcm<F: Field>(a: &Polynomial<F>, b: &Polynomial<F>) -> Polynomial<F> {
    let g = a.gcd(b);
    (a * b).exact_div(&g).unwrap().monic()
}

/// Linear system for `L(Y) = AY − YA + D(Y)` on the ansatz space of
/// polynomial entries of degree `≤ d`. Columns index `(i, j, k)` for the
/// coefficient of `x^k` in `Y_ij`; the right-hand side is `−B`.
struct AnsatzSystem<F: Field> {
    r: usize,
    d: usize,
    coeffs: Matrix<F>,
    rhs: Vec<F>,
}

impl<F: Field> AnsatzSystem<F> {
    fn new(a: &ConnectionMatrix<F>, b: &Matrix<RF<F>>, d: usize) -> Self {
        let r = a.rank();
        let one = RF::<F>::one();
        let images: Vec<Matrix<RF<F>>> = (0..r * r * (d + 1))
            .map(|idx| {
                let (ij, k) = (idx / (d + 1), idx % (d + 1));
                let mut e = Matrix::zeros(r, r);
                e[(ij / r, ij % r)] = RF::from_poly(Polynomial::monomial(F::one(), k));
                deformation_operator(a, &e)
            })
            .collect();
        let mut den = one.numer().clone();
        for m in images.iter().chain(std::iter::once(b)) {
            for e in m.entries() {
                den = poly_lcm(&den, e.denom());
            }
        }
        let clear = |e: &RF<F>| -> Polynomial<F> {
            e.numer() * &den.exact_div(e.denom()).expect("denominator divides lcm")
        };
        let cleared: Vec<Vec<Polynomial<F>>> = images
            .iter()
            .map(|m| m.entries().iter().map(clear).collect())
            .collect();
        let rhs_polys: Vec<Polynomial<F>> = b.entries().iter().map(|e| -clear(e)).collect();
        let top = cleared
            .iter()
            .flatten()
            .chain(rhs_polys.iter())
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0);
        let rows = r * r * (top + 1);
        let cols = images.len();
        let coeffs = Matrix::from_fn(rows, cols, |row, col| {
            cleared[col][row / (top + 1)].coeff(row % (top + 1))
        });
        let rhs = (0..rows)
            .map(|row| rhs_polys[row / (top + 1)].coeff(row % (top + 1)))
            .collect();
        AnsatzSystem { r, d, coeffs, rhs }
    }

    fn to_matrix(&self, v: &[F]) -> Matrix<RF<F>> {
        let d1 = self.d + 1;
        Matrix::from_fn(self.r, self.r, |i, j| {
            let base = (i * self.r + j) * d1;
            RF::from_poly(Polynomial::new(v[base..base + d1].to_vec()))
        })
    }
}

/// Solves `B + AY − YA + D(Y) = 0` with `Y` polynomial in `x` of degree
/// `≤ d`. Free parameters are set to zero. `None` means no solution in the
/// ansatz space.
pub fn solve_deformation<F: Field>(
    a: &ConnectionMatrix<F>,
    b: &Matrix<RF<F>>,
    d: usize,
) -> Option<DeformationSolution<F>> {
    if b.rows() != a.rank() || b.cols() != a.rank() {
        return None;
    }
    let sys = AnsatzSystem::new(a, b, d);
    let v = sys.coeffs.solve(&sys.rhs)?;
    let y = sys.to_matrix(&v);
    let residual = deformation_residual(a, b, &y);
    if !residual.is_zero() {
        return None;
    }
    Some(DeformationSolution { y, residual })
}

/// Basis of `{Y : AY − YA + D(Y) = 0}` inside the degree-`≤ d` ansatz space.
pub fn deformation_kernel<F: Field>(a: &ConnectionMatrix<F>, d: usize) -> Vec<Matrix<RF<F>>> {
    let r = a.rank();
    let sys = AnsatzSystem::new(a, &Matrix::zeros(r, r), d);
    sys.coeffs
        .nullspace()
        .iter()
        .map(|v| sys.to_matrix(v))
        .collect()
}

/// Truncated power series in `q` with matrix coefficients.
mod series {
    use super::*;

    pub fn zero_layers<T: Field>(n: usize, m: usize) -> Vec<Matrix<T>> {
        vec![Matrix::zeros(n, n); m]
    }

    pub fn mul<T: Field>(a: &[Matrix<T>], b: &[Matrix<T>], m: usize) -> Vec<Matrix<T>> {
        let n = a[0].rows();
        let mut out = zero_layers(n, m);
        for (i, ai) in a.iter().enumerate().take(m) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(m - i) {
                out[i + j] = &out[i + j] + &(ai * bj);
            }
        }
        out
    }

    /// `(I + q^k·Y)` and its inverse `Σ (−q^k·Y)^j`, both mod `q^m`.
    pub fn unipotent<T: Field>(y: &Matrix<T>, k: usize, m: usize) -> (Vec<Matrix<T>>, Vec<Matrix<T>>) {
        let n = y.rows();
        let mut g = zero_layers(n, m);
        let mut gi = zero_layers(n, m);
        g[0] = Matrix::identity(n);
        if k < m {
            g[k] = y.clone();
        }
        let neg = -y;
        let mut pow = Matrix::identity(n);
        let mut e = 0;
        while e < m {
            gi[e] = pow.clone();
            pow = &pow * &neg;
            e += k;
        }
        (g, gi)
    }

    /// Inverse mod `q^m`, provided the constant layer is invertible.
    pub fn inverse<T: Field>(a: &[Matrix<T>], m: usize) -> Option<Vec<Matrix<T>>> {
        let a0i = a[0].inverse()?;
        let n = a0i.rows();
        let mut out = zero_layers(n, m);
        out[0] = a0i.clone();
        for k in 1..m {
            let mut acc = Matrix::zeros(n, n);
            for j in 1..=k.min(a.len() - 1) {
                acc = &acc + &(&a[j] * &out[k - j]);
            }
            out[k] = -&(&a0i * &acc);
        }
        Some(out)
    }
}

/// A connection matrix `Σ_{k<m} q^k·A_k` over `κ(x)[q]/(q^m)`, with the
/// derivation acting on `x` only.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedFamily<F: Field> {
    pub parameter: String,
    pub derivation: Derivation<F>,
    pub layers: Vec<Matrix<RF<F>>>,
}

impl<F: Field> TruncatedFamily<F> {
    pub fn new(
        parameter: impl Into<String>,
        derivation: Derivation<F>,
        layers: Vec<Matrix<RF<F>>>,
    ) -> Result<Self, DeformationError> {
        let Some(first) = layers.first() else {
            return Err(DeformationError::ShapeMismatch("family has no layers".into()));
        };
        let r = first.rows();
        if let Some(k) = layers.iter().position(|l| l.rows() != r || l.cols() != r) {
            return Err(DeformationError::ShapeMismatch(format!("layer {k} is not {r}x{r}")));
        }
        Ok(TruncatedFamily {
            parameter: parameter.into(),
            derivation,
            layers,
        })
    }

    pub fn order(&self) -> usize {
        self.layers.len()
    }

    pub fn rank(&self) -> usize {
        self.layers[0].rows()
    }

    pub fn base(&self) -> ConnectionMatrix<F> {
        ConnectionMatrix::new(self.layers[0].clone(), self.derivation.clone()).unwrap()
    }

    /// Constant in `q` modulo `q^m`.
    pub fn is_constant(&self) -> bool {
        self.layers[1..].iter().all(Matrix::is_zero)
    }

    /// Gauge by `I + q^k·Y`: `G⁻¹AG + G⁻¹D(G)` mod `q^m`.
    pub fn gauge_unipotent(&self, y: &Matrix<RF<F>>, k: usize) -> Self {
        let m = self.order();
        let (g, gi) = series::unipotent(y, k, m);
        let mut ag = series::mul(&self.layers, &g, m);
        if k < m {
            ag[k] = &ag[k] + &self.derivation.apply_matrix(y);
        }
        TruncatedFamily {
            parameter: self.parameter.clone(),
            derivation: self.derivation.clone(),
            layers: series::mul(&gi, &ag, m),
        }
    }

    /// Conjugate of a constant family, for constructing test inputs.
    pub fn forward(
        base: &ConnectionMatrix<F>,
        gauges: &[(usize, Matrix<RF<F>>)],
        m: usize,
    ) -> Self {
        let mut layers = series::zero_layers(base.rank(), m);
        layers[0] = base.matrix().clone();
        let mut fam = TruncatedFamily {
            parameter: "q".into(),
            derivation: base.derivation().clone(),
            layers,
        };
        for (k, y) in gauges {
            fam = fam.gauge_unipotent(y, *k);
        }
        fam
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction<F: Field> {
    pub layer: usize,
    pub b: Matrix<RF<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalization<F: Field> {
    /// `(k, Y_k)`: the gauge `I + q^k·Y_k` applied at step `k`.
    pub gauges: Vec<(usize, Matrix<RF<F>>)>,
    pub family: TruncatedFamily<F>,
    /// Layers `1..constant_through` of `family` vanish.
    pub constant_through: usize,
    pub obstruction: Option<Obstruction<F>>,
}

/// Kills layers `1, …, m−1` in turn by solving the deformation equation
/// against `A_0`; stops at the first layer with no solution in the ansatz.
pub fn normalize_family<F: Field>(fam: &TruncatedFamily<F>, d: usize) -> Normalization<F> {
    let a0 = fam.base();
    let mut cur = fam.clone();
    let mut gauges = Vec::new();
    for k in 1..fam.order() {
        let b = cur.layers[k].clone();
        if b.is_zero() {
            continue;
        }
        match solve_deformation(&a0, &b, d) {
            Some(sol) => {
                cur = cur.gauge_unipotent(&sol.y, k);
                debug_assert!(cur.layers[k].is_zero());
                gauges.push((k, sol.y));
            }
            None => {
                return Normalization {
                    gauges,
                    family: cur,
                    constant_through: k,
                    obstruction: Some(Obstruction { layer: k, b }),
                };
            }
        }
    }
    Normalization {
        gauges,
        constant_through: fam.order(),
        family: cur,
        obstruction: None,
    }
}

/// Checks `(I + q^m·M)⁻¹·τ_i·(I + q^m·M) = σ_i` mod `q^(m+1)` for all `i`.
pub fn verify_step_conjugation<F: Field>(
    sigma: &[Matrix<F>],
    tau: &[Vec<Matrix<F>>],
    m: usize,
    mm: &Matrix<F>,
) -> bool {
    let len = m + 1;
    let (g, _) = series::unipotent(mm, m, len);
    let Some(gi) = series::inverse(&g, len) else {
        return false;
    };
    sigma.iter().zip(tau).all(|(s, t)| {
        let conj = series::mul(&gi, &series::mul(t, &g, len), len);
        conj[0] == *s && conj[1..].iter().all(Matrix::is_zero)
    })
}

/// Finds `M` with `(I + q^m·M)⁻¹·τ_i·(I + q^m·M) = σ_i` mod `q^(m+1)`.
/// Each `tau[i]` lists layers `0..=m`.
pub fn step_conjugate<F: Field>(
    sigma: &[Matrix<F>],
    tau: &[Vec<Matrix<F>>],
    m: usize,
) -> Result<Option<Matrix<F>>, DeformationError> {
    if sigma.len() != tau.len() || sigma.is_empty() {
        return Err(DeformationError::ShapeMismatch(format!(
            "{} sigma generators, {} tau generators",
            sigma.len(),
            tau.len()
        )));
    }
    if m == 0 {
        return Err(DeformationError::ShapeMismatch("m must be positive".into()));
    }
    let r = sigma[0].rows();
    let mut tau_full = Vec::with_capacity(tau.len());
    for (i, (s, t)) in sigma.iter().zip(tau).enumerate() {
        if !s.is_square() || s.rows() != r || t.len() > m + 1 || t.iter().any(|l| l.rows() != r || !l.is_square()) {
            return Err(DeformationError::ShapeMismatch(format!("generator {i}")));
        }
        let mut layers = t.clone();
        layers.resize(m + 1, Matrix::zeros(r, r));
        if layers[0] != *s {
            return Err(DeformationError::NotCongruent { generator: i, layer: 0 });
        }
        if let Some(k) = (1..m).find(|&k| !layers[k].is_zero()) {
            return Err(DeformationError::NotCongruent { generator: i, layer: k });
        }
        tau_full.push(layers);
    }
    // unknown M_ab at column a*r + b; row (i, c, e) for entry (c, e) of
    // M·σ_i − σ_i·M = N_i
    let n = r * r;
    let rows = n * sigma.len();
    let coeffs = Matrix::from_fn(rows, n, |row, col| {
        let s = &sigma[row / n];
        let (c, e) = ((row % n) / r, row % r);
        let (a, b) = (col / r, col % r);
        let mut v = F::zero();
        if a == c {
            v = v + s[(b, e)].clone();
        }
        if b == e {
            v = v - s[(c, a)].clone();
        }
        v
    });
    let rhs: Vec<F> = (0..rows)
        .map(|row| tau_full[row / n][m][((row % n) / r, row % r)].clone())
        .collect();
    let Some(v) = coeffs.solve(&rhs) else {
        return Ok(None);
    };
    let mm = Matrix::new(r, r, v);
    Ok(verify_step_conjugation(sigma, &tau_full, m, &mm).then_some(mm))
}

/// `τ_i = (I + q^m·M)·σ_i·(I + q^m·M)⁻¹` mod `q^(m+1)`.
pub fn forward_step_conjugate<F: Field>(
    sigma: &[Matrix<F>],
    mm: &Matrix<F>,
    m: usize,
) -> Vec<Vec<Matrix<F>>> {
    let len = m + 1;
    let (g, gi) = series::unipotent(mm, m, len);
    sigma
        .iter()
        .map(|s| {
            let mut sl = series::zero_layers(s.rows(), len);
            sl[0] = s.clone();
            series::mul(&g, &series::mul(&sl, &gi, len), len)
        })
        .collect()
}
