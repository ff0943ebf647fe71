//! Surface-group presentations, rank-2 trace machinery and finiteness
//! certificates for representations into SL₂ or GL₂ over a number field.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use pcurv_exact::cyclotomic::{common_unity_order, has_integer_coefficients};
use pcurv_exact::embedding::count_real_roots_in;
use pcurv_exact::{
    is_root_of_unity, minimal_polynomial, ExactError, Field, Matrix, NumberField,
    NumberFieldElement, Polynomial, QPoly, Rational,
};

type Nf = NumberFieldElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("malformed word token '{0}'")]
    BadToken(String),
    #[error("expected {expected} generator matrices, got {got}")]
    GeneratorCount { expected: String, got: usize },
    #[error("generator {0} is not a 2x2 matrix")]
    NotTwoByTwo(usize),
    #[error("generator {0} has determinant {1}, expected 1")]
    DeterminantNotOne(String, String),
    #[error("generator {0} is not invertible")]
    Singular(usize),
    #[error("the surface relation does not map to the identity")]
    RelationViolated,
    #[error("matrix entries lie outside the representation's field")]
    MixedFields,
    #[error("word mentions generators beyond a and b")]
    NotRankTwo,
    #[error("trace identity needs unit determinants")]
    NotSl2,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A freely reduced word: `(generator index, ±1)` letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<(usize, i8)>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn generator(g: usize) -> Self {
        Word(vec![(g, 1)])
    }

    pub fn new(letters: Vec<(usize, i8)>) -> Self {
        reduce_word(&letters)
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|&(g, e)| (g, -e)).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        reduce_word(&v)
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        (0..n.unsigned_abs()).fold(Word::empty(), |acc, _| acc.concat(&base))
    }

    /// Removes inverse pairs at the two ends.
    pub fn cyclic_reduce(&self) -> Self {
        let mut v = &self.0[..];
        while v.len() >= 2 && v[0].0 == v[v.len() - 1].0 && v[0].1 == -v[v.len() - 1].1 {
            v = &v[1..v.len() - 1];
        }
        Word(v.to_vec())
    }

    fn rotations(&self) -> impl Iterator<Item = Vec<(usize, i8)>> + '_ {
        let n = self.0.len();
        (0..n.max(1)).map(move |k| {
            let mut v = self.0[k.min(n)..].to_vec();
            v.extend_from_slice(&self.0[..k.min(n)]);
            v
        })
    }
}

/// Free reduction of a letter sequence.
pub fn reduce_word(letters: &[(usize, i8)]) -> Word {
    let mut out: Vec<(usize, i8)> = Vec::with_capacity(letters.len());
    for &(g, e) in letters {
        debug_assert!(e == 1 || e == -1);
        match out.last() {
            Some(&(h, f)) if h == g && f == -e => {
                out.pop();
            }
            _ => out.push((g, e)),
        }
    }
    Word(out)
}

/// Genus `g`, `n` punctures, generators `a1, b1, …, ag, bg, c1, …, cn`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfacePresentation {
    pub genus: usize,
    pub punctures: usize,
}

impl SurfacePresentation {
    pub fn new(genus: usize, punctures: usize) -> Self {
        SurfacePresentation { genus, punctures }
    }

    pub fn generator_count(&self) -> usize {
        2 * self.genus + self.punctures
    }

    /// Rank of the free group when `n ≥ 1`.
    pub fn free_rank(&self) -> Option<usize> {
        (self.punctures > 0).then(|| self.generator_count() - 1)
    }

    pub fn generator_name(&self, i: usize) -> String {
        let g2 = 2 * self.genus;
        if i < g2 {
            format!("{}{}", if i % 2 == 0 { 'a' } else { 'b' }, i / 2 + 1)
        } else {
            format!("c{}", i - g2 + 1)
        }
    }

    pub fn generator_names(&self) -> Vec<String> {
        (0..self.generator_count()).map(|i| self.generator_name(i)).collect()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        (0..self.generator_count()).find(|&i| self.generator_name(i) == name)
    }

    /// `Π [a_i, b_i⁻¹] · c_1⋯c_n` with `[x, y] = x y x⁻¹ y⁻¹`.
    pub fn relation(&self) -> Word {
        let mut v = Vec::new();
        for i in 0..self.genus {
            let (a, b) = (2 * i, 2 * i + 1);
            v.extend_from_slice(&[(a, 1), (b, -1), (a, -1), (b, 1)]);
        }
        for j in 0..self.punctures {
            v.push((2 * self.genus + j, 1));
        }
        reduce_word(&v)
    }

    /// The fixed order `a1, b1, …, ag, bg, c1, …, cn`.
    pub fn optimal_sequence(&self) -> Vec<usize> {
        (0..self.generator_count()).collect()
    }

    /// Parses tokens such as `a1`, `b2^-1` or `c1^3`, separated by
    /// whitespace, `*` or `.`.
    pub fn parse_word(&self, s: &str) -> Result<Word, SurfaceError> {
        let mut letters = Vec::new();
        for tok in s.split(|c: char| c.is_whitespace() || c == '*' || c == '.') {
            if tok.is_empty() || tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                None => (tok, 1i64),
                Some((n, e)) => (
                    n,
                    e.trim_start_matches('+')
                        .parse::<i64>()
                        .map_err(|_| SurfaceError::BadToken(tok.to_string()))?,
                ),
            };
            let g = self
                .generator_index(name)
                .ok_or_else(|| SurfaceError::UnknownGenerator(name.to_string()))?;
            let sign = if exp < 0 { -1 } else { 1 };
            letters.extend(std::iter::repeat((g, sign)).take(exp.unsigned_abs() as usize));
        }
        Ok(reduce_word(&letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        let ls = w.letters();
        while i < ls.len() {
            let mut j = i;
            while j < ls.len() && ls[j] == ls[i] {
                j += 1;
            }
            let (g, e) = ls[i];
            let k = (j - i) as i64 * e as i64;
            let name = self.generator_name(g);
            parts.push(if k == 1 { name } else { format!("{name}^{k}") });
            i = j;
        }
        parts.join(" ")
    }
}

/// Products of every nonempty subset of the optimal sequence, each taken
/// in cyclic order starting after the largest cyclic gap (ties: the
/// smallest index), so each subset appears once up to rotation.
pub fn simple_loop_products(pres: &SurfacePresentation) -> Vec<Word> {
    let n = pres.generator_count();
    assert!(n < 24, "too many generators for subset enumeration");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let k = idx.len();
        let mut start = 0;
        let mut best_gap = 0;
        for s in 0..k {
            let prev = idx[(s + k - 1) % k];
            let gap = (idx[s] + n - prev - 1) % n + 1;
            if gap > best_gap {
                best_gap = gap;
                start = s;
            }
        }
        let letters: Vec<(usize, i8)> = (0..k).map(|t| (idx[(start + t) % k], 1)).collect();
        out.push(Word(letters));
    }
    out
}

/// Integer polynomial in `X = tr a`, `Y = tr b`, `Z = tr ab`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TracePoly(BTreeMap<(u32, u32, u32), BigInt>);

impl TracePoly {
    pub fn constant(c: i64) -> Self {
        let mut m = BTreeMap::new();
        if c != 0 {
            m.insert((0, 0, 0), BigInt::from(c));
        }
        TracePoly(m)
    }

    fn var(e: (u32, u32, u32)) -> Self {
        TracePoly(BTreeMap::from([(e, BigInt::one())]))
    }

    pub fn x() -> Self {
        Self::var((1, 0, 0))
    }

    pub fn y() -> Self {
        Self::var((0, 1, 0))
    }

    pub fn z() -> Self {
        Self::var((0, 0, 1))
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32, u32), BigInt> {
        &self.0
    }

    fn add_term(&mut self, e: (u32, u32, u32), c: BigInt) {
        let entry = self.0.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.0 {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.0 {
            r.add_term(*e, -c.clone());
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = TracePoly::default();
        for (a, ca) in &self.0 {
            for (b, cb) in &o.0 {
                r.add_term((a.0 + b.0, a.1 + b.1, a.2 + b.2), ca * cb);
            }
        }
        r
    }

    pub fn eval<T: Field>(&self, x: &T, y: &T, z: &T) -> T {
        self.0.iter().fold(T::zero(), |acc, ((i, j, k), c)| {
            acc + T::from_bigint(c)
                * x.pow_u64(*i as u64)
                * y.pow_u64(*j as u64)
                * z.pow_u64(*k as u64)
        })
    }
}

impl fmt::Display for TracePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        // higher total degree first
        let mut terms: Vec<_> = self.0.iter().collect();
        terms.sort_by(|a, b| {
            let da = a.0 .0 + a.0 .1 + a.0 .2;
            let db = b.0 .0 + b.0 .1 + b.0 .2;
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (n, ((i, j, k), c)) in terms.into_iter().enumerate() {
            let mut vars = Vec::new();
            for (name, e) in [("X", i), ("Y", j), ("Z", k)] {
                match e {
                    0 => {}
                    1 => vars.push(name.to_string()),
                    _ => vars.push(format!("{name}^{e}")),
                }
            }
            let mag = c.abs();
            let body = match (vars.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => vars.join("*"),
                (false, false) => format!("{mag}*{}", vars.join("*")),
            };
            match (n, c.is_negative()) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

/// Memoized trace rewriting for words in the free group on `a`, `b`.
#[derive(Default)]
pub struct FrickeEngine {
    memo: HashMap<Vec<(usize, i8)>, TracePoly>,
}

impl FrickeEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn polynomial(&mut self, w: &Word) -> Result<TracePoly, SurfaceError> {
        if w.letters().iter().any(|&(g, _)| g > 1) {
            return Err(SurfaceError::NotRankTwo);
        }
        Ok(self.trace(&reduce_word(w.letters())))
    }

    /// Least rotation of the cyclic reduction of `w` or of `w⁻¹`.
    fn canonical(w: &Word) -> Vec<(usize, i8)> {
        let c = w.cyclic_reduce();
        let inv = c.inverse();
        c.rotations().chain(inv.rotations()).min().unwrap_or_default()
    }

    fn trace(&mut self, w: &Word) -> TracePoly {
        let key = Self::canonical(w);
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        let out = self.compute(&key);
        self.memo.insert(key, out.clone());
        out
    }

    fn compute(&mut self, w: &[(usize, i8)]) -> TracePoly {
        let n = w.len();
        if n == 0 {
            return TracePoly::constant(2);
        }
        if n == 1 {
            return if w[0].0 == 0 { TracePoly::x() } else { TracePoly::y() };
        }
        // a signed letter occurring twice: w = g u g v
        for i in 0..n {
            if let Some(j) = (i + 1..n).find(|&j| w[j] == w[i]) {
                let rot: Vec<_> = w[i..].iter().chain(&w[..i]).copied().collect();
                let k = j - i;
                let g = rot[0];
                let u = Word(rot[1..k].to_vec());
                let v = Word(rot[k + 1..].to_vec());
                let mut gu = vec![g];
                gu.extend_from_slice(u.letters());
                let mut gv = vec![g];
                gv.extend_from_slice(v.letters());
                let t1 = self.trace(&reduce_word(&gu));
                let t2 = self.trace(&reduce_word(&gv));
                let t3 = self.trace(&u.concat(&v.inverse()));
                return t1.mul(&t2).sub(&t3);
            }
        }
        if n == 2 {
            return if w[0].1 == w[1].1 {
                TracePoly::z()
            } else {
                TracePoly::x().mul(&TracePoly::y()).sub(&TracePoly::z())
            };
        }
        // each of a, a⁻¹, b, b⁻¹ exactly once: w = x·y with |x| = |y| = 2
        debug_assert_eq!(n, 4);
        let x = Word(w[..2].to_vec());
        let y = Word(w[2..].to_vec());
        let tx = self.trace(&x);
        let ty = self.trace(&y);
        let t3 = self.trace(&x.concat(&y.inverse()));
        tx.mul(&ty).sub(&t3)
    }
}

pub fn fricke_polynomial(w: &Word) -> Result<TracePoly, SurfaceError> {
    FrickeEngine::new().polynomial(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixGroup {
    Sl2,
    Gl2,
}

/// A homomorphism from the surface group into `GL₂(K)`.
#[derive(Clone, Debug)]
pub struct Representation {
    field: Arc<NumberField>,
    presentation: SurfacePresentation,
    matrices: Vec<Matrix<Nf>>,
    inverses: Vec<Matrix<Nf>>,
    group: MatrixGroup,
}

fn same_field(a: &NumberField, b: &NumberField) -> bool {
    a.min_poly() == b.min_poly()
}

fn det2(m: &Matrix<Nf>) -> Nf {
    &(&m[(0, 0)] * &m[(1, 1)]) - &(&m[(0, 1)] * &m[(1, 0)])
}

fn trace2(m: &Matrix<Nf>) -> Nf {
    &m[(0, 0)] + &m[(1, 1)]
}

/// The field `ℚ` as the degree-1 number field `ℚ[θ]/(θ)`.
pub fn rational_field() -> Arc<NumberField> {
    NumberField::new(Polynomial::x()).expect("X is irreducible")
}

impl Representation {
    /// Accepts all `2g+n` images (relation checked exactly) or, for `n ≥ 1`,
    /// the first `2g+n−1` with `c_n` solved from the relation.
    pub fn new(
        field: Arc<NumberField>,
        presentation: SurfacePresentation,
        generators: Vec<Matrix<Nf>>,
        group: MatrixGroup,
    ) -> Result<Self, SurfaceError> {
        let total = presentation.generator_count();
        let derive = presentation.punctures > 0 && generators.len() + 1 == total;
        if generators.len() != total && !derive {
            let expected = match presentation.free_rank() {
                Some(r) => format!("{total} or {r}"),
                None => total.to_string(),
            };
            return Err(SurfaceError::GeneratorCount {
                expected,
                got: generators.len(),
            });
        }
        for (i, m) in generators.iter().enumerate() {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(SurfaceError::NotTwoByTwo(i));
            }
            if m.entries().iter().any(|e| e.field().is_some_and(|f| !same_field(f, &field))) {
                return Err(SurfaceError::MixedFields);
            }
        }
        let mut rep = Representation {
            field,
            presentation,
            matrices: Vec::new(),
            inverses: Vec::new(),
            group,
        };
        for (i, m) in generators.into_iter().enumerate() {
            let inv = m.inverse().ok_or(SurfaceError::Singular(i))?;
            rep.matrices.push(m);
            rep.inverses.push(inv);
        }
        if derive {
            // c_n = (prefix of the relation)⁻¹
            let mut rel = rep.presentation.relation().letters().to_vec();
            rel.pop();
            let prefix = rep.evaluate(&Word(rel));
            let cn = prefix.inverse().expect("product of invertible matrices");
            rep.inverses.push(prefix);
            rep.matrices.push(cn);
        } else if !rep.evaluate(&rep.presentation.relation()).entries().iter().zip(Matrix::<Nf>::identity(2).entries()).all(|(a, b)| a == b) {
            return Err(SurfaceError::RelationViolated);
        }
        if group == MatrixGroup::Sl2 {
            for (i, m) in rep.matrices.iter().enumerate() {
                let d = det2(m);
                if !d.is_one() {
                    return Err(SurfaceError::DeterminantNotOne(
                        rep.presentation.generator_name(i),
                        d.to_string(),
                    ));
                }
            }
        }
        Ok(rep)
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn presentation(&self) -> &SurfacePresentation {
        &self.presentation
    }

    pub fn matrices(&self) -> &[Matrix<Nf>] {
        &self.matrices
    }

    pub fn group(&self) -> MatrixGroup {
        self.group
    }

    pub fn evaluate(&self, w: &Word) -> Matrix<Nf> {
        w.letters().iter().fold(Matrix::identity(2), |acc, &(g, e)| {
            let m = if e > 0 { &self.matrices[g] } else { &self.inverses[g] };
            &acc * m
        })
    }

    pub fn trace_of(&self, w: &Word) -> Nf {
        trace2(&self.evaluate(w))
    }

    fn unit_determinants(&self) -> bool {
        self.group == MatrixGroup::Sl2 || self.matrices.iter().all(|m| det2(m).is_one())
    }

    /// `tr(xy) + tr(xy⁻¹) = tr(x)·tr(y)`, exactly.
    pub fn trace_identity_check(&self, x: &Word, y: &Word) -> Result<bool, SurfaceError> {
        if !self.unit_determinants() {
            return Err(SurfaceError::NotSl2);
        }
        let (mx, my) = (self.evaluate(x), self.evaluate(y));
        let lhs = trace2(&(&mx * &my)) + trace2(&(&mx * &self.evaluate(&y.inverse())));
        Ok(lhs == trace2(&mx) * trace2(&my))
    }

    /// Applies the field automorphism `θ ↦ image` to every entry.
    pub fn conjugate(&self, image: &Nf) -> Result<Self, SurfaceError> {
        let gens: Result<Vec<Matrix<Nf>>, ExactError> = self
            .matrices
            .iter()
            .map(|m| {
                let entries: Result<Vec<Nf>, ExactError> =
                    m.entries().iter().map(|e| e.apply_automorphism(image)).collect();
                Ok(Matrix::new(2, 2, entries?))
            })
            .collect();
        Representation::new(self.field.clone(), self.presentation.clone(), gens?, self.group)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementOrder {
    Finite(u64),
    Infinite(String),
    Undecided(String),
}

fn is_scalar(m: &Matrix<Nf>) -> bool {
    m[(0, 1)].is_zero() && m[(1, 0)].is_zero() && m[(0, 0)] == m[(1, 1)]
}

fn is_identity(m: &Matrix<Nf>, projective: bool) -> bool {
    if projective {
        is_scalar(m)
    } else {
        is_scalar(m) && m[(0, 0)].is_one()
    }
}

/// `N_{K/ℚ}(e)` as the determinant of multiplication by `e`.
fn norm(field: &Arc<NumberField>, e: &Nf) -> Rational {
    let d = field.degree();
    let theta = field.generator();
    let mut col = e.clone();
    let mut cols = Vec::with_capacity(d);
    for _ in 0..d {
        let mut c = col.coordinates();
        c.resize(d, Rational::zero());
        cols.push(c);
        col = &col * &theta;
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i].clone()).determinant()
}

/// `N_{K/ℚ}(X² − tX + δ)`, interpolated at `2d + 1` rational points.
fn norm_polynomial(field: &Arc<NumberField>, t: &Nf, delta: &Nf) -> QPoly {
    let n = 2 * field.degree();
    let pts: Vec<Rational> = (0..=n as i64).map(Rational::from_i64).collect();
    let vals: Vec<Rational> = pts
        .iter()
        .map(|x0| {
            let x = Nf::rational(x0.clone());
            norm(field, &(&(&(&x * &x) - &(t * &x)) + delta))
        })
        .collect();
    // Lagrange interpolation
    let mut acc = QPoly::zero();
    for (i, xi) in pts.iter().enumerate() {
        let mut basis = QPoly::one();
        let mut den = Rational::one();
        for (j, xj) in pts.iter().enumerate() {
            if i != j {
                basis = &basis * &Polynomial::new(vec![-xj.clone(), Rational::one()]);
                den = den * (xi.clone() - xj.clone());
            }
        }
        acc = &acc + &basis.scale(&(vals[i].clone() / den));
    }
    acc
}

fn field_of(m: &Matrix<Nf>) -> Option<Arc<NumberField>> {
    m.entries().iter().find_map(|e| e.field().cloned())
}

/// Order of `M` in `GL₂(K)`, or in `PGL₂(K)` when `projective`.
pub fn element_order_general(m: &Matrix<Nf>, projective: bool) -> Result<ElementOrder, SurfaceError> {
    let field = field_of(m).unwrap_or_else(rational_field);
    let (t, delta) = (trace2(m), det2(m));
    if delta.is_zero() {
        return Err(SurfaceError::Singular(0));
    }
    if is_scalar(m) {
        if projective {
            return Ok(ElementOrder::Finite(1));
        }
        return Ok(match is_root_of_unity(&m[(0, 0)])? {
            Some(n) => ElementOrder::Finite(n),
            None => ElementOrder::Infinite("scalar not a root of unity".into()),
        });
    }
    if (&(&t * &t) - &(&delta * &Nf::from_i64(4))).is_zero() {
        return Ok(ElementOrder::Infinite("parabolic noncentral".into()));
    }
    // eigenvalues of M, or their ratio λ/μ (a root of X² − (t²/δ − 2)X + 1)
    let (tt, dd) = if projective {
        (&(&(&t * &t) / &delta) - &Nf::from_i64(2), Nf::one())
    } else {
        (t, delta)
    };
    let lam = norm_polynomial(&field, &tt, &dd).squarefree_part();
    let Some(n) = common_unity_order(&lam) else {
        return Ok(ElementOrder::Infinite("eigenvalue not root of unity".into()));
    };
    let mn = m.pow(n);
    assert!(is_identity(&mn, projective), "order {n} does not annihilate the matrix");
    Ok(ElementOrder::Finite(n))
}

/// Order of `M ∈ SL₂(K)`.
pub fn element_order(m: &Matrix<Nf>) -> Result<ElementOrder, SurfaceError> {
    let d = det2(m);
    if !d.is_one() {
        return Err(SurfaceError::DeterminantNotOne("matrix".into(), d.to_string()));
    }
    element_order_general(m, false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceWitness {
    pub word: String,
    pub trace: String,
    pub min_poly: String,
    /// Approximate embedding values of the trace.
    pub values: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceCheck {
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<TraceWitness>,
}

fn witness(rep: &Representation, w: &Word, tr: &Nf, mp: &QPoly) -> TraceWitness {
    let values = tr
        .embedding_values(64)
        .map(|vs| vs.iter().map(|(c, _)| c.to_f64()).collect())
        .unwrap_or_default();
    TraceWitness {
        word: rep.presentation.format_word(w),
        trace: tr.to_string(),
        min_poly: mp.fmt_var("X"),
        values,
    }
}

/// Every trace over `words` is an algebraic integer.
pub fn nonarch_check(rep: &Representation, words: &[Word]) -> TraceCheck {
    for (i, w) in words.iter().enumerate() {
        let tr = rep.trace_of(w);
        let mp = minimal_polynomial(&tr);
        if !has_integer_coefficients(&mp) {
            return TraceCheck {
                passed: false,
                checked: i + 1,
                witness: Some(witness(rep, w, &tr, &mp)),
            };
        }
    }
    TraceCheck {
        passed: true,
        checked: words.len(),
        witness: None,
    }
}

/// Every conjugate of every trace over `words` lies in `[−2, 2]`: the
/// minimal polynomial of the trace has all its roots there (Sturm count).
pub fn arch_check(rep: &Representation, words: &[Word]) -> TraceCheck {
    let (lo, hi) = (Rational::from_i64(-2), Rational::from_i64(2));
    for (i, w) in words.iter().enumerate() {
        let tr = rep.trace_of(w);
        let mp = minimal_polynomial(&tr);
        if count_real_roots_in(&mp, &lo, &hi) != mp.degree().unwrap_or(0) {
            return TraceCheck {
                passed: false,
                checked: i + 1,
                witness: Some(witness(rep, w, &tr, &mp)),
            };
        }
    }
    TraceCheck {
        passed: true,
        checked: words.len(),
        witness: None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Finite(usize),
    Obstructed { word: String, reason: String },
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub max_elements: usize,
    pub max_order: u64,
    /// Identify matrices up to scalars.
    pub projective: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            max_elements: 10_000,
            max_order: 1_000,
            projective: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FinitenessCertificate {
    pub verdict: Verdict,
    pub element_count: usize,
    pub max_order_seen: u64,
    pub projective: bool,
    /// Order of each generator's determinant (`None`: not a root of unity).
    pub det_orders: Vec<Option<u64>>,
    /// Trace checks on the simple-loop products; evidence only.
    pub nonarch: Option<TraceCheck>,
    pub arch: Option<TraceCheck>,
    pub elements: Vec<Matrix<Nf>>,
    pub words: Vec<Word>,
}

/// Key of a matrix: its entries, scaled to make the first nonzero entry 1
/// in projective mode.
fn canonical_key(m: &Matrix<Nf>, projective: bool) -> Vec<Nf> {
    if projective {
        let lead = m.entries().iter().find(|e| !e.is_zero()).expect("nonzero matrix").clone();
        m.entries().iter().map(|e| e / &lead).collect()
    } else {
        m.entries().to_vec()
    }
}

/// Trace checks on simple-loop products, then breadth-first closure of the
/// image with an element order computed for every new element.
pub fn certify_finiteness(rep: &Representation, opts: &CertifyOptions) -> Result<FinitenessCertificate, SurfaceError> {
    let det_orders: Vec<Option<u64>> = rep
        .matrices
        .iter()
        .map(|m| is_root_of_unity(&det2(m)))
        .collect::<Result<_, _>>()?;
    let projective = opts.projective || det_orders.iter().any(Option::is_none);
    let mut cert = FinitenessCertificate {
        verdict: Verdict::Inconclusive(String::new()),
        element_count: 0,
        max_order_seen: 1,
        projective,
        det_orders,
        nonarch: None,
        arch: None,
        elements: Vec::new(),
        words: Vec::new(),
    };
    if rep.group == MatrixGroup::Sl2 {
        let loops = simple_loop_products(&rep.presentation);
        let na = nonarch_check(rep, &loops);
        let ar = arch_check(rep, &loops);
        let fail = [
            (&na, "trace is not an algebraic integer"),
            (&ar, "trace conjugate outside [-2, 2]"),
        ]
        .into_iter()
        .find_map(|(c, why)| c.witness.as_ref().map(|w| (w.word.clone(), why)));
        cert.nonarch = Some(na);
        cert.arch = Some(ar);
        if let Some((word, why)) = fail {
            cert.verdict = Verdict::Obstructed {
                word,
                reason: why.into(),
            };
            return Ok(cert);
        }
    }

    let gens: Vec<(Matrix<Nf>, (usize, i8))> = (0..rep.matrices.len())
        .flat_map(|g| [(rep.matrices[g].clone(), (g, 1)), (rep.inverses[g].clone(), (g, -1))])
        .collect();
    let mut index: HashMap<Vec<Nf>, usize> = HashMap::new();
    let id = Matrix::<Nf>::identity(2);
    index.insert(canonical_key(&id, projective), 0);
    cert.elements.push(id);
    cert.words.push(Word::empty());
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let products: Vec<Vec<(Matrix<Nf>, Word)>> = frontier
            .par_iter()
            .map(|&i| {
                gens.iter()
                    .map(|(g, l)| {
                        let w = cert.words[i].concat(&Word(vec![*l]));
                        (&cert.elements[i] * g, w)
                    })
                    .collect()
            })
            .collect();
        let mut fresh = Vec::new();
        for (m, w) in products.into_iter().flatten() {
            let key = canonical_key(&m, projective);
            if index.contains_key(&key) {
                continue;
            }
            index.insert(key, cert.elements.len());
            fresh.push(cert.elements.len());
            cert.elements.push(m);
            cert.words.push(w);
            if cert.elements.len() > opts.max_elements {
                cert.element_count = cert.elements.len();
                cert.verdict = Verdict::Inconclusive(format!(
                    "more than {} elements",
                    opts.max_elements
                ));
                return Ok(cert);
            }
        }
        let orders: Vec<Result<ElementOrder, SurfaceError>> = fresh
            .par_iter()
            .map(|&i| element_order_general(&cert.elements[i], projective))
            .collect();
        for (&i, ord) in fresh.iter().zip(orders) {
            match ord? {
                ElementOrder::Finite(n) => {
                    cert.max_order_seen = cert.max_order_seen.max(n);
                    if n > opts.max_order {
                        cert.element_count = cert.elements.len();
                        cert.verdict = Verdict::Inconclusive(format!(
                            "element {} has order {n} > {}",
                            rep.presentation.format_word(&cert.words[i]),
                            opts.max_order
                        ));
                        return Ok(cert);
                    }
                }
                ElementOrder::Infinite(reason) | ElementOrder::Undecided(reason) => {
                    cert.element_count = cert.elements.len();
                    cert.verdict = Verdict::Obstructed {
                        word: rep.presentation.format_word(&cert.words[i]),
                        reason,
                    };
                    return Ok(cert);
                }
            }
        }
        frontier = fresh;
    }
    cert.element_count = cert.elements.len();
    cert.verdict = Verdict::Finite(cert.element_count);
    Ok(cert)
}

/// Standard test representations.
pub mod examples {
    use super::*;

    fn nf(field: &Arc<NumberField>, cs: &[(i64, i64)]) -> Nf {
        field.element(cs.iter().map(|&(n, d)| Rational::new(n.into(), d.into())).collect())
    }

    /// `ℚ(i)` with `θ = i`.
    pub fn gaussian_field() -> Arc<NumberField> {
        NumberField::new(Polynomial::from_i64s(&[1, 0, 1])).unwrap()
    }

    /// `a ↦ diag(i, −i)`, `b ↦ [[0, 1], [−1, 0]]` on the once-punctured torus.
    pub fn quaternion() -> Representation {
        let k = gaussian_field();
        let i = k.generator();
        let a = Matrix::from_rows(vec![vec![i.clone(), Nf::zero()], vec![Nf::zero(), -i]]);
        let b = Matrix::from_rows(vec![
            vec![Nf::zero(), Nf::one()],
            vec![-Nf::one(), Nf::zero()],
        ]);
        Representation::new(k, SurfacePresentation::new(1, 1), vec![a, b], MatrixGroup::Sl2).unwrap()
    }

    /// Unit icosians `½(φ + φ⁻¹i + j)` and `½(−φ⁻¹ + φi + k)` in
    /// `SL₂(ℚ(i, √5))`, generating the binary icosahedral group. Traces are
    /// `φ` and `−φ⁻¹`, i.e. `(1 ± √5)/2`.
    pub fn binary_icosahedral() -> Representation {
        let c = pcurv_exact::compositum(
            &Polynomial::from_i64s(&[1, 0, 1]),
            &Polynomial::from_i64s(&[-5, 0, 1]),
        )
        .unwrap();
        let (i, s5) = (c.y.clone(), c.z.clone());
        let half = Nf::rational(Rational::new(1.into(), 2.into()));
        let phi = &(&Nf::one() + &s5) * &half;
        let phi_inv = &phi - &Nf::one();
        // a + bi + cj + dk ↦ [[a + bi, c + di], [−c + di, a − bi]]
        let quat = |a: &Nf, b: &Nf, cc: &Nf, d: &Nf| {
            let m = Matrix::from_rows(vec![
                vec![a + &(b * &i), cc + &(d * &i)],
                vec![&(d * &i) - cc, a - &(b * &i)],
            ]);
            m.scale(&half)
        };
        let z = Nf::zero();
        let one = Nf::one();
        let t = quat(&phi, &phi_inv, &one, &z);
        let u = quat(&-&phi_inv, &phi, &z, &one);
        Representation::new(c.field, SurfacePresentation::new(1, 1), vec![t, u], MatrixGroup::Sl2).unwrap()
    }

    /// `a ↦ [[1, 1], [0, 1]]`, `b ↦ I` over `ℚ`.
    pub fn parabolic() -> Representation {
        let k = rational_field();
        let a = Matrix::from_rows(vec![vec![Nf::one(), Nf::one()], vec![Nf::zero(), Nf::one()]]);
        Representation::new(k, SurfacePresentation::new(1, 1), vec![a, Matrix::identity(2)], MatrixGroup::Sl2)
            .unwrap()
    }

    pub fn matrix(field: &Arc<NumberField>, rows: [[&[(i64, i64)]; 2]; 2]) -> Matrix<Nf> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|cs| nf(field, cs)).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    fn q(n: i64) -> Nf {
        Nf::from_i64(n)
    }

    fn qm(rows: [[i64; 2]; 2]) -> Matrix<Nf> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect())
    }

    #[test]
    fn word_reduction() {
        assert!(reduce_word(&[(0, 1), (0, -1)]).is_empty());
        assert_eq!(reduce_word(&[(0, 1), (1, 1), (1, -1), (0, 1)]).letters(), &[(0, 1), (0, 1)]);
        let w = reduce_word(&[(0, 1), (1, -1)]);
        assert_eq!(reduce_word(w.letters()), w);
        let pres = SurfacePresentation::new(1, 1);
        let w = pres.parse_word("a1 b1^-1 * c1^2").unwrap();
        assert_eq!(pres.format_word(&w), "a1 b1^-1 c1^2");
        assert_eq!(pres.parse_word("a2"), Err(SurfaceError::UnknownGenerator("a2".into())));
        assert_eq!(pres.format_word(&pres.relation()), "a1 b1^-1 a1^-1 b1 c1");
    }

    #[test]
    fn loop_products() {
        let pres = SurfacePresentation::new(0, 3);
        let got: Vec<String> = simple_loop_products(&pres).iter().map(|w| pres.format_word(w)).collect();
        let mut got_sorted = got.clone();
        got_sorted.sort();
        let mut want = vec!["c1", "c2", "c3", "c1 c2", "c2 c3", "c3 c1", "c1 c2 c3"];
        want.sort();
        assert_eq!(got_sorted, want);
        let torus = SurfacePresentation::new(1, 0);
        let names: Vec<String> = simple_loop_products(&torus).iter().map(|w| torus.format_word(w)).collect();
        assert!(names.contains(&"a1 b1".to_string()));
        assert_eq!(simple_loop_products(&SurfacePresentation::new(1, 1)).len(), 7);
    }

    #[test]
    fn fricke_examples() {
        let a = Word::generator(0);
        let b = Word::generator(1);
        assert_eq!(fricke_polynomial(&a).unwrap().to_string(), "X");
        assert_eq!(fricke_polynomial(&a.pow(2)).unwrap().to_string(), "X^2 - 2");
        let comm = a.concat(&b).concat(&a.inverse()).concat(&b.inverse());
        assert_eq!(
            fricke_polynomial(&comm).unwrap().to_string(),
            "-X*Y*Z + X^2 + Y^2 + Z^2 - 2"
        );
        assert_eq!(fricke_polynomial(&Word::generator(2)), Err(SurfaceError::NotRankTwo));
    }

    #[test]
    fn element_orders() {
        assert_eq!(
            element_order(&qm([[1, 1], [0, 1]])).unwrap(),
            ElementOrder::Infinite("parabolic noncentral".into())
        );
        assert_eq!(element_order(&qm([[0, 1], [-1, 0]])).unwrap(), ElementOrder::Finite(4));
        assert_eq!(element_order(&qm([[0, 1], [-1, 1]])).unwrap(), ElementOrder::Finite(6));
        assert_eq!(element_order(&qm([[-1, 0], [0, -1]])).unwrap(), ElementOrder::Finite(2));
        assert_eq!(element_order(&qm([[1, 0], [0, 1]])).unwrap(), ElementOrder::Finite(1));
        assert_eq!(
            element_order(&qm([[2, 1], [1, 1]])).unwrap(),
            ElementOrder::Infinite("eigenvalue not root of unity".into())
        );
        assert!(element_order(&qm([[2, 0], [0, 1]])).is_err());
        // projective: diag(i, 1) has order 4 in PGL₂ and in GL₂
        let k = gaussian_field();
        let m = matrix(&k, [[&[(0, 1), (1, 1)], &[]], [&[], &[(1, 1)]]]);
        assert_eq!(element_order_general(&m, false).unwrap(), ElementOrder::Finite(4));
        assert_eq!(element_order_general(&m, true).unwrap(), ElementOrder::Finite(4));
        assert_eq!(element_order_general(&qm([[0, 1], [-1, 0]]), true).unwrap(), ElementOrder::Finite(2));
    }

    #[test]
    fn trace_checks() {
        let k = rational_field();
        let pres = SurfacePresentation::new(1, 1);
        let trivial = Representation::new(k.clone(), pres.clone(), vec![Matrix::identity(2); 2], MatrixGroup::Sl2).unwrap();
        let words = simple_loop_products(&pres);
        assert!(nonarch_check(&trivial, &words).passed);
        assert!(arch_check(&trivial, &words).passed);
        assert!(trivial.trace_identity_check(&words[0], &words[1]).unwrap());

        let half = Matrix::from_rows(vec![
            vec![Nf::zero(), Nf::one()],
            vec![-Nf::one(), Nf::rational(Rational::new(1.into(), 2.into()))],
        ]);
        let bad = Representation::new(k.clone(), pres.clone(), vec![half, Matrix::identity(2)], MatrixGroup::Sl2).unwrap();
        let out = nonarch_check(&bad, &words);
        assert!(!out.passed);
        assert_eq!(out.witness.unwrap().word, "a1");

        let hyp = Representation::new(k, pres.clone(), vec![qm([[2, 1], [1, 1]]), Matrix::identity(2)], MatrixGroup::Sl2).unwrap();
        let out = arch_check(&hyp, &words);
        assert!(!out.passed);
        assert_eq!(out.witness.unwrap().values[0].0, 3.0);

        let ico = binary_icosahedral();
        assert!(arch_check(&ico, &words).passed);
        assert!(nonarch_check(&ico, &words).passed);
    }

    #[test]
    fn relation_handling() {
        let k = rational_field();
        let closed = SurfacePresentation::new(1, 0);
        let a = qm([[2, 1], [1, 1]]);
        assert!(Representation::new(k.clone(), closed.clone(), vec![a.clone(), a.clone()], MatrixGroup::Sl2).is_ok());
        assert_eq!(
            Representation::new(k.clone(), closed, vec![a, qm([[1, 1], [0, 1]])], MatrixGroup::Sl2).err(),
            Some(SurfaceError::RelationViolated)
        );
        let quat = quaternion();
        assert_eq!(quat.matrices().len(), 3);
        let rel = quat.evaluate(&quat.presentation().relation());
        assert_eq!(rel, Matrix::identity(2));
    }

    #[test]
    fn certificates() {
        let opts = CertifyOptions::default();
        let c = certify_finiteness(&quaternion(), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Finite(8));
        assert_eq!(c.max_order_seen, 4);
        let c = certify_finiteness(&parabolic(), &opts).unwrap();
        assert_eq!(
            c.verdict,
            Verdict::Obstructed { word: "a1".into(), reason: "parabolic noncentral".into() }
        );
        let k = rational_field();
        let trivial = Representation::new(k, SurfacePresentation::new(0, 2), vec![Matrix::identity(2)], MatrixGroup::Sl2).unwrap();
        assert_eq!(certify_finiteness(&trivial, &opts).unwrap().verdict, Verdict::Finite(1));
        let tiny = CertifyOptions { max_elements: 3, ..CertifyOptions::default() };
        assert!(matches!(certify_finiteness(&quaternion(), &tiny).unwrap().verdict, Verdict::Inconclusive(_)));
    }

    #[test]
    fn icosahedral_closure() {
        let c = certify_finiteness(&binary_icosahedral(), &CertifyOptions::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Finite(120));
        assert_eq!(c.max_order_seen, 10);
    }

    #[test]
    fn galois_conjugate() {
        let rep = quaternion();
        let conj = rep.conjugate(&-rep.field().generator()).unwrap();
        assert_eq!(conj.matrices()[0][(0, 0)], -rep.field().generator());
        assert!(rep.conjugate(&q(3)).is_err());
    }
}
