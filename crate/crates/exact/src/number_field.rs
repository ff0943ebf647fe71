//! Number fields ℚ[θ]/(f) with certified complex embeddings.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cyclotomic::{has_integer_coefficients, root_of_unity_order};
use crate::embedding::{
    abs_interval_on_disk, eval_on_disk, isolate_roots, refine_roots, ComplexRational,
    RealInterval, RootDisk,
};
use crate::error::ExactError;
use crate::field::Field;
use crate::irreducible::is_irreducible;
use crate::matrix::Matrix;
use crate::poly::Polynomial;

type Q = BigRational;
type QPoly = Polynomial<Q>;

const INITIAL_BITS: u32 = 53;
pub const DEFAULT_PRECISION_CAP: u32 = 1 << 14;

/// `ℚ[θ]/(f)` for a monic irreducible `f`.
#[derive(Debug)]
pub struct NumberField {
    min_poly: QPoly,
    embeddings: Vec<RootDisk>,
    precision_cap: u32,
}

impl NumberField {
    pub fn new(min_poly: QPoly) -> Result<Arc<Self>, ExactError> {
        Self::with_precision_cap(min_poly, DEFAULT_PRECISION_CAP)
    }

    /// Verifies irreducibility and isolates the complex roots of `min_poly`.
    pub fn with_precision_cap(min_poly: QPoly, precision_cap: u32) -> Result<Arc<Self>, ExactError> {
        if min_poly.degree().unwrap_or(0) == 0 {
            return Err(ExactError::NotMonic(min_poly.to_string()));
        }
        if !min_poly.is_monic() {
            return Err(ExactError::NotMonic(min_poly.fmt_var("X")));
        }
        if !is_irreducible(&min_poly)? {
            return Err(ExactError::Reducible(min_poly.fmt_var("X")));
        }
        let embeddings = isolate_roots(&min_poly, INITIAL_BITS, precision_cap)?;
        Ok(Arc::new(NumberField {
            min_poly,
            embeddings,
            precision_cap,
        }))
    }

    pub fn min_poly(&self) -> &QPoly {
        &self.min_poly
    }

    pub fn degree(&self) -> usize {
        self.min_poly.degree().unwrap()
    }

    pub fn embeddings(&self) -> &[RootDisk] {
        &self.embeddings
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap
    }

    /// Root disks of radius at most `2^-bits`, in the stored embedding order.
    pub fn refined_embeddings(&self, bits: u32) -> Result<Vec<RootDisk>, ExactError> {
        if self.embeddings.iter().all(|d| d.radius <= two_pow_neg(bits)) {
            return Ok(self.embeddings.clone());
        }
        let mut zs: Vec<ComplexRational> = self.embeddings.iter().map(|d| d.center.clone()).collect();
        let cap = self.precision_cap.max(bits);
        refine_roots(&self.min_poly, &mut zs, bits, cap)
    }

    pub fn element(self: &Arc<Self>, coords: Vec<Q>) -> NumberFieldElement {
        assert!(coords.len() <= self.degree(), "too many coordinates");
        NumberFieldElement::bound(self.clone(), coords)
    }

    pub fn generator(self: &Arc<Self>) -> NumberFieldElement {
        if self.degree() == 1 {
            return self.element(vec![-self.min_poly.coeff(0)]);
        }
        self.element(vec![Q::zero(), Q::one()])
    }

    pub fn from_rational(self: &Arc<Self>, q: Q) -> NumberFieldElement {
        self.element(vec![q])
    }

    pub fn from_poly(self: &Arc<Self>, p: &QPoly) -> NumberFieldElement {
        let r = p.rem(&self.min_poly);
        self.element(r.into_coeffs())
    }
}

fn two_pow_neg(bits: u32) -> Q {
    Q::new(1.into(), num_bigint::BigInt::one() << bits as usize)
}

fn same_field(a: &Arc<NumberField>, b: &Arc<NumberField>) -> bool {
    Arc::ptr_eq(a, b) || a.min_poly == b.min_poly
}

/// An element `Σ c_i θ^i`; without a parent it is the rational constant `c_0`.
#[derive(Clone)]
pub struct NumberFieldElement {
    field: Option<Arc<NumberField>>,
    coords: Vec<Q>,
}

impl NumberFieldElement {
    fn bound(field: Arc<NumberField>, mut coords: Vec<Q>) -> Self {
        while coords.last().is_some_and(|c| c.is_zero()) {
            coords.pop();
        }
        NumberFieldElement {
            field: Some(field),
            coords,
        }
    }

    pub fn rational(q: Q) -> Self {
        let coords = if q.is_zero() { vec![] } else { vec![q] };
        NumberFieldElement { field: None, coords }
    }

    pub fn field(&self) -> Option<&Arc<NumberField>> {
        self.field.as_ref()
    }

    /// Coordinates in the power basis, padded to the field degree.
    pub fn coordinates(&self) -> Vec<Q> {
        let d = self.field.as_ref().map_or(1, |f| f.degree());
        let mut c = self.coords.clone();
        c.resize(d.max(c.len()), Q::zero());
        c
    }

    pub fn as_poly(&self) -> QPoly {
        Polynomial::new(self.coords.clone())
    }

    pub fn as_rational(&self) -> Option<Q> {
        match self.coords.len() {
            0 => Some(Q::zero()),
            1 => Some(self.coords[0].clone()),
            _ => None,
        }
    }

    fn join(&self, other: &Self) -> Option<Arc<NumberField>> {
        match (&self.field, &other.field) {
            (Some(a), Some(b)) => {
                assert!(same_field(a, b), "number field elements from different fields");
                Some(a.clone())
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    fn with(field: Option<Arc<NumberField>>, coords: Vec<Q>) -> Self {
        match field {
            Some(f) => Self::bound(f, coords),
            None => {
                let mut e = NumberFieldElement { field: None, coords };
                while e.coords.last().is_some_and(|c| c.is_zero()) {
                    e.coords.pop();
                }
                e
            }
        }
    }

    /// Image under the automorphism sending θ to `image` (a root of the
    /// minimal polynomial in the same field).
    pub fn apply_automorphism(&self, image: &NumberFieldElement) -> Result<Self, ExactError> {
        let field = match &self.field {
            None => return Ok(self.clone()),
            Some(f) => f,
        };
        let check = field.min_poly.eval_with(image, |c| NumberFieldElement::rational(c.clone()));
        if !check.is_zero() {
            return Err(ExactError::MixedFields);
        }
        Ok(self
            .as_poly()
            .eval_with(image, |c| field.from_rational(c.clone())))
    }

    /// Values at every embedding: center and error radius, with the field's
    /// roots refined to `2^-bits`.
    pub fn embedding_values(&self, bits: u32) -> Result<Vec<(ComplexRational, Q)>, ExactError> {
        match &self.field {
            None => Ok(vec![(
                ComplexRational::real(self.as_rational().unwrap()),
                Q::zero(),
            )]),
            Some(f) => Ok(f
                .refined_embeddings(bits)?
                .iter()
                .map(|dk| eval_on_disk(&self.as_poly(), dk, bits))
                .collect()),
        }
    }
}

impl PartialEq for NumberFieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl Eq for NumberFieldElement {}

impl Hash for NumberFieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl fmt::Debug for NumberFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumberFieldElement({})", self)
    }
}

impl fmt::Display for NumberFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_poly().fmt_var("θ"))
    }
}

impl Zero for NumberFieldElement {
    fn zero() -> Self {
        NumberFieldElement::rational(Q::zero())
    }
    fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }
}

impl One for NumberFieldElement {
    fn one() -> Self {
        NumberFieldElement::rational(Q::one())
    }
}

impl Add for NumberFieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Add for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn add(self, rhs: Self) -> NumberFieldElement {
        let n = self.coords.len().max(rhs.coords.len());
        let coords = (0..n)
            .map(|i| {
                let a = self.coords.get(i).cloned().unwrap_or_else(Q::zero);
                let b = rhs.coords.get(i).cloned().unwrap_or_else(Q::zero);
                a + b
            })
            .collect();
        NumberFieldElement::with(self.join(rhs), coords)
    }
}

impl Neg for NumberFieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        -&self
    }
}

impl Neg for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn neg(self) -> NumberFieldElement {
        NumberFieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for NumberFieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Sub for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn sub(self, rhs: Self) -> NumberFieldElement {
        self + &(-rhs)
    }
}

impl Mul for NumberFieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Mul for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn mul(self, rhs: Self) -> NumberFieldElement {
        let field = self.join(rhs);
        if self.is_zero() || rhs.is_zero() {
            return NumberFieldElement::with(field, vec![]);
        }
        if let Some(c) = self.as_rational() {
            return NumberFieldElement::with(field, rhs.coords.iter().map(|x| x * &c).collect());
        }
        if let Some(c) = rhs.as_rational() {
            return NumberFieldElement::with(field, self.coords.iter().map(|x| x * &c).collect());
        }
        let f = field.expect("non-rational element without a parent field");
        let prod = (&self.as_poly() * &rhs.as_poly()).rem(&f.min_poly);
        NumberFieldElement::bound(f, prod.into_coeffs())
    }
}

impl Div for NumberFieldElement {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        &self / &rhs
    }
}

impl Div for &NumberFieldElement {
    type Output = NumberFieldElement;
    fn div(self, rhs: Self) -> NumberFieldElement {
        self * &rhs.inv().expect("number field division by zero")
    }
}

impl Field for NumberFieldElement {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(c) = self.as_rational() {
            return Some(NumberFieldElement::with(self.field.clone(), vec![c.recip()]));
        }
        let f = self.field.clone().unwrap();
        // s·a + t·m = 1 since m is irreducible and a ≠ 0 mod m
        let (g, s, _) = self.as_poly().ext_gcd(&f.min_poly);
        debug_assert!(g.is_one());
        Some(NumberFieldElement::bound(f.clone(), s.rem(&f.min_poly).into_coeffs()))
    }

    fn from_i64(n: i64) -> Self {
        NumberFieldElement::rational(Q::from_i64(n))
    }

    fn is_bound(&self) -> bool {
        self.field.is_some()
    }

    fn same_context(&self, other: &Self) -> bool {
        match (&self.field, &other.field) {
            (Some(a), Some(b)) => same_field(a, b),
            _ => true,
        }
    }
}

/// Monic minimal polynomial over ℚ: the first linear dependency among
/// `1, e, e², …`.
pub fn minimal_polynomial(e: &NumberFieldElement) -> QPoly {
    let d = e.field.as_ref().map_or(1, |f| f.degree());
    let mut powers: Vec<Vec<Q>> = vec![pad(&NumberFieldElement::one(), d)];
    let mut current = NumberFieldElement::one();
    loop {
        current = &current * e;
        let target = pad(&current, d);
        let k = powers.len();
        let m = Matrix::from_fn(d, k, |i, j| powers[j][i].clone());
        if let Some(sol) = m.solve(&target) {
            let mut cs: Vec<Q> = sol.into_iter().map(|c| -c).collect();
            cs.push(Q::one());
            return Polynomial::new(cs);
        }
        powers.push(target);
    }
}

fn pad(e: &NumberFieldElement, d: usize) -> Vec<Q> {
    let mut c = e.coords.clone();
    c.resize(d, Q::zero());
    c
}

pub fn is_algebraic_integer(e: &NumberFieldElement) -> bool {
    has_integer_coefficients(&minimal_polynomial(e))
}

/// Smallest `n` with `e^n = 1`, if any.
pub fn is_root_of_unity(e: &NumberFieldElement) -> Result<Option<u64>, ExactError> {
    if e.is_zero() {
        return Err(ExactError::ZeroElement);
    }
    Ok(root_of_unity_order(&minimal_polynomial(e)))
}

/// For every complex embedding, an interval of width at most `tolerance`
/// containing `|σ(e)|`.
pub fn embedding_absolute_values(
    e: &NumberFieldElement,
    tolerance: &Q,
) -> Result<Vec<RealInterval>, ExactError> {
    assert!(*tolerance > Q::zero(), "tolerance must be positive");
    let field = match &e.field {
        None => {
            let a = num_traits::Signed::abs(&e.as_rational().unwrap());
            return Ok(vec![RealInterval { lo: a.clone(), hi: a }]);
        }
        Some(f) => f,
    };
    let g = e.as_poly();
    let mut bits = INITIAL_BITS;
    loop {
        let mut zs: Vec<ComplexRational> = field.embeddings.iter().map(|d| d.center.clone()).collect();
        let disks = refine_roots(&field.min_poly, &mut zs, bits, bits)?;
        let ivs: Vec<RealInterval> = disks
            .iter()
            .map(|dk| abs_interval_on_disk(&g, dk, bits))
            .collect();
        if ivs.iter().all(|iv| iv.width() <= *tolerance) {
            return Ok(ivs);
        }
        bits = bits.saturating_mul(2);
    }
}

/// An element together with its minimal polynomial.
#[derive(Clone, Debug)]
pub struct AlgebraicNumber {
    element: NumberFieldElement,
    min_poly: QPoly,
}

impl AlgebraicNumber {
    pub fn new(element: NumberFieldElement) -> Self {
        let min_poly = minimal_polynomial(&element);
        AlgebraicNumber { element, min_poly }
    }

    pub fn element(&self) -> &NumberFieldElement {
        &self.element
    }

    pub fn min_poly(&self) -> &QPoly {
        &self.min_poly
    }

    pub fn is_algebraic_integer(&self) -> bool {
        has_integer_coefficients(&self.min_poly)
    }

    pub fn root_of_unity_order(&self) -> Result<Option<u64>, ExactError> {
        if self.element.is_zero() {
            return Err(ExactError::ZeroElement);
        }
        Ok(root_of_unity_order(&self.min_poly))
    }
}

/// A field generated by roots `y` of `f` and `z` of `g`, with a primitive
/// element `θ = y + k·z`.
#[derive(Clone, Debug)]
pub struct Compositum {
    pub field: Arc<NumberField>,
    pub y: NumberFieldElement,
    pub z: NumberFieldElement,
    pub k: i64,
}

const COMPOSITUM_SEARCH: i64 = 20;

/// Builds `ℚ(y, z)` for monic irreducible `f(y) = 0`, `g(z) = 0` when the
/// tensor product is a field, by searching `θ = y + k·z`.
pub fn compositum(f: &QPoly, g: &QPoly) -> Result<Compositum, ExactError> {
    let d1 = f.degree().unwrap_or(0);
    let d2 = g.degree().unwrap_or(0);
    if d1 == 0 || !f.is_monic() {
        return Err(ExactError::NotMonic(f.fmt_var("X")));
    }
    if d2 == 0 || !g.is_monic() {
        return Err(ExactError::NotMonic(g.fmt_var("X")));
    }
    let n = d1 * d2;
    let alg = Tensor { f, g, d1, d2 };
    let y = alg.basis(1, 0);
    let z = alg.basis(0, 1);
    for step in 0..2 * COMPOSITUM_SEARCH {
        let k = if step % 2 == 0 { step / 2 + 1 } else { -(step / 2 + 1) };
        let theta: Vec<Q> = y
            .iter()
            .zip(&z)
            .map(|(a, b)| a + b * Q::from_i64(k))
            .collect();
        let mut powers = vec![alg.basis(0, 0)];
        for _ in 0..n {
            let next = alg.mul(powers.last().unwrap(), &theta);
            powers.push(next);
        }
        let basis = Matrix::from_fn(n, n, |i, j| powers[j][i].clone());
        if basis.rank() < n {
            continue;
        }
        let sol = basis.solve(&powers[n]).unwrap();
        let mut cs: Vec<Q> = sol.into_iter().map(|c| -c).collect();
        cs.push(Q::one());
        let m = Polynomial::new(cs);
        if !is_irreducible(&m)? {
            continue;
        }
        let field = NumberField::new(m)?;
        let y_coords = basis.solve(&y).unwrap();
        let z_coords = basis.solve(&z).unwrap();
        return Ok(Compositum {
            y: field.element(y_coords),
            z: field.element(z_coords),
            field,
            k,
        });
    }
    Err(ExactError::NoPrimitiveElement(COMPOSITUM_SEARCH))
}

/// ℚ[y, z]/(f(y), g(z)) with basis `y^i z^j` at index `i·d2 + j`.
struct Tensor<'a> {
    f: &'a QPoly,
    g: &'a QPoly,
    d1: usize,
    d2: usize,
}

impl Tensor<'_> {
    fn basis(&self, i: usize, j: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.d1 * self.d2];
        // reduce y^i, z^j in case the degree is 1
        let yi = Polynomial::monomial(Q::one(), i).rem(self.f);
        let zj = Polynomial::monomial(Q::one(), j).rem(self.g);
        for (a, ca) in yi.coeffs().iter().enumerate() {
            for (b, cb) in zj.coeffs().iter().enumerate() {
                v[a * self.d2 + b] += ca * cb;
            }
        }
        v
    }

    fn mul(&self, u: &[Q], v: &[Q]) -> Vec<Q> {
        // rows indexed by powers of y, each row a polynomial in z
        let mut rows: Vec<QPoly> = vec![Polynomial::zero(); 2 * self.d1 - 1];
        for i in 0..self.d1 {
            let ui = Polynomial::new(u[i * self.d2..(i + 1) * self.d2].to_vec());
            if ui.is_zero() {
                continue;
            }
            for j in 0..self.d1 {
                let vj = Polynomial::new(v[j * self.d2..(j + 1) * self.d2].to_vec());
                rows[i + j] = &rows[i + j] + &(&ui * &vj).rem(self.g);
            }
        }
        // y^d1 = -(f_0 + … + f_{d1-1} y^{d1-1})
        for top in (self.d1..rows.len()).rev() {
            let r = std::mem::replace(&mut rows[top], Polynomial::zero());
            for (k, c) in self.f.coeffs()[..self.d1].iter().enumerate() {
                let idx = top - self.d1 + k;
                rows[idx] = &rows[idx] - &r.scale(c);
            }
        }
        let mut out = vec![Q::zero(); self.d1 * self.d2];
        for (i, row) in rows.iter().take(self.d1).enumerate() {
            for (j, c) in row.coeffs().iter().enumerate() {
                out[i * self.d2 + j] = c.clone();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn p(cs: &[i64]) -> QPoly {
        Polynomial::from_i64s(cs)
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn rejects_reducible_and_non_monic() {
        assert!(matches!(NumberField::new(p(&[-1, 0, 1])), Err(ExactError::Reducible(_))));
        assert!(matches!(NumberField::new(p(&[-2, 0, 2])), Err(ExactError::NotMonic(_))));
    }

    #[test]
    fn arithmetic_in_sqrt2() {
        let k = NumberField::new(p(&[-2, 0, 1])).unwrap();
        let t = k.generator();
        assert_eq!(&t * &t, k.from_rational(Q::from_i64(2)));
        let a = &t + &NumberFieldElement::one();
        let b = a.inv().unwrap();
        assert_eq!(&a * &b, NumberFieldElement::one());
        // (1 + √2)^{-1} = √2 - 1
        assert_eq!(b, &t - &NumberFieldElement::one());
    }

    #[test]
    fn minimal_polynomials() {
        let k = NumberField::new(p(&[-2, 0, 1])).unwrap();
        assert_eq!(minimal_polynomial(&k.from_rational(Q::from_i64(3))), p(&[-3, 1]));
        assert_eq!(minimal_polynomial(&k.generator()), p(&[-2, 0, 1]));
        let t1 = &k.generator() + &NumberFieldElement::one();
        assert_eq!(minimal_polynomial(&t1), p(&[-1, -2, 1]));
    }

    #[test]
    fn integrality() {
        let k = NumberField::new(p(&[-5, 0, 1])).unwrap();
        assert!(!is_algebraic_integer(&k.from_rational(q(1, 2))));
        assert!(is_algebraic_integer(&k.generator()));
        let golden = k.element(vec![q(1, 2), q(1, 2)]);
        assert_eq!(minimal_polynomial(&golden), p(&[-1, -1, 1]));
        assert!(is_algebraic_integer(&golden));
    }

    #[test]
    fn roots_of_unity() {
        let k = NumberField::new(p(&[1, -1, 1])).unwrap();
        assert_eq!(is_root_of_unity(&k.generator()).unwrap(), Some(6));
        assert_eq!(is_root_of_unity(&k.from_rational(Q::from_i64(-1))).unwrap(), Some(2));
        assert_eq!(is_root_of_unity(&NumberFieldElement::zero()), Err(ExactError::ZeroElement));
        let g = NumberField::new(p(&[1, -3, 1])).unwrap();
        assert_eq!(is_root_of_unity(&g.generator()).unwrap(), None);
    }

    #[test]
    fn absolute_values() {
        let tol = q(1, 1000);
        let k = NumberField::new(p(&[-2, 0, 1])).unwrap();
        for iv in embedding_absolute_values(&k.generator(), &tol).unwrap() {
            assert!(iv.width() <= tol);
            assert!(&iv.lo * &iv.lo <= Q::from_i64(2) && Q::from_i64(2) <= &iv.hi * &iv.hi);
        }
        for iv in embedding_absolute_values(&k.from_rational(Q::from_i64(2)), &tol).unwrap() {
            assert!(iv.contains(&Q::from_i64(2)));
        }
        let g = NumberField::new(p(&[-1, -1, 1])).unwrap();
        let mut mids: Vec<f64> = embedding_absolute_values(&g.generator(), &tol)
            .unwrap()
            .iter()
            .map(|iv| ((&iv.lo + &iv.hi) / Q::from_i64(2)).to_f64().unwrap())
            .collect();
        mids.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mids[0] - 0.618).abs() < 1e-3 && (mids[1] - 1.618).abs() < 1e-3);
    }

    #[test]
    fn compositum_of_i_and_sqrt5() {
        let c = compositum(&p(&[1, 0, 1]), &p(&[-5, 0, 1])).unwrap();
        assert_eq!(c.field.degree(), 4);
        assert_eq!(&c.y * &c.y, NumberFieldElement::from_i64(-1));
        assert_eq!(&c.z * &c.z, NumberFieldElement::from_i64(5));
        assert_eq!(c.field.min_poly(), &p(&[36, 0, -8, 0, 1]));
    }

    #[test]
    fn automorphism_of_gaussian_field() {
        let k = NumberField::new(p(&[1, 0, 1])).unwrap();
        let i = k.generator();
        let conj = -&i;
        let e = &NumberFieldElement::from_i64(3) + &(&i * &NumberFieldElement::from_i64(2));
        let s = e.apply_automorphism(&conj).unwrap();
        assert_eq!(s, &NumberFieldElement::from_i64(3) - &(&i * &NumberFieldElement::from_i64(2)));
        assert!(e.apply_automorphism(&NumberFieldElement::from_i64(2)).is_err());
    }
}
