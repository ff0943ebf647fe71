//! Certified complex root enclosures and real-root counting over ℚ.
//!
//! Roots are seeded in double precision and refined by simultaneous
//! Weierstrass iteration in rounded rational arithmetic. A disk of radius
//! `d·|f(z)|/|f'(z)|` around `z` always contains a root of a degree-`d`
//! polynomial `f`; `d` pairwise disjoint such disks therefore isolate the `d`
//! roots one per disk.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ExactError;
use crate::field::Field;
use crate::poly::Polynomial;

type Q = BigRational;
type QPoly = Polynomial<Q>;

/// A complex number with exact rational parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexRational {
    pub re: Q,
    pub im: Q,
}

impl ComplexRational {
    pub fn new(re: Q, im: Q) -> Self {
        ComplexRational { re, im }
    }

    pub fn real(re: Q) -> Self {
        ComplexRational { re, im: Q::zero() }
    }

    pub fn zero() -> Self {
        Self::real(Q::zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(&self.re * c, &self.im * c)
    }

    pub fn norm_sq(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        let n = o.norm_sq();
        if n.is_zero() {
            return None;
        }
        let conj = Self::new(o.re.clone(), -o.im.clone());
        let p = self.mul(&conj);
        Some(Self::new(p.re / &n, p.im / n))
    }

    /// Rounds both parts to the grid `2^-bits`.
    pub fn round_to(&self, bits: u32) -> Self {
        let scale = Q::from_integer(BigInt::one() << bits);
        let r = |x: &Q| (x * &scale).round() / &scale;
        Self::new(r(&self.re), r(&self.im))
    }

    fn from_f64(re: f64, im: f64) -> Self {
        Self::new(
            Q::from_float(re).unwrap_or_else(Q::zero),
            Q::from_float(im).unwrap_or_else(Q::zero),
        )
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Lower and upper rational bounds on `√x` for `x ≥ 0`, each within `2^-bits`.
pub fn sqrt_bounds(x: &Q, bits: u32) -> (Q, Q) {
    assert!(!x.is_negative(), "square root of a negative rational");
    if x.is_zero() {
        return (Q::zero(), Q::zero());
    }
    // √(a/b) = √(a·b)/b
    let n = x.numer() * x.denom();
    let scaled: BigInt = n << (2 * bits as usize);
    let s = scaled.sqrt();
    let den = x.denom() << bits as usize;
    let lo = Q::new(s.clone(), den.clone());
    let exact = &s * &s == scaled;
    let hi = if exact { lo.clone() } else { Q::new(s + 1, den) };
    (lo, hi)
}

/// A closed real interval with rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct RealInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RealInterval {
    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// A disk certified to contain exactly one root of its polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RootDisk {
    pub center: ComplexRational,
    pub radius: Q,
}

impl RootDisk {
    pub fn is_real_candidate(&self) -> bool {
        self.center.im.abs() <= self.radius
    }
}

fn eval_complex(f: &QPoly, z: &ComplexRational) -> ComplexRational {
    f.coeffs()
        .iter()
        .rev()
        .fold(ComplexRational::zero(), |acc, c| {
            let m = acc.mul(z);
            ComplexRational::new(m.re + c, m.im)
        })
}

/// Double-precision Durand–Kerner seeds for a monic polynomial.
fn seed_roots(f: &QPoly) -> Vec<ComplexRational> {
    let d = f.degree().unwrap();
    let cs: Vec<f64> = f.coeffs().iter().map(|c| c.to_f64().unwrap_or(0.0)).collect();
    let bound = 1.0 + cs[..d].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut zs: Vec<(f64, f64)> = (0..d)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64;
            (0.5 * bound * t.cos(), 0.5 * bound * t.sin() + 0.01)
        })
        .collect();
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let div = |a: (f64, f64), b: (f64, f64)| {
        let n = b.0 * b.0 + b.1 * b.1;
        ((a.0 * b.0 + a.1 * b.1) / n, (a.1 * b.0 - a.0 * b.1) / n)
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let z = zs[i];
            let mut val = (0.0, 0.0);
            for c in cs.iter().rev() {
                val = mul(val, z);
                val.0 += c;
            }
            let mut den = (1.0, 0.0);
            for (j, w) in zs.iter().enumerate() {
                if j != i {
                    den = mul(den, (z.0 - w.0, z.1 - w.1));
                }
            }
            if den.0 == 0.0 && den.1 == 0.0 {
                continue;
            }
            let step = div(val, den);
            zs[i] = (z.0 - step.0, z.1 - step.1);
            moved = moved.max(step.0.abs() + step.1.abs());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    zs.into_iter()
        .map(|(re, im)| ComplexRational::from_f64(re, im))
        .collect()
}

/// One sweep of Weierstrass iteration in exact arithmetic, rounded to `bits`.
fn weierstrass_sweep(f: &QPoly, zs: &mut [ComplexRational], bits: u32) {
    let d = zs.len();
    for i in 0..d {
        let val = eval_complex(f, &zs[i]);
        let mut den = ComplexRational::real(Q::one());
        for j in 0..d {
            if j != i {
                den = den.mul(&zs[i].sub(&zs[j]));
            }
        }
        if let Some(step) = val.div(&den) {
            zs[i] = zs[i].sub(&step).round_to(bits);
        }
    }
}

fn certify(f: &QPoly, zs: &[ComplexRational], bits: u32) -> Option<Vec<RootDisk>> {
    let d = f.degree().unwrap();
    let df = f.derivative();
    let dq = Q::from_integer(BigInt::from(d));
    let mut disks = Vec::with_capacity(d);
    for z in zs {
        let v = eval_complex(f, z).norm_sq();
        let dv = eval_complex(&df, z).norm_sq();
        if dv.is_zero() {
            return None;
        }
        let (_, ratio_hi) = sqrt_bounds(&(v / dv), bits + 8);
        disks.push(RootDisk {
            center: z.clone(),
            radius: &dq * ratio_hi,
        });
    }
    for i in 0..d {
        for j in i + 1..d {
            let gap = disks[i].center.sub(&disks[j].center).norm_sq();
            let reach = &disks[i].radius + &disks[j].radius;
            if gap <= &reach * &reach {
                return None;
            }
        }
    }
    Some(disks)
}

/// Monic version of a polynomial over ℚ.
fn monic_or_err(f: &QPoly) -> Result<QPoly, ExactError> {
    match f.degree() {
        None | Some(0) => Err(ExactError::NotMonic(f.to_string())),
        Some(_) => Ok(f.monic()),
    }
}

/// Isolates all complex roots of a squarefree polynomial, each in a disk of
/// radius at most `2^-bits`; precision is doubled until `cap_bits`.
pub fn isolate_roots(f: &QPoly, bits: u32, cap_bits: u32) -> Result<Vec<RootDisk>, ExactError> {
    let f = monic_or_err(f)?;
    let d = f.degree().unwrap();
    if d == 1 {
        return Ok(vec![RootDisk {
            center: ComplexRational::real(-f.coeff(0)),
            radius: Q::zero(),
        }]);
    }
    let mut zs = seed_roots(&f);
    refine_roots(&f, &mut zs, bits, cap_bits)
}

/// Refines existing approximations (e.g. the centers of coarser disks).
pub fn refine_roots(
    f: &QPoly,
    zs: &mut [ComplexRational],
    bits: u32,
    cap_bits: u32,
) -> Result<Vec<RootDisk>, ExactError> {
    let f = monic_or_err(f)?;
    if f.degree() == Some(1) {
        return Ok(vec![RootDisk {
            center: ComplexRational::real(-f.coeff(0)),
            radius: Q::zero(),
        }]);
    }
    let target = Q::new(BigInt::one(), BigInt::one() << bits as usize);
    let mut work = 64u32.max(bits / 2);
    loop {
        let work_bits = work.min(cap_bits);
        for _ in 0..(2 + (work_bits as f64).log2().ceil() as usize * 2) {
            weierstrass_sweep(&f, zs, work_bits + 16);
        }
        if let Some(disks) = certify(&f, zs, work_bits + 16) {
            if disks.iter().all(|dk| dk.radius <= target) {
                return Ok(disks);
            }
        }
        if work_bits >= cap_bits {
            return Err(ExactError::RootIsolation(f.to_string()));
        }
        work = work.saturating_mul(2);
    }
}

/// Enclosure of `g(z)` for `z` in the disk: returns the value at the center
/// and a rational upper bound on the deviation over the disk.
pub fn eval_on_disk(g: &QPoly, disk: &RootDisk, bits: u32) -> (ComplexRational, Q) {
    let center_value = eval_complex(g, &disk.center);
    if disk.radius.is_zero() || g.degree().unwrap_or(0) == 0 {
        return (center_value, Q::zero());
    }
    let (_, abs_hi) = sqrt_bounds(&disk.center.norm_sq(), bits);
    let m = abs_hi + &disk.radius;
    // |g(z) - g(c)| <= r · Σ i |g_i| m^(i-1)
    let mut slope = Q::zero();
    let mut mp = Q::one();
    for (i, c) in g.coeffs().iter().enumerate().skip(1) {
        slope += c.abs() * Q::from_integer(BigInt::from(i)) * &mp;
        mp *= &m;
    }
    (center_value, slope * &disk.radius)
}

/// Certified interval for `|g(z)|` over the disk.
pub fn abs_interval_on_disk(g: &QPoly, disk: &RootDisk, bits: u32) -> RealInterval {
    let (v, err) = eval_on_disk(g, disk, bits);
    let (lo, hi) = sqrt_bounds(&v.norm_sq(), bits);
    let lo = lo - &err;
    RealInterval {
        lo: if lo.is_negative() { Q::zero() } else { lo },
        hi: hi + err,
    }
}

fn sturm_sequence(f: &QPoly) -> Vec<QPoly> {
    let mut seq = vec![f.clone(), f.derivative()];
    while !seq.last().unwrap().is_zero() && seq.last().unwrap().degree() != Some(0) {
        let n = seq.len();
        let r = seq[n - 2].rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(-r);
    }
    seq
}

fn sign_changes(seq: &[QPoly], x: &Q) -> usize {
    let signs: Vec<i32> = seq
        .iter()
        .map(|p| {
            let v = p.eval(x);
            if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots of `f` in the closed interval `[a, b]`.
pub fn count_real_roots_in(f: &QPoly, a: &Q, b: &Q) -> usize {
    assert!(a <= b);
    if f.is_zero() {
        panic!("root count of the zero polynomial");
    }
    let mut g = f.squarefree_part();
    if g.degree() == Some(0) {
        return 0;
    }
    let mut endpoint_roots = 0;
    for e in [a, b] {
        if g.eval(e).is_zero() {
            endpoint_roots += 1;
            let lin = Polynomial::new(vec![-e.clone(), Q::one()]);
            g = g.exact_div(&lin).unwrap();
        }
        if a == b {
            break;
        }
    }
    if g.degree() == Some(0) {
        return endpoint_roots;
    }
    let seq = sturm_sequence(&g);
    endpoint_roots + sign_changes(&seq, a) - sign_changes(&seq, b)
}

/// Number of distinct real roots of `f`.
pub fn count_real_roots(f: &QPoly) -> usize {
    let g = f.squarefree_part();
    if g.degree().unwrap_or(0) == 0 {
        return 0;
    }
    // Cauchy bound
    let lc = g.leading().unwrap().abs();
    let bound = Q::one()
        + g.coeffs()
            .iter()
            .map(|c| c.abs() / &lc)
            .fold(Q::zero(), |m, c| if c > m { c } else { m });
    count_real_roots_in(&g, &-bound.clone(), &bound)
}

#[allow(dead_code)]
fn assert_field_impl<F: Field>() {}
