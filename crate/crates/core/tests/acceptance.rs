//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::Rng;

use common::*;
use pcurv_core::connection::{
    gauge_transform, nabla_power_matrix, p_curvature, ConnectionMatrix, Derivation,
};
use pcurv_core::deformation::{
    build_self_extension, block_identity_failure, deformation_operator, deformation_residual,
    forward_step_conjugate, solve_deformation, step_conjugate,
};
use pcurv_core::surface_group::{
    certify_finiteness, element_order, examples, fricke_polynomial, nonarch_check,
    simple_loop_products, CertifyOptions, MatrixGroup, Representation, SurfacePresentation,
    TracePoly, Verdict, Word,
};
use pcurv_core::valuation::{newton_polygon, predict_nonvanishing, verify_prediction, ValuationProfile};
use pcurv_exact::cyclotomic::{divides_x_pow_minus_one, root_of_unity_order};
use pcurv_exact::prime_field::primes_in_range;
use pcurv_exact::{Field, Fp, Matrix, Polynomial, Valuation};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fermat_vanishing() -> Outcome {
    let mut checked = 0;
    for a in -3..=7 {
        let conn = ConnectionMatrix::new(
            Matrix::from_rows(vec![vec![RF::from_i64(a)]]),
            Derivation::euler("x"),
        )
        .unwrap();
        for p in primes_in_range(2, 50) {
            let rep = p_curvature(&conn, p);
            if rep.good_prime {
                ensure(rep.vanishes, || format!("a = {a}, p = {p}: psi != 0"))?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, || "no good primes".into())?;
    Ok(format!("{checked} (a, p) pairs vanish"))
}

fn transcendence_witness() -> Outcome {
    let conn = ConnectionMatrix::new(
        Matrix::from_rows(vec![vec![RF::<Q>::one()]]),
        Derivation::plain("x"),
    )
    .unwrap();
    let primes = primes_in_range(2, 50);
    for &p in &primes {
        let rep = p_curvature(&conn, p);
        ensure(rep.good_prime && !rep.vanishes, || format!("p = {p}: psi vanishes or bad prime"))?;
    }
    Ok(format!("psi != 0 at all {} primes", primes.len()))
}

fn word_expansion_oracle() -> Outcome {
    let mut rng = rng(3);
    for p in [2u64, 3, 5] {
        for k in 0..20 {
            let a = fp_connection(&mut rng, p, 2);
            ensure(word_expansion(&a, p as usize) == nabla_power_matrix(&a, p as usize), || {
                format!("p = {p}, instance {k}: expansion differs from recursion")
            })?;
        }
    }
    Ok("60 connections agree".into())
}

fn soundness_instances() -> Vec<(u64, pcurv_core::connection::CompanionConnection<RF<Fp>>)> {
    let mut rng = rng(4);
    let primes = [3u64, 5, 7, 11, 13];
    (0..20)
        .map(|i| {
            let p = primes[i % primes.len()];
            (p, negative_companion(&mut rng, p))
        })
        .collect()
}

fn reduceto_soundness() -> Outcome {
    let mut hits = 0;
    for (i, (p, c)) in soundness_instances().iter().enumerate() {
        let pred = predict_nonvanishing(c, *p).map_err(|e| format!("instance {i}: {e}"))?;
        let psi_nonzero = verify_prediction(c, *p);
        ensure(pred.predicted && psi_nonzero, || {
            format!("instance {i} (p = {p}): predicted {}, psi != 0: {psi_nonzero}", pred.predicted)
        })?;
        hits += 1;
    }
    Ok(format!("{hits}/20 predicted and confirmed"))
}

fn newton_identity() -> Outcome {
    for (i, (_, c)) in soundness_instances().iter().enumerate() {
        let profile = ValuationProfile::of_companion(c);
        let r = profile.valuations.len() as i64;
        // s = min_m ν(f_m)/(r − m), computed directly
        let oracle = profile
            .valuations
            .iter()
            .enumerate()
            .filter_map(|(m, v)| v.finite().map(|v| Q::new(v.into(), (r - m as i64).into())))
            .min();
        let s = newton_polygon(&profile).eigenvalue_valuation();
        ensure(s == oracle, || format!("instance {i}: polygon {s:?} vs direct {oracle:?}"))?;
        let s = s.unwrap();
        let mut equal = false;
        for (m, v) in profile.valuations.iter().enumerate() {
            let bound = s.clone() * Q::from_i64(r - m as i64);
            match v {
                Valuation::Finite(v) => {
                    let v = Q::from_i64(*v);
                    ensure(v >= bound, || format!("instance {i}: ν(f_{m}) below s·(r−m)"))?;
                    equal |= v == bound;
                }
                Valuation::Infinite => {}
                Valuation::Undecided => return Err(format!("instance {i}: undecided")),
            }
        }
        ensure(equal, || format!("instance {i}: no m attains equality"))?;
    }
    Ok("20 instances".into())
}

fn gauge_covariance() -> Outcome {
    let mut rng = rng(6);
    let mut done = 0;
    let mut attempts = 0;
    while done < 50 {
        attempts += 1;
        if attempts > 500 {
            return Err(format!("only {done} usable pairs"));
        }
        let p = [3u64, 5, 7][done % 3];
        let d = q_derivation(&mut rng);
        let a = q_connection(&mut rng, 2, d);
        let g = q_matrix(&mut rng, 2);
        let Ok(ga) = gauge_transform(&a, &g) else { continue };
        let Some(gbar) = g.try_map(|e| e.try_map(|c| Fp::from_rational(c, p))) else { continue };
        let Some(gbar_inv) = gbar.inverse() else { continue };
        let (lhs, rhs) = (p_curvature(&ga, p), p_curvature(&a, p));
        let (Some(l), Some(r)) = (lhs.psi, rhs.psi) else { continue };
        ensure(l == &(&gbar_inv * &r) * &gbar, || format!("pair {done}, p = {p}"))?;
        done += 1;
    }
    Ok(format!("50 pairs ({attempts} drawn)"))
}

fn block_structure() -> Outcome {
    let mut rng = rng(7);
    for k in 0..30 {
        let r = 1 + k % 3;
        let d = q_derivation(&mut rng);
        let a = q_connection(&mut rng, r, d);
        let b = q_matrix(&mut rng, r);
        let ext = build_self_extension(&a, &b).map_err(|e| e.to_string())?;
        if let Some(j) = block_identity_failure(&ext, 7) {
            return Err(format!("instance {k}, j = {j}"));
        }
    }
    Ok("30 instances, j <= 7".into())
}

fn deformation_round_trip() -> Outcome {
    let mut rng = rng(8);
    for k in 0..30 {
        let r = 1 + k % 2;
        let d = q_derivation(&mut rng);
        let a = q_connection(&mut rng, r, d);
        let y0 = Matrix::new(r, r, (0..r * r).map(|_| q_poly_rf(&mut rng, 2)).collect());
        let b = -&deformation_operator(&a, &y0);
        let sol = solve_deformation(&a, &b, 2).ok_or(format!("instance {k}: no solution"))?;
        ensure(deformation_residual(&a, &b, &sol.y).is_zero() && sol.residual.is_zero(), || {
            format!("instance {k}: nonzero residual")
        })?;
    }
    let zero = ConnectionMatrix::new(Matrix::from_rows(vec![vec![RF::<Q>::zero()]]), Derivation::plain("x")).unwrap();
    let inv_x = Matrix::from_rows(vec![vec![RF::new(Polynomial::one(), Polynomial::x())]]);
    for d in 0..=8 {
        ensure(solve_deformation(&zero, &inv_x, d).is_none(), || format!("1/x solved at degree {d}"))?;
    }
    Ok("30 round trips, 1/x obstructed".into())
}

/// `(I − q^m M)·τ·(I + q^m M)` mod `q^(m+1)` equals `σ`, using
/// `(I + q^m M)⁻¹ ≡ I − q^m M` since `2m ≥ m + 1`.
fn conjugation_oracle(sigma: &Matrix<Q>, tau: &[Matrix<Q>], m: usize, mm: &Matrix<Q>) -> bool {
    let n = sigma.rows();
    // row-major n×n arrays of polynomials in q
    let poly_mat = |layers: &[(usize, Matrix<Q>)]| -> Vec<Polynomial<Q>> {
        (0..n * n)
            .map(|ij| {
                let mut cs = vec![Q::zero(); m + 1];
                for (k, l) in layers {
                    cs[*k] = cs[*k].clone() + l[(ij / n, ij % n)].clone();
                }
                Polynomial::new(cs)
            })
            .collect()
    };
    let id = Matrix::<Q>::identity(n);
    let left = poly_mat(&[(0, id.clone()), (m, -mm)]);
    let right = poly_mat(&[(0, id), (m, mm.clone())]);
    let t: Vec<(usize, Matrix<Q>)> = tau.iter().cloned().enumerate().collect();
    let t = poly_mat(&t);
    let mul = |a: &[Polynomial<Q>], b: &[Polynomial<Q>]| -> Vec<Polynomial<Q>> {
        (0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let mut acc = Polynomial::zero();
                for k in 0..n {
                    acc = &acc + &(&a[i * n + k] * &b[k * n + j]);
                }
                Polynomial::new(acc.coeffs().iter().take(m + 1).cloned().collect())
            })
            .collect()
    };
    let prod = mul(&mul(&left, &t), &right);
    (0..n * n).all(|ij| prod[ij] == Polynomial::constant(sigma[(ij / n, ij % n)].clone()))
}

fn step_conjugation() -> Outcome {
    let mut rng = rng(9);
    let rand_mat = |rng: &mut rand_chacha::ChaCha8Rng| {
        Matrix::new(2, 2, (0..4).map(|_| Q::from_i64(rng.gen_range(-3..=3))).collect())
    };
    let mut k = 0;
    while k < 20 {
        let gens = 1 + k % 3;
        let sigma: Vec<Matrix<Q>> = (0..gens).map(|_| rand_mat(&mut rng)).collect();
        if sigma.iter().any(|s| s.determinant().is_zero()) {
            continue;
        }
        let m0 = rand_mat(&mut rng);
        let m = 1 + k % 3;
        let tau = forward_step_conjugate(&sigma, &m0, m);
        let mm = step_conjugate(&sigma, &tau, m)
            .map_err(|e| e.to_string())?
            .ok_or(format!("triple {k}: no M found"))?;
        for (s, t) in sigma.iter().zip(&tau) {
            ensure(conjugation_oracle(s, t, m, &mm), || format!("triple {k}: verification fails"))?;
        }
        k += 1;
    }
    let id = vec![Matrix::<Q>::identity(2)];
    let n = Matrix::from_rows(vec![vec![Q::zero(), Q::one()], vec![Q::zero(), Q::zero()]]);
    let tau = vec![vec![Matrix::identity(2), n]];
    ensure(step_conjugate(&id, &tau, 1) == Ok(None), || "center instance conjugated".into())?;
    Ok("20 triples verified, center obstructed".into())
}

fn fricke_engine() -> Outcome {
    let mut rng = rng(10);
    let k = gaussian_field();
    let words: Vec<Word> = (0..100).map(|_| random_word(&mut rng, 2, 10)).collect();
    let polys: Vec<TracePoly> = words
        .iter()
        .map(|w| fricke_polynomial(w).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    for pair in 0..20 {
        let gens = vec![sl2_gaussian(&mut rng, &k), sl2_gaussian(&mut rng, &k)];
        let tr = |m: &Matrix<Nf>| &m[(0, 0)] + &m[(1, 1)];
        let (x, y, z) = (tr(&gens[0]), tr(&gens[1]), tr(&(&gens[0] * &gens[1])));
        for (w, pw) in words.iter().zip(&polys) {
            ensure(pw.eval(&x, &y, &z) == tr(&eval_word(&gens, w)), || {
                format!("pair {pair}, word {w:?}")
            })?;
        }
    }
    let (a, b) = (Word::generator(0), Word::generator(1));
    let comm = a.concat(&b).concat(&a.inverse()).concat(&b.inverse());
    let (x, y, z) = (TracePoly::x(), TracePoly::y(), TracePoly::z());
    let want = x
        .mul(&x)
        .add(&y.mul(&y))
        .add(&z.mul(&z))
        .sub(&x.mul(&y).mul(&z))
        .sub(&TracePoly::constant(2));
    let got = fricke_polynomial(&comm).unwrap();
    ensure(got == want, || format!("commutator gives {got}"))?;
    Ok(format!("2000 evaluations, commutator = {got}"))
}

fn timed_verdict(rep: &Representation, opts: &CertifyOptions) -> Result<(Verdict, Duration), String> {
    let t = Instant::now();
    let cert = certify_finiteness(rep, opts).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    if let Verdict::Finite(n) = cert.verdict {
        ensure(cert.elements.len() == n && cert.elements[0] == Matrix::identity(2), || {
            "enumeration size mismatch".into()
        })?;
    }
    Ok((cert.verdict, dt))
}

fn certification() -> Outcome {
    let opts = CertifyOptions {
        max_elements: 10_000,
        ..CertifyOptions::default()
    };
    let limit = Duration::from_secs(30);
    let mut parts = Vec::new();
    let cases = [
        ("quaternion", examples::quaternion(), Verdict::Finite(8)),
        ("binary icosahedral", examples::binary_icosahedral(), Verdict::Finite(120)),
        (
            "parabolic",
            examples::parabolic(),
            Verdict::Obstructed {
                word: "a1".into(),
                reason: "parabolic noncentral".into(),
            },
        ),
    ];
    for (name, rep, want) in cases {
        let (got, dt) = timed_verdict(&rep, &opts)?;
        ensure(got == want, || format!("{name}: got {got:?}"))?;
        ensure(dt < limit, || format!("{name}: {dt:?} exceeds 30 s"))?;
        parts.push(format!("{name} {:.2}s", dt.as_secs_f64()));
    }
    Ok(parts.join(", "))
}

fn kronecker_suite() -> Outcome {
    let cases: [(&[i64], Option<u64>); 4] = [
        (&[1, -1, 1], Some(6)),
        (&[1, 0, 1], Some(4)),
        (&[1, -3, 1], None),
        (&[-1, -1, 1], None),
    ];
    for (cs, want) in cases {
        let m = Polynomial::from_i64s(cs);
        let got = root_of_unity_order(&m);
        ensure(got == want, || format!("{}: got {got:?}", m.fmt_var("X")))?;
        // φ(n) ≤ 2 only for n ∈ {1, 2, 3, 4, 6}
        for n in [1u64, 2, 3, 4, 6] {
            let divides = divides_x_pow_minus_one(&m, n);
            let expected = want.is_some_and(|o| n % o == 0);
            ensure(divides == expected, || format!("{}: divisibility of X^{n} - 1", m.fmt_var("X")))?;
        }
    }
    Ok("4 polynomials".into())
}

fn galois_stability() -> Outcome {
    let mut rng = rng(13);
    let k = gaussian_field();
    let pres = SurfacePresentation::new(1, 1);
    let i = k.generator();
    let mut reps = vec![examples::quaternion()];
    let upper = Matrix::from_rows(vec![vec![Nf::one(), i.clone()], vec![Nf::zero(), Nf::one()]]);
    let rot = Matrix::from_rows(vec![vec![i.clone(), Nf::zero()], vec![Nf::zero(), -&i]]);
    reps.push(Representation::new(k.clone(), pres.clone(), vec![rot, upper], MatrixGroup::Sl2).unwrap());
    while reps.len() < 5 {
        let gens = vec![sl2_gaussian(&mut rng, &k), sl2_gaussian(&mut rng, &k)];
        reps.push(Representation::new(k.clone(), pres.clone(), gens, MatrixGroup::Sl2).unwrap());
    }
    let mut words = simple_loop_products(&pres);
    words.extend((0..20).map(|_| random_word(&mut rng, 3, 6)));
    for (n, rep) in reps.iter().enumerate() {
        let conj = rep.conjugate(&-&i).map_err(|e| e.to_string())?;
        let (a, b) = (nonarch_check(rep, &words), nonarch_check(&conj, &words));
        ensure(a.passed == b.passed && a.checked == b.checked, || format!("representation {n}: nonarch differs"))?;
        for w in &words {
            let oa = element_order(&rep.evaluate(w)).map_err(|e| e.to_string())?;
            let ob = element_order(&conj.evaluate(w)).map_err(|e| e.to_string())?;
            ensure(oa == ob, || format!("representation {n}: order of {w:?} differs"))?;
        }
    }
    Ok("5 representations".into())
}

fn main() {
    let criteria: Vec<(&str, Option<u64>, fn() -> Outcome)> = vec![
        ("Fermat vanishing suite", Some(5), fermat_vanishing),
        ("transcendence witness", Some(5), transcendence_witness),
        ("word-expansion oracle", Some(60), word_expansion_oracle),
        ("nonvanishing soundness", Some(300), reduceto_soundness),
        ("Newton-polygon identity", None, newton_identity),
        ("gauge covariance", None, gauge_covariance),
        ("block structure", None, block_structure),
        ("deformation round-trip", None, deformation_round_trip),
        ("step conjugation", None, step_conjugation),
        ("Fricke engine", None, fricke_engine),
        ("certification", None, certification),
        ("Kronecker suite", None, kronecker_suite),
        ("Galois stability", None, galois_stability),
    ];
    let mut failures = 0;
    for (n, (name, limit, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let dt = t.elapsed();
        let res = match (res, limit) {
            (Ok(_), Some(l)) if dt > Duration::from_secs(l) => Err(format!("took {dt:?}, limit {l} s")),
            (r, _) => r,
        };
        match res {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({:.2}s): {detail}", n + 1, dt.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name} ({:.2}s): {why}", n + 1, dt.as_secs_f64());
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 13 criteria passed");
}
