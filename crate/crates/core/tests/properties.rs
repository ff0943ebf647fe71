mod common;

use std::collections::HashSet;

use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

use common::*;
use pcurv_core::connection::{
    cyclic_vector, gauge_transform, nabla_power_matrix, p_curvature, psi_matrix, ConnectionMatrix,
};
use pcurv_core::deformation::{
    build_self_extension, block_identity_failure, block_identity_holds, deformation_kernel, deformation_operator,
    deformation_residual, forward_step_conjugate, normalize_family, solve_deformation,
    step_conjugate, verify_step_conjugation, TruncatedFamily,
};
use pcurv_core::surface_group::{
    certify_finiteness, element_order, examples, fricke_polynomial, nonarch_check,
    simple_loop_products, CertifyOptions, ElementOrder, MatrixGroup, Representation,
    SurfacePresentation, Verdict,
};
use pcurv_core::valuation::{
    newton_polygon, predict_nonvanishing, q_valuation, verify_prediction, ValuationProfile,
};
use pcurv_exact::prime_field::is_prime;
use pcurv_exact::{Field, Fp, Matrix, Valuation};

fn seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

fn tr(m: &Matrix<Nf>) -> Nf {
    &m[(0, 0)] + &m[(1, 1)]
}

fn random_rep(rng: &mut rand_chacha::ChaCha8Rng) -> Representation {
    let k = gaussian_field();
    let gens = vec![sl2_gaussian(rng, &k), sl2_gaussian(rng, &k)];
    Representation::new(k, SurfacePresentation::new(1, 1), gens, MatrixGroup::Sl2).unwrap()
}

fn key(m: &Matrix<Nf>) -> Vec<Nf> {
    m.entries().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn leibniz_rule(s in seed()) {
        let mut rng = rng(s);
        let d = q_derivation(&mut rng);
        let (f, g) = (q_rf(&mut rng), q_rf(&mut rng));
        let lhs = d.apply(&(&f * &g));
        let rhs = &(&d.apply(&f) * &g) + &(&f * &d.apply(&g));
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trace_identity(s in seed()) {
        let mut rng = rng(s);
        let rep = random_rep(&mut rng);
        let x = random_word(&mut rng, 3, 6);
        let y = random_word(&mut rng, 3, 6);
        prop_assert!(rep.trace_identity_check(&x, &y).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn q_valuation_is_a_valuation(s in seed()) {
        let mut rng = rng(s);
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        let f = fp_laurent(&mut rng, p, -3, 3);
        let g = fp_laurent(&mut rng, p, -3, 3);
        let (vf, vg) = (q_valuation(&f), q_valuation(&g));
        match (vf.finite(), vg.finite()) {
            (Some(a), Some(b)) => {
                prop_assert_eq!(q_valuation(&(&f * &g)), Valuation::Finite(a + b));
                let sum = q_valuation(&(&f + &g));
                if a != b {
                    prop_assert_eq!(sum, Valuation::Finite(a.min(b)));
                } else if let Some(v) = sum.finite() {
                    prop_assert!(v >= a);
                }
            }
            _ => prop_assert!(f.is_zero() || g.is_zero()),
        }
    }

    #[test]
    fn word_expansion_matches_recursion(s in seed()) {
        let mut rng = rng(s);
        let p = [2u64, 3, 5][rng.gen_range(0..3)];
        let a = fp_connection(&mut rng, p, 2);
        prop_assert_eq!(word_expansion(&a, p as usize), nabla_power_matrix(&a, p as usize));
    }

    #[test]
    fn direct_sum_additivity(s in seed()) {
        let mut rng = rng(s);
        let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
        let ra = 1 + rng.gen_range(0..2);
        let a = fp_connection(&mut rng, p, ra);
        let b = loop {
            let rb = 1 + rng.gen_range(0..2);
            let m = q_matrix(&mut rng, rb);
            let red = m.try_map(|e| e.try_map(|c| Fp::from_rational(c, p)));
            if let Some(red) = red {
                break ConnectionMatrix::new(red, a.derivation().clone()).unwrap();
            }
        };
        let sum = a.direct_sum(&b).unwrap();
        let (pa, pb) = (psi_matrix(&a, p), psi_matrix(&b, p));
        let z1 = Matrix::zeros(pa.rows(), pb.cols());
        let z2 = Matrix::zeros(pb.rows(), pa.cols());
        let want = Matrix::from_blocks(&[vec![&pa, &z1], vec![&z2, &pb]]);
        prop_assert_eq!(psi_matrix(&sum, p), want);
    }

    #[test]
    fn cyclic_vector_round_trip(s in seed()) {
        let mut rng = rng(s);
        let d = q_derivation(&mut rng);
        let r = 1 + rng.gen_range(0..3);
        let a = q_connection(&mut rng, r, d);
        let (g, c) = cyclic_vector(&a, 64, s).unwrap();
        let ga = gauge_transform(&a, &g).unwrap();
        prop_assert_eq!(ga.matrix(), &c.companion_matrix());
    }

    #[test]
    fn euler_twist_consistency(s in seed()) {
        let mut rng = rng(s);
        let p = [2u64, 3, 5, 7, 11, 13][rng.gen_range(0..6)];
        let a = loop {
            let m = q_matrix(&mut rng, 2);
            if let Some(c) = ConnectionMatrix::new(m, pcurv_core::connection::Derivation::euler("x"))
                .unwrap()
                .reduce(p)
            {
                break c;
            }
        };
        let specialized = &nabla_power_matrix(&a, p as usize) - a.matrix();
        prop_assert_eq!(psi_matrix(&a, p), specialized);
    }

    #[test]
    fn newton_slope_bound(vals in prop::collection::vec(prop::option::of(-6i64..6), 1..6)) {
        prop_assume!(vals.iter().any(Option::is_some));
        let valuations: Vec<Valuation> =
            vals.iter().map(|v| v.map_or(Valuation::Infinite, Valuation::Finite)).collect();
        let profile = ValuationProfile::new(valuations).unwrap();
        let r = vals.len() as i64;
        let s = newton_polygon(&profile).eigenvalue_valuation().unwrap();
        let mut equal = false;
        for (m, v) in vals.iter().enumerate() {
            if let Some(v) = v {
                let bound = s.clone() * Q::from_i64(r - m as i64);
                let v = Q::from_i64(*v);
                prop_assert!(v >= bound);
                equal |= v == bound;
            }
        }
        prop_assert!(equal);
    }

    #[test]
    fn no_false_nonvanishing_claims(s in seed()) {
        let mut rng = rng(s);
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        let x = RF::from_poly(pcurv_exact::Polynomial::x_with(fp_one(p)));
        let column = (0..2)
            .map(|_| {
                let a = fp_laurent(&mut rng, p, 0, 2);
                let b = fp_laurent(&mut rng, p, 0, 1);
                &RF::constant(a) + &(&RF::constant(b) * &x)
            })
            .collect();
        let c = pcurv_core::connection::CompanionConnection::new(column, fp_euler_over_q(p)).unwrap();
        prop_assert!(!predict_nonvanishing(&c, p).unwrap().predicted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nonvanishing_soundness(s in seed()) {
        let mut rng = rng(s);
        let p = [3u64, 5, 7, 11, 13][rng.gen_range(0..5)];
        let c = negative_companion(&mut rng, p);
        prop_assert!(predict_nonvanishing(&c, p).unwrap().predicted);
        prop_assert!(verify_prediction(&c, p));
    }

    #[test]
    fn gauge_covariance(s in seed()) {
        let mut rng = rng(s);
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        let d = q_derivation(&mut rng);
        let a = q_connection(&mut rng, 2, d);
        let g = q_matrix(&mut rng, 2);
        let ga = gauge_transform(&a, &g);
        let gbar = g.try_map(|e| e.try_map(|c| Fp::from_rational(c, p)));
        prop_assume!(ga.is_ok() && gbar.is_some());
        let gbar = gbar.unwrap();
        let gbar_inv = gbar.inverse();
        prop_assume!(gbar_inv.is_some());
        let (lhs, rhs) = (p_curvature(&ga.unwrap(), p), p_curvature(&a, p));
        prop_assume!(lhs.psi.is_some() && rhs.psi.is_some());
        let (l, r) = (lhs.psi.unwrap(), rhs.psi.unwrap());
        prop_assert_eq!(lhs.vanishes, rhs.vanishes);
        prop_assert_eq!(l, &(&gbar_inv.unwrap() * &r) * &gbar);
    }

    #[test]
    fn deformation_solutions_and_kernel(s in seed()) {
        let mut rng = rng(s);
        let r = 1 + rng.gen_range(0..2);
        let d = q_derivation(&mut rng);
        let a = q_connection(&mut rng, r, d);
        let y0 = Matrix::new(r, r, (0..r * r).map(|_| q_poly_rf(&mut rng, 2)).collect());
        let b = -&deformation_operator(&a, &y0);
        let sol = solve_deformation(&a, &b, 2).unwrap();
        prop_assert!(sol.residual.is_zero());
        prop_assert!(deformation_residual(&a, &b, &sol.y).is_zero());
        for k in deformation_kernel(&a, 2) {
            prop_assert!(deformation_operator(&a, &k).is_zero());
            prop_assert!(deformation_residual(&a, &b, &(&sol.y + &k)).is_zero());
        }
    }

    #[test]
    fn gauge_step_zeroes_lower_layers(s in seed()) {
        let mut rng = rng(s);
        let r = 1 + rng.gen_range(0..2);
        let d = q_derivation(&mut rng);
        let base = q_connection(&mut rng, r, d);
        let m = 4;
        let gauges: Vec<_> = (1..m)
            .map(|k| (k, Matrix::new(r, r, (0..r * r).map(|_| q_poly_rf(&mut rng, 1)).collect())))
            .collect();
        let fam = TruncatedFamily::forward(&base, &gauges, m);
        let norm = normalize_family(&fam, 2);
        let mut cur = fam.clone();
        for (k, y) in &norm.gauges {
            cur = cur.gauge_unipotent(y, *k);
            prop_assert!(cur.layers[1..=*k].iter().all(Matrix::is_zero), "layer {}", k);
        }
        if norm.obstruction.is_none() {
            prop_assert!(norm.family.is_constant());
        }
    }

    #[test]
    fn step_conjugation_verifies(s in seed()) {
        let mut rng = rng(s);
        let r = 2;
        let m = 1 + rng.gen_range(0..3);
        let mat = |rng: &mut rand_chacha::ChaCha8Rng| {
            Matrix::new(r, r, (0..r * r).map(|_| Q::from_i64(rng.gen_range(-3..=3))).collect())
        };
        let sigma: Vec<Matrix<Q>> = (0..2).map(|_| mat(&mut rng)).collect();
        let m0 = mat(&mut rng);
        let tau = forward_step_conjugate(&sigma, &m0, m);
        let got = step_conjugate(&sigma, &tau, m).unwrap().unwrap();
        prop_assert!(verify_step_conjugation(&sigma, &tau, m, &got));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn block_identity(s in seed()) {
        let mut rng = rng(s);
        let r = 1 + rng.gen_range(0..3);
        let d = q_derivation(&mut rng);
        let a = q_connection(&mut rng, r, d);
        let b = q_matrix(&mut rng, r);
        let ext = build_self_extension(&a, &b).unwrap();
        prop_assert_eq!(block_identity_failure(&ext, 7), None);
        prop_assert!(block_identity_holds(&ext, 7));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fricke_evaluation(s in seed()) {
        let mut rng = rng(s);
        let k = gaussian_field();
        let gens = vec![sl2_gaussian(&mut rng, &k), sl2_gaussian(&mut rng, &k)];
        let w = random_word(&mut rng, 2, 10);
        let pw = fricke_polynomial(&w).unwrap();
        let got = pw.eval(&tr(&gens[0]), &tr(&gens[1]), &tr(&(&gens[0] * &gens[1])));
        prop_assert_eq!(got, tr(&eval_word(&gens, &w)));
    }

    #[test]
    fn trace_inversion_and_conjugation(s in seed()) {
        let mut rng = rng(s);
        let rep = random_rep(&mut rng);
        let w = random_word(&mut rng, 3, 8);
        let u = random_word(&mut rng, 3, 5);
        prop_assert_eq!(rep.trace_of(&w), rep.trace_of(&w.inverse()));
        prop_assert_eq!(rep.trace_of(&u.concat(&w).concat(&u.inverse())), rep.trace_of(&w));
    }

    #[test]
    fn element_order_is_minimal(s in seed()) {
        let mut rng = rng(s);
        let rep = if rng.gen_bool(0.5) { examples::binary_icosahedral() } else { random_rep(&mut rng) };
        let g = rep.evaluate(&random_word(&mut rng, rep.matrices().len(), 6));
        if let ElementOrder::Finite(n) = element_order(&g).unwrap() {
            let id = Matrix::identity(2);
            prop_assert_eq!(g.pow(n), id.clone());
            for q in (2..=n).filter(|&q| n % q == 0 && is_prime(q)) {
                prop_assert_ne!(g.pow(n / q), id.clone());
            }
        }
    }

    #[test]
    fn galois_stability(s in seed()) {
        let mut rng = rng(s);
        let rep = random_rep(&mut rng);
        let i = rep.field().generator();
        let conj = rep.conjugate(&-&i).unwrap();
        let mut words = simple_loop_products(rep.presentation());
        words.extend((0..10).map(|_| random_word(&mut rng, 3, 6)));
        let (a, b) = (nonarch_check(&rep, &words), nonarch_check(&conj, &words));
        prop_assert_eq!(a.passed, b.passed);
        prop_assert_eq!(a.checked, b.checked);
    }
}

/// Closure under products and inverses, on all pairs.
fn assert_closed(rep: Representation, n: usize) {
    let cert = certify_finiteness(&rep, &CertifyOptions::default()).unwrap();
    assert_eq!(cert.verdict, Verdict::Finite(n));
    assert_eq!(cert.elements.len(), n);
    let set: HashSet<Vec<Nf>> = cert.elements.iter().map(key).collect();
    assert_eq!(set.len(), n);
    assert!(set.contains(&key(&Matrix::identity(2))));
    for a in &cert.elements {
        assert!(set.contains(&key(&a.inverse().unwrap())));
        for b in &cert.elements {
            assert!(set.contains(&key(&(a * b))));
        }
    }
}

#[test]
fn quaternion_closure() {
    assert_closed(examples::quaternion(), 8);
}

#[test]
fn icosahedral_closure() {
    assert_closed(examples::binary_icosahedral(), 120);
}

#[test]
fn central_generators_close_immediately() {
    let k = gaussian_field();
    let id = Matrix::<Nf>::identity(2);
    let rep = Representation::new(k, SurfacePresentation::new(1, 1), vec![id.clone(), id], MatrixGroup::Sl2)
        .unwrap();
    assert_eq!(certify_finiteness(&rep, &CertifyOptions::default()).unwrap().verdict, Verdict::Finite(1));
}
