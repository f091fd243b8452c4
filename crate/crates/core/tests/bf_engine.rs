mod common;

use common::{cx, rel};
use nalgebra::DVector;
use ruelle_bf_core::bf_engine::{
    feynman_rules, field, gamma_int_resummed, gauge_fixed_ratio, interaction_hessian, richardson_order,
};
use ruelle_bf_core::*;

fn diag(v: &[f64]) -> CMatrix<f64> {
    CMatrix::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| cx(x, 0.0))))
}

fn taylor_exp(m: &CMatrix<f64>) -> CMatrix<f64> {
    let n = m.nrows();
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * m * cx(1.0 / k as f64, 0.0);
        sum += &term;
    }
    sum
}

#[test]
fn propagator_matches_quadrature() {
    let mut rng = common::rng(21);
    let model = common::random_bf_model(&mut rng, &[2], 4);
    let lambda = cx(0.3, 0.2);
    let (a, b) = (0.2, 1.5);
    let p = regularized_propagator(&model, a, Some(b), lambda).unwrap();
    let c = model.complex();
    let gen = c.l1() + CMatrix::identity(2, 2) * lambda;
    let m = 400;
    let h = (b - a) / m as f64;
    let mut integral = CMatrix::zeros(2, 2);
    for i in 0..=m {
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        integral += taylor_exp(&(&gen * cx(-(a + i as f64 * h), 0.0))) * cx(w * h / 3.0, 0.0);
    }
    let expected = c.iota() * integral;
    assert!((p.matrix - expected).norm() < 1e-9);
}

#[test]
fn chains_resum_for_identity_generator() {
    let model = MatrixBFModel::from_generators(vec![(0, CMatrix::identity(3, 3))], 30).unwrap();
    let prop = regularized_propagator(&model, 0.0, None, cx(0.0, 0.0)).unwrap();
    let mut rng = common::rng(22);
    let (a, b) = (common::random_vector(&mut rng, 3), common::random_vector(&mut rng, 3));
    let f = perturbing_functional(&model, &a, &b).unwrap();
    let hbar = cx(0.2, 0.1);
    let expected = cx(0.0, 1.0) * hbar * f / (cx(1.0, 0.0) + hbar);
    assert!(rel(gamma_int_resummed(&model, &prop, &a, &b, hbar).unwrap(), expected) < 1e-13);
    let series = gamma_int(&model, &prop, &a, &b, 30).unwrap();
    assert!(rel(series.eval(hbar), expected) < 1e-13);
}

#[test]
fn chains_resum_in_general() {
    let mut rng = common::rng(23);
    for _ in 0..10 {
        let model = common::random_bf_model(&mut rng, &[2, 1], 12);
        let prop = regularized_propagator(&model, 0.0, None, cx(0.2, 0.0)).unwrap();
        let (a, b) = (common::random_vector(&mut rng, 3), common::random_vector(&mut rng, 3));
        let hbar = cx(0.05, -0.03);
        let series = gamma_int(&model, &prop, &a, &b, 12).unwrap().eval(hbar);
        let closed = gamma_int_resummed(&model, &prop, &a, &b, hbar).unwrap();
        assert!((series - closed).norm() < 1e-12 * closed.norm().max(1.0));
    }
}

#[test]
fn functional_is_half_the_hessian_form() {
    let mut rng = common::rng(24);
    let model = common::random_bf_model(&mut rng, &[2, 2], 4);
    let (a, b) = (common::random_vector(&mut rng, 4), common::random_vector(&mut rng, 4));
    let x = field(&a, &b);
    let t = interaction_hessian(&model).unwrap();
    let form = (x.transpose() * t * &x)[(0, 0)] / 2.0;
    assert!(rel(form, perturbing_functional(&model, &a, &b).unwrap()) < 1e-13);
}

#[test]
fn labeled_chain_weights_equal_chain_coefficients() {
    let mut rng = common::rng(25);
    let model = common::random_bf_model(&mut rng, &[1, 2], 5);
    let prop = regularized_propagator(&model, 0.1, Some(2.0), cx(0.0, 0.0)).unwrap();
    let rules = feynman_rules(&model, &prop, false).unwrap();
    let (a, b) = (common::random_vector(&mut rng, 3), common::random_vector(&mut rng, 3));
    let zero = CVector::zeros(3);
    let series = gamma_int(&model, &prop, &a, &b, 5).unwrap();
    for n in 1..=5 {
        let w = graph_weight(&FeynmanGraph::labeled_chain(n), &rules, &[field(&zero, &b), field(&a, &zero)]).unwrap();
        assert!(rel(w, series.coeff(n)) < 1e-12);
    }
}

#[test]
fn lambda_shift_is_exact() {
    let mut rng = common::rng(26);
    for _ in 0..10 {
        let lam = cx(0.37, 0.0);
        let blocks: Vec<(i32, CMatrix<f64>)> =
            (0..2).map(|k| (k, common::block_with_spectrum(&mut rng, 2, 0.3, 1.5, 0.2))).collect();
        let shifted: Vec<(i32, CMatrix<f64>)> =
            blocks.iter().map(|(k, l)| (*k, l + CMatrix::identity(2, 2) * lam)).collect();
        let m = MatrixBFModel::from_generators(blocks, 6).unwrap();
        let ms = MatrixBFModel::from_generators(shifted, 6).unwrap();
        let a = gamma_tr(&m, lam, 6).unwrap();
        let b = gamma_tr(&ms, cx(0.0, 0.0), 6).unwrap();
        assert!(a.max_coeff_diff(&b) < 1e-12);
    }
}

#[test]
fn lambda_to_zero_limit() {
    let model = MatrixBFModel::from_generators(vec![(0, diag(&[1.8, 2.7])), (1, diag(&[2.2]))], 5).unwrap();
    let at = |l: f64| gamma_tr(&model, cx(l, 0.0), 5).unwrap();
    let limit = at(0.0);
    let errs: Vec<f64> = [1.0, 0.1, 0.01].iter().map(|&l| at(l).max_coeff_diff(&limit)).collect();
    // linear shrinkage: each decade cuts the error by roughly ten
    assert!(errs[1] < errs[0] / 5.0 && errs[2] < errs[1] / 8.0 && errs[2] > errs[1] / 11.0, "{errs:?}");
    let (s1, s2) = (at(1e-3), at(1e-4));
    for n in 0..=6 {
        let extrapolated = s2.coeff(n) + (s2.coeff(n) - s1.coeff(n)) * (1e-4 / (1e-3 - 1e-4));
        assert!((extrapolated - limit.coeff(n)).norm() < 1e-6);
    }
}

#[test]
fn gauge_fixed_ratio_is_the_closed_form_modulus() {
    let mut rng = common::rng(27);
    for _ in 0..20 {
        let model = common::random_bf_model(&mut rng, &[2, 1, 2], 4);
        let hbar = cx(0.3, -0.2);
        let gf = gauge_fixed_ratio(&model, hbar).unwrap();
        let cf = closed_form_expectation(&model, hbar).unwrap().norm();
        assert!((gf - cf).abs() <= 1e-9 * cf);
    }
}

#[test]
fn two_block_graded_expectation() {
    let model = MatrixBFModel::from_generators(vec![(0, diag(&[2.0, 3.0])), (1, diag(&[4.0]))], 10).unwrap();
    let hbar = cx(0.15, 0.05);
    let one = cx(1.0, 0.0);
    let expected = (hbar + 2.0) * (hbar + 3.0) / 6.0 * (one * 4.0 / (hbar + 4.0));
    let r = expectation_value(&model, hbar).unwrap();
    assert!(rel(r.closed_form, expected) < 1e-14);
    assert!(r.defect <= r.truncation_bound);
    assert!(r.truncation_bound < 1e-9);
}

#[test]
fn truncation_order_is_k_plus_one() {
    let model = MatrixBFModel::from_generators(vec![(0, diag(&[0.5, 0.7])), (1, diag(&[0.6]))], 4).unwrap();
    let d: Vec<Cx<f64>> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&h| {
            let r = expectation_value(&model, cx(h, 0.0)).unwrap();
            r.series_value - r.closed_form
        })
        .collect();
    let p = richardson_order([d[0], d[1], d[2]]);
    assert!((p - 5.0).abs() < 0.2, "order {p}");
}

#[test]
fn projection_lemma_on_random_models() {
    let mut rng = common::rng(28);
    for _ in 0..10 {
        let model = common::random_bf_model(&mut rng, &[2, 1], 3);
        let n = model.dim();
        let mut b = common::random_matrix(&mut rng, 2 * n, 1.0);
        for i in n..2 * n {
            for j in 0..n {
                b[(i, j)] = cx(0.0, 0.0);
            }
        }
        assert!(projection_lemma_check(&model, &b).unwrap());
        b[(n, 0)] = cx(1.0, 0.0);
        assert!(matches!(projection_lemma_check(&model, &b), Err(Error::NotInvariant { .. })));
    }
}

#[test]
fn bridge_identities() {
    let orbits = enumerate_prime_orbits(&HyperbolicToralModel::<f64>::cat_map(Representation::Trivial), 14).unwrap();
    let base = cx(3.0, 0.0);
    let at_zero = zeta_expectation_bridge(&orbits, 1, cx(0.0, 0.0), base, 14.0).unwrap();
    assert_eq!(at_zero.orbit_route, cx(1.0, 0.0));
    assert_eq!(at_zero.det_route, cx(1.0, 0.0));

    let hbar = cx(0.5, 0.3);
    let r = zeta_expectation_bridge(&orbits, 1, hbar, base, 14.0).unwrap();
    assert!(r.converged);
    assert!(r.defect <= r.tail_bound, "defect {} > tail {}", r.defect, r.tail_bound);
    let c = zeta_expectation_bridge(&orbits, 1, hbar.conj(), base, 14.0).unwrap();
    assert!((c.orbit_route - r.orbit_route.conj()).norm() < 1e-15);
    assert!((c.det_route - r.det_route.conj()).norm() < 1e-15);

    let real = zeta_expectation_bridge(&orbits, 1, cx(0.5, 0.0), base, 14.0).unwrap();
    assert!(real.defect <= real.tail_bound);
}

#[test]
fn infrared_and_radius_guards() {
    let model = MatrixBFModel::from_generators(vec![(0, diag(&[-0.5, 1.0]))], 4).unwrap();
    assert!(matches!(regularized_propagator(&model, 0.0, None, cx(0.0, 0.0)), Err(Error::IrDivergence { .. })));
    assert!(regularized_propagator(&model, 0.0, Some(1.0), cx(0.0, 0.0)).is_ok());
    assert!(matches!(gamma_tr(&model, cx(0.0, 0.0), 3), Err(Error::IrDivergence { .. })));
    let ok = MatrixBFModel::from_generators(vec![(0, diag(&[0.5, 1.0]))], 4).unwrap();
    assert!(matches!(expectation_value(&ok, cx(0.6, 0.0)), Err(Error::OutsideRadius { .. })));
}

#[test]
fn simplex_volume_against_iterated_trapezoid() {
    // V_N(t) = ∫_0^t V_{N-1}(s) ds with V_1 = 1, by cumulative trapezoid on a fine grid
    let t = 1.8;
    let m = 20000;
    let h = t / m as f64;
    let mut v = vec![1.0; m + 1];
    for n in 1..=5 {
        assert!((v[m] - simplex_volume_check(n, t).unwrap()).abs() < 1e-6, "N = {n}");
        let mut next = vec![0.0; m + 1];
        for i in 1..=m {
            next[i] = next[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
        }
        v = next;
    }
}
