mod common;

use proptest::prelude::*;
use ruelle_bf_core::*;

fn degree_preserving(seed: u64, dims: &[usize]) -> GradedOperator<f64> {
    let mut rng = common::rng(seed);
    GradedOperator::degree_preserving(
        dims.iter().enumerate().map(|(k, &n)| (k as i32, common::well_conditioned(&mut rng, n))),
    )
    .unwrap()
}

fn trapezoid_gaussian(a: &[[f64; 3]; 3], n: usize) -> f64 {
    let m = 81;
    let h = 16.0 / (m - 1) as f64;
    let grid: Vec<f64> = (0..m).map(|i| -8.0 + i as f64 * h).collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += x[i] * a[i][j] * x[j];
            }
        }
        total += (-q / 2.0).exp();
        let mut p = 0;
        loop {
            if p == n {
                return total * h.powi(n as i32) / (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0);
            }
            idx[p] += 1;
            if idx[p] < m {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_routes_agree(seed in any::<u64>(), n in 1usize..=6, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let mut rng = common::rng(seed);
        let c = common::random_toy_complex(&mut rng, n);
        let v = toy_bf_partition(&c, common::cx(re, im)).unwrap();
        prop_assert!((v.gauge_fixed - v.direct).abs() <= 1e-10 * v.direct.max(1e-300));
    }

    #[test]
    fn superdeterminant_is_multiplicative(seed in any::<u64>(), a in 1usize..=3, b in 0usize..=3, c in 0usize..=2) {
        let x = degree_preserving(seed, &[a, b, c]);
        let y = degree_preserving(seed ^ 0x9e37, &[a, b, c]);
        let lhs = x.compose(&y).unwrap().superdeterminant().unwrap();
        let rhs = x.superdeterminant().unwrap() * y.superdeterminant().unwrap();
        prop_assert!(common::rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn supertrace_kills_graded_commutators(seed in any::<u64>(), a in 1usize..=3, b in 1usize..=3) {
        let x = degree_preserving(seed, &[a, b]);
        let y = degree_preserving(seed.wrapping_add(1), &[a, b]);
        let s = x.graded_commutator(&y).unwrap().supertrace().unwrap();
        prop_assert!(s.norm() < 1e-12);
    }

    #[test]
    fn odd_commutator_is_the_generator(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = common::rng(seed);
        let c = common::random_toy_complex(&mut rng, n);
        let l = c.differential().graded_commutator(&c.contraction()).unwrap();
        let g = c.generator();
        for k in 0..=1 {
            let diff = l.block(k).unwrap() - g.block(k).unwrap();
            prop_assert!(diff.iter().all(|z| z.norm() < 1e-12));
        }
        prop_assert!(l.supertrace().unwrap().norm() < 1e-10);
    }
}

#[test]
fn gaussian_partition_matches_quadrature() {
    let cases: [(usize, [[f64; 3]; 3]); 3] = [
        (1, [[2.5, 0.0, 0.0], [0.0; 3], [0.0; 3]]),
        (2, [[1.5, 0.4, 0.0], [0.4, 0.8, 0.0], [0.0; 3]]),
        (3, [[1.2, 0.3, -0.1], [0.3, 0.9, 0.2], [-0.1, 0.2, 2.0]]),
    ];
    for (n, a) in cases {
        let m = CMatrix::from_fn(n, n, |i, j| common::cx(a[i][j], 0.0));
        let op = GradedOperator::degree_preserving([(0, m)]).unwrap();
        let z = op.gaussian_partition().unwrap();
        assert!((z - trapezoid_gaussian(&a, n)).abs() < 1e-6, "n = {n}");
    }
}

#[test]
fn odd_block_inverts_the_gaussian_weight() {
    let even = CMatrix::from_element(1, 1, common::cx(4.0, 0.0));
    let odd = CMatrix::from_element(1, 1, common::cx(9.0, 0.0));
    let op = GradedOperator::degree_preserving([(0, even), (1, odd)]).unwrap();
    assert!((op.gaussian_partition().unwrap() - 1.5).abs() < 1e-14);
}

#[test]
fn single_precision_routes_agree() {
    let d = CMatrix::<f32>::from_fn(3, 3, |i, j| Cx::new(if i == j { 2.0 } else { 0.3 * (i as f32 - j as f32) }, 0.1));
    let iota = CMatrix::<f32>::identity(3, 3) + CMatrix::from_element(3, 3, Cx::new(0.05, 0.0));
    let c = ToyBFComplex::new(d, iota).unwrap();
    let v = toy_bf_partition(&c, Cx::new(0.2f32, -0.1)).unwrap();
    assert!((v.gauge_fixed - v.direct).abs() / v.direct < 1e-4);
}
