#![allow(dead_code)]

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use ruelle_bf_core::{CMatrix, CVector, Cx, MatrixBFModel, ToyBFComplex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cx(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix<f64> {
    CMatrix::from_fn(n, n, |_, _| cx(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector<f64> {
    CVector::from_fn(n, |_, _| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `I + 0.3 R`, comfortably invertible.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    CMatrix::identity(n, n) + random_matrix(rng, n, 0.3 / (n as f64).sqrt())
}

/// `S diag(μ) S^{-1}` with `Re μ ∈ [lo, hi]` and one imaginary offset per block.
pub fn block_with_spectrum(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, im: f64) -> CMatrix<f64> {
    let offset = rng.gen_range(-im..=im);
    let mu = DVector::from_fn(n, |_, _| cx(rng.gen_range(lo..hi), offset));
    let s = well_conditioned(rng, n);
    let s_inv = s.clone().try_inverse().expect("well conditioned");
    s * CMatrix::from_diagonal(&mu) * s_inv
}

/// Graded model with one to three degree blocks of size one to three.
pub fn random_graded_model(rng: &mut ChaCha8Rng, lo: f64, hi: f64, im: f64, k: usize) -> MatrixBFModel<f64> {
    let blocks = rng.gen_range(1..=3);
    let gens = (0..blocks)
        .map(|deg| {
            let n = rng.gen_range(1..=3);
            (deg, block_with_spectrum(rng, n, lo, hi, im))
        })
        .collect();
    MatrixBFModel::from_generators(gens, k).expect("valid model")
}

/// Graded model on `n` dimensions with non-identity `iota` in every block.
pub fn random_bf_model(rng: &mut ChaCha8Rng, sizes: &[usize], k: usize) -> MatrixBFModel<f64> {
    let blocks = sizes
        .iter()
        .enumerate()
        .map(|(deg, &n)| {
            let l = block_with_spectrum(rng, n, 0.5, 2.0, 0.3);
            let iota = well_conditioned(rng, n);
            let d = iota.clone().try_inverse().expect("invertible") * l;
            (deg as i32, d, iota)
        })
        .collect();
    MatrixBFModel::from_blocks(blocks, k).expect("valid model")
}

pub fn random_toy_complex(rng: &mut ChaCha8Rng, n: usize) -> ToyBFComplex<f64> {
    let d = random_matrix(rng, n, 1.0) + CMatrix::identity(n, n) * cx(2.0, 0.0);
    let iota = well_conditioned(rng, n);
    ToyBFComplex::new(d, iota).expect("invertible")
}

pub fn rel(a: Cx<f64>, b: Cx<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}
