#![allow(dead_code)]

use expgram::matrix::{one_norm, DenseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Normal entries rescaled so that ‖A‖₁ equals `norm`.
pub fn matrix_with_norm(rng: &mut impl Rng, n: usize, norm: f64) -> DenseMatrix {
    let a = normal_matrix(rng, n, n);
    a.scale(norm / one_norm(&a))
}

pub fn rel_err(approx: &DenseMatrix, exact: &DenseMatrix) -> f64 {
    one_norm(&approx.sub(exact).unwrap()) / one_norm(exact)
}

/// Householder reflector I − 2vvᵀ/(vᵀv).
pub fn reflector(v: &[f64]) -> DenseMatrix {
    let vv: f64 = v.iter().map(|x| x * x).sum();
    DenseMatrix::from_fn(v.len(), v.len(), |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d - 2.0 * v[i] * v[j] / vv
    })
}
