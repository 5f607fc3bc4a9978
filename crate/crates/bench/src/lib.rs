//! Shared fixtures for the criterion benchmarks.

use nsa_core::numerics::DenseMatrix;
use nsa_core::problems::{build_lasso, build_least_squares, Problem};
use nsa_core::sampling;
use nsa_core::DenseVector;

pub fn least_squares_fixture(rows: usize, cols: usize, seed: u64) -> (Problem, DenseVector) {
    let a = sampling::gaussian_matrix(rows, cols, sampling::substream(seed, 1));
    let b = sampling::gaussian_vector(rows, sampling::substream(seed, 2));
    let x0 = sampling::gaussian_vector(cols, sampling::substream(seed, 3));
    (build_least_squares(&a, &b).unwrap(), x0)
}

pub fn lasso_fixture(rows: usize, cols: usize, seed: u64) -> (Problem, DenseVector) {
    let a = sampling::gaussian_matrix(rows, cols, sampling::substream(seed, 1));
    let b = sampling::gaussian_vector(rows, sampling::substream(seed, 2));
    let x0 = sampling::gaussian_vector(cols, sampling::substream(seed, 3));
    (build_lasso(&a, &b, 0.1).unwrap(), x0)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    sampling::gaussian_matrix(rows, cols, seed)
}
