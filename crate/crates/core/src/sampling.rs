//! Seeded random generation for benchmark instances and estimators.
//!
//! All draws go through ChaCha8 seeded from a `u64`, so runs are
//! reproducible bit-for-bit across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{DenseMatrix, DenseVector};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream tag, so independent substreams can be
/// derived from one run seed (splitmix64 finalizer).
pub fn substream(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_vector(n: usize, seed: u64) -> DenseVector {
    let mut rng = rng_from_seed(seed);
    DenseVector::from_fn(n, |_| StandardNormal.sample(&mut rng))
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

pub fn uniform_vector(n: usize, seed: u64) -> DenseVector {
    let mut rng = rng_from_seed(seed);
    DenseVector::from_fn(n, |_| rng.random::<f64>())
}

pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

pub fn bernoulli_labels(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect()
}

/// Samples `count` distinct positions out of `total` (partial Fisher-Yates).
pub fn sample_positions(total: usize, count: usize, seed: u64) -> Vec<usize> {
    assert!(count <= total);
    let mut rng = rng_from_seed(seed);
    let mut idx: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        idx.swap(i, j);
    }
    let mut chosen = idx[..count].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Orthonormalizes the columns of a Gaussian matrix (modified Gram-Schmidt,
/// two passes). Returns an n×k matrix with orthonormal columns.
pub fn orthonormal_directions(n: usize, k: usize, seed: u64) -> DenseMatrix {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let g = gaussian_matrix(n, k, seed);
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| (0..n).map(|i| g.get(i, j)).collect()).collect();
    for j in 0..k {
        for _pass in 0..2 {
            for prev in 0..j {
                let d: f64 = cols[j].iter().zip(&cols[prev]).map(|(a, b)| a * b).sum();
                for i in 0..n {
                    cols[j][i] -= d * cols[prev][i];
                }
            }
        }
        let nrm: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(nrm > 1e-300, "degenerate direction draw");
        for x in cols[j].iter_mut() {
            *x /= nrm;
        }
    }
    DenseMatrix::from_fn(n, k, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_are_reproducible() {
        assert_eq!(
            gaussian_vector(8, 42).as_slice(),
            gaussian_vector(8, 42).as_slice()
        );
        assert_ne!(
            gaussian_vector(8, 42).as_slice(),
            gaussian_vector(8, 43).as_slice()
        );
    }

    #[test]
    fn substreams_differ() {
        assert_ne!(substream(7, 0), substream(7, 1));
        assert_eq!(substream(7, 1), substream(7, 1));
    }

    #[test]
    fn orthonormal_directions_are_orthonormal() {
        let v = orthonormal_directions(10, 6, 3);
        for i in 0..6 {
            for j in 0..6 {
                let mut d = 0.0;
                for r in 0..10 {
                    d += v.get(r, i) * v.get(r, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((d - target).abs() <= 1e-12, "vtv[{i}][{j}] = {d}");
            }
        }
    }

    #[test]
    fn sampled_positions_distinct_and_sorted() {
        let pos = sample_positions(100, 20, 5);
        assert_eq!(pos.len(), 20);
        for w in pos.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
