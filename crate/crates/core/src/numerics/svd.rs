//! Small dense SVD (one-sided Jacobi) and spectral norm estimation.

use super::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 60;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

/// Thin SVD `A = U diag(S) V^T` with `r = min(m, n)`.
///
/// `U` is m×r and `V` is n×r, both with orthonormal columns; `S` is
/// nonincreasing and nonnegative.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdResult {
    /// Multiplies the factors back together.
    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.u.rows();
        let n = self.v.rows();
        let r = self.s.len();
        DenseMatrix::from_fn(m, n, |i, j| {
            let mut acc = 0.0;
            for k in 0..r {
                acc += self.u.get(i, k) * self.s[k] * self.v.get(j, k);
            }
            acc
        })
    }

    pub fn nuclear_norm(&self) -> f64 {
        self.s.iter().sum()
    }
}

/// One-sided Jacobi SVD, run on the side with the smaller Gram matrix.
///
/// Deterministic: fixed sweep order, no randomness. Errors if the rotation
/// sweeps fail to converge within the cap.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input".into()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidParameter("svd: empty matrix".into()));
    }
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let flipped = svd_tall(&a.transpose())?;
        Ok(SvdResult { u: flipped.v, s: flipped.s, v: flipped.u })
    }
}

fn svd_tall(a: &DenseMatrix) -> Result<SvdResult> {
    let m = a.rows();
    let n = a.cols();
    debug_assert!(m >= n);

    // Columns of `w` are rotated in place until pairwise orthogonal.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    let mut worst = 0.0f64;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&w[i], &w[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..m {
                        alpha += ci[k] * ci[k];
                        beta += cj[k] * cj[k];
                        gamma += ci[k] * cj[k];
                    }
                    (alpha, beta, gamma)
                };
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 || gamma.abs() <= JACOBI_TOL * scale {
                    continue;
                }
                worst = worst.max(gamma.abs() / scale);
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        // One more scan to report the residual honestly.
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let (ci, cj) = (&w[i], &w[j]);
                let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                let ni: f64 = ci.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nj: f64 = cj.iter().map(|x| x * x).sum::<f64>().sqrt();
                if ni > 0.0 && nj > 0.0 {
                    residual = residual.max(dot.abs() / (ni * nj));
                }
            }
        }
        let _ = worst;
        return Err(Error::SvdNoConvergence { sweeps: JACOBI_MAX_SWEEPS, residual });
    }

    // Sort columns by singular value, descending. Stable order keeps the
    // result deterministic for repeated values.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let sigma_max = norms[order[0]];
    let zero_cutoff = sigma_max * (m.max(n) as f64) * f64::EPSILON;
    for &idx in &order {
        let sigma = norms[idx];
        s.push(sigma);
        v_cols.push(v[idx].clone());
        if sigma > zero_cutoff && sigma > 0.0 {
            u_cols.push(w[idx].iter().map(|x| x / sigma).collect());
        } else {
            u_cols.push(Vec::new()); // completed below
        }
    }

    // Exactly-zero (or negligible) singular directions get orthonormal
    // filler columns so U keeps orthonormal columns.
    for j in 0..n {
        if !u_cols[j].is_empty() {
            continue;
        }
        let mut filled = None;
        for cand in 0..m {
            let mut col = vec![0.0; m];
            col[cand] = 1.0;
            for _ in 0..2 {
                for other in u_cols.iter().filter(|c| !c.is_empty()) {
                    let d: f64 = col.iter().zip(other).map(|(a, b)| a * b).sum();
                    for (c, o) in col.iter_mut().zip(other) {
                        *c -= d * o;
                    }
                }
            }
            let nrm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 0.5 {
                for c in col.iter_mut() {
                    *c /= nrm;
                }
                filled = Some(col);
                break;
            }
        }
        u_cols[j] = filled.ok_or_else(|| {
            Error::InvalidParameter("svd: could not complete orthonormal basis".into())
        })?;
    }

    let u = DenseMatrix::from_fn(m, n, |i, j| u_cols[j][i]);
    let vm = DenseMatrix::from_fn(n, n, |i, j| v_cols[j][i]);
    let result = SvdResult { u, s, v: vm };

    #[cfg(debug_assertions)]
    verify_invariants(a, &result);

    Ok(result)
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let (head, tail) = cols.split_at_mut(hi);
    let ci = &mut head[lo];
    let cj = &mut tail[0];
    for k in 0..ci.len() {
        let a = ci[k];
        let b = cj[k];
        ci[k] = c * a - s * b;
        cj[k] = s * a + c * b;
    }
}

#[cfg(debug_assertions)]
fn verify_invariants(a: &DenseMatrix, r: &SvdResult) {
    let n = r.s.len();
    for i in 0..n {
        assert!(r.s[i] >= 0.0, "singular value {i} negative: {}", r.s[i]);
        if i + 1 < n {
            assert!(r.s[i] >= r.s[i + 1], "singular values not sorted at {i}");
        }
    }
    let ortho = |m: &DenseMatrix| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..m.cols() {
            for j in 0..m.cols() {
                let mut d = 0.0;
                for k in 0..m.rows() {
                    d += m.get(k, i) * m.get(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    };
    assert!(ortho(&r.u) <= 1e-10, "U columns not orthonormal: {}", ortho(&r.u));
    assert!(ortho(&r.v) <= 1e-10, "V columns not orthonormal: {}", ortho(&r.v));
    let recon = r.reconstruct();
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            worst = worst.max((recon.get(i, j) - a.get(i, j)).abs());
        }
    }
    let tol = 1e-9 * (1.0 + a.max_abs());
    assert!(worst <= tol, "reconstruction residual {worst} exceeds {tol}");
}

/// Squared spectral norm `sigma_max(A)^2` by power iteration on the smaller
/// Gram matrix, stopped on the eigen-residual.
pub fn spectral_norm_sq(a: &DenseMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("spectral_norm_sq input".into()));
    }
    let tall = a.rows() >= a.cols();
    let dim = a.rows().min(a.cols());
    if dim == 0 {
        return Ok(0.0);
    }
    let apply = |v: &DenseVector| -> DenseVector {
        if tall {
            a.matvec_t(&a.matvec(v))
        } else {
            a.matvec(&a.matvec_t(v))
        }
    };

    // Deterministic pseudo-random start vector.
    let mut state = 0x853C_49E6_748F_EA9Bu64;
    let mut v = DenseVector::from_fn(dim, |_| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        1.0 + (state % 1024) as f64 / 1024.0
    });
    let nrm = v.norm();
    v = v.scale(1.0 / nrm);

    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = apply(&v);
        lambda = v.dot(&w);
        if lambda <= 0.0 {
            return Ok(0.0); // A == 0 (Gram is PSD)
        }
        let residual = w.axpy(-lambda, &v).norm();
        if residual <= POWER_TOL * lambda {
            return Ok(lambda);
        }
        let wn = w.norm();
        v = w.scale(1.0 / wn);
    }
    Ok(lambda)
}
