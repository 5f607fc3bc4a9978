//! Proximal operators and projections.
//!
//! `prox_{tau, psi}(x) = argmin_y psi(y) + ||y - x||^2 / (2 tau)`. The
//! operators here cover the penalties used by the benchmark problems
//! (l1, squared l2, nuclear norm, ball indicator) plus the prox of a full
//! quadratic objective, which the proximal solver variant needs.

use crate::error::{Error, Result};
use crate::numerics::{svd, CholeskyFactor, DenseMatrix, DenseVector};
use crate::problems::Problem;

/// Soft threshold: componentwise `sign(x) * max(|x| - tau, 0)`.
pub fn prox_l1(x: &DenseVector, tau: f64) -> DenseVector {
    debug_assert!(tau >= 0.0);
    DenseVector::from_fn(x.len(), |i| {
        let v = x[i];
        let shrunk = v.abs() - tau;
        if shrunk > 0.0 {
            v.signum() * shrunk
        } else {
            0.0
        }
    })
}

/// Prox of `lambda * ||.||^2`: uniform shrinkage `x / (1 + 2 tau lambda)`.
pub fn prox_l2sq(x: &DenseVector, tau: f64, lambda: f64) -> DenseVector {
    debug_assert!(tau >= 0.0 && lambda >= 0.0);
    x.scale(1.0 / (1.0 + 2.0 * tau * lambda))
}

/// Singular value soft threshold: `U max(S - tau, 0) V^T`.
pub fn prox_nuclear(x: &DenseMatrix, tau: f64) -> Result<DenseMatrix> {
    debug_assert!(tau >= 0.0);
    let f = svd(x)?;
    let shrunk: Vec<f64> = f.s.iter().map(|s| (s - tau).max(0.0)).collect();
    let r = shrunk.len();
    Ok(DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        let mut acc = 0.0;
        for k in 0..r {
            if shrunk[k] > 0.0 {
                acc += f.u.get(i, k) * shrunk[k] * f.v.get(j, k);
            }
        }
        acc
    }))
}

/// Euclidean projection onto the ball of radius `mu`.
///
/// A hair of relative slack in the inside test makes the projection exactly
/// idempotent in floating point.
pub fn project_ball(x: &DenseVector, mu: f64) -> DenseVector {
    debug_assert!(mu > 0.0);
    let nrm = x.norm();
    if nrm <= mu * (1.0 + 1e-12) {
        x.clone()
    } else {
        x.scale(mu / nrm)
    }
}

/// Cached prox of the full least-squares objective
/// `f(y) = 1/2 ||A y - b||^2 + l2 ||y||^2`:
/// solves `(I + s (A^T A + 2 l2 I)) y = x + s A^T b`.
#[derive(Debug, Clone)]
pub struct FullQuadraticProx {
    s: f64,
    chol: CholeskyFactor,
    s_at_b: DenseVector,
}

impl FullQuadraticProx {
    pub fn new(a: &DenseMatrix, b: &DenseVector, s: f64, l2: f64) -> Result<Self> {
        if s <= 0.0 {
            return Err(Error::InvalidParameter("prox step s must be positive".into()));
        }
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "full quadratic prox",
                left: a.rows(),
                right: b.len(),
            });
        }
        let n = a.cols();
        let at = a.transpose();
        let mut m = at.matmul(a);
        for i in 0..n {
            for j in 0..n {
                let mut v = s * m.get(i, j);
                if i == j {
                    v += 1.0 + 2.0 * s * l2;
                }
                m.set(i, j, v);
            }
        }
        let chol = CholeskyFactor::factor(&m)?;
        let s_at_b = a.matvec_t(b).scale(s);
        Ok(Self { s, chol, s_at_b })
    }

    pub fn step(&self) -> f64 {
        self.s
    }

    pub fn apply(&self, x: &DenseVector) -> DenseVector {
        self.chol.solve(&x.add(&self.s_at_b))
    }
}

/// One-shot prox of `f(y) = 1/2 ||A y - b||^2` at step `s`.
pub fn prox_full_quadratic(
    x: &DenseVector,
    s: f64,
    a: &DenseMatrix,
    b: &DenseVector,
) -> Result<DenseVector> {
    Ok(FullQuadraticProx::new(a, b, s, 0.0)?.apply(x))
}

const SMOOTH_PROX_GRAD_TOL: f64 = 1e-12;
const SMOOTH_PROX_MAX_ITERS: usize = 100_000;

/// Prox of a general smooth objective by an inner accelerated-gradient
/// solve of `phi(y) = f(y) + ||y - x||^2 / (2 s)` to a gradient-norm
/// tolerance of 1e-12 (iteration cap 1e5).
pub fn prox_smooth(problem: &Problem, x: &DenseVector, s: f64) -> Result<DenseVector> {
    if s <= 0.0 {
        return Err(Error::InvalidParameter("prox step s must be positive".into()));
    }
    let l_phi = problem.lipschitz() + 1.0 / s;
    let eta = 1.0 / l_phi;
    let grad_phi = |y: &DenseVector| -> DenseVector {
        problem.smooth_gradient(y).axpy(1.0 / s, &y.sub(x))
    };

    // Nesterov momentum with the classic t-sequence; phi is strongly convex,
    // so this converges well past the tolerance long before the cap.
    let mut yk = x.clone();
    let mut xk = x.clone();
    let mut t = 1.0f64;
    for _ in 0..SMOOTH_PROX_MAX_ITERS {
        let g = grad_phi(&yk);
        if g.norm() <= SMOOTH_PROX_GRAD_TOL {
            return Ok(yk);
        }
        let x_next = yk.axpy(-eta, &g);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        yk = x_next.axpy((t - 1.0) / t_next, &x_next.sub(&xk));
        xk = x_next;
        t = t_next;
        if !xk.is_finite() {
            return Err(Error::ProxSolve("inner iterate became non-finite".into()));
        }
    }
    let g = grad_phi(&xk);
    if g.norm() <= SMOOTH_PROX_GRAD_TOL * 1e3 {
        Ok(xk)
    } else {
        Err(Error::ProxSolve(format!(
            "gradient norm {:.3e} after {} iterations",
            g.norm(),
            SMOOTH_PROX_MAX_ITERS
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::build_least_squares;
    use crate::sampling;
    use proptest::prelude::*;

    fn vec_of(values: &[f64]) -> DenseVector {
        DenseVector::from_vec(values.to_vec()).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        let x = vec_of(&[2.0, -0.5, 0.0]);
        assert_eq!(prox_l1(&x, 1.0).as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(prox_l1(&x, 0.0).as_slice(), x.as_slice());
    }

    #[test]
    fn soft_threshold_matches_scalar_brute_force() {
        // 1-D grid + refine search of argmin tau|y| + (y - x)^2 / 2.
        let brute = |x: f64, tau: f64| -> f64 {
            let obj = |y: f64| tau * y.abs() + 0.5 * (y - x) * (y - x);
            let mut best = -4.0f64;
            let mut best_v = obj(best);
            let mut lo = -4.0;
            let mut hi = 4.0;
            for _ in 0..6 {
                let step = (hi - lo) / 400.0;
                let mut y = lo;
                while y <= hi {
                    let v = obj(y);
                    if v < best_v {
                        best_v = v;
                        best = y;
                    }
                    y += step;
                }
                lo = best - 2.0 * step;
                hi = best + 2.0 * step;
            }
            best
        };
        for &(x, tau) in &[(2.0, 1.0), (-1.3, 0.4), (0.2, 0.5), (3.0, 0.0)] {
            let got = prox_l1(&vec_of(&[x]), tau)[0];
            let want = brute(x, tau);
            assert!((got - want).abs() < 1e-4, "x={x} tau={tau}: {got} vs {want}");
        }
    }

    #[test]
    fn l2sq_prox_examples() {
        let x = vec_of(&[2.0]);
        assert_eq!(prox_l2sq(&x, 1.0, 0.0).as_slice(), x.as_slice());
        let y = prox_l2sq(&x, 1.0, 0.5);
        assert!((y[0] - 1.0).abs() < 1e-15);
        // First-order condition x - y = 2 tau lambda y.
        let (tau, lambda) = (0.7, 1.3);
        let x2 = vec_of(&[1.5, -2.0]);
        let y2 = prox_l2sq(&x2, tau, lambda);
        for i in 0..2 {
            assert!((x2[i] - y2[i] - 2.0 * tau * lambda * y2[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn nuclear_prox_on_diagonal() {
        let x = DenseMatrix::diag(&[3.0, 1.0]);
        let y = prox_nuclear(&x, 2.0).unwrap();
        assert!((y.get(0, 0) - 1.0).abs() < 1e-10);
        assert!(y.get(1, 1).abs() < 1e-10);
        assert!(y.get(0, 1).abs() < 1e-10);

        // tau = 0 reconstructs, tau >= s_max zeroes.
        let same = prox_nuclear(&x, 0.0).unwrap();
        assert!((same.get(0, 0) - 3.0).abs() <= 1e-9);
        let zero = prox_nuclear(&x, 3.5).unwrap();
        assert!(zero.max_abs() <= 1e-12);
    }

    #[test]
    fn ball_projection_examples() {
        let inside = vec_of(&[0.3, 0.4]);
        assert_eq!(project_ball(&inside, 1.0).as_slice(), inside.as_slice());
        let x = vec_of(&[6.0, 8.0]);
        let y = project_ball(&x, 5.0);
        assert!((y[0] - 3.0).abs() < 1e-12);
        assert!((y[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ball_projection_idempotent_exactly() {
        for seed in 0..20u64 {
            let x = sampling::gaussian_vector(15, seed).scale(3.0);
            let once = project_ball(&x, 1.25);
            let twice = project_ball(&once, 1.25);
            assert_eq!(once.as_slice(), twice.as_slice(), "seed {seed}");
            assert!(once.norm() <= 1.25 + 1e-12);
        }
    }

    #[test]
    fn full_quadratic_prox_optimality() {
        let a = sampling::gaussian_matrix(6, 4, 1);
        let b = sampling::gaussian_vector(6, 2);
        let x = sampling::gaussian_vector(4, 3);
        let s = 0.8;
        let y = prox_full_quadratic(&x, s, &a, &b).unwrap();
        // A^T A y - A^T b + (y - x)/s = 0
        let resid = a
            .matvec_t(&a.matvec(&y))
            .sub(&a.matvec_t(&b))
            .axpy(1.0 / s, &y.sub(&x));
        assert!(resid.norm() <= 1e-9, "residual {}", resid.norm());
    }

    #[test]
    fn full_quadratic_prox_zero_matrix_is_identity() {
        let a = DenseMatrix::zeros(3, 3);
        let b = DenseVector::zeros(3);
        let x = vec_of(&[1.0, -2.0, 0.5]);
        let y = prox_full_quadratic(&x, 2.0, &a, &b).unwrap();
        for i in 0..3 {
            assert!((y[i] - x[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn full_quadratic_prox_small_step_limit() {
        let a = sampling::gaussian_matrix(5, 3, 4);
        let b = sampling::gaussian_vector(5, 5);
        let x = sampling::gaussian_vector(3, 6);
        let s = 1e-6;
        let y = prox_full_quadratic(&x, s, &a, &b).unwrap();
        let grad = a.matvec_t(&a.matvec(&x).sub(&b));
        assert!(y.sub(&x).norm() <= s * grad.norm() * (1.0 + 1e-6));
    }

    #[test]
    fn smooth_prox_matches_closed_form() {
        let a = sampling::gaussian_matrix(8, 5, 9);
        let b = sampling::gaussian_vector(8, 10);
        let problem = build_least_squares(&a, &b).unwrap();
        let x = sampling::gaussian_vector(5, 11);
        let s = 0.35;
        let inner = prox_smooth(&problem, &x, s).unwrap();
        let closed = prox_full_quadratic(&x, s, &a, &b).unwrap();
        assert!(inner.distance(&closed) <= 1e-9);
    }

    fn moreau_optimality(
        psi: impl Fn(&DenseVector) -> f64,
        x: &DenseVector,
        y: &DenseVector,
        tau: f64,
        seed: u64,
    ) {
        let at = |z: &DenseVector| psi(z) + z.sub(x).norm_sq() / (2.0 * tau);
        let fy = at(y);
        for i in 0..50 {
            let scale = [0.01, 0.1, 1.0][i % 3];
            let z = y.add(&sampling::gaussian_vector(y.len(), sampling::substream(seed, i as u64)).scale(scale));
            assert!(fy <= at(&z) + 1e-9, "candidate {i} beats prox output");
        }
    }

    #[test]
    fn prox_outputs_minimize_moreau_objective() {
        let x = sampling::gaussian_vector(8, 21).scale(2.0);
        let tau = 0.6;
        let y1 = prox_l1(&x, tau * 0.8);
        moreau_optimality(|z| 0.8 * z.iter().map(|v| v.abs()).sum::<f64>(), &x, &y1, tau, 100);
        let y2 = prox_l2sq(&x, tau, 0.9);
        moreau_optimality(|z| 0.9 * z.norm_sq(), &x, &y2, tau, 200);
    }

    proptest! {
        #[test]
        fn prox_l1_nonexpansive(seed in 0u64..200) {
            let u = sampling::gaussian_vector(6, sampling::substream(seed, 1));
            let v = sampling::gaussian_vector(6, sampling::substream(seed, 2));
            let d = prox_l1(&u, 0.5).distance(&prox_l1(&v, 0.5));
            prop_assert!(d <= u.distance(&v) + 1e-12);
        }

        #[test]
        fn project_ball_nonexpansive(seed in 0u64..200) {
            let u = sampling::gaussian_vector(6, sampling::substream(seed, 3)).scale(2.0);
            let v = sampling::gaussian_vector(6, sampling::substream(seed, 4)).scale(2.0);
            let d = project_ball(&u, 1.0).distance(&project_ball(&v, 1.0));
            prop_assert!(d <= u.distance(&v) + 1e-12);
        }
    }
}
