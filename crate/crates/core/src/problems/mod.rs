//! Benchmark objectives as composite problems `F = f + h`.
//!
//! A [`Problem`] bundles the smooth part (value, gradient, Lipschitz
//! estimate, optional Hessian-vector product), an optional nonsmooth part
//! (value plus prox, always together), and an optional optimum hint used by
//! the convergence diagnostics. Problems are immutable and cheap to share
//! across concurrent runs.

mod dataset;
mod mlp;

pub use dataset::{load_csv_dataset, parse_csv_dataset, Dataset, LabelColumn};
pub use mlp::{build_mlp_classifier, mlp_initial_parameters, MLP_DEFAULT_LIPSCHITZ};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{spectral_norm_sq, svd, CholeskyFactor, DenseMatrix, DenseVector};
use crate::prox::{prox_l1, prox_nuclear, prox_smooth, FullQuadraticProx};

type ValueFn = Arc<dyn Fn(&DenseVector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DenseVector) -> DenseVector + Send + Sync>;
type ProxFn = Arc<dyn Fn(&DenseVector, f64) -> DenseVector + Send + Sync>;
type HvpFn = Arc<dyn Fn(&DenseVector, &DenseVector) -> DenseVector + Send + Sync>;
/// Prox of the whole objective at a fixed step, built once per run.
pub type FullProxFn = Arc<dyn Fn(&DenseVector) -> Result<DenseVector> + Send + Sync>;
type FullProxFactory = Arc<dyn Fn(f64) -> Result<FullProxFn> + Send + Sync>;

/// Nonsmooth part of a composite objective: value and prox travel together.
#[derive(Clone)]
pub struct NonsmoothPart {
    value: ValueFn,
    prox: ProxFn,
}

/// Optimum information for diagnostics. `x_star` may be absent when only a
/// reference value is known (e.g. from a long proximal-gradient run).
#[derive(Debug, Clone)]
pub struct OptimumHint {
    pub x_star: Option<DenseVector>,
    pub f_star: f64,
}

#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    smooth_value: ValueFn,
    smooth_gradient: GradFn,
    lipschitz: f64,
    hessian_vp: Option<HvpFn>,
    nonsmooth: Option<NonsmoothPart>,
    optimum: Option<OptimumHint>,
    convex: bool,
    full_prox_factory: Option<FullProxFactory>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("composite", &self.nonsmooth.is_some())
            .field("convex", &self.convex)
            .finish()
    }
}

impl Problem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lipschitz estimate for the smooth gradient.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn is_composite(&self) -> bool {
        self.nonsmooth.is_some()
    }

    pub fn smooth_value(&self, x: &DenseVector) -> f64 {
        (self.smooth_value)(x)
    }

    pub fn smooth_gradient(&self, x: &DenseVector) -> DenseVector {
        (self.smooth_gradient)(x)
    }

    pub fn nonsmooth_value(&self, x: &DenseVector) -> f64 {
        self.nonsmooth.as_ref().map_or(0.0, |n| (n.value)(x))
    }

    /// Total objective `F(x) = f(x) + h(x)`.
    pub fn value(&self, x: &DenseVector) -> f64 {
        self.smooth_value(x) + self.nonsmooth_value(x)
    }

    /// Prox of the nonsmooth part at step `tau`; identity when `h == 0`.
    pub fn prox_nonsmooth(&self, x: &DenseVector, tau: f64) -> DenseVector {
        match &self.nonsmooth {
            Some(n) => (n.prox)(x, tau),
            None => x.clone(),
        }
    }

    /// Hessian-vector product of the smooth part, analytic when the builder
    /// provides one, otherwise a central difference of gradients with
    /// `h = sqrt(eps) (1 + ||x||) / ||v||`.
    pub fn hessian_vp(&self, x: &DenseVector, v: &DenseVector) -> DenseVector {
        if let Some(hvp) = &self.hessian_vp {
            return hvp(x, v);
        }
        let vn = v.norm();
        if vn == 0.0 {
            return DenseVector::zeros(self.dim);
        }
        let h = f64::EPSILON.sqrt() * (1.0 + x.norm()) / vn;
        let gp = self.smooth_gradient(&x.axpy(h, v));
        let gm = self.smooth_gradient(&x.axpy(-h, v));
        gp.sub(&gm).scale(1.0 / (2.0 * h))
    }

    pub fn has_analytic_hvp(&self) -> bool {
        self.hessian_vp.is_some()
    }

    pub fn optimum(&self) -> Option<&OptimumHint> {
        self.optimum.as_ref()
    }

    pub fn f_star(&self) -> Option<f64> {
        self.optimum.as_ref().map(|o| o.f_star)
    }

    pub fn x_star(&self) -> Option<&DenseVector> {
        self.optimum.as_ref().and_then(|o| o.x_star.as_ref())
    }

    /// Replaces the optimum hint (used when a reference value is computed
    /// after construction).
    pub fn with_optimum(mut self, hint: OptimumHint) -> Self {
        self.optimum = Some(hint);
        self
    }

    /// Overrides the Lipschitz estimate (e.g. a configured surrogate for the
    /// nonconvex classifier).
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        assert!(l > 0.0);
        self.lipschitz = l;
        self
    }

    #[cfg(test)]
    pub(crate) fn clear_hvp_for_tests(mut self) -> Self {
        self.hessian_vp = None;
        self
    }

    /// Prox of the whole objective at step `s`: closed form for the
    /// quadratic builders, an inner accelerated solve for other smooth
    /// problems, and unsupported for composite objectives.
    pub fn full_objective_prox(&self, s: f64) -> Result<FullProxFn> {
        if s <= 0.0 {
            return Err(Error::InvalidParameter("prox step s must be positive".into()));
        }
        if let Some(factory) = &self.full_prox_factory {
            return factory(s);
        }
        if self.is_composite() {
            return Err(Error::Config(format!(
                "{}: prox of the full objective is only available for smooth problems",
                self.name
            )));
        }
        let problem = self.clone();
        Ok(Arc::new(move |x: &DenseVector| prox_smooth(&problem, x, s)))
    }
}

fn check_system(a: &DenseMatrix, b: &DenseVector, what: &'static str) -> Result<()> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch { context: what, left: a.rows(), right: b.len() });
    }
    Ok(())
}

/// Solves `(A^T A + ridge I) x = A^T b`; used for optimum hints.
fn normal_equations(a: &DenseMatrix, b: &DenseVector, ridge: f64) -> Result<DenseVector> {
    let at = a.transpose();
    let mut gram = at.matmul(a);
    for i in 0..gram.rows() {
        gram.set(i, i, gram.get(i, i) + ridge);
    }
    let chol = CholeskyFactor::factor(&gram)?;
    Ok(chol.solve(&a.matvec_t(b)))
}

/// `f(x) = 1/2 ||A x - b||^2`, with the optimum from the normal equations
/// when `A` has full column rank.
pub fn build_least_squares(a: &DenseMatrix, b: &DenseVector) -> Result<Problem> {
    check_system(a, b, "least squares rows vs b")?;
    let l = spectral_norm_sq(a)?;
    let a1 = Arc::new(a.clone());
    let b1 = Arc::new(b.clone());
    let (a2, b2) = (a1.clone(), b1.clone());
    let a3 = a1.clone();
    let (a4, b4) = (a1.clone(), b1.clone());

    let optimum = normal_equations(a, b, 0.0).ok().map(|x_star| {
        let r = a.matvec(&x_star).sub(b);
        OptimumHint { f_star: 0.5 * r.norm_sq(), x_star: Some(x_star) }
    });

    Ok(Problem {
        name: "least_squares".into(),
        dim: a.cols(),
        smooth_value: Arc::new(move |x| 0.5 * a1.matvec(x).sub(&b1).norm_sq()),
        smooth_gradient: Arc::new(move |x| a2.matvec_t(&a2.matvec(x).sub(&b2))),
        lipschitz: l,
        hessian_vp: Some(Arc::new(move |_x, v| a3.matvec_t(&a3.matvec(v)))),
        nonsmooth: None,
        optimum,
        convex: true,
        full_prox_factory: Some(Arc::new(move |s| {
            let cached = FullQuadraticProx::new(&a4, &b4, s, 0.0)?;
            Ok(Arc::new(move |x: &DenseVector| Ok(cached.apply(x))) as FullProxFn)
        })),
    })
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic regression `f(x) = sum_i [-y_i a_i^T x + log(1 + e^{a_i^T x})]`
/// with labels in {0, 1} and `L = ||A||^2 / 4`.
pub fn build_logistic(a: &DenseMatrix, y: &[f64]) -> Result<Problem> {
    if a.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "logistic rows vs labels",
            left: a.rows(),
            right: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(Error::InvalidParameter(format!("label {bad} outside {{0, 1}}")));
    }
    let l = 0.25 * spectral_norm_sq(a)?;
    let a1 = Arc::new(a.clone());
    let y1 = Arc::new(y.to_vec());
    let (a2, y2) = (a1.clone(), y1.clone());
    let a3 = a1.clone();

    Ok(Problem {
        name: "logistic".into(),
        dim: a.cols(),
        smooth_value: Arc::new(move |x| {
            let z = a1.matvec(x);
            z.iter().zip(y1.iter()).map(|(zi, yi)| -yi * zi + log1p_exp(*zi)).sum()
        }),
        smooth_gradient: Arc::new(move |x| {
            let z = a2.matvec(x);
            let resid = DenseVector::from_fn(z.len(), |i| sigmoid(z[i]) - y2[i]);
            a2.matvec_t(&resid)
        }),
        lipschitz: l,
        hessian_vp: Some(Arc::new(move |x, v| {
            let z = a3.matvec(x);
            let av = a3.matvec(v);
            let w = DenseVector::from_fn(z.len(), |i| {
                let s = sigmoid(z[i]);
                s * (1.0 - s) * av[i]
            });
            a3.matvec_t(&w)
        })),
        nonsmooth: None,
        optimum: None,
        convex: true,
        full_prox_factory: None,
    })
}

/// Lasso `F(x) = 1/2 ||A x - b||^2 + lambda ||x||_1`.
pub fn build_lasso(a: &DenseMatrix, b: &DenseVector, lambda: f64) -> Result<Problem> {
    check_system(a, b, "lasso rows vs b")?;
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("lasso lambda must be >= 0".into()));
    }
    let mut p = build_least_squares(a, b)?;
    p.name = "lasso".into();
    p.optimum = None; // the smooth optimum is not the composite optimum
    p.full_prox_factory = None;
    p.nonsmooth = Some(NonsmoothPart {
        value: Arc::new(move |x: &DenseVector| lambda * x.iter().map(|v| v.abs()).sum::<f64>()),
        prox: Arc::new(move |x: &DenseVector, tau: f64| prox_l1(x, tau * lambda)),
    });
    Ok(p)
}

/// Ridge `f(x) = 1/2 ||A x - b||^2 + lambda ||x||^2`, kept fully smooth:
/// gradient `A^T (A x - b) + 2 lambda x`, `L = ||A||^2 + 2 lambda`.
pub fn build_ridge(a: &DenseMatrix, b: &DenseVector, lambda: f64) -> Result<Problem> {
    check_system(a, b, "ridge rows vs b")?;
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("ridge lambda must be >= 0".into()));
    }
    let l = spectral_norm_sq(a)? + 2.0 * lambda;
    let a1 = Arc::new(a.clone());
    let b1 = Arc::new(b.clone());
    let (a2, b2) = (a1.clone(), b1.clone());
    let a3 = a1.clone();
    let (a4, b4) = (a1.clone(), b1.clone());

    let optimum = normal_equations(a, b, 2.0 * lambda).ok().map(|x_star| {
        let r = a.matvec(&x_star).sub(b);
        OptimumHint {
            f_star: 0.5 * r.norm_sq() + lambda * x_star.norm_sq(),
            x_star: Some(x_star),
        }
    });

    Ok(Problem {
        name: "ridge".into(),
        dim: a.cols(),
        smooth_value: Arc::new(move |x| 0.5 * a1.matvec(x).sub(&b1).norm_sq() + lambda * x.norm_sq()),
        smooth_gradient: Arc::new(move |x| {
            a2.matvec_t(&a2.matvec(x).sub(&b2)).axpy(2.0 * lambda, x)
        }),
        lipschitz: l,
        hessian_vp: Some(Arc::new(move |_x, v| {
            a3.matvec_t(&a3.matvec(v)).axpy(2.0 * lambda, v)
        })),
        nonsmooth: None,
        optimum,
        convex: true,
        full_prox_factory: Some(Arc::new(move |s| {
            let cached = FullQuadraticProx::new(&a4, &b4, s, lambda)?;
            Ok(Arc::new(move |x: &DenseVector| Ok(cached.apply(x))) as FullProxFn)
        })),
    })
}

/// Smoothed max `f(x) = rho log sum_i exp((a_i^T x - b_i) / rho)`, stabilized
/// by subtracting the max exponent; `L = ||A||^2 / rho`.
pub fn build_logsumexp(a: &DenseMatrix, b: &DenseVector, rho: f64) -> Result<Problem> {
    check_system(a, b, "logsumexp rows vs b")?;
    if rho <= 0.0 {
        return Err(Error::InvalidParameter("logsumexp rho must be > 0".into()));
    }
    let l = spectral_norm_sq(a)? / rho;
    let a1 = Arc::new(a.clone());
    let b1 = Arc::new(b.clone());
    let (a2, b2) = (a1.clone(), b1.clone());
    let (a3, b3) = (a1.clone(), b1.clone());

    let scaled_residual = move |a: &DenseMatrix, b: &DenseVector, x: &DenseVector| {
        let r = a.matvec(x).sub(b);
        r.scale(1.0 / rho)
    };
    let softmax = |u: &DenseVector| -> DenseVector {
        let m = u.iter().fold(f64::NEG_INFINITY, |acc, v| acc.max(*v));
        let exps = DenseVector::from_fn(u.len(), |i| (u[i] - m).exp());
        let total: f64 = exps.iter().sum();
        exps.scale(1.0 / total)
    };

    let sr1 = scaled_residual.clone();
    let sr2 = scaled_residual.clone();
    let sr3 = scaled_residual;
    Ok(Problem {
        name: "logsumexp".into(),
        dim: a.cols(),
        smooth_value: Arc::new(move |x| {
            let u = sr1(&a1, &b1, x);
            let m = u.iter().fold(f64::NEG_INFINITY, |acc, v| acc.max(*v));
            let sum: f64 = u.iter().map(|v| (v - m).exp()).sum();
            rho * (m + sum.ln())
        }),
        smooth_gradient: Arc::new(move |x| {
            let s = softmax(&sr2(&a2, &b2, x));
            a2.matvec_t(&s)
        }),
        lipschitz: l,
        hessian_vp: Some(Arc::new(move |x, v| {
            let s = softmax(&sr3(&a3, &b3, x));
            let av = a3.matvec(v);
            let sav = s.dot(&av);
            let w = DenseVector::from_fn(s.len(), |i| s[i] * (av[i] - sav) / rho);
            a3.matvec_t(&w)
        })),
        nonsmooth: None,
        optimum: None,
        convex: true,
        full_prox_factory: None,
    })
}

/// Matrix completion over the flattened variable `X` (row-major m*n vector):
/// `F(X) = 1/2 sum_observed (X - A)^2 + lambda ||X||_*`, smooth part L = 1.
pub fn build_matrix_completion(
    a_obs: &DenseMatrix,
    mask: &[bool],
    lambda: f64,
) -> Result<Problem> {
    let (m, n) = (a_obs.rows(), a_obs.cols());
    if mask.len() != m * n {
        return Err(Error::DimensionMismatch {
            context: "completion mask vs matrix",
            left: m * n,
            right: mask.len(),
        });
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("completion lambda must be >= 0".into()));
    }
    let target = Arc::new(a_obs.flatten());
    let mask1 = Arc::new(mask.to_vec());
    let (target2, mask2) = (target.clone(), mask1.clone());

    let nonsmooth = if lambda > 0.0 {
        Some(NonsmoothPart {
            value: Arc::new(move |x: &DenseVector| {
                let xm = DenseMatrix::from_vector(m, n, x).expect("flattened dims");
                lambda * svd(&xm).expect("svd of iterate").nuclear_norm()
            }),
            prox: Arc::new(move |x: &DenseVector, tau: f64| {
                let xm = DenseMatrix::from_vector(m, n, x).expect("flattened dims");
                prox_nuclear(&xm, tau * lambda).expect("nuclear prox").flatten()
            }),
        })
    } else {
        None
    };

    Ok(Problem {
        name: "matrix_completion".into(),
        dim: m * n,
        smooth_value: Arc::new(move |x| {
            x.iter()
                .zip(target.iter())
                .zip(mask1.iter())
                .filter(|(_, &obs)| obs)
                .map(|((xi, ai), _)| 0.5 * (xi - ai) * (xi - ai))
                .sum()
        }),
        smooth_gradient: Arc::new(move |x| {
            DenseVector::from_fn(x.len(), |i| if mask2[i] { x[i] - target2[i] } else { 0.0 })
        }),
        lipschitz: 1.0,
        hessian_vp: None,
        nonsmooth,
        optimum: None,
        convex: true,
        full_prox_factory: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    /// Independent central-difference oracle used to validate analytic
    /// gradients: h = 1e-6 * (1 + ||x||).
    pub(crate) fn central_diff_gradient(
        f: &dyn Fn(&DenseVector) -> f64,
        x: &DenseVector,
    ) -> DenseVector {
        let h = 1e-6 * (1.0 + x.norm());
        DenseVector::from_fn(x.len(), |i| {
            let mut plus = x.as_slice().to_vec();
            let mut minus = x.as_slice().to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&DenseVector::from_vec_unchecked(plus)) - f(&DenseVector::from_vec_unchecked(minus)))
                / (2.0 * h)
        })
    }

    pub(crate) fn assert_gradient_consistent(p: &Problem, points: usize, seed: u64, tol: f64) {
        for i in 0..points {
            let x = sampling::gaussian_vector(p.dim(), sampling::substream(seed, i as u64));
            let analytic = p.smooth_gradient(&x);
            let fd = central_diff_gradient(&|v| p.smooth_value(v), &x);
            let err = analytic.distance(&fd);
            assert!(
                err <= tol * (1.0 + analytic.norm()),
                "{}: gradient mismatch {err:.3e} at point {i}",
                p.name()
            );
        }
    }

    fn assert_midpoint_convex(p: &Problem, pairs: usize, seed: u64) {
        for i in 0..pairs {
            let u = sampling::gaussian_vector(p.dim(), sampling::substream(seed, 2 * i as u64));
            let v = sampling::gaussian_vector(p.dim(), sampling::substream(seed, 2 * i as u64 + 1));
            let mid = u.add(&v).scale(0.5);
            let lhs = p.value(&mid);
            let rhs = 0.5 * (p.value(&u) + p.value(&v));
            assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()), "{}: midpoint convexity", p.name());
        }
    }

    fn assert_lipschitz_valid(p: &Problem, pairs: usize, seed: u64) {
        let l = p.lipschitz();
        for i in 0..pairs {
            let u = sampling::gaussian_vector(p.dim(), sampling::substream(seed, 3 * i as u64));
            let v = sampling::gaussian_vector(p.dim(), sampling::substream(seed, 3 * i as u64 + 1));
            let lhs = p.smooth_gradient(&u).distance(&p.smooth_gradient(&v));
            assert!(
                lhs <= (l + 1e-6 * l) * u.distance(&v),
                "{}: Lipschitz bound violated ({lhs:.3e} vs L {l:.3e})",
                p.name()
            );
        }
    }

    #[test]
    fn least_squares_examples() {
        let a = DenseMatrix::identity(2);
        let b = DenseVector::from_vec(vec![1.0, 1.0]).unwrap();
        let p = build_least_squares(&a, &b).unwrap();
        let x = DenseVector::from_vec(vec![1.0, 1.0]).unwrap();
        assert_eq!(p.smooth_value(&x), 0.0);
        assert_eq!(p.smooth_gradient(&x).as_slice(), &[0.0, 0.0]);

        let zero_target = build_least_squares(&a, &DenseVector::zeros(2)).unwrap();
        let x2 = DenseVector::from_vec(vec![3.0, 4.0]).unwrap();
        assert_eq!(zero_target.smooth_value(&x2), 12.5);
        assert_eq!(zero_target.smooth_gradient(&x2).as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn least_squares_optimum_from_normal_equations() {
        let a = sampling::gaussian_matrix(10, 4, 3);
        let b = sampling::gaussian_vector(10, 4);
        let p = build_least_squares(&a, &b).unwrap();
        let hint = p.optimum().expect("full-rank system has an optimum hint");
        let g = p.smooth_gradient(hint.x_star.as_ref().unwrap());
        assert!(g.norm() <= 1e-8, "gradient at x* is {}", g.norm());
    }

    #[test]
    fn problem_batteries() {
        let a = sampling::gaussian_matrix(6, 3, 10);
        let b = sampling::gaussian_vector(6, 11);
        let ls = build_least_squares(&a, &b).unwrap();
        assert_gradient_consistent(&ls, 20, 100, 1e-5);
        assert_midpoint_convex(&ls, 100, 101);
        assert_lipschitz_valid(&ls, 100, 102);

        let y = sampling::bernoulli_labels(6, 12);
        let lg = build_logistic(&a, &y).unwrap();
        assert_gradient_consistent(&lg, 20, 200, 1e-5);
        assert_midpoint_convex(&lg, 100, 201);
        assert_lipschitz_valid(&lg, 100, 202);

        let rd = build_ridge(&a, &b, 0.3).unwrap();
        assert_gradient_consistent(&rd, 20, 300, 1e-5);
        assert_midpoint_convex(&rd, 100, 301);
        assert_lipschitz_valid(&rd, 100, 302);

        let lse = build_logsumexp(&a, &b, 5.0).unwrap();
        assert_gradient_consistent(&lse, 20, 400, 1e-5);
        assert_midpoint_convex(&lse, 100, 401);
        assert_lipschitz_valid(&lse, 100, 402);
    }

    #[test]
    fn logistic_at_zero() {
        let a = sampling::gaussian_matrix(7, 3, 20);
        let y = sampling::bernoulli_labels(7, 21);
        let p = build_logistic(&a, &y).unwrap();
        let zero = DenseVector::zeros(3);
        assert!((p.smooth_value(&zero) - 7.0 * std::f64::consts::LN_2).abs() < 1e-12);
        // gradient at 0 is A^T (1/2 - y)
        let expected = a.matvec_t(&DenseVector::from_fn(7, |i| 0.5 - y[i]));
        assert!(p.smooth_gradient(&zero).distance(&expected) < 1e-12);
    }

    #[test]
    fn logistic_rejects_bad_labels() {
        let a = DenseMatrix::identity(2);
        assert!(build_logistic(&a, &[0.0, 2.0]).is_err());
    }

    #[test]
    fn lasso_examples() {
        let a = sampling::gaussian_matrix(6, 4, 30);
        let b = sampling::gaussian_vector(6, 31);
        let plain = build_least_squares(&a, &b).unwrap();
        let l0 = build_lasso(&a, &b, 0.0).unwrap();
        let l = build_lasso(&a, &b, 0.5).unwrap();

        let x = DenseVector::from_vec(vec![1.0, -2.0, 0.0, 0.3]).unwrap();
        assert_eq!(l0.value(&x), plain.value(&x));
        assert!((l.nonsmooth_value(&DenseVector::from_vec(vec![1.0, -2.0, 0.0, 0.0]).unwrap()) - 1.5).abs() < 1e-15);
        // Composite value equals independently summed parts.
        let sep = 0.5 * a.matvec(&x).sub(&b).norm_sq()
            + 0.5 * x.iter().map(|v| v.abs()).sum::<f64>();
        assert!((l.value(&x) - sep).abs() <= 1e-12 * (1.0 + sep.abs()));
    }

    #[test]
    fn ridge_scalar_example() {
        let a = DenseMatrix::identity(1);
        let b = DenseVector::zeros(1);
        let p = build_ridge(&a, &b, 1.0).unwrap();
        let x = DenseVector::from_vec(vec![2.0]).unwrap();
        assert_eq!(p.smooth_value(&x), 6.0);
        assert_eq!(p.smooth_gradient(&x)[0], 6.0);
        // lambda = 0 reduces to least squares
        let p0 = build_ridge(&a, &b, 0.0).unwrap();
        let ls = build_least_squares(&a, &b).unwrap();
        for v in [-2.0, 0.5, 3.0] {
            let xv = DenseVector::from_vec(vec![v]).unwrap();
            assert_eq!(p0.smooth_value(&xv), ls.smooth_value(&xv));
        }
    }

    #[test]
    fn logsumexp_equal_arguments() {
        // All rows identical: a_i^T x - b_i == c for every i.
        let a = DenseMatrix::from_fn(4, 2, |_, j| if j == 0 { 1.0 } else { -1.0 });
        let b = DenseVector::from_fn(4, |_| 0.5);
        let rho = 5.0;
        let p = build_logsumexp(&a, &b, rho).unwrap();
        let x = DenseVector::from_vec(vec![2.0, 1.0]).unwrap();
        let c = 2.0 - 1.0 - 0.5;
        let expected = c + rho * (4.0f64).ln();
        assert!((p.smooth_value(&x) - expected).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_rejects_nonpositive_rho() {
        let a = DenseMatrix::identity(2);
        let b = DenseVector::zeros(2);
        assert!(build_logsumexp(&a, &b, 0.0).is_err());
    }

    #[test]
    fn logsumexp_stable_at_large_iterates() {
        let a = sampling::gaussian_matrix(5, 2, 40);
        let b = sampling::gaussian_vector(5, 41);
        let p = build_logsumexp(&a, &b, 0.1).unwrap();
        let x = DenseVector::from_vec(vec![800.0, -900.0]).unwrap();
        assert!(p.smooth_value(&x).is_finite());
        assert!(p.smooth_gradient(&x).is_finite());
    }

    #[test]
    fn matrix_completion_basics() {
        let a = DenseMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
        let mask = vec![true, false, true, true, false, true];
        let p = build_matrix_completion(&a, &mask, 0.1).unwrap();
        // X == A on observed entries: smooth value 0.
        assert_eq!(p.smooth_value(&a.flatten()), 0.0);

        // Full mask, lambda = 0: plain elementwise least squares.
        let full = build_matrix_completion(&a, &vec![true; 6], 0.0).unwrap();
        let x = DenseVector::from_fn(6, |i| i as f64 * 0.5);
        let expected: f64 = (0..6).map(|i| 0.5 * (x[i] - a.flatten()[i]).powi(2)).sum();
        assert!((full.value(&x) - expected).abs() < 1e-12);
        assert!(!full.is_composite());

        // Nuclear value of diag(3, 1) is 4.
        let d = DenseMatrix::diag(&[3.0, 1.0]);
        let pd = build_matrix_completion(&d, &vec![true; 4], 1.0).unwrap();
        assert!((pd.nonsmooth_value(&d.flatten()) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn completion_rejects_shape_mismatch() {
        let a = DenseMatrix::zeros(2, 2);
        assert!(build_matrix_completion(&a, &[true; 3], 0.1).is_err());
    }
}
