//! Zeroth-order gradient oracles built from function evaluations.
//!
//! Two estimators are provided: symmetric finite differences along the
//! canonical basis, and the same differencing along `k` orthonormal
//! directions drawn by QR of a seeded Gaussian matrix. Both charge their
//! evaluations to an [`EvalCounter`] so zeroth-order cost is visible in
//! traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::sampling;

/// Function-evaluation accounting for one solver run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    count: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, n: u64) {
        self.count += n;
    }

    pub fn total(&self) -> u64 {
        self.count
    }
}

/// Accuracy schedule `k -> eps_k`. Values never fall below 1e-300 so the
/// estimators cannot divide by zero after underflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `eps_k = 2^-k`.
    Geometric,
    /// `eps_k = c * r^k` with `r` in (0, 1).
    Custom { c: f64, r: f64 },
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<()> {
        if let EpsilonSchedule::Custom { c, r } = self {
            if !(*r > 0.0 && *r < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "schedule ratio r = {r} outside (0, 1)"
                )));
            }
            if *c <= 0.0 {
                return Err(Error::InvalidParameter("schedule scale c must be > 0".into()));
            }
        }
        Ok(())
    }

    pub fn value(&self, k: usize) -> f64 {
        let raw = match self {
            EpsilonSchedule::Geometric => 0.5f64.powi(k.min(2_000_000) as i32),
            EpsilonSchedule::Custom { c, r } => c * r.powi(k.min(2_000_000) as i32),
        };
        raw.max(1e-300)
    }
}

/// Evaluates the schedule at step `k`.
pub fn epsilon_schedule(k: usize, mode: &EpsilonSchedule) -> Result<f64> {
    mode.validate()?;
    Ok(mode.value(k))
}

/// Which oracle produces gradients for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    /// The analytic gradient; `eps` is ignored and no evaluations are
    /// charged.
    Exact,
    /// Symmetric differences along all `n` coordinates (2n evaluations).
    CoordinateFd {
        #[serde(default = "default_schedule")]
        schedule: EpsilonSchedule,
    },
    /// Symmetric differences along `directions` orthonormal directions
    /// (2 * directions evaluations), rescaled by `n / directions`.
    OrthonormalFd {
        #[serde(default = "default_schedule")]
        schedule: EpsilonSchedule,
        directions: usize,
    },
}

fn default_schedule() -> EpsilonSchedule {
    EpsilonSchedule::Geometric
}

impl OracleSpec {
    pub fn is_exact(&self) -> bool {
        matches!(self, OracleSpec::Exact)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            OracleSpec::Exact => Ok(()),
            OracleSpec::CoordinateFd { schedule } => schedule.validate(),
            OracleSpec::OrthonormalFd { schedule, directions } => {
                schedule.validate()?;
                if *directions == 0 || *directions > dim {
                    return Err(Error::InvalidParameter(format!(
                        "direction count {directions} outside [1, {dim}]"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn epsilon(&self, k: usize) -> f64 {
        match self {
            OracleSpec::Exact => 0.0,
            OracleSpec::CoordinateFd { schedule } => schedule.value(k),
            OracleSpec::OrthonormalFd { schedule, .. } => schedule.value(k),
        }
    }
}

fn probe(
    f: &dyn Fn(&DenseVector) -> f64,
    x: &DenseVector,
    direction_label: &str,
) -> Result<f64> {
    let v = f(x);
    if !v.is_finite() {
        return Err(Error::NonFinite(format!(
            "function value at probe point ({direction_label})"
        )));
    }
    Ok(v)
}

/// Symmetric-difference gradient along the canonical basis:
/// `G_i = [f(x + eps e_i) - f(x - eps e_i)] / (2 eps)`.
/// Charges exactly `2n` evaluations.
pub fn coordinate_fd_gradient(
    f: &dyn Fn(&DenseVector) -> f64,
    x: &DenseVector,
    eps: f64,
    counter: &mut EvalCounter,
) -> Result<DenseVector> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("finite-difference eps must be > 0".into()));
    }
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut work = x.as_slice().to_vec();
    for i in 0..n {
        let xi = work[i];
        work[i] = xi + eps;
        let plus = probe(f, &DenseVector::from_vec_unchecked(work.clone()), &format!("+eps e_{i}"))?;
        work[i] = xi - eps;
        let minus = probe(f, &DenseVector::from_vec_unchecked(work.clone()), &format!("-eps e_{i}"))?;
        work[i] = xi;
        out.push((plus - minus) / (2.0 * eps));
    }
    counter.charge(2 * n as u64);
    Ok(DenseVector::from_vec_unchecked(out))
}

/// Symmetric differences along `k` orthonormal directions `v_1..v_k` drawn
/// by QR of a seeded Gaussian matrix:
/// `G = n/(2 eps k) * sum_i [f(x + eps v_i) - f(x - eps v_i)] v_i`.
/// Charges `2k` evaluations. With `k = n` the directions form a complete
/// basis and the estimator reduces to coordinate differencing in that basis.
pub fn orthonormal_fd_gradient(
    f: &dyn Fn(&DenseVector) -> f64,
    x: &DenseVector,
    eps: f64,
    k: usize,
    seed: u64,
    counter: &mut EvalCounter,
) -> Result<DenseVector> {
    if eps <= 0.0 {
        return Err(Error::InvalidParameter("finite-difference eps must be > 0".into()));
    }
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "direction count {k} outside [1, {n}]"
        )));
    }
    let dirs = sampling::orthonormal_directions(n, k, seed);
    let mut out = DenseVector::zeros(n);
    for j in 0..k {
        let v = DenseVector::from_fn(n, |i| dirs.get(i, j));
        let plus = probe(f, &x.axpy(eps, &v), &format!("+eps v_{j}"))?;
        let minus = probe(f, &x.axpy(-eps, &v), &format!("-eps v_{j}"))?;
        out = out.axpy((plus - minus) * n as f64 / (2.0 * eps * k as f64), &v);
    }
    counter.charge(2 * k as u64);
    Ok(out)
}

/// Alignment sandwich between an estimate `g` and the true gradient:
/// `3/4 ||g||^2 <= <g, grad> <= 5/4 ||g||^2`, exact comparisons.
/// A zero estimate fails the check.
pub fn check_h2(g: &DenseVector, grad: &DenseVector) -> Result<bool> {
    if g.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            context: "h2 check",
            left: g.len(),
            right: grad.len(),
        });
    }
    let gg = g.norm_sq();
    if gg == 0.0 {
        return Ok(false);
    }
    let inner = g.dot(grad);
    Ok(0.75 * gg <= inner && inner <= 1.25 * gg)
}

/// Largest accuracy parameter for which the alignment sandwich is
/// guaranteed: `min{ 3 ||grad||^2 / (4 M2), ||grad|| / (8 M1) }`.
/// `M1` bounds the estimator bias (`||G - grad|| <= M1 eps`) and `M2` the
/// squared-norm perturbation (`| ||G||^2 - ||grad||^2 | <= M2 eps`).
pub fn admissible_epsilon(grad_norm: f64, m1: f64, m2: f64) -> Result<f64> {
    if grad_norm <= 0.0 {
        return Err(Error::InvalidParameter(
            "admissible_epsilon undefined at stationary points (grad_norm = 0)".into(),
        ));
    }
    if m1 <= 0.0 || m2 <= 0.0 {
        return Err(Error::InvalidParameter("M1 and M2 must be positive".into()));
    }
    let branch1 = 3.0 * grad_norm * grad_norm / (4.0 * m2);
    let branch2 = grad_norm / (8.0 * m1);
    Ok(branch1.min(branch2))
}
