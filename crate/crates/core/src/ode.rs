//! Continuous-time models of the accelerated dynamics.
//!
//! Two forms are integrated with fixed-step RK4:
//!
//! - the coupled first-order system
//!   `t X' + p (X - Z) + t (s/sqrt(eta)) grad f(X) = 0`,
//!   `Z' + (t/p) grad f(X) = 0`;
//! - the single second-order equation
//!   `X'' + ((s/sqrt(eta)) H(X) + (p+1)/t I) X' + (1 + s/(t sqrt(eta))) grad f(X) = 0`
//!   rewritten over `(X, V = X')` with `V(t0) = 0`, where `H(X) v` is a
//!   Hessian-vector product (analytic when available, differenced
//!   gradients otherwise).
//!
//! Time starts at `t0 > 0` because the `p/t` damping is singular at zero;
//! the discrete correspondence `t = k sqrt(eta)` maps iteration 1 to
//! `t0 = sqrt(eta)`.

use crate::error::{Error, Result};
use crate::numerics::DenseVector;
use crate::problems::Problem;
use crate::solvers::{nsa_prox_step, resolve_method, Method, MethodConfig, SolverState};

/// Sampled trajectory of the integrated dynamics.
#[derive(Debug, Clone)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    /// Position samples X(t).
    pub x: Vec<DenseVector>,
    /// Companion samples: Z(t) for the system form, X'(t) for the
    /// second-order form.
    pub companion: Vec<DenseVector>,
    pub p: f64,
    pub s: f64,
    pub eta: f64,
}

impl OdeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample index of the time closest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        match self.times.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i >= self.times.len() {
                    self.times.len() - 1
                } else if (self.times[i] - t).abs() < (t - self.times[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        }
    }
}

fn validate_grid(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if t0 <= 0.0 {
        return Err(Error::InvalidParameter("t0 must be positive (p/t is singular at 0)".into()));
    }
    if dt <= 0.0 || t_end <= t0 {
        return Err(Error::InvalidParameter("need dt > 0 and t_end > t0".into()));
    }
    let steps = ((t_end - t0) / dt).round() as usize;
    if steps == 0 {
        return Err(Error::InvalidParameter("time grid has no steps".into()));
    }
    Ok(steps)
}

fn check_state(label: &str, t: f64, v: &DenseVector) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("{label} at t = {t:.6e}")));
    }
    Ok(())
}

/// Integrates the coupled system from `X(t0) = Z(t0) = x0` on a fixed grid.
#[allow(clippy::too_many_arguments)]
pub fn integrate_system(
    problem: &Problem,
    x0: &DenseVector,
    p: f64,
    s: f64,
    eta: f64,
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<OdeTrajectory> {
    if eta <= 0.0 || s <= 0.0 || p <= 0.0 {
        return Err(Error::InvalidParameter("need p, s, eta > 0".into()));
    }
    let steps = validate_grid(t0, t_end, dt)?;
    let coeff = s / eta.sqrt();

    // State (X, Z); derivatives from the system solved for X', Z'.
    let deriv = |t: f64, x: &DenseVector, z: &DenseVector| -> (DenseVector, DenseVector) {
        let g = problem.smooth_gradient(x);
        let dx = x.sub(z).scale(-p / t).axpy(-coeff, &g);
        let dz = g.scale(-t / p);
        (dx, dz)
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut zs = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    let mut z = x0.clone();
    let mut t = t0;
    times.push(t);
    xs.push(x.clone());
    zs.push(z.clone());

    for _ in 0..steps {
        let (k1x, k1z) = deriv(t, &x, &z);
        let (k2x, k2z) = deriv(t + dt / 2.0, &x.axpy(dt / 2.0, &k1x), &z.axpy(dt / 2.0, &k1z));
        let (k3x, k3z) = deriv(t + dt / 2.0, &x.axpy(dt / 2.0, &k2x), &z.axpy(dt / 2.0, &k2z));
        let (k4x, k4z) = deriv(t + dt, &x.axpy(dt, &k3x), &z.axpy(dt, &k3z));
        x = x.axpy(dt / 6.0, &k1x.axpy(2.0, &k2x).axpy(2.0, &k3x).add(&k4x));
        z = z.axpy(dt / 6.0, &k1z.axpy(2.0, &k2z).axpy(2.0, &k3z).add(&k4z));
        t += dt;
        check_state("X", t, &x)?;
        check_state("Z", t, &z)?;
        times.push(t);
        xs.push(x.clone());
        zs.push(z.clone());
    }

    Ok(OdeTrajectory { times, x: xs, companion: zs, p, s, eta })
}

/// Integrates the second-order form over `(X, V)` with `V(t0) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_high_resolution(
    problem: &Problem,
    x0: &DenseVector,
    p: f64,
    s: f64,
    eta: f64,
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<OdeTrajectory> {
    if eta <= 0.0 || s <= 0.0 || p <= 0.0 {
        return Err(Error::InvalidParameter("need p, s, eta > 0".into()));
    }
    let steps = validate_grid(t0, t_end, dt)?;
    let coeff = s / eta.sqrt();

    let deriv = |t: f64, x: &DenseVector, v: &DenseVector| -> (DenseVector, DenseVector) {
        let g = problem.smooth_gradient(x);
        let hv = problem.hessian_vp(x, v);
        let dv = hv
            .scale(-coeff)
            .axpy(-(p + 1.0) / t, v)
            .axpy(-(1.0 + s / (t * eta.sqrt())), &g);
        (v.clone(), dv)
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    let mut v = DenseVector::zeros(x0.len());
    let mut t = t0;
    times.push(t);
    xs.push(x.clone());
    vs.push(v.clone());

    for _ in 0..steps {
        let (k1x, k1v) = deriv(t, &x, &v);
        let (k2x, k2v) = deriv(t + dt / 2.0, &x.axpy(dt / 2.0, &k1x), &v.axpy(dt / 2.0, &k1v));
        let (k3x, k3v) = deriv(t + dt / 2.0, &x.axpy(dt / 2.0, &k2x), &v.axpy(dt / 2.0, &k2v));
        let (k4x, k4v) = deriv(t + dt, &x.axpy(dt, &k3x), &v.axpy(dt, &k3v));
        x = x.axpy(dt / 6.0, &k1x.axpy(2.0, &k2x).axpy(2.0, &k3x).add(&k4x));
        v = v.axpy(dt / 6.0, &k1v.axpy(2.0, &k2v).axpy(2.0, &k3v).add(&k4v));
        t += dt;
        check_state("X", t, &x)?;
        check_state("X'", t, &v)?;
        times.push(t);
        xs.push(x.clone());
        vs.push(v.clone());
    }

    Ok(OdeTrajectory { times, x: xs, companion: vs, p, s, eta })
}

/// Energy along the system trajectory, in the form whose time derivative is
/// nonpositive for `p >= 2`:
/// `E(t) = (p^2 / 2) ||Z - x*||^2 + t^2 (f(X) - f*)`.
pub fn energy(
    x: &DenseVector,
    z: &DenseVector,
    t: f64,
    p: f64,
    problem: &Problem,
) -> Result<f64> {
    let hint = problem
        .optimum()
        .ok_or(Error::MissingOptimum("energy needs x* and f*"))?;
    let x_star = hint
        .x_star
        .as_ref()
        .ok_or(Error::MissingOptimum("energy needs an explicit x*"))?;
    Ok(0.5 * p * p * z.sub(x_star).norm_sq() + t * t * (problem.smooth_value(x) - hint.f_star))
}

/// The flat-gap variant `(p^2/2) ||Z - x*||^2 + (f(X) - f*)` without the
/// `t^2` factor, logged alongside [`energy`] for comparison.
pub fn energy_flat_gap(
    x: &DenseVector,
    z: &DenseVector,
    p: f64,
    problem: &Problem,
) -> Result<f64> {
    let hint = problem
        .optimum()
        .ok_or(Error::MissingOptimum("energy needs x* and f*"))?;
    let x_star = hint
        .x_star
        .as_ref()
        .ok_or(Error::MissingOptimum("energy needs an explicit x*"))?;
    Ok(0.5 * p * p * z.sub(x_star).norm_sq() + (problem.smooth_value(x) - hint.f_star))
}

/// Discrete-vs-continuous comparison of the proximal iteration against the
/// system trajectory at `t = k sqrt(eta)`.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    /// Max over k in [1, K] of ||x_k - X(k sqrt(eta))|| at the given eta.
    pub error_coarse: f64,
    /// Same error with eta/4 (and s scaled by 1/2 to hold s/sqrt(eta) fixed
    /// so both discretizations target the same ODE).
    pub error_fine: f64,
    /// `error_coarse / error_fine`.
    pub ratio: f64,
}

/// Runs the proximal iteration and the integrated system side by side for
/// step sizes `eta` and `eta/4`, reporting the max deviation at the
/// matched times and the improvement ratio.
pub fn discrete_continuous_consistency(
    problem: &Problem,
    x0: &DenseVector,
    p: f64,
    s: f64,
    eta: f64,
    iters: usize,
) -> Result<ConsistencyReport> {
    if iters == 0 {
        return Ok(ConsistencyReport { error_coarse: 0.0, error_fine: 0.0, ratio: 1.0 });
    }
    let coarse = discrete_vs_system(problem, x0, p, s, eta, iters)?;
    let fine = discrete_vs_system(problem, x0, p, s / 2.0, eta / 4.0, iters)?;
    let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
    Ok(ConsistencyReport { error_coarse: coarse, error_fine: fine, ratio })
}

fn discrete_vs_system(
    problem: &Problem,
    x0: &DenseVector,
    p: f64,
    s: f64,
    eta: f64,
    iters: usize,
) -> Result<f64> {
    let sqrt_eta = eta.sqrt();
    // Integrator substeps per discrete iteration: fine enough that RK4
    // error is negligible next to the O(sqrt(eta)) correspondence gap.
    let substeps = 32usize;
    let dt = sqrt_eta / substeps as f64;
    let t0 = sqrt_eta;
    let t_end = (iters.max(2)) as f64 * sqrt_eta;
    let trajectory = integrate_system(problem, x0, p, s, eta, t0, t_end, dt)?;

    let mut config = MethodConfig::new(Method::NsaProx).with_eta(eta).with_s(s).with_p(p);
    config.allow_small_p = true;
    let resolved = resolve_method(&config, problem)?;
    let mut state = SolverState::new(problem, &resolved, x0, 0)?;

    let mut worst = 0.0f64;
    for k in 1..=iters {
        nsa_prox_step(&mut state, problem)?;
        let idx = (k - 1) * substeps; // t0 corresponds to k = 1
        if idx < trajectory.len() {
            worst = worst.max(state.x().distance(&trajectory.x[idx]));
        }
    }
    Ok(worst)
}
