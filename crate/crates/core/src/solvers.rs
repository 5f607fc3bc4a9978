//! Iteration state machines for the accelerated solvers and baselines.
//!
//! The main family keeps two sequences `x_k` (iterates) and `z_k`
//! (aggregated momentum) coupled through `y_k = (1 - alpha_k) x_k +
//! alpha_k z_k` with `alpha_k = p / (k + p)`. Each step computes both a
//! momentum candidate (gradient step from `y_k`) and a plain candidate
//! (gradient step from `x_k`) and keeps whichever has the smaller
//! objective, so the function value never increases. Variants cover
//! estimated gradients with an optional ball projection of `z`, a proximal
//! update driven by the prox of the full objective, and a prox-gradient
//! form for composite objectives. Baselines: gradient descent, Nesterov
//! momentum with damping-p coefficient `k/(k+p)`, FISTA, and the
//! accelerated forward-backward method.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    check_h2, coordinate_fd_gradient, orthonormal_fd_gradient, EvalCounter, OracleSpec,
};
use crate::numerics::DenseVector;
use crate::problems::Problem;
use crate::prox::project_ball;
use crate::sampling;

/// Momentum weight `alpha_k = p / (k + p)`; always recomputed from `k`.
pub fn alpha(k: usize, p: f64) -> f64 {
    p / (k as f64 + p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nsa,
    NsaInexact,
    NsaProx,
    NsaComposite,
    Gd,
    Nag,
    Fista,
    Afbm,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Nsa => "nsa",
            Method::NsaInexact => "nsa_inexact",
            Method::NsaProx => "nsa_prox",
            Method::NsaComposite => "nsa_composite",
            Method::Gd => "gd",
            Method::Nag => "nag",
            Method::Fista => "fista",
            Method::Afbm => "afbm",
        }
    }

    fn has_z(&self) -> bool {
        matches!(
            self,
            Method::Nsa | Method::NsaInexact | Method::NsaProx | Method::NsaComposite
        )
    }

    fn carries_y(&self) -> bool {
        matches!(self, Method::Nag | Method::Fista | Method::Afbm)
    }
}

/// Step size given either directly or as a fraction of `1/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Absolute(f64),
    Relative { fraction_of_inv_l: f64 },
}

impl EtaSpec {
    pub fn resolve(&self, lipschitz: f64) -> f64 {
        match self {
            EtaSpec::Absolute(v) => *v,
            EtaSpec::Relative { fraction_of_inv_l } => fraction_of_inv_l / lipschitz,
        }
    }
}

/// Handling of the `z` sequence in the inexact solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallOption {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
}

impl Default for BallOption {
    fn default() -> Self {
        BallOption::I
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZConstraint {
    Free,
    Ball(f64),
}

fn default_p() -> f64 {
    3.0
}

fn default_oracle() -> OracleSpec {
    OracleSpec::Exact
}

/// One method entry of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub eta: Option<EtaSpec>,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Prox step for the proximal variant; defaults to `eta`.
    #[serde(default)]
    pub s: Option<EtaSpec>,
    #[serde(default)]
    pub option: BallOption,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default = "default_oracle")]
    pub oracle: OracleSpec,
    /// Permit `p < 3` (downgrades the error to a warning).
    #[serde(default)]
    pub allow_small_p: bool,
    /// Log alignment-sandwich violations of estimated gradients against the
    /// analytic gradient (diagnostic only).
    #[serde(default)]
    pub h2_monitor: bool,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            label: None,
            eta: None,
            p: default_p(),
            s: None,
            option: BallOption::I,
            mu: None,
            oracle: OracleSpec::Exact,
            allow_small_p: false,
            h2_monitor: false,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(EtaSpec::Absolute(eta));
        self
    }

    pub fn with_eta_fraction(mut self, fraction: f64) -> Self {
        self.eta = Some(EtaSpec::Relative { fraction_of_inv_l: fraction });
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(EtaSpec::Absolute(s));
        self
    }

    pub fn with_ball(mut self, mu: f64) -> Self {
        self.option = BallOption::II;
        self.mu = Some(mu);
        self
    }

    pub fn with_oracle(mut self, oracle: OracleSpec) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.tag().to_string())
    }
}

/// A config validated against a concrete problem, with step sizes resolved.
#[derive(Debug, Clone)]
pub struct ResolvedMethod {
    pub method: Method,
    pub label: String,
    pub eta: f64,
    pub p: f64,
    pub s: Option<f64>,
    pub z_constraint: ZConstraint,
    pub oracle: OracleSpec,
    pub h2_monitor: bool,
    pub warnings: Vec<String>,
}

const BOUND_SLACK: f64 = 1e-9;

/// Validates a method against a problem: resolves the step size, enforces
/// the method-specific step bound, and collects warnings.
pub fn resolve_method(config: &MethodConfig, problem: &Problem) -> Result<ResolvedMethod> {
    let l = problem.lipschitz();
    if l <= 0.0 || !l.is_finite() {
        return Err(Error::Config(format!("problem Lipschitz estimate {l} is unusable")));
    }
    let default_eta = match config.method {
        Method::Nsa => 2.0 / (3.0 * l),
        Method::NsaInexact => 1.0 / (2.0 * l),
        _ => 1.0 / l,
    };
    let eta = config.eta.map_or(default_eta, |e| e.resolve(l));
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Config(format!("field eta: step size {eta} must be positive")));
    }
    let mut warnings = Vec::new();

    let check_cap = |cap: f64, name: &str| -> Result<()> {
        if eta > cap * (1.0 + BOUND_SLACK) {
            return Err(Error::Config(format!(
                "field eta: {} requires eta <= {cap:.6e} ({name}), got {eta:.6e}",
                config.method.tag()
            )));
        }
        Ok(())
    };

    match config.method {
        Method::Nsa => {
            check_cap(2.0 / (3.0 * l), "2/(3L)")?;
            if problem.is_composite() {
                return Err(Error::Config(
                    "nsa requires a smooth objective; use nsa_composite".into(),
                ));
            }
        }
        Method::NsaInexact => check_cap(1.0 / (2.0 * l), "1/(2L)")?,
        Method::NsaComposite => {
            let target = 1.0 / l;
            if (eta - target).abs() > BOUND_SLACK * target {
                return Err(Error::Config(format!(
                    "field eta: nsa_composite requires eta = 1/L = {target:.6e}, got {eta:.6e}"
                )));
            }
        }
        Method::NsaProx => {}
        Method::Gd => {}
        Method::Nag | Method::Fista | Method::Afbm => check_cap(1.0 / l, "1/L")?,
    }

    let s = if config.method == Method::NsaProx {
        let s = config.s.map_or(eta, |v| v.resolve(l));
        if s < eta / 2.0 * (1.0 - BOUND_SLACK) {
            return Err(Error::Config(format!(
                "field s: proximal variant requires s >= eta/2 = {:.6e}, got {s:.6e}",
                eta / 2.0
            )));
        }
        Some(s)
    } else {
        None
    };

    if config.method.has_z() && config.p < 3.0 {
        if config.allow_small_p {
            warnings.push(format!(
                "p = {} is below 3; the o(1/k^2) guarantee does not apply",
                config.p
            ));
        } else {
            return Err(Error::Config(format!(
                "field p: {} requires p >= 3 (set allow_small_p to override)",
                config.method.tag()
            )));
        }
    }
    if config.p <= 0.0 {
        return Err(Error::Config("field p: damping must be positive".into()));
    }

    let z_constraint = match config.option {
        BallOption::I => ZConstraint::Free,
        BallOption::II => {
            let mu = config.mu.ok_or_else(|| {
                Error::Config("field mu: option II requires a ball radius".into())
            })?;
            if mu <= 0.0 {
                return Err(Error::Config("field mu: ball radius must be positive".into()));
            }
            ZConstraint::Ball(mu)
        }
    };
    if z_constraint != ZConstraint::Free && config.method != Method::NsaInexact {
        return Err(Error::Config(format!(
            "field option: ball projection only applies to nsa_inexact, not {}",
            config.method.tag()
        )));
    }

    config.oracle.validate(problem.dim())?;
    if !config.oracle.is_exact()
        && !matches!(config.method, Method::NsaInexact | Method::Gd | Method::Nag)
    {
        return Err(Error::Config(format!(
            "field oracle: {} runs on exact gradients only",
            config.method.tag()
        )));
    }
    if matches!(config.method, Method::Nag) && problem.is_composite() && config.oracle.is_exact() {
        return Err(Error::Config(
            "nag handles smooth objectives only; use afbm for composite problems".into(),
        ));
    }

    Ok(ResolvedMethod {
        method: config.method,
        label: config.label(),
        eta,
        p: config.p,
        s,
        z_constraint,
        oracle: config.oracle.clone(),
        h2_monitor: config.h2_monitor,
        warnings,
    })
}

type FullProxFn = Arc<dyn Fn(&DenseVector) -> Result<DenseVector> + Send + Sync>;

/// Which candidate the descent comparison kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// The momentum candidate stepped from `y_k` (ties go here).
    FromY,
    /// The plain candidate stepped from `x_k`.
    FromX,
}

/// Per-step byproducts that feed the iteration record.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub grad_norm_y: Option<f64>,
    pub branch: Option<Branch>,
}

/// Mutable state of one solver run.
pub struct SolverState {
    method: Method,
    x: DenseVector,
    z: Option<DenseVector>,
    y: Option<DenseVector>,
    t: f64,
    k: usize,
    p: f64,
    eta: f64,
    s: f64,
    z_constraint: ZConstraint,
    oracle: OracleSpec,
    h2_monitor: bool,
    fx: f64,
    evals: EvalCounter,
    full_prox: Option<FullProxFn>,
    run_seed: u64,
    divergence_cap: f64,
    h2_violations: u64,
}

impl SolverState {
    pub fn new(
        problem: &Problem,
        resolved: &ResolvedMethod,
        x0: &DenseVector,
        run_seed: u64,
    ) -> Result<Self> {
        if x0.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                context: "x0 vs problem dimension",
                left: x0.len(),
                right: problem.dim(),
            });
        }
        if !x0.is_finite() {
            return Err(Error::NonFinite("x0".into()));
        }
        let mut evals = EvalCounter::new();
        evals.charge(1);
        let fx = problem.value(x0);
        if !fx.is_finite() {
            return Err(Error::NonFinite("objective at x0".into()));
        }
        let full_prox = if resolved.method == Method::NsaProx {
            let s = resolved.s.expect("resolved prox step");
            Some(problem.full_objective_prox(s)?)
        } else {
            None
        };
        Ok(Self {
            method: resolved.method,
            x: x0.clone(),
            z: resolved.method.has_z().then(|| x0.clone()),
            y: resolved.method.carries_y().then(|| x0.clone()),
            t: 1.0,
            k: 0,
            p: resolved.p,
            eta: resolved.eta,
            s: resolved.s.unwrap_or(resolved.eta),
            z_constraint: resolved.z_constraint,
            oracle: resolved.oracle.clone(),
            h2_monitor: resolved.h2_monitor,
            fx,
            evals,
            full_prox,
            run_seed,
            divergence_cap: 1e12 * (1.0 + fx.abs()),
            h2_violations: 0,
        })
    }

    pub fn x(&self) -> &DenseVector {
        &self.x
    }

    pub fn z(&self) -> Option<&DenseVector> {
        self.z.as_ref()
    }

    pub fn y_aux(&self) -> Option<&DenseVector> {
        self.y.as_ref()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn evals(&self) -> u64 {
        self.evals.total()
    }

    pub fn h2_violations(&self) -> u64 {
        self.h2_violations
    }

    pub fn alpha_now(&self) -> f64 {
        alpha(self.k, self.p)
    }

    /// FISTA momentum scalar `t_k`.
    pub fn t_momentum(&self) -> f64 {
        self.t
    }

    fn eval_total(&mut self, problem: &Problem, x: &DenseVector) -> f64 {
        self.evals.charge(1);
        problem.value(x)
    }

    fn oracle_gradient(
        &mut self,
        problem: &Problem,
        x: &DenseVector,
        stream_tag: u64,
    ) -> Result<DenseVector> {
        let oracle = self.oracle.clone();
        match oracle {
            OracleSpec::Exact => Ok(problem.smooth_gradient(x)),
            OracleSpec::CoordinateFd { schedule } => {
                let eps = schedule.value(self.k);
                let f = |v: &DenseVector| problem.value(v);
                coordinate_fd_gradient(&f, x, eps, &mut self.evals)
            }
            OracleSpec::OrthonormalFd { schedule, directions } => {
                let eps = schedule.value(self.k);
                let seed =
                    sampling::substream(self.run_seed, ((self.k as u64) << 1) | stream_tag);
                let f = |v: &DenseVector| problem.value(v);
                orthonormal_fd_gradient(&f, x, eps, directions, seed, &mut self.evals)
            }
        }
    }

    fn monitor_h2(&mut self, problem: &Problem, g: &DenseVector, at: &DenseVector) {
        if self.h2_monitor && !self.oracle.is_exact() && !problem.is_composite() {
            let true_grad = problem.smooth_gradient(at);
            if let Ok(false) = check_h2(g, &true_grad) {
                self.h2_violations += 1;
            }
        }
    }

    fn commit(
        &mut self,
        x_next: DenseVector,
        f_next: f64,
        z_next: Option<DenseVector>,
    ) -> Result<()> {
        if !f_next.is_finite() || f_next > self.divergence_cap {
            return Err(Error::Diverged {
                k: self.k,
                reason: format!("objective value {f_next:.6e}"),
            });
        }
        if !x_next.is_finite() {
            return Err(Error::Diverged { k: self.k, reason: "non-finite iterate".into() });
        }
        if let Some(z) = &z_next {
            if !z.is_finite() {
                return Err(Error::Diverged { k: self.k, reason: "non-finite z".into() });
            }
        }
        self.x = x_next;
        self.fx = f_next;
        if z_next.is_some() {
            self.z = z_next;
        }
        self.k += 1;
        Ok(())
    }
}

/// Exact-gradient accelerated step with the descent safeguard.
pub fn nsa_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let a = state.alpha_now();
    let z = state.z.clone().expect("nsa carries z");
    let y = state.x.lin_comb(1.0 - a, &z, a);
    let gy = problem.smooth_gradient(&y);
    let gx = problem.smooth_gradient(&state.x);
    let x_mom = y.axpy(-state.eta, &gy);
    let x_plain = state.x.axpy(-state.eta, &gx);
    let f_mom = state.eval_total(problem, &x_mom);
    let f_plain = state.eval_total(problem, &x_plain);
    let (x_next, f_next, branch) = if f_mom <= f_plain {
        (x_mom, f_mom, Branch::FromY)
    } else {
        (x_plain, f_plain, Branch::FromX)
    };
    let z_next = z.axpy(-state.eta / a, &gy);
    let grad_norm = gy.norm();
    state.commit(x_next, f_next, Some(z_next))?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: Some(branch) })
}

/// Accelerated step on oracle gradients; both candidates use step `2 eta`,
/// and option II projects `z` onto the ball of radius `mu`.
pub fn nsa_inexact_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let a = state.alpha_now();
    let z = state.z.clone().expect("nsa_inexact carries z");
    let y = state.x.lin_comb(1.0 - a, &z, a);
    let g_y = state.oracle_gradient(problem, &y, 1)?;
    let x_snapshot = state.x.clone();
    let g_x = state.oracle_gradient(problem, &x_snapshot, 0)?;
    state.monitor_h2(problem, &g_y, &y);
    let x_mom = y.axpy(-2.0 * state.eta, &g_y);
    let x_plain = state.x.axpy(-2.0 * state.eta, &g_x);
    let f_mom = state.eval_total(problem, &x_mom);
    let f_plain = state.eval_total(problem, &x_plain);
    let (x_next, f_next, branch) = if f_mom <= f_plain {
        (x_mom, f_mom, Branch::FromY)
    } else {
        (x_plain, f_plain, Branch::FromX)
    };
    let z_prime = z.axpy(-state.eta / a, &g_y);
    let z_next = match state.z_constraint {
        ZConstraint::Free => z_prime,
        ZConstraint::Ball(mu) => project_ball(&z_prime, mu),
    };
    let grad_norm = g_y.norm();
    state.commit(x_next, f_next, Some(z_next))?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: Some(branch) })
}

/// Proximal step: `x_{k+1} = prox_{s, F}(w)` with
/// `w = (1 - alpha) x_k + alpha z_k`, then
/// `z_{k+1} = z_k - (eta / alpha) g_{k+1}` where `g_{k+1} = (w - x_{k+1}) / s`
/// is the (sub)gradient certified by the prox optimality condition. The
/// `z` update is driven by the gradient itself, not by the raw prox
/// displacement, which is what makes the `s >= eta/2` rate analysis and
/// the continuous-time limit come out.
pub fn nsa_prox_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let a = state.alpha_now();
    let z = state.z.clone().expect("nsa_prox carries z");
    let w = state.x.lin_comb(1.0 - a, &z, a);
    let prox = state.full_prox.clone().expect("full-objective prox built at init");
    let x_next = prox(&w)?;
    let g = w.sub(&x_next).scale(1.0 / state.s);
    let z_next = z.axpy(-state.eta / a, &g);
    let f_next = state.eval_total(problem, &x_next);
    state.commit(x_next, f_next, Some(z_next))?;
    Ok(StepInfo { grad_norm_y: None, branch: None })
}

/// Composite step: prox-gradient candidates from `y_k` and `x_k`, chosen by
/// total objective; the `z` update subtracts the smooth gradient at `y_k`
/// plus the subgradient recovered from the prox displacement.
pub fn nsa_composite_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let a = state.alpha_now();
    let eta = state.eta;
    let z = state.z.clone().expect("nsa_composite carries z");
    let y = state.x.lin_comb(1.0 - a, &z, a);
    let gy = problem.smooth_gradient(&y);
    let gx = problem.smooth_gradient(&state.x);
    let forward = y.axpy(-eta, &gy);
    let x_mom = problem.prox_nonsmooth(&forward, eta);
    let x_plain = problem.prox_nonsmooth(&state.x.axpy(-eta, &gx), eta);
    let f_mom = state.eval_total(problem, &x_mom);
    let f_plain = state.eval_total(problem, &x_plain);
    let (x_next, f_next, branch) = if f_mom <= f_plain {
        (x_mom.clone(), f_mom, Branch::FromY)
    } else {
        (x_plain, f_plain, Branch::FromX)
    };
    // eta g' = y - eta grad f(y) - x'  (prox displacement identity)
    let g_sub = forward.sub(&x_mom).scale(1.0 / eta);
    let z_next = z.axpy(-eta / a, &gy.add(&g_sub));
    let grad_norm = gy.norm();
    state.commit(x_next, f_next, Some(z_next))?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: Some(branch) })
}

/// Plain gradient descent; on composite problems with exact gradients this
/// is the prox-gradient step, and with an estimation oracle the whole
/// objective is treated as the black box.
pub fn gd_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let x_snapshot = state.x.clone();
    let g = state.oracle_gradient(problem, &x_snapshot, 0)?;
    state.monitor_h2(problem, &g, &x_snapshot);
    let raw = state.x.axpy(-state.eta, &g);
    let x_next = if state.oracle.is_exact() {
        problem.prox_nonsmooth(&raw, state.eta)
    } else {
        raw
    };
    let f_next = state.eval_total(problem, &x_next);
    let grad_norm = g.norm();
    state.commit(x_next, f_next, None)?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: None })
}

/// Nesterov momentum with damping-p coefficient `k / (k + p)`.
pub fn nag_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let y = state.y.clone().expect("nag carries y");
    let g = state.oracle_gradient(problem, &y, 1)?;
    state.monitor_h2(problem, &g, &y);
    let x_next = y.axpy(-state.eta, &g);
    let f_next = state.eval_total(problem, &x_next);
    let beta = state.k as f64 / (state.k as f64 + state.p);
    let y_next = x_next.axpy(beta, &x_next.sub(&state.x));
    let grad_norm = g.norm();
    state.y = Some(y_next);
    state.commit(x_next, f_next, None)?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: None })
}

/// FISTA with the classic `t`-sequence (`t_0 = 1`).
pub fn fista_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let y = state.y.clone().expect("fista carries y");
    let g = problem.smooth_gradient(&y);
    let x_next = problem.prox_nonsmooth(&y.axpy(-state.eta, &g), state.eta);
    let f_next = state.eval_total(problem, &x_next);
    let t_next = 0.5 * (1.0 + (1.0 + 4.0 * state.t * state.t).sqrt());
    let y_next = x_next.axpy((state.t - 1.0) / t_next, &x_next.sub(&state.x));
    let grad_norm = g.norm();
    state.t = t_next;
    state.y = Some(y_next);
    state.commit(x_next, f_next, None)?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: None })
}

/// Accelerated forward-backward step with damping-p momentum.
pub fn afbm_step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    let y = state.y.clone().expect("afbm carries y");
    let g = problem.smooth_gradient(&y);
    let x_next = problem.prox_nonsmooth(&y.axpy(-state.eta, &g), state.eta);
    let f_next = state.eval_total(problem, &x_next);
    let beta = state.k as f64 / (state.k as f64 + state.p);
    let y_next = x_next.axpy(beta, &x_next.sub(&state.x));
    let grad_norm = g.norm();
    state.y = Some(y_next);
    state.commit(x_next, f_next, None)?;
    Ok(StepInfo { grad_norm_y: Some(grad_norm), branch: None })
}

/// Dispatches one step of the configured method.
pub fn step(state: &mut SolverState, problem: &Problem) -> Result<StepInfo> {
    match state.method {
        Method::Nsa => nsa_step(state, problem),
        Method::NsaInexact => nsa_inexact_step(state, problem),
        Method::NsaProx => nsa_prox_step(state, problem),
        Method::NsaComposite => nsa_composite_step(state, problem),
        Method::Gd => gd_step(state, problem),
        Method::Nag => nag_step(state, problem),
        Method::Fista => fista_step(state, problem),
        Method::Afbm => afbm_step(state, problem),
    }
}

/// Diagnostics for one iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Total objective `F(x_k)`.
    pub f_x: f64,
    /// `F(x_k) - F*` when a reference optimum is attached.
    pub delta: Option<f64>,
    /// Norm of the gradient used by step `k` (at `y_k` for the accelerated
    /// families, at `x_k` for gradient descent); absent on the final record.
    pub grad_norm_y: Option<f64>,
    /// `||z_k - x*||^2` when both `z` and `x*` exist.
    pub z_dist_sq: Option<f64>,
    /// Lyapunov value `Delta_k = gamma_k/2 ||z_k - x*||^2 + delta_k` with
    /// `gamma_k = alpha_{k-1}^2 / eta`, defined for `k >= 1`.
    pub lyapunov: Option<f64>,
    /// Function evaluations charged to produce `x_k`.
    pub evals: u64,
    /// Candidate kept by step `k`, when the method compares two.
    pub branch: Option<Branch>,
    /// Seconds since the run started (the only nondeterministic field).
    pub wallclock_s: f64,
}

/// Full run output: per-iteration records plus resolved metadata.
#[derive(Debug, Clone)]
pub struct Trace {
    pub label: String,
    pub method: Method,
    pub seed: u64,
    pub eta: f64,
    pub p: f64,
    pub s: Option<f64>,
    pub lipschitz: f64,
    pub records: Vec<IterationRecord>,
    pub warnings: Vec<String>,
    pub h2_violations: u64,
    pub final_x: DenseVector,
}

impl Trace {
    pub fn final_f(&self) -> f64 {
        self.records.last().map(|r| r.f_x).unwrap_or(f64::NAN)
    }

    pub fn final_delta(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.delta)
    }

    pub fn deltas(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.delta).collect()
    }

    /// Equality that ignores the wall-clock column.
    pub fn deterministic_eq(&self, other: &Trace) -> bool {
        self.label == other.label
            && self.seed == other.seed
            && self.records.len() == other.records.len()
            && self.final_x.as_slice() == other.final_x.as_slice()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| {
                    a.k == b.k
                        && a.f_x.to_bits() == b.f_x.to_bits()
                        && a.evals == b.evals
                        && a.grad_norm_y.map(f64::to_bits) == b.grad_norm_y.map(f64::to_bits)
                })
    }
}

/// Failed run with whatever trace was recorded before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trace,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} records)", self.error, self.partial.records.len())
    }
}

impl std::error::Error for RunFailure {}

fn lyapunov_terms(state: &SolverState, problem: &Problem) -> (Option<f64>, Option<f64>) {
    let (Some(z), Some(x_star)) = (state.z.as_ref(), problem.x_star()) else {
        return (None, None);
    };
    let dist_sq = z.sub(x_star).norm_sq();
    let lyap = if state.k >= 1 {
        problem.f_star().map(|fs| {
            let gamma = alpha(state.k - 1, state.p).powi(2) / state.eta;
            0.5 * gamma * dist_sq + (state.fx - fs)
        })
    } else {
        None
    };
    (Some(dist_sq), lyap)
}

/// Runs `iters` steps from `x0`, recording one diagnostic row per iterate
/// (including the initial point). Deterministic for a fixed seed; any step
/// error aborts with the partial trace attached.
pub fn run(
    config: &MethodConfig,
    problem: &Problem,
    x0: &DenseVector,
    iters: usize,
    seed: u64,
) -> std::result::Result<Trace, Box<RunFailure>> {
    let fail_empty = |error: Error, label: String, method: Method| {
        Box::new(RunFailure {
            error,
            partial: Trace {
                label,
                method,
                seed,
                eta: f64::NAN,
                p: f64::NAN,
                s: None,
                lipschitz: problem.lipschitz(),
                records: Vec::new(),
                warnings: Vec::new(),
                h2_violations: 0,
                final_x: x0.clone(),
            },
        })
    };

    let resolved = resolve_method(config, problem)
        .map_err(|e| fail_empty(e, config.label(), config.method))?;
    let mut state = SolverState::new(problem, &resolved, x0, seed)
        .map_err(|e| fail_empty(e, resolved.label.clone(), resolved.method))?;

    let mut warnings = resolved.warnings.clone();
    let g0 = problem.smooth_gradient(x0);
    if g0.norm() == 0.0 {
        warnings.push("gradient at x0 is zero; the run starts at a stationary point".into());
    }

    let start = Instant::now();
    let f_star = problem.f_star();
    let mut records: Vec<IterationRecord> = Vec::with_capacity(iters + 1);

    let make_trace = |records: Vec<IterationRecord>,
                      warnings: Vec<String>,
                      state: &SolverState| Trace {
        label: resolved.label.clone(),
        method: resolved.method,
        seed,
        eta: resolved.eta,
        p: resolved.p,
        s: resolved.s,
        lipschitz: problem.lipschitz(),
        records,
        warnings,
        h2_violations: state.h2_violations(),
        final_x: state.x().clone(),
    };

    for k in 0..=iters {
        let (z_dist_sq, lyapunov) = lyapunov_terms(&state, problem);
        let mut record = IterationRecord {
            k,
            f_x: state.fx(),
            delta: f_star.map(|fs| state.fx() - fs),
            grad_norm_y: None,
            z_dist_sq,
            lyapunov,
            evals: state.evals(),
            branch: None,
            wallclock_s: start.elapsed().as_secs_f64(),
        };
        if k == iters {
            records.push(record);
            break;
        }
        match step(&mut state, problem) {
            Ok(info) => {
                record.grad_norm_y = info.grad_norm_y;
                record.branch = info.branch;
                records.push(record);
            }
            Err(error) => {
                records.push(record);
                let partial = make_trace(records, warnings, &state);
                return Err(Box::new(RunFailure { error, partial }));
            }
        }
    }

    Ok(make_trace(records, warnings, &state))
}
