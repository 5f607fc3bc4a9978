//! Shared fixtures for the integration suites.

use nsa_core::harness::{instantiate, ProblemSpec};
use nsa_core::numerics::DenseMatrix;
use nsa_core::problems::{build_least_squares, Problem};
use nsa_core::sampling;
use nsa_core::solvers::{run, Method, MethodConfig};
use nsa_core::DenseVector;

/// Prints one verdict line and panics on failure, so every criterion shows
/// a PASS/FAIL line in the test output.
pub fn check(name: &str, pass: bool, detail: &str) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

/// Least squares with a power-law Hessian spectrum: `A = U diag(sigma) V^T`
/// with `sigma_i^2 = (i/n)^q`. The decay exponent controls how fast the
/// gap and gradient series fall, which the windowed rate diagnostics need.
pub fn power_law_least_squares(n: usize, q: f64, seed: u64) -> (Problem, DenseVector) {
    let u = sampling::orthonormal_directions(n, n, sampling::substream(seed, 1));
    let v = sampling::orthonormal_directions(n, n, sampling::substream(seed, 2));
    let sigmas: Vec<f64> = (1..=n)
        .map(|i| ((i as f64 / n as f64).powf(q)).sqrt())
        .collect();
    let a = u.matmul(&DenseMatrix::diag(&sigmas)).matmul(&v.transpose());
    let b = sampling::gaussian_vector(n, sampling::substream(seed, 3));
    let problem = build_least_squares(&a, &b).unwrap();
    let x0 = sampling::gaussian_vector(n, sampling::substream(seed, 4)).scale(3.0);
    (problem, x0)
}

/// One desk-scale replica of a benchmark problem with the step size used
/// throughout the acceptance runs.
pub struct Replica {
    pub name: &'static str,
    pub problem: Problem,
    pub x0: DenseVector,
    pub eta: f64,
}

/// The four smooth convex benchmark replicas. The log-sum-exp instance uses
/// the largest admissible step (its published step exceeds the bound).
pub fn smooth_replicas(seed: u64) -> Vec<Replica> {
    let specs: [(&'static str, ProblemSpec, Option<f64>); 4] = [
        ("least_squares_400x200", ProblemSpec::LeastSquares { rows: 400, cols: 200 }, Some(5e-4)),
        ("logistic_200x5", ProblemSpec::Logistic { rows: 200, cols: 5 }, Some(5e-3)),
        ("logsumexp_40x10", ProblemSpec::Logsumexp { rows: 40, cols: 10, rho: 5.0 }, None),
        ("ridge_400x200", ProblemSpec::Ridge { rows: 400, cols: 200, lambda: 0.05 }, Some(5e-4)),
    ];
    specs
        .into_iter()
        .map(|(name, spec, eta)| {
            let (problem, x0) = instantiate(&spec, seed).unwrap();
            let eta = eta.unwrap_or_else(|| 2.0 / (3.0 * problem.lipschitz()));
            Replica { name, problem, x0, eta }
        })
        .collect()
}

/// Reference optimum value from a long FISTA run (best value seen).
pub fn reference_f_star(problem: &Problem, x0: &DenseVector, iters: usize) -> f64 {
    if let Some(f) = problem.f_star() {
        return f;
    }
    let cfg = MethodConfig::new(Method::Fista).with_eta_fraction(1.0);
    let trace = run(&cfg, problem, x0, iters, 0).unwrap();
    trace.records.iter().map(|r| r.f_x).fold(f64::INFINITY, f64::min)
}
