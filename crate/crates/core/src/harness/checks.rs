//! Quick invariant battery behind the `check` CLI subcommand.
//!
//! Each check is a desk-scale version of an invariant the test suite
//! verifies in full; the battery runs in seconds and prints one pass/fail
//! line per check.

use crate::estimators::{
    admissible_epsilon, check_h2, coordinate_fd_gradient, EvalCounter,
};
use crate::metrics::{lyapunov_audit, sequence_lemma_check, SequenceVerdict};
use crate::numerics::{spectral_norm_sq, svd, DenseVector};
use crate::ode::{energy, integrate_system};
use crate::problems::{build_lasso, build_least_squares};
use crate::prox::{project_ball, prox_l1};
use crate::sampling;
use crate::solvers::{run, Method, MethodConfig};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome { name, pass, detail: detail.into() }
}

/// Runs the default invariant suite; all checks are deterministic.
pub fn run_checks() -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    // SVD reconstruction and spectral norm agreement.
    out.push({
        let mut worst = 0.0f64;
        let mut spectral_gap = 0.0f64;
        for seed in 0..3u64 {
            let a = sampling::gaussian_matrix(8, 5, seed);
            let f = svd(&a).unwrap();
            let recon = f.reconstruct();
            for i in 0..8 {
                for j in 0..5 {
                    worst = worst.max((recon.get(i, j) - a.get(i, j)).abs());
                }
            }
            let power = spectral_norm_sq(&a).unwrap();
            spectral_gap = spectral_gap.max((power - f.s[0] * f.s[0]).abs() / power);
        }
        outcome(
            "svd_reconstruction",
            worst <= 1e-9 && spectral_gap <= 1e-8,
            format!("max residual {worst:.2e}, spectral gap {spectral_gap:.2e}"),
        )
    });

    // Analytic gradients vs central differences.
    out.push({
        let a = sampling::gaussian_matrix(10, 5, 11);
        let b = sampling::gaussian_vector(10, 12);
        let p = build_least_squares(&a, &b).unwrap();
        let mut worst = 0.0f64;
        for i in 0..10u64 {
            let x = sampling::gaussian_vector(5, sampling::substream(100, i));
            let g = p.smooth_gradient(&x);
            let h = 1e-6 * (1.0 + x.norm());
            let fd = DenseVector::from_fn(5, |j| {
                let mut plus = x.as_slice().to_vec();
                let mut minus = x.as_slice().to_vec();
                plus[j] += h;
                minus[j] -= h;
                (p.smooth_value(&DenseVector::from_vec(plus).unwrap())
                    - p.smooth_value(&DenseVector::from_vec(minus).unwrap()))
                    / (2.0 * h)
            });
            worst = worst.max(g.distance(&fd) / (1.0 + g.norm()));
        }
        outcome("gradient_consistency", worst <= 1e-5, format!("max rel error {worst:.2e}"))
    });

    // Prox optimality (soft threshold vs random candidates), projection
    // idempotence.
    out.push({
        let x = sampling::gaussian_vector(8, 21).scale(2.0);
        let tau = 0.6;
        let y = prox_l1(&x, tau);
        let objective = |z: &DenseVector| {
            z.iter().map(|v| v.abs()).sum::<f64>() + z.sub(&x).norm_sq() / (2.0 * tau)
        };
        let fy = objective(&y);
        let mut ok = true;
        for i in 0..50u64 {
            let z = y.add(&sampling::gaussian_vector(8, sampling::substream(300, i)).scale(0.2));
            if fy > objective(&z) + 1e-9 {
                ok = false;
            }
        }
        let proj = project_ball(&x, 1.0);
        let idem = project_ball(&proj, 1.0).as_slice() == proj.as_slice();
        outcome("prox_optimality", ok && idem, format!("soft-threshold objective {fy:.4}"))
    });

    // Estimator bias bound and alignment sandwich on a quadratic.
    out.push({
        let a = sampling::gaussian_matrix(12, 6, 31);
        let b = sampling::gaussian_vector(12, 32);
        let p = build_least_squares(&a, &b).unwrap();
        let l = p.lipschitz();
        let n = 6.0f64;
        let m1 = l * n.sqrt() / 2.0;
        let mut ok = true;
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let x = sampling::gaussian_vector(6, sampling::substream(400, i));
            let grad = p.smooth_gradient(&x);
            if grad.norm() == 0.0 {
                continue;
            }
            let m2 = 2.0 * m1 * (grad.norm() + m1 * 1e-4);
            let eps = admissible_epsilon(grad.norm(), m1, m2).unwrap().min(1e-4);
            let mut counter = EvalCounter::new();
            let g = coordinate_fd_gradient(&|v| p.smooth_value(v), &x, eps, &mut counter).unwrap();
            let err = g.distance(&grad);
            worst = worst.max(err / (m1 * eps).max(1e-300));
            if err > m1 * eps || !check_h2(&g, &grad).unwrap() {
                ok = false;
            }
        }
        outcome("estimator_bias_and_alignment", ok, format!("worst bias ratio {worst:.2e}"))
    });

    // Safeguarded acceleration: monotone gaps plus per-step sufficient
    // decrease on a random least-squares instance.
    out.push({
        let a = sampling::gaussian_matrix(30, 15, 41);
        let b = sampling::gaussian_vector(30, 42);
        let p = build_least_squares(&a, &b).unwrap();
        let eta = 2.0 / (3.0 * p.lipschitz());
        let cfg = MethodConfig::new(Method::Nsa).with_eta(eta);
        let trace = run(&cfg, &p, &sampling::gaussian_vector(15, 43), 1500, 0).unwrap();
        let deltas = trace.deltas().unwrap();
        let monotone = deltas
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        outcome("descent_safeguard", monotone, format!("final gap {:.2e}", deltas.last().unwrap()))
    });

    // Composite descent on a lasso instance.
    out.push({
        let a = sampling::gaussian_matrix(30, 12, 51);
        let b = sampling::gaussian_vector(30, 52);
        let p = build_lasso(&a, &b, 0.3).unwrap();
        let cfg = MethodConfig::new(Method::NsaComposite).with_eta_fraction(1.0);
        let trace = run(&cfg, &p, &sampling::gaussian_vector(12, 53), 800, 0).unwrap();
        let fs: Vec<f64> = trace.records.iter().map(|r| r.f_x).collect();
        let monotone = fs.windows(2).all(|w| w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()));
        outcome("composite_descent", monotone, format!("final value {:.6}", fs.last().unwrap()))
    });

    // Lyapunov telescoping audit, including the corrupted negative control.
    out.push({
        let a = sampling::gaussian_matrix(40, 20, 61);
        let b = sampling::gaussian_vector(40, 62);
        let p = build_least_squares(&a, &b).unwrap();
        let eta = 2.0 / (3.0 * p.lipschitz());
        let cfg = MethodConfig::new(Method::Nsa).with_eta(eta);
        let trace = run(&cfg, &p, &sampling::gaussian_vector(20, 63), 800, 0).unwrap();
        let clean = lyapunov_audit(&trace, &p, trace.p, trace.eta).unwrap();
        let corrupted = lyapunov_audit(&trace, &p, trace.p, trace.eta * 100.0).unwrap();
        outcome(
            "lyapunov_telescoping",
            clean.violations == 0 && corrupted.violations >= 1,
            format!(
                "clean max residual {:.2e}, corrupted violations {}",
                clean.max_residual, corrupted.violations
            ),
        )
    });

    // Continuous-time energy decay and rate bound.
    out.push({
        let a = sampling::gaussian_matrix(6, 3, 71);
        let b = sampling::gaussian_vector(6, 72);
        let p = build_least_squares(&a, &b).unwrap();
        let x0 = sampling::gaussian_vector(3, 73);
        let traj = integrate_system(&p, &x0, 3.0, 0.05, 0.0025, 0.05, 2.0, 0.002).unwrap();
        let e0 = energy(&traj.x[0], &traj.companion[0], traj.times[0], 3.0, &p).unwrap();
        let f_star = p.f_star().unwrap();
        let mut ok = true;
        let mut prev = e0;
        for i in 1..traj.len() {
            let e = energy(&traj.x[i], &traj.companion[i], traj.times[i], 3.0, &p).unwrap();
            if e > prev + 1e-6 * e0 {
                ok = false;
            }
            if p.smooth_value(&traj.x[i]) - f_star > e0 / (traj.times[i] * traj.times[i]) + 1e-9 {
                ok = false;
            }
            prev = e;
        }
        outcome("ode_energy_decay", ok, format!("E(t0) {e0:.4}"))
    });

    // Summability diagnostic on the three reference sequences.
    out.push({
        let cubic = sequence_lemma_check(|n| 1.0 / (n as f64).powi(3), 100_000).unwrap();
        let harmonic = sequence_lemma_check(|n| 1.0 / (n * n) as f64, 100_000).unwrap();
        let log_sq = sequence_lemma_check(
            |n| {
                if n == 1 {
                    1.0
                } else {
                    let nf = n as f64;
                    (1.0 / (nf * nf * nf.ln() * nf.ln())).min(1.0)
                }
            },
            100_000,
        )
        .unwrap();
        let ok = cubic.verdict == SequenceVerdict::Consistent
            && harmonic.verdict == SequenceVerdict::Divergent
            && log_sq.verdict == SequenceVerdict::Consistent;
        outcome("sequence_lemma", ok, format!("verdicts {:?}/{:?}/{:?}", cubic.verdict, harmonic.verdict, log_sq.verdict))
    });

    // Reproducibility: identical seeds give identical traces.
    out.push({
        let a = sampling::gaussian_matrix(12, 6, 81);
        let b = sampling::gaussian_vector(12, 82);
        let p = build_least_squares(&a, &b).unwrap();
        let cfg = MethodConfig::new(Method::Nsa).with_eta_fraction(0.5);
        let x0 = sampling::gaussian_vector(6, 83);
        let t1 = run(&cfg, &p, &x0, 100, 5).unwrap();
        let t2 = run(&cfg, &p, &x0, 100, 5).unwrap();
        outcome("determinism", t1.deterministic_eq(&t2), "identical seeds, identical traces")
    });

    out
}
