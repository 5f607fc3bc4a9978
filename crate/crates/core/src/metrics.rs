//! Convergence diagnostics over recorded traces.
//!
//! Asymptotic claims are audited as finite-horizon window statistics: a
//! decaying max over late windows stands in for a vanishing limsup, and
//! nonincreasing window minima stand in for a vanishing liminf. No
//! operation here claims to verify an actual limit.

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solvers::{alpha, Trace};

/// A named series indexed by iteration, with simple summary helpers.
#[derive(Debug, Clone)]
pub struct SeriesReport {
    pub name: String,
    /// Iteration index of `values[0]`.
    pub start_k: usize,
    pub values: Vec<f64>,
    pub monotone_nonincreasing: bool,
    /// Count of entries flagged by the producing operation (meaning varies
    /// per operation; zero when unused).
    pub flagged: usize,
}

impl SeriesReport {
    fn new(name: &str, start_k: usize, values: Vec<f64>) -> Self {
        // Tolerant comparison: descent holds in exact arithmetic, so only
        // rounding noise can break it.
        let monotone = values
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        Self {
            name: name.to_string(),
            start_k,
            values,
            monotone_nonincreasing: monotone,
            flagged: 0,
        }
    }

    pub fn value_at(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.start_k).and_then(|i| self.values.get(i)).copied()
    }

    /// Max over iteration indices `lo..=hi` (clipped to the series).
    pub fn window_max(&self, lo: usize, hi: usize) -> Option<f64> {
        self.window_iter(lo, hi).fold(None, |acc, v| Some(acc.map_or(v, |m: f64| m.max(v))))
    }

    pub fn window_min(&self, lo: usize, hi: usize) -> Option<f64> {
        self.window_iter(lo, hi).fold(None, |acc, v| Some(acc.map_or(v, |m: f64| m.min(v))))
    }

    fn window_iter(&self, lo: usize, hi: usize) -> impl Iterator<Item = f64> + '_ {
        let lo = lo.max(self.start_k);
        (lo..=hi).filter_map(|k| self.value_at(k))
    }

    /// Minima over dyadic windows `[2^j, 2^{j+1}]` for `j` in the range.
    pub fn dyadic_window_minima(&self, j_range: std::ops::RangeInclusive<u32>) -> Vec<f64> {
        j_range
            .filter_map(|j| self.window_min(1 << j, 1 << (j + 1)))
            .collect()
    }
}

/// Optimality gaps `delta_k = f(x_k) - f*`. Values below `-1e-9 (1 + |f*|)`
/// are counted in `flagged` as an inconsistency of the reference value.
pub fn gap_series(trace: &Trace, f_star: f64) -> Result<SeriesReport> {
    if trace.records.is_empty() {
        return Err(Error::InvalidParameter("gap_series: empty trace".into()));
    }
    if !f_star.is_finite() {
        return Err(Error::NonFinite("f_star".into()));
    }
    let values: Vec<f64> = trace.records.iter().map(|r| r.f_x - f_star).collect();
    let flagged = values.iter().filter(|d| **d < -1e-9 * (1.0 + f_star.abs())).count();
    let mut report = SeriesReport::new("delta", trace.records[0].k, values);
    report.flagged = flagged;
    Ok(report)
}

/// Rate weight applied to a gap series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateWeight {
    /// `k^2`
    KSquared,
    /// `k^2 log k log log k` (defined for k >= 3)
    KSquaredLogLog,
    /// `k^3 log k log log k` (defined for k >= 3)
    KCubedLogLog,
    /// `k + p`
    KPlusP(f64),
}

impl RateWeight {
    fn min_k(&self) -> usize {
        match self {
            RateWeight::KSquared | RateWeight::KPlusP(_) => 0,
            _ => 3,
        }
    }

    fn value(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            RateWeight::KSquared => kf * kf,
            RateWeight::KSquaredLogLog => kf * kf * kf.ln() * kf.ln().ln(),
            RateWeight::KCubedLogLog => kf * kf * kf * kf.ln() * kf.ln().ln(),
            RateWeight::KPlusP(p) => kf + p,
        }
    }
}

/// Elementwise product of a gap series with a rate weight; log-bearing
/// weights drop indices k < 3.
pub fn scaled_series(gaps: &SeriesReport, weight: RateWeight) -> SeriesReport {
    let start = gaps.start_k.max(weight.min_k());
    let values: Vec<f64> = (start..gaps.start_k + gaps.values.len())
        .filter_map(|k| gaps.value_at(k).map(|v| v * weight.value(k)))
        .collect();
    SeriesReport::new(&format!("{}_scaled", gaps.name), start, values)
}

/// Verdict of the summability diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceVerdict {
    /// Dyadic block sums of `n a_n` decay and the window maxima of
    /// `n^2 a_n` are nonincreasing after burn-in.
    Consistent,
    /// Block sums fail to decay: `sum n a_n` looks divergent.
    Divergent,
    /// Summable but the `n^2 a_n` window statistics do not settle.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct SequenceLemmaReport {
    pub partial_sums: Vec<f64>,
    pub block_sums: Vec<f64>,
    pub window_maxima: Vec<f64>,
    pub verdict: SequenceVerdict,
}

/// Checks the summability-to-rate implication on a nonnegative,
/// nonincreasing sequence `a(1..=N)`: if `sum n a_n` converges then
/// `n^2 a_n` must vanish. Partial block sums diagnose convergence; dyadic
/// window maxima of `n^2 a_n` diagnose the rate.
pub fn sequence_lemma_check(
    a: impl Fn(usize) -> f64,
    n_max: usize,
) -> Result<SequenceLemmaReport> {
    if n_max < 16 {
        return Err(Error::InvalidParameter("sequence check needs N >= 16".into()));
    }
    let mut partial_sums = Vec::new();
    let mut block_sums = Vec::new();
    let mut window_maxima = Vec::new();
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    let mut j = 0u32;
    while (1usize << j) <= n_max {
        let lo = 1usize << j;
        let hi = ((1usize << (j + 1)) - 1).min(n_max);
        let mut block = 0.0;
        let mut wmax = 0.0f64;
        for n in lo..=hi {
            let an = a(n);
            if an < 0.0 {
                return Err(Error::InvalidParameter(format!("a({n}) = {an} is negative")));
            }
            if an > prev {
                return Err(Error::InvalidParameter(format!(
                    "sequence increases at n = {n} ({prev} -> {an})"
                )));
            }
            prev = an;
            block += n as f64 * an;
            wmax = wmax.max((n * n) as f64 * an);
        }
        total += block;
        partial_sums.push(total);
        block_sums.push(block);
        window_maxima.push(wmax);
        j += 1;
    }

    // Divergence proxy: complete dyadic blocks of sum n a_n must decay.
    let full_blocks = block_sums.len().saturating_sub(1); // last block may be partial
    let verdict = if full_blocks >= 2 && block_sums[full_blocks - 1] >= 0.5 * block_sums[0] {
        SequenceVerdict::Divergent
    } else {
        // Rate proxy: window maxima nonincreasing after a short burn-in.
        let burn_in = 2.min(window_maxima.len());
        let settled = window_maxima[burn_in..]
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        if settled {
            SequenceVerdict::Consistent
        } else {
            SequenceVerdict::Inconclusive
        }
    };

    Ok(SequenceLemmaReport { partial_sums, block_sums, window_maxima, verdict })
}

#[derive(Debug, Clone)]
pub struct LyapunovAudit {
    /// Residuals `r_k = Delta_{k+1}/gamma_{k+1} + eta (k+p)/p^2 delta_k
    /// - Delta_k/gamma_k`, one per audited step (k >= 1).
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub violations: usize,
}

/// Audits the per-step telescoping inequality of the accelerated scheme on
/// a recorded trace. `p` and `eta` are passed explicitly so a deliberately
/// corrupted audit can serve as a negative control.
pub fn lyapunov_audit(
    trace: &Trace,
    problem: &Problem,
    p: f64,
    eta: f64,
) -> Result<LyapunovAudit> {
    let x_star_known = trace.records.iter().any(|r| r.z_dist_sq.is_some());
    if !x_star_known {
        return Err(Error::MissingOptimum(
            "lyapunov audit needs traces recorded with z and a known x*",
        ));
    }
    let f_star = problem
        .f_star()
        .ok_or(Error::MissingOptimum("lyapunov audit needs a reference f*"))?;

    let mut residuals = Vec::new();
    let mut max_residual = f64::NEG_INFINITY;
    let mut violations = 0;
    for pair in trace.records.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        if now.k < 1 {
            continue;
        }
        let (Some(d_now), Some(d_next)) = (now.z_dist_sq, next.z_dist_sq) else {
            continue;
        };
        let gamma_now = alpha(now.k - 1, p).powi(2) / eta;
        let gamma_next = alpha(next.k - 1, p).powi(2) / eta;
        let delta_now = now.f_x - f_star;
        let delta_next = next.f_x - f_star;
        let big_now = 0.5 * gamma_now * d_now + delta_now;
        let big_next = 0.5 * gamma_next * d_next + delta_next;
        let lhs = big_next / gamma_next + eta * (now.k as f64 + p) / (p * p) * delta_now;
        let rhs = big_now / gamma_now;
        let r = lhs - rhs;
        if r > 1e-9 * (1.0 + rhs.abs()) {
            violations += 1;
        }
        max_residual = max_residual.max(r);
        residuals.push(r);
    }
    if residuals.is_empty() {
        return Err(Error::InvalidParameter("trace too short to audit".into()));
    }
    Ok(LyapunovAudit { residuals, max_residual, violations })
}

/// Weighted gradient-norm series `k^3 log k log log k ||grad f(y_k)||^2`
/// for `k >= 3` (a liminf proxy via window minima).
pub fn grad_norm_series(trace: &Trace) -> SeriesReport {
    let values: Vec<(usize, f64)> = trace
        .records
        .iter()
        .filter(|r| r.k >= 3)
        .filter_map(|r| r.grad_norm_y.map(|g| (r.k, g)))
        .map(|(k, g)| {
            let kf = k as f64;
            (k, kf * kf * kf * kf.ln() * kf.ln().ln() * g * g)
        })
        .collect();
    let start_k = values.first().map_or(3, |(k, _)| *k);
    SeriesReport::new("weighted_grad_norm_sq", start_k, values.into_iter().map(|(_, v)| v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{DenseMatrix, DenseVector};
    use crate::problems::build_least_squares;
    use crate::sampling;
    use crate::solvers::{run, Method, MethodConfig};

    fn small_ls_trace(iters: usize) -> (Problem, Trace) {
        let a = sampling::gaussian_matrix(12, 6, 1);
        let b = sampling::gaussian_vector(12, 2);
        let p = build_least_squares(&a, &b).unwrap();
        let eta = 2.0 / (3.0 * p.lipschitz());
        let cfg = MethodConfig::new(Method::Nsa).with_eta(eta);
        let t = run(&cfg, &p, &sampling::gaussian_vector(6, 3), iters, 0).unwrap();
        (p, t)
    }

    #[test]
    fn gap_series_basics() {
        let (p, t) = small_ls_trace(200);
        let f_star = p.f_star().unwrap();
        let gaps = gap_series(&t, f_star).unwrap();
        assert_eq!(gaps.values.len(), 201);
        assert_eq!(gaps.flagged, 0);
        assert!(gaps.monotone_nonincreasing);
        // Shifting f* shifts every gap by the same amount.
        let shifted = gap_series(&t, f_star - 1.0).unwrap();
        for (a, b) in gaps.values.iter().zip(&shifted.values) {
            assert!((b - a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_series_flags_inconsistent_reference() {
        let (_, t) = small_ls_trace(50);
        // A reference above the trace minimum makes late gaps negative.
        let fake_star = t.final_f() + 1.0;
        let gaps = gap_series(&t, fake_star).unwrap();
        assert!(gaps.flagged > 0);
    }

    #[test]
    fn scaled_series_identities() {
        let gaps = SeriesReport::new(
            "delta",
            0,
            (0..50).map(|k| if k == 0 { 1.0 } else { 1.0 / (k * k) as f64 }).collect(),
        );
        let w = scaled_series(&gaps, RateWeight::KSquared);
        // delta_k = 1/k^2 weighted by k^2 gives ones (k >= 1).
        for (i, v) in w.values.iter().enumerate().skip(1) {
            assert!((v - 1.0).abs() < 1e-12, "index {i}: {v}");
        }
        let zeros = SeriesReport::new("z", 0, vec![0.0; 20]);
        for v in scaled_series(&zeros, RateWeight::KCubedLogLog).values {
            assert_eq!(v, 0.0);
        }
        // Log weights start at k = 3.
        assert_eq!(scaled_series(&gaps, RateWeight::KSquaredLogLog).start_k, 3);
    }

    #[test]
    fn sequence_lemma_cubic_consistent() {
        let report = sequence_lemma_check(|n| 1.0 / (n as f64).powi(3), 100_000).unwrap();
        assert_eq!(report.verdict, SequenceVerdict::Consistent);
        // Partial sums of n * n^-3 = n^-2 stay below pi^2/6.
        assert!(*report.partial_sums.last().unwrap() < 1.645);
    }

    #[test]
    fn sequence_lemma_harmonic_divergent() {
        let report = sequence_lemma_check(|n| 1.0 / (n * n) as f64, 100_000).unwrap();
        assert_eq!(report.verdict, SequenceVerdict::Divergent);
    }

    #[test]
    fn sequence_lemma_log_squared_consistent_at_1e6() {
        let a = |n: usize| {
            if n == 1 {
                1.0 // keep the sequence nonincreasing at the head
            } else {
                let nf = n as f64;
                (1.0 / (nf * nf * nf.ln() * nf.ln())).min(1.0)
            }
        };
        let report = sequence_lemma_check(a, 1_000_000).unwrap();
        assert_eq!(report.verdict, SequenceVerdict::Consistent);
    }

    #[test]
    fn sequence_lemma_rejects_increasing_input() {
        assert!(sequence_lemma_check(|n| n as f64, 100).is_err());
    }

    #[test]
    fn lyapunov_audit_clean_on_nsa_run() {
        let (p, t) = small_ls_trace(400);
        let audit = lyapunov_audit(&t, &p, t.p, t.eta).unwrap();
        assert_eq!(audit.violations, 0, "max residual {:.3e}", audit.max_residual);
    }

    #[test]
    fn lyapunov_audit_detects_corrupted_eta() {
        let (p, t) = small_ls_trace(400);
        let audit = lyapunov_audit(&t, &p, t.p, t.eta * 100.0).unwrap();
        assert!(audit.violations >= 1);
    }

    #[test]
    fn lyapunov_audit_stationary_trace_is_clean() {
        let a = DenseMatrix::identity(2);
        let p = build_least_squares(&a, &DenseVector::zeros(2)).unwrap();
        let cfg = MethodConfig::new(Method::Nsa).with_eta(0.5);
        let t = run(&cfg, &p, &DenseVector::zeros(2), 20, 0).unwrap();
        let audit = lyapunov_audit(&t, &p, t.p, t.eta).unwrap();
        assert_eq!(audit.violations, 0);
        assert!(audit.max_residual <= 0.0 + 1e-15);
    }

    #[test]
    fn grad_norm_series_ignores_f_star_and_weights_from_3() {
        let (_, t) = small_ls_trace(100);
        let s = grad_norm_series(&t);
        assert_eq!(s.start_k, 3);
        assert!(!s.values.is_empty());
        for v in &s.values {
            assert!(*v >= 0.0);
        }
    }
}
