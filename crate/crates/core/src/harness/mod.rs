//! Experiment orchestration: JSON configs, deterministic seeded runs, and
//! CSV trace output.
//!
//! One experiment = one problem recipe, a list of methods, an iteration
//! budget, and a list of seeds. Every method within a seed shares the same
//! generated instance and the same starting point. Output is one CSV per
//! (method, seed) with the fixed header
//! `method,seed,k,f_x,delta,k2delta,grad_norm_y,evals,wallclock_s`,
//! a combined summary CSV, a long-format CSV for plotting, and a JSON
//! manifest. Everything except the wall-clock columns is reproducible
//! byte for byte.

mod checks;
mod figures;

pub use checks::{run_checks, CheckOutcome};
pub use figures::{builtin_figure_ids, figure_spec};

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};
use crate::ode::{self, OdeTrajectory};
use crate::problems::{
    self, build_mlp_classifier, load_csv_dataset, parse_csv_dataset, Dataset, LabelColumn,
    OptimumHint, Problem,
};
use crate::sampling;
use crate::solvers::{self, resolve_method, Method, MethodConfig, Trace};

/// The iris measurements shipped with the crate for the classifier
/// benchmark (150 samples, 4 features, 3 classes).
pub const IRIS_CSV: &str = include_str!("../../data/iris.csv");

/// CSV header shared by the per-run and long-format trace files.
pub const TRACE_CSV_HEADER: &str = "method,seed,k,f_x,delta,k2delta,grad_norm_y,evals,wallclock_s";

fn default_iters() -> usize {
    10_000
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Problem recipe: what to generate, with sizes and regularization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    LeastSquares { rows: usize, cols: usize },
    Logistic { rows: usize, cols: usize },
    Lasso { rows: usize, cols: usize, lambda: f64 },
    Logsumexp { rows: usize, cols: usize, rho: f64 },
    Ridge { rows: usize, cols: usize, lambda: f64 },
    MatrixCompletion {
        rows: usize,
        cols: usize,
        rank: usize,
        observed_fraction: f64,
        lambda: f64,
    },
    /// One-hidden-layer classifier; `dataset` is "iris" (embedded) or a
    /// CSV path, with the label in the last column unless named.
    Mlp {
        #[serde(default = "default_dataset")]
        dataset: String,
        #[serde(default)]
        label_column: Option<String>,
        #[serde(default = "default_hidden")]
        hidden: usize,
    },
}

fn default_dataset() -> String {
    "iris".into()
}

fn default_hidden() -> usize {
    8
}

/// Optional reference run that supplies `F*` when no closed form exists:
/// a long proximal-gradient (FISTA) run from the shared starting point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub iters: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: ProblemSpec,
    pub methods: Vec<MethodConfig>,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
}

/// Parses and validates a JSON experiment spec, filling defaults
/// (p = 3, iters = 10^4, seed = 0).
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec =
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    validate_spec(&spec)?;
    Ok(spec)
}

/// Parses a JSON config for the continuous-time runner.
pub fn parse_ode_config(text: &str) -> Result<OdeExperimentSpec> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

fn validate_spec(spec: &ExperimentSpec) -> Result<()> {
    if spec.methods.is_empty() {
        return Err(Error::Config("field methods: at least one method required".into()));
    }
    if spec.iters == 0 {
        return Err(Error::Config("field iters: must be >= 1".into()));
    }
    if spec.seeds.is_empty() {
        return Err(Error::Config("field seeds: at least one seed required".into()));
    }
    let mut labels: Vec<String> = spec.methods.iter().map(|m| m.label()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != spec.methods.len() {
        return Err(Error::Config(
            "field methods: duplicate labels; set a distinct 'label' per entry".into(),
        ));
    }
    if let ProblemSpec::MatrixCompletion { rank, rows, cols, observed_fraction, .. } =
        &spec.problem
    {
        if *rank == 0 || *rank > (*rows).min(*cols) {
            return Err(Error::Config("field rank: must be in [1, min(rows, cols)]".into()));
        }
        if !(*observed_fraction > 0.0 && *observed_fraction <= 1.0) {
            return Err(Error::Config("field observed_fraction: must be in (0, 1]".into()));
        }
    }
    Ok(())
}

/// Builds the problem instance and shared starting point for one seed.
pub fn instantiate(spec: &ProblemSpec, seed: u64) -> Result<(Problem, DenseVector)> {
    let sub = |tag: u64| sampling::substream(seed, tag);
    match spec {
        ProblemSpec::LeastSquares { rows, cols } => {
            let a = sampling::gaussian_matrix(*rows, *cols, sub(1));
            let b = sampling::gaussian_vector(*rows, sub(2));
            let p = problems::build_least_squares(&a, &b)?;
            let x0 = sampling::gaussian_vector(*cols, sub(3));
            Ok((p, x0))
        }
        ProblemSpec::Logistic { rows, cols } => {
            let a = sampling::gaussian_matrix(*rows, *cols, sub(1));
            let y = sampling::bernoulli_labels(*rows, sub(2));
            let p = problems::build_logistic(&a, &y)?;
            let x0 = sampling::gaussian_vector(*cols, sub(3));
            Ok((p, x0))
        }
        ProblemSpec::Lasso { rows, cols, lambda } => {
            let a = sampling::gaussian_matrix(*rows, *cols, sub(1));
            let b = sampling::gaussian_vector(*rows, sub(2));
            let p = problems::build_lasso(&a, &b, *lambda)?;
            let x0 = sampling::gaussian_vector(*cols, sub(3));
            Ok((p, x0))
        }
        ProblemSpec::Logsumexp { rows, cols, rho } => {
            let a = sampling::gaussian_matrix(*rows, *cols, sub(1));
            let b = sampling::gaussian_vector(*rows, sub(2));
            let p = problems::build_logsumexp(&a, &b, *rho)?;
            let x0 = sampling::gaussian_vector(*cols, sub(3));
            Ok((p, x0))
        }
        ProblemSpec::Ridge { rows, cols, lambda } => {
            let a = sampling::gaussian_matrix(*rows, *cols, sub(1));
            let b = sampling::gaussian_vector(*rows, sub(2));
            let p = problems::build_ridge(&a, &b, *lambda)?;
            let x0 = sampling::gaussian_vector(*cols, sub(3));
            Ok((p, x0))
        }
        ProblemSpec::MatrixCompletion { rows, cols, rank, observed_fraction, lambda } => {
            // Low-rank target U S V with uniform factors and singular-value
            // ladder 1..=rank, observed on a random entry subset.
            let u = sampling::uniform_matrix(*rows, *rank, sub(1));
            let v = sampling::uniform_matrix(*rank, *cols, sub(2));
            let ladder: Vec<f64> = (1..=*rank).map(|i| i as f64).collect();
            let s = DenseMatrix::diag(&ladder);
            let a = u.matmul(&s).matmul(&v);
            let total = rows * cols;
            let count = ((total as f64) * observed_fraction).round().max(1.0) as usize;
            let positions = sampling::sample_positions(total, count.min(total), sub(3));
            let mut mask = vec![false; total];
            for pos in positions {
                mask[pos] = true;
            }
            let p = problems::build_matrix_completion(&a, &mask, *lambda)?;
            let x0 = DenseVector::zeros(total);
            Ok((p, x0))
        }
        ProblemSpec::Mlp { dataset, label_column, hidden } => {
            let data = load_dataset(dataset, label_column.as_deref())?;
            let p = build_mlp_classifier(&data, *hidden, seed)?;
            let x0 = sampling::uniform_vector(p.dim(), sub(3));
            Ok((p, x0))
        }
    }
}

fn parse_label_selector(name: &str) -> LabelColumn {
    match name.parse::<usize>() {
        Ok(i) => LabelColumn::Index(i),
        Err(_) => LabelColumn::Name(name.to_string()),
    }
}

fn load_dataset(source: &str, label_column: Option<&str>) -> Result<Dataset> {
    if source == "iris" {
        let label = label_column.map_or(LabelColumn::Index(4), parse_label_selector);
        return parse_csv_dataset(IRIS_CSV, &label);
    }
    // User file: default to the last column when unspecified.
    let text = std::fs::read_to_string(source).map_err(|e| Error::Io {
        path: source.to_string(),
        source: e,
    })?;
    let width = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| l.split(',').count())
        .ok_or_else(|| Error::Dataset("empty file".into()))?;
    let label = label_column
        .map_or(LabelColumn::Index(width.saturating_sub(1)), parse_label_selector);
    load_csv_dataset(Path::new(source), &label)
}

/// Attaches a reference optimum from a long FISTA run when the problem has
/// no closed-form hint.
fn attach_reference(problem: Problem, x0: &DenseVector, reference: &ReferenceSpec) -> Problem {
    if problem.f_star().is_some() {
        return problem;
    }
    let cfg = MethodConfig::new(Method::Fista).with_eta_fraction(1.0).with_label("reference");
    match solvers::run(&cfg, &problem, x0, reference.iters, 0) {
        Ok(trace) => {
            let best = trace.records.iter().map(|r| r.f_x).fold(f64::INFINITY, f64::min);
            problem.with_optimum(OptimumHint { x_star: Some(trace.final_x.clone()), f_star: best })
        }
        Err(_) => problem,
    }
}

/// One solver run inside a result set.
#[derive(Debug)]
pub struct RunOutput {
    pub label: String,
    pub seed: u64,
    pub trace: Trace,
    /// Divergence message when the run aborted early (the partial trace is
    /// kept so the failure is inspectable).
    pub failure: Option<String>,
}

/// Everything an experiment produced.
#[derive(Debug)]
pub struct ResultSet {
    pub name: String,
    pub runs: Vec<RunOutput>,
    /// Resolved (label, seed) -> (eta, L) metadata.
    pub resolved: Vec<ResolvedRunMeta>,
    pub out_dir: PathBuf,
    /// Files written so far (per-run CSVs and the summary).
    pub manifest: Vec<PathBuf>,
    /// Total wall-clock seconds spent running solvers.
    pub wallclock_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRunMeta {
    pub label: String,
    pub seed: u64,
    pub eta: f64,
    pub p: f64,
    pub lipschitz: f64,
    pub f_star_known: bool,
}

/// Resolves the output root: explicit spec field, else `NSA_OUT_DIR`, else
/// `out/`.
pub fn output_root(spec: &ExperimentSpec) -> PathBuf {
    if let Some(dir) = &spec.out_dir {
        return PathBuf::from(dir);
    }
    if let Ok(dir) = std::env::var("NSA_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("out")
}

/// Runs every (method, seed) pair sequentially and writes one trace CSV per
/// run plus a combined summary CSV. Solver divergence is recorded per
/// method and does not stop the other runs.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultSet> {
    validate_spec(spec)?;
    let started = std::time::Instant::now();
    let out_dir = output_root(spec).join(&spec.name);
    std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let mut runs = Vec::new();
    let mut resolved_meta = Vec::new();
    for &seed in &spec.seeds {
        let (mut problem, x0) = instantiate(&spec.problem, seed)?;
        if let Some(reference) = &spec.reference {
            problem = attach_reference(problem, &x0, reference);
        }
        // Pre-run validation: every method must satisfy its step bound on
        // this instance before anything runs.
        for method in &spec.methods {
            let r = resolve_method(method, &problem)?;
            resolved_meta.push(ResolvedRunMeta {
                label: r.label.clone(),
                seed,
                eta: r.eta,
                p: r.p,
                lipschitz: problem.lipschitz(),
                f_star_known: problem.f_star().is_some(),
            });
        }
        for method in &spec.methods {
            let label = method.label();
            match solvers::run(method, &problem, &x0, spec.iters, seed) {
                Ok(trace) => runs.push(RunOutput { label, seed, trace, failure: None }),
                Err(failure) => runs.push(RunOutput {
                    label,
                    seed,
                    trace: failure.partial,
                    failure: Some(failure.error.to_string()),
                }),
            }
        }
    }

    let mut result = ResultSet {
        name: spec.name.clone(),
        runs,
        resolved: resolved_meta,
        out_dir,
        manifest: Vec::new(),
        wallclock_s: started.elapsed().as_secs_f64(),
    };
    write_run_csvs(&mut result)?;
    write_summary(&mut result)?;
    Ok(result)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn trace_csv_rows(trace: &Trace, out: &mut String) {
    for r in &trace.records {
        let k2delta = r.delta.map(|d| (r.k as f64) * (r.k as f64) * d);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            trace.label,
            trace.seed,
            r.k,
            r.f_x,
            fmt_opt(r.delta),
            fmt_opt(k2delta),
            fmt_opt(r.grad_norm_y),
            r.evals,
            r.wallclock_s,
        ));
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(contents.as_bytes()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_run_csvs(result: &mut ResultSet) -> Result<()> {
    for run in &result.runs {
        let mut body = String::from(TRACE_CSV_HEADER);
        body.push('\n');
        trace_csv_rows(&run.trace, &mut body);
        let path = result.out_dir.join(format!("{}_seed{}.csv", run.label, run.seed));
        write_file(&path, &body)?;
        result.manifest.push(path);
    }
    Ok(())
}

fn write_summary(result: &mut ResultSet) -> Result<()> {
    let mut body = String::from("method,seed,status,iters,f_x,delta,evals,wallclock_s\n");
    for run in &result.runs {
        let last = run.trace.records.last();
        body.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            run.label,
            run.seed,
            if run.failure.is_some() { "diverged" } else { "ok" },
            last.map(|r| r.k).unwrap_or(0),
            last.map(|r| r.f_x.to_string()).unwrap_or_default(),
            fmt_opt(last.and_then(|r| r.delta)),
            last.map(|r| r.evals).unwrap_or(0),
            last.map(|r| r.wallclock_s.to_string()).unwrap_or_default(),
        ));
    }
    let path = result.out_dir.join("summary.csv");
    write_file(&path, &body)?;
    result.manifest.push(path);
    Ok(())
}

/// Writes the combined long-format CSV, the manifest JSON, and a plot-script
/// stub referencing the files. Returns all files the experiment produced.
pub fn emit_plot_data(result: &mut ResultSet) -> Result<Vec<PathBuf>> {
    if result.runs.is_empty() {
        return Ok(Vec::new());
    }
    let mut body = String::from(TRACE_CSV_HEADER);
    body.push('\n');
    for run in &result.runs {
        trace_csv_rows(&run.trace, &mut body);
    }
    let long_path = result.out_dir.join("all_traces.csv");
    write_file(&long_path, &body)?;
    result.manifest.push(long_path.clone());

    let stub = plot_stub(result);
    let stub_path = result.out_dir.join("plot.py");
    write_file(&stub_path, &stub)?;
    result.manifest.push(stub_path);

    let manifest_json = serde_json::json!({
        "experiment": result.name,
        "files": result
            .manifest
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
            .collect::<Vec<_>>(),
        "runs": result.resolved,
    });
    let manifest_path = result.out_dir.join("manifest.json");
    write_file(&manifest_path, &serde_json::to_string_pretty(&manifest_json).unwrap())?;
    result.manifest.push(manifest_path);
    Ok(result.manifest.clone())
}

fn plot_stub(result: &ResultSet) -> String {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("# Plots the gap curves from all_traces.csv (one line per method/seed).\n");
    s.push_str("import csv, collections\n");
    s.push_str("import matplotlib.pyplot as plt\n\n");
    s.push_str(&format!("EXPERIMENT = {:?}\n", result.name));
    s.push_str("series = collections.defaultdict(lambda: ([], []))\n");
    s.push_str("with open('all_traces.csv') as fh:\n");
    s.push_str("    for row in csv.DictReader(fh):\n");
    s.push_str("        key = f\"{row['method']} (seed {row['seed']})\"\n");
    s.push_str("        ks, vs = series[key]\n");
    s.push_str("        value = row['delta'] or row['f_x']\n");
    s.push_str("        ks.append(int(row['k'])); vs.append(float(value))\n");
    s.push_str("for key, (ks, vs) in sorted(series.items()):\n");
    s.push_str("    plt.semilogy(ks, vs, label=key)\n");
    s.push_str("plt.xlabel('iteration'); plt.ylabel('objective gap')\n");
    s.push_str("plt.legend(); plt.title(EXPERIMENT)\n");
    s.push_str("plt.savefig(EXPERIMENT + '.png', dpi=160)\n");
    s
}

/// Configuration of a continuous-time integration run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeExperimentSpec {
    pub name: String,
    pub problem: ProblemSpec,
    #[serde(default = "default_p_ode")]
    pub p: f64,
    pub s: f64,
    pub eta: f64,
    pub t_end: f64,
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub high_resolution: bool,
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_p_ode() -> f64 {
    3.0
}

/// Integrates the configured dynamics and writes a `t,f_X,energy` CSV.
/// The energy column is empty when the problem has no explicit optimum.
pub fn run_ode_experiment(spec: &OdeExperimentSpec) -> Result<PathBuf> {
    let (problem, x0) = instantiate(&spec.problem, spec.seed)?;
    let t0 = spec.t0.unwrap_or_else(|| spec.eta.sqrt());
    let dt = spec.dt.unwrap_or((spec.t_end - t0) / 1e5);
    let trajectory = if spec.high_resolution {
        ode::integrate_high_resolution(&problem, &x0, spec.p, spec.s, spec.eta, t0, spec.t_end, dt)?
    } else {
        ode::integrate_system(&problem, &x0, spec.p, spec.s, spec.eta, t0, spec.t_end, dt)?
    };

    let out_dir = {
        let base = spec
            .out_dir
            .clone()
            .map(PathBuf::from)
            .unwrap_or_else(|| match std::env::var("NSA_OUT_DIR") {
                Ok(d) if !d.is_empty() => PathBuf::from(d),
                _ => PathBuf::from("out"),
            });
        base.join(&spec.name)
    };
    std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let path = out_dir.join("trajectory.csv");
    write_file(&path, &trajectory_csv(&trajectory, &problem, spec.high_resolution))?;
    Ok(path)
}

fn trajectory_csv(trajectory: &OdeTrajectory, problem: &Problem, high_resolution: bool) -> String {
    let mut body = String::from("t,f_X,energy\n");
    for i in 0..trajectory.len() {
        let t = trajectory.times[i];
        let f = problem.smooth_value(&trajectory.x[i]);
        // For the second-order form, reconstruct Z = X + t X'/p so the same
        // energy definition applies.
        let energy = if problem.x_star().is_some() {
            let z = if high_resolution {
                trajectory.x[i].axpy(t / trajectory.p, &trajectory.companion[i])
            } else {
                trajectory.companion[i].clone()
            };
            ode::energy(&trajectory.x[i], &z, t, trajectory.p, problem).ok()
        } else {
            None
        };
        body.push_str(&format!("{},{},{}\n", t, f, fmt_opt(energy)));
    }
    body
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_iris_has_expected_shape() {
        let data = parse_csv_dataset(IRIS_CSV, &LabelColumn::Index(4)).unwrap();
        assert_eq!(data.samples(), 150);
        assert_eq!(data.feature_count(), 4);
        assert_eq!(data.class_count, 3);
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let text = r#"{
            "name": "demo",
            "problem": {"kind": "least_squares", "rows": 40, "cols": 20},
            "methods": [{"method": "nsa"}]
        }"#;
        let spec = parse_config(text).unwrap();
        assert_eq!(spec.iters, 10_000);
        assert_eq!(spec.seeds, vec![0]);
        assert_eq!(spec.methods[0].p, 3.0);
    }

    #[test]
    fn unknown_method_tag_is_rejected() {
        let text = r#"{
            "name": "demo",
            "problem": {"kind": "least_squares", "rows": 4, "cols": 2},
            "methods": [{"method": "nsq"}]
        }"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("nsq"), "{err}");
    }

    #[test]
    fn eta_round_trips_through_serialization() {
        let text = r#"{
            "name": "demo",
            "problem": {"kind": "least_squares", "rows": 4, "cols": 2},
            "methods": [{"method": "nsa", "eta": 0.0005}]
        }"#;
        let spec = parse_config(text).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("0.0005"), "{json}");
        let back = parse_config(&json).unwrap();
        match back.methods[0].eta {
            Some(crate::solvers::EtaSpec::Absolute(v)) => assert_eq!(v, 0.0005),
            other => panic!("unexpected eta: {other:?}"),
        }
    }

    #[test]
    fn duplicate_labels_rejected() {
        let text = r#"{
            "name": "demo",
            "problem": {"kind": "least_squares", "rows": 4, "cols": 2},
            "methods": [{"method": "gd"}, {"method": "gd"}]
        }"#;
        assert!(parse_config(text).is_err());
    }

    #[test]
    fn instances_are_deterministic_per_seed() {
        let spec = ProblemSpec::LeastSquares { rows: 10, cols: 4 };
        let (p1, x1) = instantiate(&spec, 3).unwrap();
        let (p2, x2) = instantiate(&spec, 3).unwrap();
        assert_eq!(x1.as_slice(), x2.as_slice());
        assert_eq!(p1.lipschitz(), p2.lipschitz());
        let (_, x3) = instantiate(&spec, 4).unwrap();
        assert_ne!(x1.as_slice(), x3.as_slice());
    }

    #[test]
    fn completion_mask_honors_fraction() {
        let spec = ProblemSpec::MatrixCompletion {
            rows: 50,
            cols: 40,
            rank: 3,
            observed_fraction: 0.2,
            lambda: 0.05,
        };
        let (p, x0) = instantiate(&spec, 0).unwrap();
        assert_eq!(p.dim(), 2000);
        assert_eq!(x0.len(), 2000);
        // Gradient at a constant-one matrix touches exactly the observed
        // entries: count them.
        let ones = DenseVector::from_fn(2000, |_| 1.0);
        let g = p.smooth_gradient(&ones);
        let touched = g.iter().filter(|v| **v != 0.0).count();
        assert!(touched <= 400);
        // (a few target entries could equal 1.0 exactly; allow tiny slack)
        assert!(touched >= 395, "observed {touched}");
    }
}
