//! Contract tests for the experiment harness file output.

mod common;

use nsa_core::harness::{
    emit_plot_data, figure_spec, instantiate, parse_ode_config, run_experiment,
    run_ode_experiment, ExperimentSpec, ProblemSpec, ResultSet, TRACE_CSV_HEADER,
};
use nsa_core::solvers::{Method, MethodConfig};

fn temp_root(tag: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("nsa-io-{}-{tag}", std::process::id()))
}

fn tiny_spec(tag: &str) -> ExperimentSpec {
    ExperimentSpec {
        name: format!("tiny-{tag}"),
        problem: ProblemSpec::LeastSquares { rows: 12, cols: 6 },
        methods: vec![
            MethodConfig::new(Method::Nsa).with_eta_fraction(2.0 / 3.0),
            MethodConfig::new(Method::Gd).with_eta_fraction(1.0),
        ],
        iters: 50,
        seeds: vec![0, 1],
        out_dir: Some(temp_root(tag).display().to_string()),
        reference: None,
    }
}

#[test]
fn per_run_csvs_use_the_documented_header() {
    let spec = tiny_spec("header");
    let result = run_experiment(&spec).unwrap();
    assert_eq!(result.runs.len(), 4);
    for path in &result.manifest {
        if path.file_name().unwrap() == "summary.csv" {
            continue;
        }
        let text = std::fs::read_to_string(path).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, TRACE_CSV_HEADER, "file {}", path.display());
        // 50 iterations -> 51 records
        assert_eq!(text.lines().count(), 52);
    }
    std::fs::remove_dir_all(temp_root("header")).ok();
}

#[test]
fn wallclock_column_is_monotone_within_each_run() {
    let spec = tiny_spec("wallclock");
    let result = run_experiment(&spec).unwrap();
    for run in &result.runs {
        let mut prev = -1.0;
        for r in &run.trace.records {
            assert!(r.wallclock_s >= prev);
            prev = r.wallclock_s;
        }
    }
    std::fs::remove_dir_all(temp_root("wallclock")).ok();
}

#[test]
fn manifest_paths_exist_after_emit() {
    let spec = tiny_spec("manifest");
    let mut result = run_experiment(&spec).unwrap();
    let manifest = emit_plot_data(&mut result).unwrap();
    assert!(manifest.iter().any(|p| p.file_name().unwrap() == "all_traces.csv"));
    assert!(manifest.iter().any(|p| p.file_name().unwrap() == "plot.py"));
    assert!(manifest.iter().any(|p| p.file_name().unwrap() == "manifest.json"));
    for path in &manifest {
        assert!(path.exists(), "missing {}", path.display());
    }
    std::fs::remove_dir_all(temp_root("manifest")).ok();
}

#[test]
fn empty_result_set_emits_nothing() {
    let mut empty = ResultSet {
        name: "empty".into(),
        runs: Vec::new(),
        resolved: Vec::new(),
        out_dir: temp_root("empty"),
        manifest: Vec::new(),
        wallclock_s: 0.0,
    };
    let manifest = emit_plot_data(&mut empty).unwrap();
    assert!(manifest.is_empty());
    assert!(!temp_root("empty").exists());
}

#[test]
fn divergent_method_does_not_stop_the_others() {
    let mut spec = tiny_spec("divergence");
    // A wildly oversized gd step diverges; gd has no validation cap.
    spec.methods = vec![
        MethodConfig::new(Method::Gd).with_eta(1e9).with_label("gd_bad"),
        MethodConfig::new(Method::Nsa).with_eta_fraction(2.0 / 3.0),
    ];
    let result = run_experiment(&spec).unwrap();
    let bad = result.runs.iter().find(|r| r.label == "gd_bad").unwrap();
    let good = result.runs.iter().find(|r| r.label == "nsa").unwrap();
    assert!(bad.failure.is_some());
    assert!(good.failure.is_none());
    assert_eq!(good.trace.records.len(), 51);
    std::fs::remove_dir_all(temp_root("divergence")).ok();
}

#[test]
fn step_bound_violations_are_rejected_pre_run() {
    let mut spec = tiny_spec("bounds");
    spec.methods = vec![MethodConfig::new(Method::Nsa).with_eta(1e6)];
    let err = run_experiment(&spec).unwrap_err();
    assert!(err.to_string().contains("eta"), "{err}");
    std::fs::remove_dir_all(temp_root("bounds")).ok();
}

#[test]
fn figure_2a_quick_run_orders_nsa_before_gd() {
    // Short desk check of the least-squares comparison: the safeguarded
    // accelerated method reaches a lower gap than plain gradient descent.
    let mut spec = figure_spec("2a").unwrap();
    spec.iters = 2000;
    spec.out_dir = Some(temp_root("fig2a").display().to_string());
    let result = run_experiment(&spec).unwrap();
    let final_f = |label: &str| {
        result
            .runs
            .iter()
            .find(|r| r.label == label)
            .unwrap()
            .trace
            .final_f()
    };
    assert!(final_f("nsa") <= final_f("gd") + 1e-9);
    std::fs::remove_dir_all(temp_root("fig2a")).ok();
}

#[test]
fn ode_trajectory_csv_has_t_fx_energy_columns() {
    let spec_json = format!(
        r#"{{
            "name": "ode-smoke",
            "problem": {{"kind": "least_squares", "rows": 8, "cols": 4}},
            "p": 3.0,
            "s": 0.05,
            "eta": 0.0025,
            "t_end": 1.0,
            "dt": 0.001,
            "out_dir": "{}"
        }}"#,
        temp_root("ode").display()
    );
    let spec = parse_ode_config(&spec_json).unwrap();
    let path = run_ode_experiment(&spec).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,f_X,energy");
    let first = lines.next().unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields.len(), 3);
    // least squares has a closed-form optimum, so energy is populated
    assert!(!fields[2].is_empty());
    std::fs::remove_dir_all(temp_root("ode")).ok();
}

#[test]
fn mlp_replica_instantiates_with_uniform_start() {
    let (problem, x0) = instantiate(
        &ProblemSpec::Mlp { dataset: "iris".into(), label_column: None, hidden: 8 },
        0,
    )
    .unwrap();
    // 4 features, 8 hidden, 3 classes: 8*4 + 8 + 3*8 + 3 parameters.
    assert_eq!(problem.dim(), 67);
    assert!(x0.iter().all(|v| (0.0..1.0).contains(v)));
    assert!(!problem.is_convex());
}

#[test]
fn mlp_training_loss_decreases_under_benchmark_lineup() {
    let mut spec = figure_spec("3a").unwrap();
    spec.iters = 300;
    spec.out_dir = Some(temp_root("fig3a").display().to_string());
    let result = run_experiment(&spec).unwrap();
    for run in &result.runs {
        assert!(run.failure.is_none(), "{} diverged", run.label);
        let first = run.trace.records.first().unwrap().f_x;
        let last = run.trace.records.last().unwrap().f_x;
        assert!(last < first, "{}: {first} -> {last}", run.label);
    }
    std::fs::remove_dir_all(temp_root("fig3a")).ok();
}
