//! End-to-end tests of the `cnp-gapmeter` binary: JSON/CSV outputs, exit
//! codes, determinism across runs, worker counts, and manifests.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cnp-gapmeter"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn gap_reports_the_near_tight_instance_at_n_100() {
    let out = run(&[
        "gap",
        "--context",
        "-1*100",
        "--new-x",
        "0.5",
        "--new-y",
        "1.0",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let delta = v["delta"].as_f64().unwrap();
    assert!(
        (delta / (2.0 / 10201.0) - 1.0).abs() < 1e-12,
        "delta = {delta}"
    );
    assert_eq!(v["n"].as_u64(), Some(100));
    assert_eq!(v["sigma_c"].as_f64(), Some(1.0));
}

#[test]
fn gap_is_zero_when_new_point_repeats_an_identical_context() {
    let out = run(&["gap", "--context", "-1*6", "--new-y", "-1.0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["delta"].as_f64(), Some(0.0));
}

#[test]
fn gap_empty_context_file_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, r#"{"points":[]}"#).unwrap();
    let out = run(&[
        "gap",
        "--context-file",
        path.to_str().unwrap(),
        "--new-y",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("empty"), "stderr: {}", stderr(&out));
}

#[test]
fn gap_usage_errors_exit_2() {
    let bad_inline = run(&["gap", "--context", "abc", "--new-y", "1.0"]);
    assert_eq!(bad_inline.status.code(), Some(2));
    assert!(stderr(&bad_inline).contains("context"));

    let bad_decoder = run(&[
        "gap",
        "--context",
        "-1*3",
        "--new-y",
        "1.0",
        "--decoder",
        "nope",
    ]);
    assert_eq!(bad_decoder.status.code(), Some(2));
    assert!(stderr(&bad_decoder).contains("decoder"));

    let missing_context = run(&["gap", "--new-y", "1.0"]);
    assert_eq!(missing_context.status.code(), Some(2));
}

#[test]
fn sweep_worstcase_linear_ratio_is_identically_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--mode",
        "worstcase",
        "--n",
        "2:80",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let csv = read(&dir.path().join("trials.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n,trial_index,delta_nats,bound_nats,seed_used")
    );
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let delta: f64 = f[2].parse().unwrap();
        let bound: f64 = f[3].parse().unwrap();
        assert!((delta / bound - 1.0).abs() <= 1e-12, "line: {line}");
    }

    let fit: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("fit_summary.json"))).unwrap();
    let beta = fit["beta"].as_f64().unwrap();
    assert!((1.9..=2.1).contains(&beta), "beta = {beta}");
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn sweep_is_byte_deterministic_across_runs_and_thread_env() {
    let args = |out_dir: &str| {
        vec![
            "sweep".to_string(),
            "--mode".into(),
            "random".into(),
            "--n".into(),
            "2:60".into(),
            "--trials".into(),
            "40".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            out_dir.to_string(),
        ]
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();

    assert!(bin()
        .args(args(d1.path().to_str().unwrap()))
        .output()
        .unwrap()
        .status
        .success());
    assert!(bin()
        .args(args(d2.path().to_str().unwrap()))
        .output()
        .unwrap()
        .status
        .success());
    let with_env = bin()
        .args(args(d3.path().to_str().unwrap()))
        .env("CNP_GAPMETER_THREADS", "2")
        .output()
        .unwrap();
    assert!(with_env.status.success());

    let c1 = read(&d1.path().join("trials.csv"));
    let c2 = read(&d2.path().join("trials.csv"));
    let c3 = read(&d3.path().join("trials.csv"));
    assert_eq!(c1, c2, "same config must give identical bytes");
    assert_eq!(c1, c3, "thread override must not change results");
}

#[test]
fn sweep_from_manifest_reproduces_the_csv() {
    let d1 = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--mode",
        "random",
        "--n",
        "2:40",
        "--trials",
        "10",
        "--seed",
        "99",
        "--out",
        d1.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let d2 = tempfile::tempdir().unwrap();
    let manifest = d1.path().join("manifest.json");
    let out = run(&[
        "sweep",
        "--from-manifest",
        manifest.to_str().unwrap(),
        "--out",
        d2.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(
        read(&d1.path().join("trials.csv")),
        read(&d2.path().join("trials.csv"))
    );
}

#[test]
fn sweep_singularity_sqrt_fits_rate_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--mode",
        "singularity",
        "--decoder",
        "sqrt",
        "--n",
        "10:300",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let fit: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("fit_summary.json"))).unwrap();
    let beta = fit["beta"].as_f64().unwrap();
    assert!((0.85..=1.15).contains(&beta), "beta = {beta}");
}

#[test]
fn sweep_singularity_rejects_odd_only_range() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--mode",
        "singularity",
        "--n",
        "7:7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        !dir.path().join("trials.csv").exists(),
        "no partial outputs"
    );
}

#[test]
fn sweep_removes_outputs_when_a_later_step_fails() {
    // three context sizes produce a valid CSV but too few points for the
    // rate fit; the already-written CSV must not survive the failure
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--mode",
        "worstcase",
        "--n",
        "2:4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("insufficient data"), "{}", stderr(&out));
    assert!(
        !dir.path().join("trials.csv").exists(),
        "partial trials.csv left behind"
    );
    assert!(!dir.path().join("fit_summary.json").exists());
}

#[test]
fn sweep_figures_are_emitted_without_touching_numbers() {
    let base = tempfile::tempdir().unwrap();
    let with_figs = tempfile::tempdir().unwrap();
    let shared = [
        "--mode",
        "worstcase",
        "--decoder",
        "linear_abs_variance",
        "--l-mu",
        "1.0",
        "--l-sigma",
        "1.0",
        "--sigma-min",
        "0.5",
        "--n",
        "2:120",
        "--fit-range",
        "10:120",
    ];

    let mut a = vec!["sweep"];
    a.extend_from_slice(&shared);
    a.extend_from_slice(&["--out", base.path().to_str().unwrap()]);
    assert!(run(&a).status.success());

    let mut b = vec!["sweep"];
    b.extend_from_slice(&shared);
    b.extend_from_slice(&[
        "--figures",
        "gap,ratio",
        "--out",
        with_figs.path().to_str().unwrap(),
    ]);
    let out = run(&b);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    for name in ["fig_gap.svg", "fig_ratio.svg"] {
        let svg = read(&with_figs.path().join(name));
        assert!(svg.starts_with("<svg"), "{name} is not an SVG");
        assert!(svg.contains("</svg>"));
    }
    assert_eq!(
        read(&base.path().join("trials.csv")),
        read(&with_figs.path().join("trials.csv")),
        "figure emission must not alter numeric outputs"
    );
}

#[test]
fn sweep_config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"n_min":2,"n_max":30,"trials_per_n":5,"master_seed":1,"mode":"random"}"#,
    )
    .unwrap();
    let out = run(&[
        "sweep",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["config_echo"]["master_seed"].as_u64(), Some(2));
    assert_eq!(manifest["config_echo"]["trials_per_n"].as_u64(), Some(5));

    let bad = run(&["sweep", "--config", "/nonexistent/cfg.json", "--out", "."]);
    assert_eq!(bad.status.code(), Some(2));

    let bad_agg = run(&[
        "sweep",
        "--config",
        cfg_path.to_str().unwrap(),
        "--fit-aggregate",
        "median",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(bad_agg.status.code(), Some(2));
    assert!(stderr(&bad_agg).contains("fit_aggregate"));
}

#[test]
fn sweep_scan_writes_per_k_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--scan-k",
        "4,16",
        "--n",
        "150:300",
        "--decoder",
        "steep_sigmoid",
        "--sigma-min",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let scan: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("scan_summary.json"))).unwrap();
    let entries = scan.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    let c4 = entries[0]["constant"].as_f64().unwrap();
    let c16 = entries[1]["constant"].as_f64().unwrap();
    let ratio = c16 / c4;
    assert!((8.0..=32.0).contains(&ratio), "constant ratio = {ratio}");
}

#[test]
fn bounds_tabulates_and_solves_the_threshold() {
    let out = run(&["bounds", "--eps", "0.02"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("minimal n with linear bound < 0.02: 10"),
        "{text}"
    );
    assert!(text.contains("0.00019605920988138416"), "{text}");

    // a target gap already met at n = 1
    let easy = run(&["bounds", "--eps", "10"]);
    assert!(stdout(&easy).contains("minimal n with linear bound < 10: 1"));

    let lips = run(&[
        "bounds",
        "--l-mu",
        "1.0",
        "--l-sigma",
        "1.0",
        "--sigma-min",
        "0.5",
        "--n",
        "4,20",
    ]);
    assert!(lips.status.success());
    let text = stdout(&lips);
    assert!(text.contains("small-n"), "{text}");
    assert!(text.contains("valid"), "{text}");

    assert_eq!(run(&["bounds", "--eps", "-0.5"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--b-w", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--sigma", "0"]).status.code(), Some(2));
}

#[test]
fn worstcase_prints_instances_as_json() {
    let out = run(&["worstcase", "--n", "99"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["predicted_gap"].as_f64(), Some(2e-4));
    assert_eq!(v["context"]["points"].as_array().unwrap().len(), 99);
    assert_eq!(v["decoder"]["kind"].as_str(), Some("linear"));

    let lip = run(&[
        "worstcase",
        "--family",
        "lipschitz",
        "--l-mu",
        "1.0",
        "--l-sigma",
        "1.0",
        "--sigma-min",
        "0.5",
        "--n",
        "20",
    ]);
    assert!(lip.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&lip)).unwrap();
    assert_eq!(v["decoder"]["kind"].as_str(), Some("linear_abs_variance"));
    assert_eq!(v["decoder"]["r0"].as_f64(), Some(-1.0));

    assert_eq!(
        run(&["worstcase", "--family", "x", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["notacommand"]).status.code(), Some(2));
}
