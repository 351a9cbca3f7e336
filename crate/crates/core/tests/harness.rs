//! Experiment harness: configuration, CSV schemas, determinism and the
//! command-line binary.

use std::path::Path;
use std::process::Command;

use lowrank_agd::harness::config::{ConfigOverrides, ExperimentConfig, ExperimentKind};
use lowrank_agd::harness::output::{read_summary, read_trajectory, summarize_trajectory, SUMMARY_HEADER, TRAJECTORY_HEADER};
use lowrank_agd::harness::run_experiment;
use lowrank_agd::{Error, InitScheme};

fn small(kind: ExperimentKind, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.m = 30;
    cfg.n = 25;
    cfg.r = 3;
    cfg.d = 4;
    cfg.trials = 3;
    cfg.max_iters = 400;
    cfg.out = out.to_path_buf();
    cfg
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn orange_run_writes_schema_and_reaches_target() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Run);
    cfg.out = dir.path().to_path_buf();
    cfg.record_every = 50;
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.trials.len(), 1);
    let path = &out.trials[0].path;
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRAJECTORY_HEADER.join(","));
    let rows = read_trajectory(path).unwrap();
    assert!(rows.iter().all(|r| r.iter % 50 == 0 || r.iter == rows.last().unwrap().iter));
    assert!(rows.last().unwrap().rel_loss <= 1e-6);
    let first = &rows[0];
    assert_eq!(first.iter, 0);
    assert_eq!(first.envelope, Some(2.0 * first.f));
}

#[test]
fn reruns_are_byte_identical_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Fig1, a.path());
    cfg.jobs = 1;
    let first = run_experiment(&cfg).unwrap();
    cfg.out = b.path().to_path_buf();
    cfg.jobs = 3;
    let second = run_experiment(&cfg).unwrap();
    assert_eq!(first.files().len(), second.files().len());
    for (x, y) in first.files().iter().zip(second.files()) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(read(x), read(&y), "{}", x.display());
    }
}

#[test]
fn summary_is_recomputable_from_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::Fig1, dir.path());
    let out = run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(&out.summary_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER.join(","));
    let summary = read_summary(&out.summary_path).unwrap();
    assert_eq!(summary, out.summary);
    for (row, trial) in summary.iter().zip(&out.trials) {
        let rows = read_trajectory(&trial.path).unwrap();
        let (hit, last) = summarize_trajectory(&rows, cfg.target).unwrap();
        assert_eq!(row.iters_to_target, hit);
        assert_eq!(row.final_rel_loss, last);
        assert_eq!(row.seed, trial.key.stream);
    }
}

#[test]
fn trials_share_the_matrix_but_not_the_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::Fig1, dir.path());
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.instances.len(), 1);
    let runs: Vec<_> = out.trials_for(InitScheme::Unbalanced, 0).collect();
    assert_eq!(runs.len(), 3);
    assert_ne!(runs[0].record.stats[1].f, runs[1].record.stats[1].f);
    // rebalancing keeps the product, so both column-span schemes start from the same loss
    let f0 = |scheme| out.trials_for(scheme, 0).next().unwrap().record.f0;
    let (u, b) = (f0(InitScheme::Unbalanced), f0(InitScheme::BalancedColspan));
    assert!((u - b).abs() <= 1e-12 * u);
}

#[test]
fn fig2_reports_beta_per_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Fig2, dir.path());
    cfg.trials = 1;
    cfg.max_iters = 50;
    let out = run_experiment(&cfg).unwrap();
    let betas: Vec<f64> = out.instances.iter().map(|i| i.report.beta).collect();
    assert!((betas[2] / betas[0] - 81.0).abs() <= 1e-6);
    assert!(out.instances[0].eta < out.instances[2].eta);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::Run, dir.path());
    cfg.max_iters = 0;
    match run_experiment(&cfg) {
        Err(Error::Config { field, .. }) => assert_eq!(field, "max_iters"),
        other => panic!("{other:?}"),
    }
    let file = ConfigOverrides::from_toml_str("trials = 0").unwrap();
    let err = ExperimentConfig::resolve(ExperimentKind::Fig1, Some(&file), &ConfigOverrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowrank-agd"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "m = 30\nn = 25\nr = 3\nd = 4\nmax_iters = 200\nscheme = \"balanced-colspan\"\n").unwrap();
    let out = dir.path().join("out");
    let ok = bin()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--max-iters", "100", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));
    let rows = read_trajectory(&out.join("run_balanced-colspan_sigmar0.5_trial0.csv")).unwrap();
    assert_eq!(rows.last().unwrap().iter, 100);

    let bad = bin().args(["run", "--max-iters", "0"]).status().unwrap();
    assert_eq!(bad.code(), Some(2));

    let diverge = bin()
        .args(["run", "--m", "30", "--n", "25", "--r", "3", "--d", "4", "--eta", "50", "--max-iters", "200", "--out"])
        .arg(dir.path().join("div"))
        .status()
        .unwrap();
    assert_eq!(diverge.code(), Some(3));

    let fatal = bin()
        .args(["run", "--m", "30", "--n", "25", "--r", "3", "--d", "4", "--max-iters", "50"])
        .args(["--scheme", "plain-gaussian", "--monitors", "fatal", "--eta", "1e-3", "--out"])
        .arg(dir.path().join("fatal"))
        .status()
        .unwrap();
    assert_eq!(fatal.code(), Some(0), "column-span checks do not apply to plain Gaussian starts");

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let io = bin()
        .args(["run", "--m", "30", "--n", "25", "--r", "3", "--d", "4", "--max-iters", "10", "--out"])
        .arg(blocker.join("sub"))
        .status()
        .unwrap();
    assert_eq!(io.code(), Some(5));
}

#[test]
fn cli_theory_and_montecarlo() {
    let dir = tempfile::tempdir().unwrap();
    let theory = bin().args(["theory", "--out"]).arg(dir.path()).output().unwrap();
    assert!(theory.status.success());
    let text = String::from_utf8(theory.stdout).unwrap();
    assert!(text.contains("rho") && text.contains("eta_max"));
    assert!(dir.path().join("theory.csv").exists());

    let mc = bin()
        .args(["montecarlo", "--trials", "200", "--t", "0", "--t", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(mc.status.success());
    let csv = std::fs::read_to_string(dir.path().join("montecarlo.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
