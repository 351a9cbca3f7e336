//! The `verify` subcommand: every invariant suite, one pass/fail line each.

use std::fmt;

use crate::agd::{Monitor, MonitorMode, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::harness::checks::{
    count_violations, envelope_violations, f0_step_size_spread, failed_runs, gradient_fd_check, monitor_config,
    monitored_runs,
};
use crate::harness::config::{EtaMode, ExperimentConfig};
use crate::harness::experiments::{build_instance, init_config, Instance};
use crate::init::{initialize, InitScheme};
use crate::linalg::Rng;

/// Leak below which a plain Gaussian start would count as "in the column span".
pub const CONTROL_LEAK: f64 = 1e-2;

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Negate the X-gradient in the finite-difference suite (negative control).
    pub flip_gradient_sign: bool,
    /// Number of random finite-difference instances.
    pub fd_instances: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    /// A control that is supposed to exhibit the violation.
    pub expected_fail: bool,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        let kind = if self.expected_fail { " (expected-fail control)" } else { "" };
        write!(f, "{tag}  {}{kind}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

fn suite(name: &'static str, passed: bool, detail: String) -> SuiteResult {
    SuiteResult {
        name,
        expected_fail: false,
        passed,
        detail,
    }
}

fn records(runs: &[Result<TrajectoryRecord>]) -> impl Iterator<Item = &TrajectoryRecord> {
    runs.iter().filter_map(|r| match r {
        Ok(rec) => Some(rec),
        Err(Error::MonitorViolation(rec)) => Some(rec.as_ref()),
        Err(_) => None,
    })
}

/// Runs at the experiment step size: column-span and PL monitors, logged.
fn fixed_step_suites(cfg: &ExperimentConfig, inst: &Instance, out: &mut Vec<SuiteResult>) -> Result<()> {
    let init = init_config(cfg, inst.eta, InitScheme::Unbalanced)?;
    let agd = monitor_config(
        inst.eta,
        cfg.max_iters,
        cfg.record_every,
        inst.report.beta,
        &[Monitor::ColSpan, Monitor::Pl],
        MonitorMode::Log,
    );
    let runs = monitored_runs(&inst.problem, &init, &agd, cfg.seed, cfg.trials, cfg.jobs)?;
    let failed = failed_runs(&runs);
    let worst_leak = records(&runs)
        .flat_map(|r| r.stats.iter().map(|s| s.colspan_leak))
        .fold(0.0f64, f64::max);
    for (name, monitor) in [("colspan", Monitor::ColSpan), ("pl", Monitor::Pl)] {
        let n = count_violations(&runs, monitor);
        let mut detail = format!(
            "{} seeds x {} iters at eta={:e}: {n} violations",
            cfg.trials, cfg.max_iters, inst.eta
        );
        if monitor == Monitor::ColSpan {
            detail.push_str(&format!(", max leak {worst_leak:e}"));
        }
        if !failed.is_empty() {
            detail.push_str(&format!(", {} runs failed: {}", failed.len(), failed[0]));
        }
        out.push(suite(name, n == 0 && failed.is_empty(), detail));
    }

    let control = init.with_scheme(InitScheme::PlainGaussian);
    let mut min_leak = f64::INFINITY;
    for i in 0..cfg.trials as u64 {
        let (x0, _) = initialize(&mut Rng::new(cfg.seed, i), &inst.problem, &control)?;
        min_leak = min_leak.min(inst.problem.colspan_leak(&x0)?);
    }
    out.push(SuiteResult {
        name: "colspan-control",
        expected_fail: true,
        passed: min_leak > CONTROL_LEAK,
        detail: format!("plain-gaussian leak at t=0 is at least {min_leak:e} (must exceed {CONTROL_LEAK:e})"),
    });
    Ok(())
}

/// Runs at the theoretical step size over a truncated horizon with every
/// monitor fatal, plus the decay envelope.
fn theoretical_step_suites(cfg: &ExperimentConfig, out: &mut Vec<SuiteResult>) -> Result<()> {
    let mut tcfg = cfg.clone();
    tcfg.eta = EtaMode::Multiplier(1.0);
    let inst = build_instance(&tcfg, 0)?;
    let init = init_config(cfg, inst.eta, InitScheme::Unbalanced)?;
    let agd = monitor_config(
        inst.eta,
        cfg.horizon,
        cfg.record_every,
        inst.report.beta,
        &Monitor::ALL,
        MonitorMode::Fatal,
    );
    let runs = monitored_runs(&inst.problem, &init, &agd, cfg.seed, cfg.trials, cfg.jobs)?;
    let failed = failed_runs(&runs);
    let stopped = runs.iter().filter(|r| matches!(r, Err(Error::MonitorViolation(_)))).count();
    let prefix = format!("{} seeds x {} iters at eta_max={:e}", cfg.trials, cfg.horizon, inst.eta);
    out.push(suite(
        "fatal-monitors",
        stopped == 0 && failed.is_empty(),
        format!("{prefix}: {stopped} runs stopped by a monitor, {} failed", failed.len()),
    ));
    for (name, monitors) in [
        ("descent", &[Monitor::Descent][..]),
        ("grad-budget", &[Monitor::GradBudget][..]),
        ("sv-drift", &[Monitor::SvDrift][..]),
    ] {
        let n: usize = monitors.iter().map(|m| count_violations(&runs, *m)).sum();
        out.push(suite(name, n == 0 && failed.is_empty(), format!("{prefix}: {n} violations")));
    }

    let mut env_viol = 0;
    let mut checked = 0;
    for rec in records(&runs) {
        env_viol += envelope_violations(rec, inst.report.beta, inst.eta, cfg.horizon)?.len();
        checked += rec.stats.len();
    }
    out.push(suite(
        "envelope",
        env_viol == 0 && failed.is_empty(),
        format!("{prefix}: {env_viol} of {checked} recorded points above 2 f0 exp(-beta t/4)"),
    ));
    Ok(())
}

/// Run every suite on the first configured target matrix.
pub fn run_verify(cfg: &ExperimentConfig, opts: &VerifyOptions) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut suites = Vec::new();

    let instances = opts.fd_instances.unwrap_or(100);
    let fd = gradient_fd_check(instances, cfg.seed, opts.flip_gradient_sign)?;
    suites.push(suite(
        "gradient-fd",
        fd.max_rel_err <= 1e-6,
        format!("{instances} instances, max relative error {:e}", fd.max_rel_err),
    ));

    let inst = build_instance(cfg, 0)?;
    fixed_step_suites(cfg, &inst, &mut suites)?;
    theoretical_step_suites(cfg, &mut suites)?;

    let init = init_config(cfg, 1.0, InitScheme::Unbalanced)?;
    let etas = [1e-4, 1e-2, 1.0];
    let seeds = cfg.trials.min(10);
    let spread = f0_step_size_spread(&inst.problem, &init, &etas, cfg.seed, seeds)?;
    suites.push(suite(
        "f0-step-size",
        spread <= 1e-12,
        format!("{seeds} seeds, eta in {etas:?}: max relative spread of f0 {spread:e}"),
    ));

    Ok(VerifyReport { suites })
}
