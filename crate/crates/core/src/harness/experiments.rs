//! Seeded multi-trial experiments: `run`, `fig1`, `fig2` and `theory`.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::agd::{run, AgdConfig, Monitor, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::harness::config::{EtaMode, ExperimentConfig};
use crate::harness::output::{
    summary_csv, to_csv_bytes, trajectory_csv, violations_csv, write_atomic, SummaryRow, TaggedViolation,
};
use crate::init::{initialize, InitConfig, InitScheme};
use crate::linalg::Rng;
use crate::objective::Problem;
use crate::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};
use crate::theory::{stage_schedule, theory_report, F0Source, TheoryReport};

/// One target matrix of an experiment together with its derived constants.
#[derive(Debug, Clone)]
pub struct Instance {
    pub index: usize,
    pub sigma_r: f64,
    pub problem: Problem,
    /// Constants at the resolved step size, with `f₀` from the a-priori bound.
    pub report: TheoryReport,
    pub eta: f64,
}

/// Stream id of the `k`-th matrix. Each matrix consumes two streams (U and V).
pub fn matrix_stream(k: usize) -> u64 {
    MATRIX_STREAM + 2 * k as u64
}

pub(crate) fn init_config(cfg: &ExperimentConfig, eta: f64, scheme: InitScheme) -> Result<InitConfig> {
    let base = InitConfig::new(cfg.c, cfg.nu, eta, cfg.d, scheme)?;
    match cfg.d_scale {
        Some(ds) => base.with_d_scale(ds),
        None => Ok(base),
    }
}

/// Build the `k`-th target matrix and resolve its step size.
pub fn build_instance(cfg: &ExperimentConfig, k: usize) -> Result<Instance> {
    let sigma_r = cfg.sigmar[k];
    let spec = SpectrumSpec::linspace(cfg.m, cfg.n, cfg.sigma1, sigma_r, cfg.r)?;
    let a = make_matrix(&Rng::new(cfg.matrix_seed, matrix_stream(k)), &spec)?;
    let problem = Problem::new(a)?;
    let probe = init_config(cfg, 1.0, InitScheme::Unbalanced)?;
    let cap = theory_report(&problem, &probe, cfg.epsilon, cfg.s, F0Source::Bound)?.eta_max;
    let eta = match cfg.eta {
        EtaMode::Absolute(e) => e,
        EtaMode::Multiplier(mult) => mult * cap,
    };
    let report = theory_report(&problem, &probe.with_eta(eta)?, cfg.epsilon, cfg.s, F0Source::Bound)?;
    Ok(Instance {
        index: k,
        sigma_r,
        problem,
        report,
        eta,
    })
}

pub fn build_instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    (0..cfg.sigmar.len()).map(|k| build_instance(cfg, k)).collect()
}

/// Identifies one trial within an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialKey {
    pub matrix: usize,
    pub sigma_r: f64,
    pub scheme: InitScheme,
    /// RNG stream of the trial on the base seed.
    pub stream: u64,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub key: TrialKey,
    pub eta: f64,
    pub beta: f64,
    pub record: TrajectoryRecord,
    pub path: PathBuf,
}

impl TrialOutcome {
    pub fn summary(&self, experiment: &str, target: f64) -> SummaryRow {
        let hit = if target > 0.0 { self.record.iters_to(target) } else { None };
        SummaryRow {
            experiment: experiment.to_string(),
            scheme: self.key.scheme.name().to_string(),
            sigma_r: self.key.sigma_r,
            seed: self.key.stream,
            eta: self.eta,
            beta: Some(self.beta),
            iters_to_target: hit,
            final_rel_loss: self.record.last().rel_loss,
            monitor_violations: self.record.violations.len(),
        }
    }
}

/// Everything an experiment produced, in deterministic order.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub instances: Vec<Instance>,
    pub trials: Vec<TrialOutcome>,
    pub summary: Vec<SummaryRow>,
    pub summary_path: PathBuf,
    pub violations_path: PathBuf,
}

impl ExperimentOutput {
    pub fn files(&self) -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = self.trials.iter().map(|t| t.path.clone()).collect();
        v.push(self.summary_path.clone());
        v.push(self.violations_path.clone());
        v
    }

    pub fn trials_for(&self, scheme: InitScheme, matrix: usize) -> impl Iterator<Item = &TrialOutcome> {
        self.trials
            .iter()
            .filter(move |t| t.key.scheme == scheme && t.key.matrix == matrix)
    }
}

pub fn trajectory_file_name(experiment: &str, key: &TrialKey) -> String {
    format!(
        "{experiment}_{}_sigmar{}_trial{}.csv",
        key.scheme.name(),
        key.sigma_r,
        key.stream
    )
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))
}

/// Monitors whose hypotheses hold for `scheme`: the column-span and PL
/// checks presuppose `X₀ ∈ ColSpan(A)`.
pub fn applicable_monitors(scheme: InitScheme) -> Vec<Monitor> {
    Monitor::ALL
        .into_iter()
        .filter(|m| scheme.in_colspan() || !matches!(m, Monitor::ColSpan | Monitor::Pl))
        .collect()
}

fn agd_config(cfg: &ExperimentConfig, inst: &Instance, scheme: InitScheme) -> AgdConfig {
    AgdConfig::new(inst.eta, cfg.max_iters)
        .target(cfg.target)
        .record_every(cfg.record_every)
        .monitors(applicable_monitors(scheme), cfg.monitors)
        .beta(inst.report.beta)
}

fn run_trial(cfg: &ExperimentConfig, inst: &Instance, key: TrialKey) -> Result<TrajectoryRecord> {
    let init = init_config(cfg, inst.eta, key.scheme)?;
    let mut rng = Rng::new(cfg.seed, key.stream);
    let (x0, y0) = initialize(&mut rng, &inst.problem, &init)?;
    match run(&inst.problem, x0, y0, &agd_config(cfg, inst, key.scheme)) {
        Ok(r) => Ok(r.label(key.scheme, cfg.seed, key.stream)),
        Err(Error::MonitorViolation(r)) => Err(Error::MonitorViolation(Box::new(
            r.label(key.scheme, cfg.seed, key.stream),
        ))),
        Err(e) => Err(e),
    }
}

/// Run every (matrix, scheme, trial) combination and write the CSVs.
///
/// Trials run on a pool of `cfg.jobs` threads; results are collected in a
/// fixed order so the files do not depend on scheduling. When a trial fails,
/// the other trials' files (and the partial trajectory of a fatal monitor
/// stop) are still written before the first error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let experiment = cfg.kind.name();
    let instances = build_instances(cfg)?;
    let mut keys = Vec::new();
    for inst in &instances {
        for &scheme in &cfg.schemes {
            for stream in 0..cfg.trials as u64 {
                keys.push(TrialKey {
                    matrix: inst.index,
                    sigma_r: inst.sigma_r,
                    scheme,
                    stream,
                });
            }
        }
    }

    let pool = thread_pool(cfg.jobs)?;
    let results: Vec<Result<TrajectoryRecord>> =
        pool.install(|| keys.par_iter().map(|k| run_trial(cfg, &instances[k.matrix], *k)).collect());

    let mut trials = Vec::new();
    let mut first_error = None;
    for (key, res) in keys.iter().zip(results) {
        let record = match res {
            Ok(r) => r,
            Err(Error::MonitorViolation(r)) => {
                let path = cfg.out.join(trajectory_file_name(experiment, key));
                write_atomic(&path, &trajectory_csv(&r)?)?;
                first_error.get_or_insert(Error::MonitorViolation(r));
                continue;
            }
            Err(e) => {
                log::error!("{experiment} trial {} ({}) failed: {e}", key.stream, key.scheme);
                first_error.get_or_insert(e);
                continue;
            }
        };
        let inst = &instances[key.matrix];
        let path = cfg.out.join(trajectory_file_name(experiment, key));
        write_atomic(&path, &trajectory_csv(&record)?)?;
        trials.push(TrialOutcome {
            key: *key,
            eta: inst.eta,
            beta: inst.report.beta,
            record,
            path,
        });
    }

    let summary: Vec<SummaryRow> = trials.iter().map(|t| t.summary(experiment, cfg.target)).collect();
    let summary_path = cfg.out.join(format!("{experiment}_summary.csv"));
    write_atomic(&summary_path, &summary_csv(&summary)?)?;

    let tagged: Vec<TaggedViolation> = trials
        .iter()
        .flat_map(|t| {
            t.record.violations.iter().map(move |v| TaggedViolation {
                experiment: experiment.to_string(),
                scheme: t.key.scheme.name().to_string(),
                sigma_r: t.key.sigma_r,
                seed: t.key.stream,
                violation: v.clone(),
            })
        })
        .collect();
    let violations_path = cfg.out.join(format!("{experiment}_violations.csv"));
    write_atomic(&violations_path, &violations_csv(&tagged)?)?;

    if let Some(e) = first_error {
        return Err(e);
    }
    for t in &trials {
        for v in &t.record.violations {
            log::warn!("{} trial {}: {v}", t.key.scheme, t.key.stream);
        }
    }
    Ok(ExperimentOutput {
        instances,
        trials,
        summary,
        summary_path,
        violations_path,
    })
}

/// Text report and `theory.csv` (one row per target matrix).
pub fn theory(cfg: &ExperimentConfig) -> Result<(String, Vec<TheoryReport>)> {
    cfg.validate()?;
    let instances = build_instances(cfg)?;
    let mut text = String::new();
    let mut reports = Vec::new();
    for inst in instances {
        let rep = inst.report;
        text.push_str(&format!("# sigma_r = {}\n", inst.sigma_r));
        for (name, value) in rep.fields() {
            text.push_str(&format!("{name:>16}  {value}\n"));
        }
        match stage_schedule(rep.beta, rep.eta, rep.f0, cfg.epsilon, 3) {
            Ok(s) => text.push_str(&format!("{:>16}  {s:?}\n", "stage_schedule")),
            Err(e) => text.push_str(&format!("{:>16}  n/a ({e})\n", "stage_schedule")),
        }
        reports.push(rep);
    }

    let header: Vec<&str> = reports
        .first()
        .map(|r| r.fields().into_iter().map(|(k, _)| k).collect())
        .unwrap_or_default();
    let rows = reports.iter().map(|r| r.fields().into_iter().map(|(_, v)| v));
    let path = cfg.out.join("theory.csv");
    let bytes = to_csv_bytes(&header, rows)?;
    write_atomic(&path, &bytes)?;
    Ok((text, reports))
}

/// Median of iteration counts, with "never reached" ranked last.
pub fn median_iters(values: &[Option<usize>]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<usize> = values.iter().map(|x| x.unwrap_or(usize::MAX)).collect();
    v.sort_unstable();
    let m = v[(v.len() - 1) / 2];
    (m != usize::MAX).then_some(m)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Iterations recorded by every one of `records`.
pub fn common_recorded_iters<'a>(records: impl IntoIterator<Item = &'a TrajectoryRecord>) -> Vec<usize> {
    let mut common: Option<Vec<usize>> = None;
    for rec in records {
        let ts: Vec<usize> = rec.stats.iter().map(|s| s.t).collect();
        common = Some(match common {
            None => ts,
            Some(c) => c.into_iter().filter(|t| ts.binary_search(t).is_ok()).collect(),
        });
    }
    common.unwrap_or_default()
}

/// Median `rel_loss` at iteration `t` across `records` (all must record `t`).
pub fn median_rel_loss_at<'a>(records: impl IntoIterator<Item = &'a TrajectoryRecord>, t: usize) -> Option<f64> {
    let vals: Option<Vec<f64>> = records
        .into_iter()
        .map(|r| r.stats.iter().find(|s| s.t == t).map(|s| s.rel_loss))
        .collect();
    vals.filter(|v| !v.is_empty()).map(|v| median(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median_iters(&[Some(3), None, Some(1)]), Some(3));
        assert_eq!(median_iters(&[None, None, Some(1)]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }
}
