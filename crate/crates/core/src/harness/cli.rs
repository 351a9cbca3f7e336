//! Command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::harness::config::{ConfigOverrides, ExperimentConfig, ExperimentKind, OneOrMany};
use crate::harness::experiments::{median_iters, run_experiment, theory};
use crate::harness::montecarlo::run_montecarlo;
use crate::harness::verify::{run_verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "lowrank-agd", version, about = "Alternating gradient descent for low-rank factorization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorize one synthetic matrix, one CSV per trial.
    Run(CommonArgs),
    /// Compare the three initializations on one shared matrix.
    Fig1(CommonArgs),
    /// Sweep the smallest singular value at a multiple of the theoretical step size.
    Fig2(CommonArgs),
    /// Print the derived constants and step-size caps.
    Theory(CommonArgs),
    /// Empirical tail rates of Gaussian extreme singular values.
    Montecarlo(CommonArgs),
    /// Run every invariant suite and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat TOML file with the same keys as the flags (underscored).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base seed for trials (and for the matrix unless --matrix-seed is given).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub matrix_seed: Option<u64>,
    /// Trials per scheme and matrix (samples for montecarlo).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Absolute step size.
    #[arg(long, conflicts_with = "eta_mult")]
    pub eta: Option<f64>,
    /// Step size as a multiple of the theoretical cap.
    #[arg(long)]
    pub eta_mult: Option<f64>,
    /// Target accuracy used by the theoretical step-size cap.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub sigma1: Option<f64>,
    /// Smallest nonzero singular value; repeat for a sweep.
    #[arg(long)]
    pub sigmar: Vec<f64>,
    /// unbalanced, balanced-colspan or plain-gaussian; repeatable.
    #[arg(long)]
    pub scheme: Vec<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub d_scale: Option<f64>,
    /// Over-parameterization slack in rho.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop at this relative loss; 0 disables.
    #[arg(long)]
    pub target: Option<f64>,
    /// off, log or fatal.
    #[arg(long)]
    pub monitors: Option<String>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Monte-Carlo deviation levels; repeatable.
    #[arg(long = "t")]
    pub t_values: Vec<f64>,
    /// Monte-Carlo entry variance.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Iterations for runs at the theoretical step size (verify).
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Negate the analytic X-gradient; the finite-difference suite must fail.
    #[arg(long, hide = true)]
    pub flip_gradient_sign: bool,
}

fn many<T>(v: &[T]) -> Option<OneOrMany<T>>
where
    T: Clone,
{
    (!v.is_empty()).then(|| OneOrMany::Many(v.to_vec()))
}

impl CommonArgs {
    pub fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            m: self.m,
            n: self.n,
            r: self.r,
            d: self.d,
            sigma1: self.sigma1,
            sigmar: many(&self.sigmar),
            seed: self.seed,
            matrix_seed: self.matrix_seed,
            trials: self.trials,
            scheme: many(&self.scheme),
            c: self.c,
            nu: self.nu,
            d_scale: self.d_scale,
            eta: self.eta,
            eta_mult: self.eta_mult,
            epsilon: self.epsilon,
            s: self.s,
            record_every: self.record_every,
            max_iters: self.max_iters,
            target: self.target,
            monitors: self.monitors.clone(),
            jobs: self.jobs,
            out: self.out.clone(),
            t_values: many(&self.t_values),
            variance: self.variance,
            horizon: self.horizon,
        }
    }

    pub fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let file = self.config.as_deref().map(ConfigOverrides::from_file).transpose()?;
        ExperimentConfig::resolve(kind, file.as_ref(), &self.overrides())
    }
}

/// Execute a parsed command. Returns the process exit code on success;
/// `Err` carries its own code via [`crate::Error::exit_code`].
pub fn execute(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run(a) => experiment(a.resolve(ExperimentKind::Run)?),
        Command::Fig1(a) => experiment(a.resolve(ExperimentKind::Fig1)?),
        Command::Fig2(a) => experiment(a.resolve(ExperimentKind::Fig2)?),
        Command::Theory(a) => {
            let cfg = a.resolve(ExperimentKind::Theory)?;
            let (text, _) = theory(&cfg)?;
            print!("{text}");
            println!("wrote {}", cfg.out.join("theory.csv").display());
            Ok(0)
        }
        Command::Montecarlo(a) => {
            let cfg = a.resolve(ExperimentKind::MonteCarlo)?;
            let rows = run_montecarlo(&cfg)?;
            println!("d={} r={} samples={} variance={}", cfg.d, cfg.r, cfg.trials, cfg.variance);
            for r in &rows {
                println!(
                    "t={:<4} bound={:.4}  sigma_r<{:.4}: {:.4}  sigma_1>{:.4}: {:.4}",
                    r.t, r.tail_bound, r.lower_bound, r.viol_lower, r.upper_bound, r.viol_upper
                );
            }
            println!("wrote {}", cfg.out.join("montecarlo.csv").display());
            Ok(0)
        }
        Command::Verify(a) => {
            let cfg = a.common.resolve(ExperimentKind::Verify)?;
            let opts = VerifyOptions {
                flip_gradient_sign: a.flip_gradient_sign,
                fd_instances: None,
            };
            let report = run_verify(&cfg, &opts)?;
            print!("{report}");
            Ok(if report.all_passed() { 0 } else { 1 })
        }
    }
}

fn experiment(cfg: ExperimentConfig) -> Result<u8> {
    let out = run_experiment(&cfg)?;
    for inst in &out.instances {
        for &scheme in &cfg.schemes {
            let iters: Vec<Option<usize>> = out
                .trials_for(scheme, inst.index)
                .map(|t| t.summary(cfg.kind.name(), cfg.target).iters_to_target)
                .collect();
            let med = median_iters(&iters).map_or("not reached".to_string(), |m| m.to_string());
            println!(
                "sigma_r={} eta={:e} beta={:e} {scheme}: median iterations to {:e} = {med}",
                inst.sigma_r, inst.eta, inst.report.beta, cfg.target
            );
        }
    }
    println!("wrote {} files under {}", out.files().len(), cfg.out.display());
    Ok(0)
}

/// Entry point shared by the binary: parse, run, map errors to exit codes.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "lowrank-agd", "fig2", "--sigmar", "0.2", "--sigmar", "0.4", "--eta-mult", "100", "--jobs", "2",
        ])
        .unwrap();
        let Command::Fig2(a) = &cli.command else { panic!() };
        let cfg = a.resolve(ExperimentKind::Fig2).unwrap();
        assert_eq!(cfg.sigmar, vec![0.2, 0.4]);
        assert_eq!(cfg.jobs, 2);
    }

    #[test]
    fn eta_flags_conflict() {
        assert!(Cli::try_parse_from(["lowrank-agd", "run", "--eta", "0.1", "--eta-mult", "10"]).is_err());
    }
}
