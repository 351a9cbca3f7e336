//! Experiment configuration: per-experiment defaults, a flat TOML file and
//! command-line overrides, applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::agd::MonitorMode;
use crate::error::{Error, Result};
use crate::init::InitScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Run,
    Fig1,
    Fig2,
    Theory,
    MonteCarlo,
    Verify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Run => "run",
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Theory => "theory",
            ExperimentKind::MonteCarlo => "montecarlo",
            ExperimentKind::Verify => "verify",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaMode {
    Absolute(f64),
    /// Multiple of the theoretical cap `η_max(β, f₀-bound, ε)` of each matrix.
    Multiplier(f64),
}

impl FromStr for MonitorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(MonitorMode::Off),
            "log" => Ok(MonitorMode::Log),
            "fatal" => Ok(MonitorMode::Fatal),
            other => Err(Error::config("monitors", format!("expected off|log|fatal, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Every optional setting, as read from a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub d: Option<usize>,
    pub sigma1: Option<f64>,
    pub sigmar: Option<OneOrMany<f64>>,
    pub seed: Option<u64>,
    pub matrix_seed: Option<u64>,
    pub trials: Option<usize>,
    pub scheme: Option<OneOrMany<String>>,
    pub c: Option<f64>,
    pub nu: Option<f64>,
    pub d_scale: Option<f64>,
    pub eta: Option<f64>,
    pub eta_mult: Option<f64>,
    pub epsilon: Option<f64>,
    pub s: Option<f64>,
    pub record_every: Option<usize>,
    pub max_iters: Option<usize>,
    pub target: Option<f64>,
    pub monitors: Option<String>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    /// Monte-Carlo deviation levels.
    pub t_values: Option<OneOrMany<f64>>,
    /// Monte-Carlo entry variance.
    pub variance: Option<f64>,
    /// Truncated horizon for runs at the theoretical step size (verify).
    pub horizon: Option<usize>,
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub sigma1: f64,
    /// One target matrix per entry (fig2 sweeps several).
    pub sigmar: Vec<f64>,
    pub seed: u64,
    pub matrix_seed: u64,
    pub trials: usize,
    pub schemes: Vec<InitScheme>,
    pub c: f64,
    pub nu: f64,
    pub d_scale: Option<f64>,
    pub eta: EtaMode,
    pub epsilon: f64,
    pub s: f64,
    pub record_every: usize,
    pub max_iters: usize,
    pub target: f64,
    pub monitors: MonitorMode,
    pub jobs: usize,
    pub out: PathBuf,
    pub t_values: Vec<f64>,
    pub variance: f64,
    pub horizon: usize,
}

/// Step size of the Figure-1 style experiments.
pub const FIG1_ETA: f64 = 0.0683;

impl ExperimentConfig {
    /// Built-in defaults for each experiment.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            m: 100,
            n: 100,
            r: 5,
            d: 6,
            sigma1: 1.0,
            sigmar: vec![0.5],
            seed: 0,
            matrix_seed: 0,
            trials: 1,
            schemes: vec![InitScheme::Unbalanced],
            c: 4.0,
            // Figure caption value; the running text says 1e-9.
            nu: 1e-10,
            d_scale: None,
            eta: EtaMode::Absolute(FIG1_ETA),
            epsilon: 1e-8,
            s: crate::theory::DEFAULT_S,
            record_every: 10,
            max_iters: 5000,
            target: 1e-6,
            monitors: MonitorMode::Log,
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            out: PathBuf::from("out"),
            t_values: vec![0.0, 0.5, 1.0, 2.0, 3.0],
            variance: 1.0,
            horizon: 10_000,
        };
        match kind {
            ExperimentKind::Run | ExperimentKind::Theory => {}
            ExperimentKind::Fig1 => {
                cfg.schemes = InitScheme::ALL.to_vec();
                cfg.trials = 5;
            }
            ExperimentKind::Fig2 => {
                cfg.sigmar = vec![0.1, 0.5, 0.9];
                cfg.eta = EtaMode::Multiplier(1e4);
                cfg.trials = 5;
                cfg.max_iters = 2000;
                cfg.target = 1e-10;
            }
            ExperimentKind::MonteCarlo => {
                cfg.d = 50;
                cfg.r = 10;
                cfg.trials = 2000;
            }
            ExperimentKind::Verify => {
                cfg.trials = 20;
                cfg.max_iters = 2000;
                cfg.target = 0.0;
            }
        }
        cfg
    }

    /// Defaults, then the config file (if any), then command-line flags.
    pub fn resolve(kind: ExperimentKind, file: Option<&ConfigOverrides>, cli: &ConfigOverrides) -> Result<Self> {
        let mut cfg = Self::defaults(kind);
        if let Some(file) = file {
            cfg.apply(file)?;
        }
        cfg.apply(cli)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = o.$field.clone() { self.$field = v; } )* };
        }
        set!(m, n, r, d, sigma1, seed, trials, c, nu, epsilon, s, record_every, max_iters, target, jobs, out, variance, horizon);
        if let Some(seed) = o.seed {
            self.matrix_seed = seed;
        }
        if let Some(ms) = o.matrix_seed {
            self.matrix_seed = ms;
        }
        if let Some(v) = o.sigmar.clone() {
            self.sigmar = v.into_vec();
        }
        if let Some(v) = o.t_values.clone() {
            self.t_values = v.into_vec();
        }
        if let Some(v) = o.scheme.clone() {
            self.schemes = v.into_vec().iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if o.d_scale.is_some() {
            self.d_scale = o.d_scale;
        }
        match (o.eta, o.eta_mult) {
            (Some(_), Some(_)) => return Err(Error::config("eta", "eta and eta_mult are mutually exclusive")),
            (Some(e), None) => self.eta = EtaMode::Absolute(e),
            (None, Some(k)) => self.eta = EtaMode::Multiplier(k),
            (None, None) => {}
        }
        if let Some(m) = &o.monitors {
            self.monitors = m.parse()?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        for (field, v) in [("m", self.m), ("n", self.n), ("r", self.r), ("d", self.d)] {
            if v == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if self.sigmar.is_empty() {
            return Err(Error::config("sigmar", "needs at least one value"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("scheme", "needs at least one scheme"));
        }
        positive("sigma1", self.sigma1)?;
        for &sr in &self.sigmar {
            positive("sigmar", sr)?;
            if sr > self.sigma1 {
                return Err(Error::config("sigmar", format!("{sr} exceeds sigma1 = {}", self.sigma1)));
            }
        }
        match self.eta {
            EtaMode::Absolute(e) => positive("eta", e)?,
            EtaMode::Multiplier(k) => positive("eta_mult", k)?,
        }
        positive("epsilon", self.epsilon)?;
        positive("s", self.s)?;
        positive("c", self.c)?;
        positive("nu", self.nu)?;
        positive("variance", self.variance)?;
        if let Some(ds) = self.d_scale {
            positive("d_scale", ds)?;
        }
        if !(self.target >= 0.0) {
            return Err(Error::config("target", "must be non-negative"));
        }
        if self.t_values.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::config("t_values", "must be non-negative"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = ConfigOverrides::from_toml_str("trials = 3\nsigmar = [0.2, 0.4]\nscheme = \"plain-gaussian\"\neta_mult = 100.0\n").unwrap();
        let cli = ConfigOverrides {
            trials: Some(7),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(ExperimentKind::Fig2, Some(&file), &cli).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.sigmar, vec![0.2, 0.4]);
        assert_eq!(cfg.schemes, vec![InitScheme::PlainGaussian]);
        assert_eq!(cfg.eta, EtaMode::Multiplier(100.0));
    }

    #[test]
    fn zero_max_iters_names_field() {
        let cli = ConfigOverrides {
            max_iters: Some(0),
            ..Default::default()
        };
        match ExperimentConfig::resolve(ExperimentKind::Run, None, &cli) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "max_iters"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_conflicts_rejected() {
        assert!(ConfigOverrides::from_toml_str("bogus = 1").is_err());
        let both = ConfigOverrides {
            eta: Some(0.1),
            eta_mult: Some(10.0),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentKind::Run, None, &both).is_err());
        let bad_scheme = ConfigOverrides::from_toml_str("scheme = \"orange\"").unwrap();
        assert!(ExperimentConfig::resolve(ExperimentKind::Run, Some(&bad_scheme), &Default::default()).is_err());
    }
}
