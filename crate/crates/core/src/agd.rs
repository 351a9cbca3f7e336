//! Alternating gradient descent with per-iteration diagnostics and runtime
//! invariant monitors.
//!
//! One iteration updates `X` with `Y` frozen and then `Y` with the *new*
//! `X`:
//!
//! ```text
//! X_{t+1} = X_t − η (X_tY_tᵀ − A) Y_t
//! Y_{t+1} = Y_t − η (X_{t+1}Y_tᵀ − A)ᵀ X_{t+1}
//! ```
//!
//! The monitors check, on the live iterates, the inequalities that drive the
//! linear convergence argument. Each is evaluated only where its hypotheses
//! hold and carries a small floating-point slack.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::InitScheme;
use crate::linalg::{spectral_norm_sq_gram, svd, DenseMatrix};
use crate::objective::{grad_x, grad_y, Problem};
use crate::theory::{decay_envelope, norm_horizon};

/// Colspan leak allowed for iterates that started in ColSpan(A).
pub const COLSPAN_TOL: f64 = 1e-8;
/// Absolute slack on the per-step descent check.
pub const DESCENT_SLACK: f64 = 1e-12;
/// Relative slack `1e-10·(1 + f)` on the PL check.
pub const PL_SLACK: f64 = 1e-10;
/// Absolute slack on singular-value drift bounds.
pub const DRIFT_SLACK: f64 = 1e-8;
/// Absolute slack on the cumulative gradient budget.
pub const GRAD_BUDGET_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Monitor {
    /// `‖(I − P_A)X_t‖_F / ‖X_t‖_F ≤ 1e-8`
    ColSpan,
    /// `‖∇_Y f(X_{t+1},Y_t)‖_F² ≥ 2σ_r(X_{t+1})² f(X_{t+1},Y_t)`
    Pl,
    /// `f_{t+1} ≤ f_t` while `‖Y_t‖² ≤ 1/η` and `‖X_{t+1}‖² ≤ 2/η`
    Descent,
    /// `σ(X_t)`, `σ(Y_t)` stay within `√(2tηf₀)` of their initial values
    SvDrift,
    /// `Σ_τ ‖∇_X f(X_τ,Y_τ)‖_F² ≤ (2/η) f₀`
    GradBudget,
}

impl Monitor {
    pub const ALL: [Monitor; 5] = [
        Monitor::ColSpan,
        Monitor::Pl,
        Monitor::Descent,
        Monitor::SvDrift,
        Monitor::GradBudget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Monitor::ColSpan => "colspan",
            Monitor::Pl => "pl",
            Monitor::Descent => "descent",
            Monitor::SvDrift => "sv-drift",
            Monitor::GradBudget => "grad-budget",
        }
    }
}

/// What to do when a monitor fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonitorMode {
    Off,
    /// Record the violation and keep iterating.
    Log,
    /// Stop at the first violation with [`Error::MonitorViolation`].
    Fatal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgdConfig {
    pub eta: f64,
    pub max_iters: usize,
    /// Stop once `‖A − XYᵀ‖_F²/‖A‖_F² ≤ target`; `0` disables.
    pub target_rel_loss: f64,
    pub record_every: usize,
    pub monitors: BTreeSet<Monitor>,
    pub monitor_mode: MonitorMode,
    /// `β` for the reference envelope column, if known.
    pub beta: Option<f64>,
}

impl AgdConfig {
    pub fn new(eta: f64, max_iters: usize) -> Self {
        Self {
            eta,
            max_iters,
            target_rel_loss: 0.0,
            record_every: 1,
            monitors: BTreeSet::new(),
            monitor_mode: MonitorMode::Log,
            beta: None,
        }
    }

    pub fn target(mut self, target_rel_loss: f64) -> Self {
        self.target_rel_loss = target_rel_loss;
        self
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn all_monitors(mut self, mode: MonitorMode) -> Self {
        self.monitors = Monitor::ALL.into_iter().collect();
        self.monitor_mode = mode;
        self
    }

    pub fn monitors(mut self, monitors: impl IntoIterator<Item = Monitor>, mode: MonitorMode) -> Self {
        self.monitors = monitors.into_iter().collect();
        self.monitor_mode = mode;
        self
    }

    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config("eta", format!("must be positive, got {}", self.eta)));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        if !(self.target_rel_loss >= 0.0) {
            return Err(Error::config("target", "must be non-negative"));
        }
        Ok(())
    }

    fn watching(&self, m: Monitor) -> bool {
        self.monitor_mode != MonitorMode::Off && self.monitors.contains(&m)
    }
}

/// Diagnostics of the state `(X_t, Y_t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub t: usize,
    /// `f(X_t, Y_t)`
    pub f: f64,
    /// `2f/‖A‖_F²`
    pub rel_loss: f64,
    pub sigma1_x: f64,
    pub sigmar_x: f64,
    pub sigma1_y: f64,
    pub sigmar_y: f64,
    /// `‖∇_X f(X_t, Y_t)‖_F`
    pub grad_norm_x: f64,
    /// `‖∇_Y f(X_{t+1}, Y_t)‖_F`
    pub grad_norm_y: f64,
    pub balance: f64,
    pub colspan_leak: f64,
    /// `2f₀ exp(−βt/4)` when `β` is configured.
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub iteration: usize,
    pub monitor: Monitor,
    pub measured: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} {}: measured {:e} vs bound {:e}",
            self.iteration,
            self.monitor.name(),
            self.measured,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
    MonitorViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub config: AgdConfig,
    pub scheme: Option<InitScheme>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub f0: f64,
    pub stats: Vec<IterationStats>,
    pub termination: Termination,
    pub violations: Vec<Violation>,
}

impl TrajectoryRecord {
    pub fn last(&self) -> &IterationStats {
        self.stats.last().expect("a trajectory records at least t = 0")
    }

    /// First recorded iteration with `rel_loss ≤ target`.
    pub fn iters_to(&self, target: f64) -> Option<usize> {
        self.stats.iter().find(|s| s.rel_loss <= target).map(|s| s.t)
    }

    pub fn label(mut self, scheme: InitScheme, seed: u64, stream: u64) -> Self {
        self.scheme = Some(scheme);
        self.seed = Some(seed);
        self.stream = Some(stream);
        self
    }
}

/// One alternating step. The Y-gradient is taken at the updated `X`.
pub fn agd_step(
    x: &DenseMatrix,
    y: &DenseMatrix,
    a: &DenseMatrix,
    eta: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(eta > 0.0) {
        return Err(Error::Argument(format!("eta must be positive, got {eta}")));
    }
    let diverged = |e: Error| match e {
        Error::NonFinite(_) => Error::Divergence { iteration: 0 },
        other => other,
    };
    let x_next = x.axpy(-eta, &grad_x(x, y, a)?).map_err(diverged)?;
    let y_next = y.axpy(-eta, &grad_y(&x_next, y, a)?).map_err(diverged)?;
    Ok((x_next, y_next))
}

/// Index-safe `σ_r` for a factor with possibly fewer than `r` columns.
fn sigma_at(values: &[f64], r: usize) -> f64 {
    values[r.min(values.len()) - 1]
}

struct MonitorState {
    log: Vec<Violation>,
    fatal: bool,
}

impl MonitorState {
    fn check(&mut self, ok: bool, iteration: usize, monitor: Monitor, measured: f64, bound: f64) -> bool {
        if !ok {
            self.log.push(Violation {
                iteration,
                monitor,
                measured,
                bound,
            });
        }
        !ok && self.fatal
    }
}

/// Iterate from `(x0, y0)` until the target, the iteration budget, or a
/// fatal monitor violation.
///
/// Statistics are recorded at every `record_every`-th iteration and at the
/// final one. Singular-value based monitors share that stride; the descent
/// and gradient-budget monitors run every step.
pub fn run(problem: &Problem, x0: DenseMatrix, y0: DenseMatrix, cfg: &AgdConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let a = problem.matrix();
    if x0.rows() != a.rows() || y0.rows() != a.cols() || x0.cols() != y0.cols() {
        return Err(Error::Argument(format!(
            "factor shapes {:?}, {:?} incompatible with target {:?}",
            x0.shape(),
            y0.shape(),
            a.shape()
        )));
    }
    let at = a.transpose();
    let eta = cfg.eta;
    let r = problem.rank();
    let a_sq = problem.frobenius_sq();

    let mut mon = MonitorState {
        log: Vec::new(),
        fatal: cfg.monitor_mode == MonitorMode::Fatal,
    };
    let mut stats = Vec::new();
    let mut x = x0;
    let mut y = y0;

    let mut f0 = f64::NAN;
    // (sigma_r, sigma_1) of X₀ and Y₀, set at t = 0
    let mut init_sv = [(0.0, 0.0); 2];
    let mut drift_regime = false;
    let mut horizon = 0u64;
    let mut grad_sq_sum = 0.0;
    // f_t and whether the descent hypotheses held for the step out of t
    let mut pending_descent: Option<f64> = None;

    let diverged = |t: usize| move |e: Error| match e {
        Error::NonFinite(_) => Error::Divergence { iteration: t },
        other => other,
    };

    let fail = |stats: Vec<IterationStats>, log: Vec<Violation>, f0: f64| {
        Error::MonitorViolation(Box::new(TrajectoryRecord {
            config: cfg.clone(),
            scheme: None,
            seed: None,
            stream: None,
            f0,
            stats,
            termination: Termination::MonitorViolation,
            violations: log,
        }))
    };

    for t in 0..=cfg.max_iters {
        let r_full = x.matmul_t(&y).and_then(|p| p.sub(a)).map_err(diverged(t))?;
        let f = 0.5 * r_full.frobenius_norm_sq();
        if !f.is_finite() {
            return Err(Error::Divergence { iteration: t });
        }
        if t == 0 {
            f0 = f;
            horizon = norm_horizon(eta, f0.max(f64::MIN_POSITIVE));
        }

        if let Some(f_prev) = pending_descent.take() {
            if mon.check(f <= f_prev + DESCENT_SLACK, t - 1, Monitor::Descent, f - f_prev, DESCENT_SLACK) {
                return Err(fail(stats, mon.log, f0));
            }
        }

        let g = r_full.matmul(&y).map_err(diverged(t))?;
        let g_sq = g.frobenius_norm_sq();
        grad_sq_sum += g_sq;
        let x_next = x.axpy(-eta, &g).map_err(diverged(t))?;
        let r_half = y.matmul_t(&x_next).and_then(|p| p.sub(&at)).map_err(diverged(t))?;
        let f_half = 0.5 * r_half.frobenius_norm_sq();
        let g_half = r_half.matmul(&x_next).map_err(diverged(t))?;
        let g_half_sq = g_half.frobenius_norm_sq();
        let y_next = y.axpy(-eta, &g_half).map_err(diverged(t))?;

        let rel_loss = 2.0 * f / a_sq;
        let reached = cfg.target_rel_loss > 0.0 && rel_loss <= cfg.target_rel_loss;
        let terminal = reached || t == cfg.max_iters;
        let recorded = t % cfg.record_every == 0 || terminal;

        if recorded {
            let sx = svd(&x).singular_values;
            let sy = svd(&y).singular_values;
            let leak = problem.colspan_leak(&x)?;
            let entry = IterationStats {
                t,
                f,
                rel_loss,
                sigma1_x: sx[0],
                sigmar_x: sigma_at(&sx, r),
                sigma1_y: sy[0],
                sigmar_y: sigma_at(&sy, r),
                grad_norm_x: g_sq.sqrt(),
                grad_norm_y: g_half_sq.sqrt(),
                balance: crate::objective::balancedness(&x, &y)?,
                colspan_leak: leak,
                envelope: cfg.beta.map(|b| decay_envelope(b, f0, t as u64)),
            };

            if t == 0 {
                init_sv = [(entry.sigmar_x, entry.sigma1_x), (entry.sigmar_y, entry.sigma1_y)];
                let cap = 9.0 / (16.0 * eta);
                drift_regime = entry.sigma1_x.powi(2) <= cap && entry.sigma1_y.powi(2) <= cap;
            }

            let mut stop = false;
            if cfg.watching(Monitor::ColSpan) {
                stop |= mon.check(leak <= COLSPAN_TOL, t, Monitor::ColSpan, leak, COLSPAN_TOL);
            }
            if cfg.watching(Monitor::Pl) {
                let leak_next = problem.colspan_leak(&x_next)?;
                let sr_next = sigma_at(&svd(&x_next).singular_values, r);
                if leak_next <= COLSPAN_TOL && sr_next > 0.0 {
                    let bound = 2.0 * sr_next * sr_next * f_half - PL_SLACK * (1.0 + f_half);
                    stop |= mon.check(g_half_sq >= bound, t, Monitor::Pl, g_half_sq, bound);
                }
            }
            if cfg.watching(Monitor::SvDrift) && drift_regime && t as u64 <= horizon {
                let radius = (2.0 * t as f64 * eta * f0).sqrt();
                let current = [(entry.sigmar_x, entry.sigma1_x), (entry.sigmar_y, entry.sigma1_y)];
                for ((sr0, s10), (sr, s1)) in init_sv.iter().zip(current) {
                    let lo = sr0 - radius - DRIFT_SLACK;
                    let hi = s10 + radius + DRIFT_SLACK;
                    stop |= mon.check(sr >= lo, t, Monitor::SvDrift, sr, lo);
                    stop |= mon.check(s1 <= hi, t, Monitor::SvDrift, s1, hi);
                }
            }
            stats.push(entry);
            if stop {
                return Err(fail(stats, mon.log, f0));
            }
        }

        if cfg.watching(Monitor::GradBudget) && drift_regime && t as u64 <= horizon {
            let bound = 2.0 / eta * f0 + GRAD_BUDGET_SLACK;
            if mon.check(grad_sq_sum <= bound, t, Monitor::GradBudget, grad_sq_sum, bound) {
                return Err(fail(stats, mon.log, f0));
            }
        }

        if terminal {
            return Ok(TrajectoryRecord {
                config: cfg.clone(),
                scheme: None,
                seed: None,
                stream: None,
                f0,
                stats,
                termination: if reached {
                    Termination::TargetReached
                } else {
                    Termination::BudgetExhausted
                },
                violations: mon.log,
            });
        }

        if cfg.watching(Monitor::Descent)
            && spectral_norm_sq_gram(&y) <= 1.0 / eta
            && spectral_norm_sq_gram(&x_next) <= 2.0 / eta
        {
            pending_descent = Some(f);
        }

        x = x_next;
        y = y_next;
    }
    unreachable!("loop returns at t == max_iters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, Rng};
    use crate::objective::loss;

    fn scalar(v: f64) -> DenseMatrix {
        DenseMatrix::new(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn scalar_step_by_hand() {
        let (x1, y1) = agd_step(&scalar(2.0), &scalar(3.0), &scalar(1.0), 0.01).unwrap();
        assert!((x1.get(0, 0) - 1.85).abs() < 1e-15);
        assert!((y1.get(0, 0) - 2.915825).abs() < 1e-14);
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let mut rng = Rng::new(9, 0);
        let x = gaussian_matrix(&mut rng, 5, 2, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 4, 2, 1.0).unwrap();
        let a = x.matmul_t(&y).unwrap();
        let (x1, y1) = agd_step(&x, &y, &a, 0.1).unwrap();
        assert_eq!(x1, x);
        assert_eq!(y1, y);
    }

    #[test]
    fn y_update_uses_fresh_x() {
        let mut rng = Rng::new(10, 0);
        let a = gaussian_matrix(&mut rng, 5, 4, 1.0).unwrap();
        let x = gaussian_matrix(&mut rng, 5, 2, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 4, 2, 1.0).unwrap();
        let eta = 0.05;
        let (_, y1) = agd_step(&x, &y, &a, eta).unwrap();
        let stale = y.axpy(-eta, &grad_y(&x, &y, &a).unwrap()).unwrap();
        assert!(y1.sub(&stale).unwrap().frobenius_norm() > 1e-6);
    }

    #[test]
    fn half_step_residual_identity() {
        let mut rng = Rng::new(11, 0);
        let a = gaussian_matrix(&mut rng, 6, 5, 1.0).unwrap();
        let x = gaussian_matrix(&mut rng, 6, 3, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 5, 3, 1.0).unwrap();
        let eta = 0.03;
        let (x1, _) = agd_step(&x, &y, &a, eta).unwrap();
        let r = x.matmul_t(&y).unwrap().sub(&a).unwrap();
        let r_half_t = x1.matmul_t(&y).unwrap().sub(&a).unwrap();
        let yyt = y.matmul_t(&y).unwrap();
        let want = r.sub(&r.matmul(&yyt).unwrap().scale(eta).unwrap()).unwrap();
        let err = r_half_t.sub(&want).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * want.frobenius_norm());
    }

    #[test]
    fn run_stops_at_optimum() {
        let mut rng = Rng::new(12, 0);
        let x = gaussian_matrix(&mut rng, 6, 3, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 5, 3, 1.0).unwrap();
        let p = Problem::new(x.matmul_t(&y).unwrap()).unwrap();
        let cfg = AgdConfig::new(0.01, 100).target(1e-12);
        let rec = run(&p, x, y, &cfg).unwrap();
        assert_eq!(rec.termination, Termination::TargetReached);
        assert_eq!(rec.stats.len(), 1);
        assert_eq!(rec.last().t, 0);
    }

    #[test]
    fn run_records_stride_and_final() {
        let mut rng = Rng::new(13, 0);
        let a = gaussian_matrix(&mut rng, 6, 5, 1.0).unwrap();
        let p = Problem::new(a.clone()).unwrap();
        let x = gaussian_matrix(&mut rng, 6, 2, 0.1).unwrap();
        let y = gaussian_matrix(&mut rng, 5, 2, 0.1).unwrap();
        let cfg = AgdConfig::new(0.05, 23).record_every(5);
        let rec = run(&p, x.clone(), y.clone(), &cfg).unwrap();
        let ts: Vec<usize> = rec.stats.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0, 5, 10, 15, 20, 23]);
        assert_eq!(rec.termination, Termination::BudgetExhausted);
        assert!((rec.f0 - loss(&x, &y, &a).unwrap()).abs() < 1e-14);
        for s in &rec.stats {
            assert!((s.rel_loss - 2.0 * s.f / p.frobenius_sq()).abs() <= 1e-12 * s.rel_loss);
            assert!(s.sigma1_x >= s.sigmar_x && s.sigma1_y >= s.sigmar_y);
        }
    }

    #[test]
    fn config_validation() {
        assert!(AgdConfig::new(0.1, 0).validate().is_err());
        assert!(AgdConfig::new(0.0, 10).validate().is_err());
        assert!(AgdConfig::new(0.1, 10).record_every(0).validate().is_err());
    }
}
