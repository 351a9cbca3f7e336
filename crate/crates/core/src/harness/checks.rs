//! Invariant checks shared by the `verify` subcommand and the test suites.

use rayon::prelude::*;

use crate::agd::{run, AgdConfig, Monitor, MonitorMode, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::harness::experiments::thread_pool;
use crate::init::{initialize, InitConfig};
use crate::linalg::{gaussian_matrix, singular_values, DenseMatrix, Rng};
use crate::objective::{grad_x, grad_y, loss, Problem};
use crate::theory::{f0_bound, iteration_budget, rho};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub instances: usize,
    /// Largest `max_ij |G − G_fd| / max_ij |G_fd|` over instances and both
    /// gradients.
    pub max_rel_err: f64,
}

fn fd_gradient(x: &DenseMatrix, f: impl Fn(&DenseMatrix) -> Result<f64>) -> Result<DenseMatrix> {
    let mut out = vec![0.0; x.rows() * x.cols()];
    let mut buf = x.data().to_vec();
    for k in 0..buf.len() {
        let orig = buf[k];
        buf[k] = orig + FD_STEP;
        let plus = f(&DenseMatrix::new(x.rows(), x.cols(), buf.clone())?)?;
        buf[k] = orig - FD_STEP;
        let minus = f(&DenseMatrix::new(x.rows(), x.cols(), buf.clone())?)?;
        buf[k] = orig;
        out[k] = (plus - minus) / (2.0 * FD_STEP);
    }
    DenseMatrix::new(x.rows(), x.cols(), out)
}

fn rel_err(g: &DenseMatrix, fd: &DenseMatrix) -> f64 {
    let scale = fd.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = g.data().iter().zip(fd.data()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Compare both analytic gradients with central differences of the loss on
/// `instances` random problems with `m, n ≤ 8`, `d ≤ 4`. `flip_sign`
/// negates the X-gradient, as a negative control.
pub fn gradient_fd_check(instances: usize, seed: u64, flip_sign: bool) -> Result<FdReport> {
    let mut worst = 0.0f64;
    for i in 0..instances as u64 {
        let mut rng = Rng::new(seed, i);
        let (m, n, d) = (rng.uniform_int(1, 8), rng.uniform_int(1, 8), rng.uniform_int(1, 4));
        let a = gaussian_matrix(&mut rng, m, n, 1.0)?;
        let x = gaussian_matrix(&mut rng, m, d, 1.0)?;
        let y = gaussian_matrix(&mut rng, n, d, 1.0)?;

        let mut gx = grad_x(&x, &y, &a)?;
        if flip_sign {
            gx = gx.scale(-1.0)?;
        }
        let gy = grad_y(&x, &y, &a)?;
        let fx = fd_gradient(&x, |xp| loss(xp, &y, &a))?;
        let fy = fd_gradient(&y, |yp| loss(&x, yp, &a))?;
        worst = worst.max(rel_err(&gx, &fx)).max(rel_err(&gy, &fy));
    }
    Ok(FdReport {
        instances,
        max_rel_err: worst,
    })
}

/// Failure fractions of the four high-probability initialization events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitEventRates {
    pub trials: usize,
    /// `σ₁(X₀) > 3/(C√η)`
    pub sigma1_x: f64,
    /// `σ₁(Y₀) > √η·C·ν·σ₁(A)/3`
    pub sigma1_y: f64,
    /// `f₀ > ½(1+ν)²‖A‖_F²`
    pub f0: f64,
    /// `σ_r(X₀) < ρ·σ_r(A)/(√η·C·σ₁(A))`
    pub sigmar_x: f64,
}

impl InitEventRates {
    pub fn worst(&self) -> f64 {
        self.sigma1_x.max(self.sigma1_y).max(self.f0).max(self.sigmar_x)
    }
}

/// Draw `trials` initializations (trial `i` on stream `i` of `seed`) and
/// count how often each event fails.
pub fn init_event_rates(
    problem: &Problem,
    init: &InitConfig,
    s: f64,
    seed: u64,
    trials: usize,
    jobs: usize,
) -> Result<InitEventRates> {
    let r = problem.rank();
    let (c, nu, eta) = (init.c, init.nu, init.eta);
    let root_eta = eta.sqrt();
    let s1 = problem.sigma1();
    let rho = rho(init.d, r, s)?;
    let x_hi = 3.0 / (c * root_eta);
    let y_hi = root_eta * c * nu * s1 / 3.0;
    let f_hi = f0_bound(nu, problem.frobenius_sq());
    let x_lo = rho * problem.sigmar() / (root_eta * c * s1);

    let pool = thread_pool(jobs)?;
    let fails: Vec<[bool; 4]> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| -> Result<[bool; 4]> {
                let (x0, y0) = initialize(&mut Rng::new(seed, i), problem, init)?;
                let sx = singular_values(&x0);
                let sy = singular_values(&y0);
                let f0 = loss(&x0, &y0, problem.matrix())?;
                Ok([sx[0] > x_hi, sy[0] > y_hi, f0 > f_hi, sx[r - 1] < x_lo])
            })
            .collect::<Result<_>>()
    })?;
    let rate = |k: usize| fails.iter().filter(|f| f[k]).count() as f64 / trials as f64;
    Ok(InitEventRates {
        trials,
        sigma1_x: rate(0),
        sigma1_y: rate(1),
        f0: rate(2),
        sigmar_x: rate(3),
    })
}

/// Largest relative spread of `f(X₀, Y₀)` across step sizes, per seed.
/// The unbalanced scales cancel in the product, so this should be at
/// rounding level.
pub fn f0_step_size_spread(problem: &Problem, init: &InitConfig, etas: &[f64], seed: u64, trials: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..trials as u64 {
        let f0s: Vec<f64> = etas
            .iter()
            .map(|&eta| {
                let cfg = init.with_eta(eta)?;
                let (x0, y0) = initialize(&mut Rng::new(seed, i), problem, &cfg)?;
                loss(&x0, &y0, problem.matrix())
            })
            .collect::<Result<_>>()?;
        let base = f0s[0];
        for f in &f0s {
            worst = worst.max((f - base).abs() / base.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// Recorded iterations `t ≤ min(T, horizon)` at which `‖R_t‖² = 2f_t`
/// exceeds `2 exp(−βt/4) f₀`.
pub fn envelope_violations(record: &TrajectoryRecord, beta: f64, eta: f64, horizon: usize) -> Result<Vec<usize>> {
    let t_max = iteration_budget(beta, eta, record.f0)?.min(horizon as u64) as usize;
    Ok(record
        .stats
        .iter()
        .filter(|s| s.t <= t_max)
        .filter(|s| {
            let env = crate::theory::decay_envelope(beta, record.f0, s.t as u64);
            2.0 * s.f > env
        })
        .map(|s| s.t)
        .collect())
}

/// Run `trials` seeded trajectories of one scheme with the given monitors.
/// A fatal monitor stop is returned as that trial's error.
pub fn monitored_runs(
    problem: &Problem,
    init: &InitConfig,
    agd: &AgdConfig,
    seed: u64,
    trials: usize,
    jobs: usize,
) -> Result<Vec<Result<TrajectoryRecord>>> {
    let pool = thread_pool(jobs)?;
    Ok(pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let (x0, y0) = initialize(&mut Rng::new(seed, i), problem, init)?;
                run(problem, x0, y0, agd).map(|r| r.label(init.scheme, seed, i))
            })
            .collect()
    }))
}

/// Count logged or fatal violations of `monitor` across `runs`.
pub fn count_violations(runs: &[Result<TrajectoryRecord>], monitor: Monitor) -> usize {
    runs.iter()
        .map(|r| match r {
            Ok(rec) => rec.violations.iter().filter(|v| v.monitor == monitor).count(),
            Err(Error::MonitorViolation(rec)) => rec.violations.iter().filter(|v| v.monitor == monitor).count(),
            Err(_) => 0,
        })
        .sum()
}

/// Trials that ended in an error other than a monitor stop.
pub fn failed_runs(runs: &[Result<TrajectoryRecord>]) -> Vec<String> {
    runs.iter()
        .filter_map(|r| match r {
            Err(Error::MonitorViolation(_)) | Ok(_) => None,
            Err(e) => Some(e.to_string()),
        })
        .collect()
}

/// Config for the monitored runs: every monitor in `mode`, recording at
/// `stride`, no early stop.
pub fn monitor_config(eta: f64, iters: usize, stride: usize, beta: f64, monitors: &[Monitor], mode: MonitorMode) -> AgdConfig {
    AgdConfig::new(eta, iters)
        .record_every(stride)
        .monitors(monitors.iter().copied(), mode)
        .beta(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_differences_agree_and_flip_is_caught() {
        assert!(gradient_fd_check(10, 3, false).unwrap().max_rel_err <= 1e-6);
        assert!(gradient_fd_check(10, 3, true).unwrap().max_rel_err > 1e-1);
    }
}
