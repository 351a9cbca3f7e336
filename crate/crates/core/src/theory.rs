//! Closed-form constants and bounds of the convergence analysis.
//!
//! With `r = rank(A)`, factor rank `d > r` and a slack `s > 0` satisfying
//! `√r + √s < √d`:
//!
//! ```text
//! ρ = 1 − (√r + √s)/√d
//! β = ρ² σ_r(A)² / (C² σ₁(A)²)
//! δ = e^{−s/2} + e^{−r/2} + e^{−d/2}
//! ```
//!
//! With high probability (`1 − δ`) over the unbalanced initialization and a
//! step size `η ≤ β / √(32 f₀ log(2f₀/ε))`, the squared residual obeys
//! `‖A − X_tY_tᵀ‖_F² ≤ 2 exp(−βt/4) f₀` for `t ≤ T = ⌊β/(8η²f₀)⌋`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::init::InitConfig;
use crate::objective::Problem;

/// Default `s`: small enough that `ρ ≈ 1 − √(r/d)`.
pub const DEFAULT_S: f64 = 1e-12;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `ρ = 1 − (√r + √s)/√d`; requires `√r + √s < √d`.
pub fn rho(d: usize, r: usize, s: f64) -> Result<f64> {
    positive("s", s)?;
    if r == 0 || d == 0 {
        return Err(Error::Argument("d and r must be positive".into()));
    }
    let lhs = (r as f64).sqrt() + s.sqrt();
    let rd = (d as f64).sqrt();
    if lhs >= rd {
        return Err(Error::Infeasible(format!(
            "over-parameterization condition √r + √s < √d fails: √{r} + √{s} = {lhs} >= √{d} = {rd}"
        )));
    }
    Ok(1.0 - lhs / rd)
}

/// `β = ρ²σ_r²/(C²σ₁²)`
pub fn beta(rho: f64, sigma1: f64, sigmar: f64, c: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Argument(format!("rho must lie in (0, 1], got {rho}")));
    }
    if !(sigmar > 0.0) {
        return Err(Error::RankDetection(format!(
            "sigma_r must be positive, got {sigmar}"
        )));
    }
    if sigma1 < sigmar {
        return Err(Error::Argument(format!(
            "sigma1 = {sigma1} is below sigma_r = {sigmar}"
        )));
    }
    if !(c >= 1.0) {
        return Err(Error::Argument(format!("C must be >= 1, got {c}")));
    }
    Ok((rho * sigmar / (c * sigma1)).powi(2))
}

/// `δ = e^{−s/2} + e^{−r/2} + e^{−d/2}`
pub fn delta(s: f64, r: usize, d: usize) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Argument(format!("s must be non-negative, got {s}")));
    }
    Ok((-s / 2.0).exp() + (-(r as f64) / 2.0).exp() + (-(d as f64) / 2.0).exp())
}

/// Largest step size `β / √(32 f₀ log(2f₀/ε))` for which `ε` is reached.
pub fn eta_max(beta: f64, f0: f64, epsilon: f64) -> Result<f64> {
    positive("beta", beta)?;
    positive("f0", f0)?;
    positive("epsilon", epsilon)?;
    if epsilon >= 2.0 * f0 {
        return Err(Error::TrivialTarget { epsilon, f0 });
    }
    Ok(beta / (32.0 * f0 * (2.0 * f0 / epsilon).ln()).sqrt())
}

/// `T = ⌊β/(8η²f₀)⌋`
pub fn iteration_budget(beta: f64, eta: f64, f0: f64) -> Result<u64> {
    positive("beta", beta)?;
    positive("eta", eta)?;
    positive("f0", f0)?;
    Ok((beta / (8.0 * eta * eta * f0)).floor() as u64)
}

/// `⌊1/(32η²f₀)⌋`, the horizon over which iterate norms stay below `1/√η`.
pub fn norm_horizon(eta: f64, f0: f64) -> u64 {
    (1.0 / (32.0 * eta * eta * f0)).floor() as u64
}

/// Bound on the squared residual `‖R_t‖_F² = 2f_t`: `2 exp(−βt/4) f₀`.
pub fn decay_envelope(beta: f64, f0: f64, t: u64) -> f64 {
    2.0 * (-beta * t as f64 / 4.0).exp() * f0
}

/// Cumulative iteration counts after which the loss has dropped by `ε`,
/// `ε²`, …, `εᵏ` when the analysis is restarted at each stage. Stage `ℓ`
/// (zero-based) lasts `⌊(1/(4ε))^ℓ · β/(8η²f₀)⌋` iterations.
pub fn stage_schedule(beta: f64, eta: f64, f0: f64, epsilon: f64, k: usize) -> Result<Vec<u64>> {
    positive("beta", beta)?;
    positive("eta", eta)?;
    positive("f0", f0)?;
    if !(epsilon > 0.0 && epsilon <= 1.0 / 16.0) {
        return Err(Error::OutOfRegime(format!(
            "restart schedule needs 0 < epsilon <= 1/16, got {epsilon}"
        )));
    }
    let cap = beta / (32.0 * f0 * (1.0 / epsilon).ln()).sqrt();
    if eta > cap {
        return Err(Error::OutOfRegime(format!(
            "eta = {eta} exceeds the restart step-size cap {cap}"
        )));
    }
    let base = beta / (8.0 * eta * eta * f0);
    let ratio = 1.0 / (4.0 * epsilon);
    let mut total = 0u64;
    Ok((0..k)
        .map(|l| {
            total += (ratio.powi(l as i32) * base).floor() as u64;
            total
        })
        .collect())
}

/// High-probability singular value bounds for a `d × r` Gaussian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SvBounds {
    /// Lower bound on `σ_r`.
    pub lower: f64,
    /// Upper bound on `σ₁`.
    pub upper: f64,
    /// Probability with which each bound holds separately.
    pub prob: f64,
}

/// `√v(√d − √r − t) ≤ σ_r` and `σ₁ ≤ √v(√d + √r + t)`, each with probability
/// at least `1 − e^{−t²/2}`, for i.i.d. `N(0, v)` entries and `d ≥ r`.
pub fn gaussian_sv_bounds(d: usize, r: usize, t: f64, variance: f64) -> Result<SvBounds> {
    if r == 0 || d < r {
        return Err(Error::Argument(format!("need d >= r >= 1, got d={d}, r={r}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Argument(format!("t must be non-negative, got {t}")));
    }
    positive("variance", variance)?;
    let sd = variance.sqrt();
    let (rd, rr) = ((d as f64).sqrt(), (r as f64).sqrt());
    Ok(SvBounds {
        lower: sd * (rd - rr - t),
        upper: sd * (rd + rr + t),
        prob: 1.0 - (-t * t / 2.0).exp(),
    })
}

/// `½(1+ν)²‖A‖_F²`, the high-probability ceiling on the initial loss.
pub fn f0_bound(nu: f64, frobenius_sq: f64) -> f64 {
    0.5 * (1.0 + nu).powi(2) * frobenius_sq
}

/// Where the report's `f₀` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum F0Source {
    /// `½(1+ν)²‖A‖_F²`, available before sampling.
    Bound,
    /// A realized `f(X₀, Y₀)`.
    Realized(f64),
}

/// Every derived constant for one problem instance and init config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub sigma1: f64,
    pub sigmar: f64,
    pub frobenius_sq: f64,
    pub c: f64,
    pub nu: f64,
    pub s: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub beta: f64,
    pub delta: f64,
    pub f0: f64,
    /// Step size cap for reaching `ε`.
    pub eta_max: f64,
    /// `9/(4Cνσ₁)`, the cap assumed by the decay bound.
    pub eta_cap: f64,
    /// Step size the budgets below are computed for.
    pub eta: f64,
    /// `⌊β/(8η²f₀)⌋`
    pub t_budget: u64,
    /// `⌊1/(32η²f₀)⌋`
    pub t_norm_horizon: u64,
    /// `(σ₁/σ_r)² ρ⁻² log(‖A‖_F²/ε)`, the iteration complexity up to a constant.
    pub complexity: f64,
}

impl TheoryReport {
    /// Envelope on `‖A − X_tY_tᵀ‖_F²`.
    pub fn envelope(&self, t: u64) -> f64 {
        decay_envelope(self.beta, self.f0, t)
    }

    /// `(field, value)` pairs in a stable order, for text and CSV output.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("m", self.m.to_string()),
            ("n", self.n.to_string()),
            ("r", self.r.to_string()),
            ("d", self.d.to_string()),
            ("sigma1", format!("{:e}", self.sigma1)),
            ("sigmar", format!("{:e}", self.sigmar)),
            ("frobenius_sq", format!("{:e}", self.frobenius_sq)),
            ("c", format!("{:e}", self.c)),
            ("nu", format!("{:e}", self.nu)),
            ("s", format!("{:e}", self.s)),
            ("epsilon", format!("{:e}", self.epsilon)),
            ("rho", format!("{:e}", self.rho)),
            ("beta", format!("{:e}", self.beta)),
            ("delta", format!("{:e}", self.delta)),
            ("f0", format!("{:e}", self.f0)),
            ("eta_max", format!("{:e}", self.eta_max)),
            ("eta_cap", format!("{:e}", self.eta_cap)),
            ("eta", format!("{:e}", self.eta)),
            ("t_budget", self.t_budget.to_string()),
            ("t_norm_horizon", self.t_norm_horizon.to_string()),
            ("complexity", format!("{:e}", self.complexity)),
        ]
    }
}

/// Assemble a [`TheoryReport`]. Budgets use `cfg.eta`.
pub fn theory_report(
    problem: &Problem,
    cfg: &InitConfig,
    epsilon: f64,
    s: f64,
    f0: F0Source,
) -> Result<TheoryReport> {
    cfg.validate()?;
    let r = problem.rank();
    if cfg.d <= r {
        return Err(Error::Infeasible(format!(
            "factor rank d = {} must exceed rank(A) = {r}",
            cfg.d
        )));
    }
    let (sigma1, sigmar) = (problem.sigma1(), problem.sigmar());
    let rho = rho(cfg.d, r, s)?;
    let beta = beta(rho, sigma1, sigmar, cfg.c)?;
    let f0 = match f0 {
        F0Source::Bound => f0_bound(cfg.nu, problem.frobenius_sq()),
        F0Source::Realized(v) => v,
    };
    Ok(TheoryReport {
        m: problem.rows(),
        n: problem.cols(),
        r,
        d: cfg.d,
        sigma1,
        sigmar,
        frobenius_sq: problem.frobenius_sq(),
        c: cfg.c,
        nu: cfg.nu,
        s,
        epsilon,
        rho,
        beta,
        delta: delta(s, r, cfg.d)?,
        f0,
        eta_max: eta_max(beta, f0, epsilon)?,
        eta_cap: 9.0 / (4.0 * cfg.c * cfg.nu * sigma1),
        eta: cfg.eta,
        t_budget: iteration_budget(beta, cfg.eta, f0)?,
        t_norm_horizon: norm_horizon(cfg.eta, f0),
        complexity: (sigma1 / sigmar).powi(2) / (rho * rho) * (problem.frobenius_sq() / epsilon).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        let v = rho(6, 5, 1e-12).unwrap();
        assert!((v - 0.0871).abs() < 1e-4);
        for r in [1, 3, 10, 40] {
            assert!((rho(4 * r, r, 1e-300).unwrap() - 0.5).abs() < 1e-12);
        }
        for r in [20, 50, 100] {
            let inv = 1.0 / rho(r + 1, r, 1e-300).unwrap().powi(2);
            let r2 = (r * r) as f64;
            assert!(inv >= 3.5 * r2 && inv <= 4.5 * r2, "r={r}: {inv}");
        }
    }

    #[test]
    fn rho_infeasible() {
        assert!(matches!(rho(5, 5, 1e-12), Err(Error::Infeasible(_))));
        assert!(matches!(rho(6, 5, 0.1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn beta_examples() {
        let b = beta(0.0871, 1.0, 0.5, 4.0).unwrap();
        assert!((b - 1.186e-4).abs() < 1e-7);
        assert_eq!(beta(1.0, 2.0, 2.0, 1.0).unwrap(), 1.0);
        let b2 = beta(0.0871, 1.0, 0.5, 8.0).unwrap();
        assert!((b2 * 4.0 - b).abs() < 1e-18);
        assert!(matches!(beta(0.5, 1.0, 0.0, 4.0), Err(Error::RankDetection(_))));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(0.0, 0, 0).unwrap(), 3.0);
        let v = delta(2.0, 50, 200).unwrap();
        assert!((v - 0.3679).abs() < 1e-4);
        assert!(delta(3.0, 5, 6).unwrap() < delta(2.0, 5, 6).unwrap());
        assert!(delta(2.0, 6, 6).unwrap() < delta(2.0, 5, 6).unwrap());
        assert!(delta(2.0, 5, 7).unwrap() < delta(2.0, 5, 6).unwrap());
    }

    #[test]
    fn eta_max_examples() {
        let v = eta_max(1.186e-4, 1.484, 1e-8).unwrap();
        let want = 1.186e-4 / (32.0f64 * 1.484 * (2.0 * 1.484 / 1e-8f64).ln()).sqrt();
        assert!((v - want).abs() < 1e-18);
        assert!((v - 3.90e-6).abs() < 0.01e-6);
        assert!(eta_max(1e-4, 2.0, 1e-8).unwrap() < eta_max(1e-4, 1.0, 1e-8).unwrap());
        assert!(eta_max(1e-4, 1.0, 1e-6).unwrap() > eta_max(1e-4, 1.0, 1e-8).unwrap());
        assert!(eta_max(1e-300, 1.0, 1e-8).unwrap() < 1e-299);
        assert!(matches!(eta_max(1e-4, 1.0, 2.0), Err(Error::TrivialTarget { .. })));
    }

    #[test]
    fn budget_examples() {
        let t = iteration_budget(1.186e-4, 3.90e-6, 1.484).unwrap();
        assert!((656_000..=657_200).contains(&t), "{t}");
        let t1 = iteration_budget(1.0, 0.01, 1.0).unwrap();
        let t2 = iteration_budget(1.0, 0.02, 1.0).unwrap();
        assert_eq!(t1, 1250);
        assert_eq!(t2, 312);
        assert_eq!(iteration_budget(2.0, 0.5, 1.0).unwrap(), 1);
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(decay_envelope(0.3, 1.5, 0), 3.0);
        let beta: f64 = 0.01;
        let half_life = 4.0 * 2f64.ln() / beta;
        let at = 2.0 * (-beta * half_life / 4.0).exp() * 1.5;
        assert!((at - 1.5).abs() < 1e-12);
        let v = decay_envelope(1.186e-4, 1.484, 10_000);
        assert!((v - 2.206).abs() < 1e-3, "{v}");
    }

    #[test]
    fn stage_schedule_examples() {
        // β/(8η²f₀) = 200/(8·0.25·1) = 100
        let s = stage_schedule(200.0, 0.5, 1.0, 1.0 / 16.0, 3).unwrap();
        assert_eq!(s, vec![100, 500, 2100]);
        let s = stage_schedule(200.0, 0.5, 1.0, 0.05, 1).unwrap();
        assert_eq!(s, vec![iteration_budget(200.0, 0.5, 1.0).unwrap()]);
        assert!(matches!(
            stage_schedule(200.0, 0.5, 1.0, 0.07, 3),
            Err(Error::OutOfRegime(_))
        ));
    }

    #[test]
    fn sv_bounds_examples() {
        let b = gaussian_sv_bounds(50, 10, 2.0, 1.0).unwrap();
        assert!((b.lower - 1.9088).abs() < 1e-4);
        assert!((b.upper - 12.233).abs() < 1e-3);
        assert!((b.prob - 0.8647).abs() < 1e-4);
        assert_eq!(gaussian_sv_bounds(50, 10, 0.0, 1.0).unwrap().prob, 0.0);
        let q = gaussian_sv_bounds(50, 10, 2.0, 0.25).unwrap();
        assert!((q.lower - b.lower / 2.0).abs() < 1e-15);
        assert!((q.upper - b.upper / 2.0).abs() < 1e-15);
    }
}
