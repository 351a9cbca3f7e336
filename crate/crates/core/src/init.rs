//! Initial factor pairs `(X₀, Y₀)`.
//!
//! The unbalanced scheme places `X₀ = A·Φ_X / (√η·C·σ₁(A))` in the column
//! space of `A` and shrinks `Y₀ = √η·D·σ₁(A)·Φ_Y`, with `Φ_X ~ N(0, 1/d)` and
//! `Φ_Y ~ N(0, 1/n)` entrywise. Two baselines share its random draws:
//!
//! * `BalancedColspan` keeps the same product `X₀Y₀ᵀ` but splits its scale
//!   evenly between the factors (`σ₁(X₀) = σ₁(Y₀)`).
//! * `PlainGaussian` replaces `A·Φ_X` with an `m × d` Gaussian, then matches
//!   the product norm `‖X₀Y₀ᵀ‖_F` of the other schemes with balanced factors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian_matrix, singular_values, DenseMatrix, Rng};
use crate::objective::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    Unbalanced,
    BalancedColspan,
    PlainGaussian,
}

impl InitScheme {
    pub const ALL: [InitScheme; 3] = [
        InitScheme::Unbalanced,
        InitScheme::BalancedColspan,
        InitScheme::PlainGaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitScheme::Unbalanced => "unbalanced",
            InitScheme::BalancedColspan => "balanced-colspan",
            InitScheme::PlainGaussian => "plain-gaussian",
        }
    }

    /// Whether `X₀` is placed in ColSpan(A).
    pub fn in_colspan(self) -> bool {
        !matches!(self, InitScheme::PlainGaussian)
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InitScheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| Error::config("scheme", format!("unknown scheme `{s}`")))
    }
}

/// Constants of the initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    /// `C ≥ 1`
    pub c: f64,
    /// `ν ∈ (0, 1)`
    pub nu: f64,
    /// `D ≤ C·ν/9`
    pub d_scale: f64,
    /// Step size `η`; the unbalanced scales depend on it.
    pub eta: f64,
    /// Factor rank `d`.
    pub d: usize,
    pub scheme: InitScheme,
}

impl InitConfig {
    /// Config with the largest admissible `D = C·ν/9`.
    pub fn new(c: f64, nu: f64, eta: f64, d: usize, scheme: InitScheme) -> Result<Self> {
        let cfg = Self {
            c,
            nu,
            d_scale: c * nu / 9.0,
            eta,
            d,
            scheme,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_d_scale(mut self, d_scale: f64) -> Result<Self> {
        self.d_scale = d_scale;
        self.validate()?;
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: InitScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(Error::Argument(format!("C must be >= 1, got {}", self.c)));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::Argument(format!("nu must lie in (0, 1), got {}", self.nu)));
        }
        if !(self.d_scale > 0.0 && self.d_scale <= self.c * self.nu / 9.0) {
            return Err(Error::Argument(format!(
                "D must lie in (0, C·nu/9 = {}], got {}",
                self.c * self.nu / 9.0,
                self.d_scale
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Argument(format!("eta must be positive, got {}", self.eta)));
        }
        if self.d == 0 {
            return Err(Error::Argument("factor rank d must be positive".into()));
        }
        Ok(())
    }

    fn check_against(&self, problem: &Problem) -> Result<()> {
        self.validate()?;
        if self.d <= problem.rank() {
            return Err(Error::Infeasible(format!(
                "factor rank d = {} must exceed rank(A) = {}",
                self.d,
                problem.rank()
            )));
        }
        Ok(())
    }
}

/// `(Φ_X, Φ_Y)`, both `n × d`, drawn in that order from `rng`.
fn draw_sketches(rng: &mut Rng, n: usize, d: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let phi_x = gaussian_matrix(rng, n, d, 1.0 / d as f64)?;
    let phi_y = gaussian_matrix(rng, n, d, 1.0 / n as f64)?;
    Ok((phi_x, phi_y))
}

fn unbalanced_from(
    problem: &Problem,
    cfg: &InitConfig,
    phi_x: &DenseMatrix,
    phi_y: &DenseMatrix,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let s1 = problem.sigma1();
    let root_eta = cfg.eta.sqrt();
    let x0 = problem.matrix().matmul(phi_x)?.scale(1.0 / (root_eta * cfg.c * s1))?;
    let y0 = phi_y.scale(root_eta * cfg.d_scale * s1)?;
    Ok((x0, y0))
}

/// Rescale `(X, Y) → (κX, Y/κ)` so both factors share the same `σ₁`.
fn rebalance(x: &DenseMatrix, y: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let sx = singular_values(x)[0];
    let sy = singular_values(y)[0];
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::Degenerate("cannot rebalance a zero factor".into()));
    }
    let kappa = (sy / sx).sqrt();
    Ok((x.scale(kappa)?, y.scale(1.0 / kappa)?))
}

pub fn init_unbalanced(rng: &mut Rng, problem: &Problem, cfg: &InitConfig) -> Result<(DenseMatrix, DenseMatrix)> {
    cfg.check_against(problem)?;
    let (phi_x, phi_y) = draw_sketches(rng, problem.cols(), cfg.d)?;
    unbalanced_from(problem, cfg, &phi_x, &phi_y)
}

pub fn init_balanced_colspan(
    rng: &mut Rng,
    problem: &Problem,
    cfg: &InitConfig,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let (x0, y0) = init_unbalanced(rng, problem, cfg)?;
    rebalance(&x0, &y0)
}

pub fn init_plain_gaussian(
    rng: &mut Rng,
    problem: &Problem,
    cfg: &InitConfig,
) -> Result<(DenseMatrix, DenseMatrix)> {
    cfg.check_against(problem)?;
    let (phi_x, phi_y) = draw_sketches(rng, problem.cols(), cfg.d)?;
    let (xu, yu) = unbalanced_from(problem, cfg, &phi_x, &phi_y)?;
    let target = xu.matmul_t(&yu)?.frobenius_norm();

    let g = gaussian_matrix(rng, problem.rows(), cfg.d, 1.0 / cfg.d as f64)?;
    let raw = g.matmul_t(&phi_y)?.frobenius_norm();
    if raw == 0.0 || target == 0.0 {
        return Err(Error::Degenerate("zero initial product".into()));
    }
    let k = target / raw;
    let (x0, y0) = rebalance(&g, &phi_y)?;
    Ok((x0.scale(k.sqrt())?, y0.scale(k.sqrt())?))
}

/// Dispatch on `cfg.scheme`.
pub fn initialize(rng: &mut Rng, problem: &Problem, cfg: &InitConfig) -> Result<(DenseMatrix, DenseMatrix)> {
    match cfg.scheme {
        InitScheme::Unbalanced => init_unbalanced(rng, problem, cfg),
        InitScheme::BalancedColspan => init_balanced_colspan(rng, problem, cfg),
        InitScheme::PlainGaussian => init_plain_gaussian(rng, problem, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_matrix, SpectrumSpec, MATRIX_STREAM};

    fn small_problem() -> Problem {
        let spec = SpectrumSpec::linspace(20, 15, 1.0, 0.5, 3).unwrap();
        Problem::new(make_matrix(&Rng::new(1, MATRIX_STREAM), &spec).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        let s = InitScheme::Unbalanced;
        assert!(InitConfig::new(0.5, 0.1, 0.1, 4, s).is_err());
        assert!(InitConfig::new(4.0, 1.0, 0.1, 4, s).is_err());
        assert!(InitConfig::new(4.0, 0.1, 0.0, 4, s).is_err());
        let cfg = InitConfig::new(4.0, 0.1, 0.1, 4, s).unwrap();
        assert!(cfg.with_d_scale(1.0).is_err());
        assert!(cfg.with_d_scale(0.01).is_ok());
    }

    #[test]
    fn d_must_exceed_rank() {
        let p = small_problem();
        let cfg = InitConfig::new(4.0, 0.1, 0.1, 3, InitScheme::Unbalanced).unwrap();
        assert!(matches!(
            init_unbalanced(&mut Rng::new(0, 0), &p, &cfg),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in InitScheme::ALL {
            assert_eq!(s.name().parse::<InitScheme>().unwrap(), s);
        }
        assert!("orange".parse::<InitScheme>().is_err());
    }

    #[test]
    fn plain_gaussian_matches_product_norm() {
        let p = small_problem();
        let cfg = InitConfig::new(4.0, 0.1, 0.05, 4, InitScheme::Unbalanced).unwrap();
        let (xu, yu) = init_unbalanced(&mut Rng::new(3, 1), &p, &cfg).unwrap();
        let (xg, yg) = init_plain_gaussian(&mut Rng::new(3, 1), &p, &cfg).unwrap();
        let nu = xu.matmul_t(&yu).unwrap().frobenius_norm();
        let ng = xg.matmul_t(&yg).unwrap().frobenius_norm();
        assert!((nu - ng).abs() <= 1e-12 * nu);
    }
}
