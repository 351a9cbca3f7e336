//! Synthetic low-rank targets `A = U Σ Vᵀ` with prescribed spectra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns, DenseMatrix, Rng};

/// Stream id reserved for target matrices; trial streams count up from zero.
pub const MATRIX_STREAM: u64 = 1 << 63;

/// Dimensions and nonzero singular values of a synthetic target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub m: usize,
    pub n: usize,
    pub values: Vec<f64>,
}

impl SpectrumSpec {
    pub fn explicit(m: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        let spec = Self { m, n, values };
        spec.validate()?;
        Ok(spec)
    }

    /// `r` values evenly spaced from `sigma1` down to `sigmar`.
    pub fn linspace(m: usize, n: usize, sigma1: f64, sigmar: f64, r: usize) -> Result<Self> {
        let values = match r {
            0 => return Err(Error::Argument("spectrum rank must be at least 1".into())),
            1 if sigma1 != sigmar => {
                return Err(Error::Argument(
                    "a rank-1 linspace spectrum needs sigma1 == sigmar".into(),
                ))
            }
            1 => vec![sigma1],
            _ => {
                let step = (sigma1 - sigmar) / (r - 1) as f64;
                (0..r).map(|i| sigma1 - step * i as f64).collect()
            }
        };
        Self::explicit(m, n, values)
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.values.len();
        if self.m == 0 || self.n == 0 {
            return Err(Error::Argument("spectrum dimensions must be positive".into()));
        }
        if r == 0 || r > self.m.min(self.n) {
            return Err(Error::Argument(format!(
                "rank {r} must be in 1..={}",
                self.m.min(self.n)
            )));
        }
        if self.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Argument("singular values must be positive and finite".into()));
        }
        if self.values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Argument("singular values must be non-increasing".into()));
        }
        Ok(())
    }

    /// `Σ σᵢ²`
    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Draw `A = U Σ Vᵀ` with Haar `U` (from `rng`'s stream) and `V` (from the
/// next stream id on the same seed).
pub fn make_matrix(rng: &Rng, spec: &SpectrumSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let r = spec.rank();
    let mut u_rng = Rng::new(rng.seed(), rng.stream_id());
    let mut v_rng = Rng::new(rng.seed(), rng.stream_id().wrapping_add(1));
    let u = orthonormal_columns(&mut u_rng, spec.m, r)?;
    let v = orthonormal_columns(&mut v_rng, spec.n, r)?;
    let us = DenseMatrix::from_fn(spec.m, r, |i, j| u.get(i, j) * spec.values[j])?;
    us.matmul_t(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_values() {
        let s = SpectrumSpec::linspace(100, 100, 1.0, 0.5, 5).unwrap();
        assert_eq!(s.values, vec![1.0, 0.875, 0.75, 0.625, 0.5]);
        let s = SpectrumSpec::linspace(100, 100, 1.0, 0.1, 5).unwrap();
        let want = [1.0, 0.775, 0.55, 0.325, 0.1];
        for (a, b) in s.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(SpectrumSpec::linspace(5, 5, 1.0, 0.5, 1).is_err());
        assert!(SpectrumSpec::linspace(5, 5, 1.0, 1.0, 1).is_ok());
        assert!(SpectrumSpec::explicit(3, 4, vec![1.0; 4]).is_err());
        assert!(SpectrumSpec::explicit(3, 4, vec![0.5, 1.0]).is_err());
        assert!(SpectrumSpec::explicit(3, 4, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SpectrumSpec::linspace(10, 8, 1.0, 0.5, 3).unwrap();
        let a = make_matrix(&Rng::new(5, MATRIX_STREAM), &spec).unwrap();
        let b = make_matrix(&Rng::new(5, MATRIX_STREAM), &spec).unwrap();
        let c = make_matrix(&Rng::new(6, MATRIX_STREAM), &spec).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
