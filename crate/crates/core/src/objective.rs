//! The factorization objective `f(X, Y) = ½‖XYᵀ − A‖_F²`, its gradients,
//! residuals and diagnostic metrics.

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix};

/// Singular values below `RANK_REL_TOL · σ₁` count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

fn check_factors(x: &DenseMatrix, y: &DenseMatrix, a: &DenseMatrix) -> Result<()> {
    if x.rows() != a.rows() || y.rows() != a.cols() || x.cols() != y.cols() {
        return Err(Error::Argument(format!(
            "factor shapes {:?}, {:?} incompatible with target {:?}",
            x.shape(),
            y.shape(),
            a.shape()
        )));
    }
    Ok(())
}

/// `R = XYᵀ − A`
pub fn residual(x: &DenseMatrix, y: &DenseMatrix, a: &DenseMatrix) -> Result<DenseMatrix> {
    check_factors(x, y, a)?;
    x.matmul_t(y)?.sub(a)
}

pub fn loss(x: &DenseMatrix, y: &DenseMatrix, a: &DenseMatrix) -> Result<f64> {
    Ok(0.5 * residual(x, y, a)?.frobenius_norm_sq())
}

/// `∇_X f = (XYᵀ − A) Y`
pub fn grad_x(x: &DenseMatrix, y: &DenseMatrix, a: &DenseMatrix) -> Result<DenseMatrix> {
    residual(x, y, a)?.matmul(y)
}

/// `∇_Y f = (XYᵀ − A)ᵀ X`
pub fn grad_y(x: &DenseMatrix, y: &DenseMatrix, a: &DenseMatrix) -> Result<DenseMatrix> {
    residual(x, y, a)?.t_matmul(x)
}

/// `‖XᵀX − YᵀY‖_F`
pub fn balancedness(x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    if x.cols() != y.cols() {
        return Err(Error::Argument(format!(
            "balancedness needs equal column counts, got {} and {}",
            x.cols(),
            y.cols()
        )));
    }
    Ok(x.t_matmul(x)?.sub(&y.t_matmul(y)?)?.frobenius_norm())
}

/// The two residuals of one alternating step.
///
/// `r_half` is stored transposed (`n × m`), matching the orientation in
/// which the Y-gradient is formed.
#[derive(Debug, Clone)]
pub struct Residuals {
    /// `X_t Y_tᵀ − A`
    pub r_full: DenseMatrix,
    /// `Y_t X_{t+1}ᵀ − Aᵀ`
    pub r_half: DenseMatrix,
}

impl Residuals {
    pub fn new(
        x_t: &DenseMatrix,
        y_t: &DenseMatrix,
        x_next: &DenseMatrix,
        a: &DenseMatrix,
    ) -> Result<Self> {
        check_factors(x_next, y_t, a)?;
        Ok(Self {
            r_full: residual(x_t, y_t, a)?,
            r_half: y_t.matmul_t(x_next)?.sub(&a.transpose())?,
        })
    }

    /// `f(X_t, Y_t)`
    pub fn f_full(&self) -> f64 {
        0.5 * self.r_full.frobenius_norm_sq()
    }

    /// `f(X_{t+1}, Y_t)`
    pub fn f_half(&self) -> f64 {
        0.5 * self.r_half.frobenius_norm_sq()
    }
}

/// A target matrix together with the spectral data every run needs.
#[derive(Debug, Clone)]
pub struct Problem {
    a: DenseMatrix,
    singular_values: Vec<f64>,
    rank: usize,
    frobenius_sq: f64,
    /// Orthonormal basis of ColSpan(A), `m × rank`.
    colspan_basis: DenseMatrix,
}

impl Problem {
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let f = svd(&a);
        let rank = f.numerical_rank(RANK_REL_TOL);
        if rank == 0 {
            return Err(Error::Degenerate("target matrix is zero (σ₁ = 0)".into()));
        }
        let colspan_basis = f.u.leading_columns(rank)?;
        Ok(Self {
            frobenius_sq: a.frobenius_norm_sq(),
            a,
            singular_values: f.singular_values,
            rank,
            colspan_basis,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Numerical rank `r`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn sigma1(&self) -> f64 {
        self.singular_values[0]
    }

    /// `σ_r(A)`, the smallest nonzero singular value.
    pub fn sigmar(&self) -> f64 {
        self.singular_values[self.rank - 1]
    }

    /// `‖A‖_F²`
    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_sq
    }

    pub fn colspan_basis(&self) -> &DenseMatrix {
        &self.colspan_basis
    }

    /// `‖(I − P_A) X‖_F / ‖X‖_F`, zero for `X = 0`.
    pub fn colspan_leak(&self, x: &DenseMatrix) -> Result<f64> {
        let norm = x.frobenius_norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let u = &self.colspan_basis;
        let proj = u.matmul(&u.t_matmul(x)?)?;
        Ok(x.sub(&proj)?.frobenius_norm() / norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gaussian_matrix, Rng};

    #[test]
    fn zero_factors_give_half_frobenius() {
        let a = DenseMatrix::from_diag(&[1.0, 0.5]).unwrap();
        let z = DenseMatrix::zeros(2, 1).unwrap();
        assert_eq!(loss(&z, &z, &a).unwrap(), 0.625);
    }

    #[test]
    fn exact_factorization_has_zero_loss() {
        let mut rng = Rng::new(1, 0);
        let x = gaussian_matrix(&mut rng, 4, 2, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 3, 2, 1.0).unwrap();
        let a = x.matmul_t(&y).unwrap();
        assert_eq!(loss(&x, &y, &a).unwrap(), 0.0);
        assert_eq!(grad_x(&x, &y, &a).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn elementwise_loss_oracle() {
        let mut rng = Rng::new(2, 0);
        let a = gaussian_matrix(&mut rng, 3, 3, 1.0).unwrap();
        let x = gaussian_matrix(&mut rng, 3, 2, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 3, 2, 1.0).unwrap();
        let mut brute = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let p: f64 = (0..2).map(|k| x.get(i, k) * y.get(j, k)).sum();
                brute += 0.5 * (p - a.get(i, j)).powi(2);
            }
        }
        assert!((loss(&x, &y, &a).unwrap() - brute).abs() <= 1e-12 * brute.max(1.0));
    }

    #[test]
    fn scalar_gradients() {
        let s = |v: f64| DenseMatrix::new(1, 1, vec![v]).unwrap();
        let (x, y, a) = (s(2.0), s(3.0), s(1.0));
        assert_eq!(grad_x(&x, &y, &a).unwrap().get(0, 0), 15.0);
        assert_eq!(grad_y(&x, &y, &a).unwrap().get(0, 0), 10.0);
    }

    #[test]
    fn zero_y_annihilates_grad_x() {
        let mut rng = Rng::new(3, 0);
        let a = gaussian_matrix(&mut rng, 5, 4, 1.0).unwrap();
        let x = gaussian_matrix(&mut rng, 5, 3, 1.0).unwrap();
        let y = DenseMatrix::zeros(4, 3).unwrap();
        let g = grad_x(&x, &y, &a).unwrap();
        assert_eq!(g.shape(), (5, 3));
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn balancedness_cases() {
        let mut rng = Rng::new(4, 0);
        let x = gaussian_matrix(&mut rng, 4, 2, 1.0).unwrap();
        assert_eq!(balancedness(&x, &x).unwrap(), 0.0);
        let two = DenseMatrix::from_diag(&[2.0]).unwrap();
        let one = DenseMatrix::from_diag(&[1.0]).unwrap();
        assert_eq!(balancedness(&two, &one).unwrap(), 3.0);
        let y = gaussian_matrix(&mut rng, 6, 2, 1.0).unwrap();
        // brute-force Gram difference
        let mut sq = 0.0;
        for p in 0..2 {
            for q in 0..2 {
                let gx: f64 = (0..4).map(|i| x.get(i, p) * x.get(i, q)).sum();
                let gy: f64 = (0..6).map(|i| y.get(i, p) * y.get(i, q)).sum();
                sq += (gx - gy).powi(2);
            }
        }
        assert!((balancedness(&x, &y).unwrap() - sq.sqrt()).abs() < 1e-12);
        assert!(balancedness(&x, &DenseMatrix::zeros(4, 3).unwrap()).is_err());
    }

    #[test]
    fn residuals_cross_check() {
        let mut rng = Rng::new(5, 0);
        let a = gaussian_matrix(&mut rng, 5, 4, 1.0).unwrap();
        let x = gaussian_matrix(&mut rng, 5, 2, 1.0).unwrap();
        let y = gaussian_matrix(&mut rng, 4, 2, 1.0).unwrap();
        let x1 = x.axpy(-0.1, &grad_x(&x, &y, &a).unwrap()).unwrap();
        let r = Residuals::new(&x, &y, &x1, &a).unwrap();
        let direct = loss(&x1, &y, &a).unwrap();
        assert!((r.f_half() - direct).abs() <= 1e-12 * direct);
        assert!((r.f_full() - loss(&x, &y, &a).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_argument_error() {
        let a = DenseMatrix::zeros(3, 3).unwrap();
        let x = DenseMatrix::zeros(2, 1).unwrap();
        let y = DenseMatrix::zeros(3, 1).unwrap();
        assert!(matches!(loss(&x, &y, &a), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_problem_is_degenerate() {
        let z = DenseMatrix::zeros(3, 3).unwrap();
        assert!(matches!(Problem::new(z), Err(Error::Degenerate(_))));
    }
}
