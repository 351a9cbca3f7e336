//! Dense linear algebra and seeded sampling used by every other module.

mod dense;
mod random;
mod svd;

pub use dense::DenseMatrix;
pub use random::{gaussian_matrix, orthonormal_columns, Rng};
pub use svd::{singular_values, spectral_norm_sq_gram, svd, symmetric_eigenvalues, SvdResult};

/// `‖m‖_F`
pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    m.frobenius_norm()
}

/// `σ₁(m)`
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    m.spectral_norm()
}
