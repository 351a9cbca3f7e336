//! Dense singular value decomposition by one-sided (Hestenes) Jacobi.
//!
//! One-sided Jacobi orthogonalizes the columns of the input by plane
//! rotations; on convergence the column norms are the singular values and
//! the accumulated rotations form `V`. It is slower than bidiagonal QR but
//! computes small singular values to high relative accuracy, and the
//! matrices handled here are at most a few hundred columns wide.

use super::dense::{dot, DenseMatrix};

const ROTATION_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U · diag(σ) · Vᵀ` with `k = min(rows, cols)` components.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `rows × k`, orthonormal columns.
    pub u: DenseMatrix,
    /// Length `k`, non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `k × cols`, orthonormal rows.
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// Number of singular values above `rel_tol · σ₁`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let s1 = self.singular_values[0];
        if s1 == 0.0 {
            return 0;
        }
        self.singular_values.iter().take_while(|&&s| s > rel_tol * s1).count()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.singular_values.len();
        let us = DenseMatrix::from_raw(
            self.u.rows(),
            k,
            (0..self.u.rows())
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .map(|(i, j)| self.u.get(i, j) * self.singular_values[j])
                .collect(),
        );
        us.matmul(&self.vt).expect("svd factors are conformant and finite")
    }
}

/// Column-major working copy: `cols[j]` is column `j` of the tall matrix.
struct Columns {
    rows: usize,
    cols: Vec<Vec<f64>>,
}

impl Columns {
    fn of(m: &DenseMatrix) -> Self {
        let cols = (0..m.cols()).map(|j| m.column(j)).collect();
        Self { rows: m.rows(), cols }
    }
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yp) = (*x, *y);
        *x = c * xp - s * yp;
        *y = s * xp + c * yp;
    }
}

fn pair_mut(v: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (lo, hi) = v.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

/// Orthogonalize columns in place; returns the accumulated right rotations
/// (as columns of V) when requested.
fn jacobi_sweeps(w: &mut Columns, want_v: bool) -> Option<Vec<Vec<f64>>> {
    let n = w.cols.len();
    let mut v: Option<Vec<Vec<f64>>> = want_v.then(|| {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect()
    });
    let mut norms: Vec<f64> = w.cols.iter().map(|c| dot(c, c)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&w.cols[p], &w.cols[q]);
                if gamma.abs() <= ROTATION_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (cp, cq) = pair_mut(&mut w.cols, p, q);
                rotate(cp, cq, c, s);
                norms[p] = dot(cp, cp);
                norms[q] = dot(cq, cq);
                if let Some(v) = v.as_mut() {
                    let (vp, vq) = pair_mut(v, p, q);
                    rotate(vp, vq, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

/// Orthonormalize `candidate` against `basis` (two Gram-Schmidt passes).
/// Returns `None` if the candidate lies (numerically) in their span.
fn orthonormal_complement(basis: &[Vec<f64>], mut candidate: Vec<f64>) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, &candidate);
            for (c, bi) in candidate.iter_mut().zip(b) {
                *c -= proj * bi;
            }
        }
    }
    let norm = dot(&candidate, &candidate).sqrt();
    (norm > 1e-8).then(|| candidate.into_iter().map(|c| c / norm).collect())
}

/// Thin SVD of a matrix with `rows >= cols`.
fn svd_tall(m: &DenseMatrix, want_vectors: bool) -> (Vec<Vec<f64>>, Vec<f64>, Option<Vec<Vec<f64>>>) {
    let mut w = Columns::of(m);
    let v = jacobi_sweeps(&mut w, want_vectors);
    let n = w.cols.len();

    let mut order: Vec<usize> = (0..n).collect();
    let sigma: Vec<f64> = w.cols.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let sorted: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();

    if !want_vectors {
        return (Vec::new(), sorted, None);
    }

    let v = v.expect("requested");
    let s1 = sorted[0];
    let cutoff = 1e-13 * s1.max(f64::MIN_POSITIVE);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if sigma[j] > cutoff {
            u_cols.push(w.cols[j].iter().map(|x| x / sigma[j]).collect());
        } else {
            u_cols.push(Vec::new());
            deficient.push(slot);
        }
    }
    // Complete U for numerically zero singular values from the canonical basis.
    let mut e = 0;
    for slot in deficient {
        loop {
            let accepted: Vec<Vec<f64>> = u_cols.iter().filter(|c| !c.is_empty()).cloned().collect();
            let mut cand = vec![0.0; w.rows];
            cand[e % w.rows] = 1.0;
            e += 1;
            if let Some(col) = orthonormal_complement(&accepted, cand) {
                u_cols[slot] = col;
                break;
            }
        }
    }
    let v_sorted = order.iter().map(|&j| v[j].clone()).collect();
    (u_cols, sorted, Some(v_sorted))
}

fn columns_to_matrix(rows: usize, cols: &[Vec<f64>]) -> DenseMatrix {
    let k = cols.len();
    let mut data = vec![0.0; rows * k];
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            data[i * k + j] = x;
        }
    }
    DenseMatrix::from_raw(rows, k, data)
}

fn columns_to_rows(cols: &[Vec<f64>]) -> DenseMatrix {
    let k = cols.len();
    let n = cols[0].len();
    DenseMatrix::from_raw(k, n, cols.concat())
}

/// Full thin SVD.
pub fn svd(m: &DenseMatrix) -> SvdResult {
    if m.rows() >= m.cols() {
        let (u, s, v) = svd_tall(m, true);
        SvdResult {
            u: columns_to_matrix(m.rows(), &u),
            singular_values: s,
            vt: columns_to_rows(&v.expect("requested")),
        }
    } else {
        // Mᵀ = U' Σ V'ᵀ  ⇒  M = V' Σ U'ᵀ
        let (u, s, v) = svd_tall(&m.transpose(), true);
        let v = v.expect("requested");
        SvdResult {
            u: columns_to_matrix(m.rows(), &v),
            singular_values: s,
            vt: columns_to_rows(&u),
        }
    }
}

/// All `min(rows, cols)` singular values, non-increasing.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    if m.rows() >= m.cols() {
        svd_tall(m, false).1
    } else {
        svd_tall(&m.transpose(), false).1
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, non-increasing.
///
/// Only the lower triangle's symmetric counterpart is assumed; the input
/// must be square.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigenvalues needs a square matrix");
    let mut s: Vec<f64> = a.data().to_vec();
    let at = |s: &Vec<f64>, i: usize, j: usize| s[i * n + j];
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| at(&s, i, j).powi(2))
            .sum();
        let diag: f64 = (0..n).map(|i| at(&s, i, i).powi(2)).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = at(&s, p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (at(&s, q, q) - at(&s, p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = s[k * n + p];
                    let akq = s[k * n + q];
                    s[k * n + p] = c * akp - sn * akq;
                    s[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = s[p * n + k];
                    let aqk = s[q * n + k];
                    s[p * n + k] = c * apk - sn * aqk;
                    s[q * n + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| s[i * n + i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `σ₁(X)²` from the eigenvalues of the small Gram matrix `XᵀX`.
///
/// Cheap for tall-skinny factors, where a full SVD per iteration would
/// dominate the cost of an AGD step.
pub fn spectral_norm_sq_gram(x: &DenseMatrix) -> f64 {
    let gram = x.t_matmul(x).expect("XᵀX is always conformant");
    symmetric_eigenvalues(&gram)[0].max(0.0)
}
