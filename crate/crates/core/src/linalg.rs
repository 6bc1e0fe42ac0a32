//! Dense linear algebra helpers shared by the model, steppers and reductors.

use alloc::vec::Vec;

use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn};
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

/// State dimension above which left singular vectors are computed from the
/// snapshot Gram matrix instead of a dense SVD of the snapshot matrix.
pub const DENSE_SVD_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Symmetric positive definite mass (or energy) matrix.
///
/// Diagonal matrices keep a diagonal representation, which makes products and
/// solves exact elementwise operations. A dense matrix whose off-diagonal
/// entries are all exactly zero is stored as diagonal too.
#[derive(Debug, Clone)]
pub enum MassMatrix {
    Diagonal(DVector<f64>),
    Dense {
        matrix: DMatrix<f64>,
        factor: Cholesky<f64, Dyn>,
    },
}

impl MassMatrix {
    pub fn from_diagonal(diag: DVector<f64>) -> Result<Self, LinalgError> {
        if diag.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(LinalgError::NotPositiveDefinite);
        }
        Ok(MassMatrix::Diagonal(diag))
    }

    pub fn from_dense(matrix: DMatrix<f64>) -> Result<Self, LinalgError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(LinalgError::Dimension {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let n = matrix.nrows();
        let diagonal_only = (0..n).all(|j| (0..n).all(|i| i == j || matrix[(i, j)] == 0.0));
        if diagonal_only {
            return Self::from_diagonal(matrix.diagonal());
        }
        let factor = Cholesky::new(matrix.clone()).ok_or(LinalgError::NotPositiveDefinite)?;
        Ok(MassMatrix::Dense { matrix, factor })
    }

    pub fn dim(&self) -> usize {
        match self {
            MassMatrix::Diagonal(d) => d.len(),
            MassMatrix::Dense { matrix, .. } => matrix.nrows(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, MassMatrix::Diagonal(_))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            MassMatrix::Diagonal(d) => DMatrix::from_diagonal(d),
            MassMatrix::Dense { matrix, .. } => matrix.clone(),
        }
    }

    pub fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            MassMatrix::Diagonal(d) => d.component_mul(x),
            MassMatrix::Dense { matrix, .. } => matrix * x,
        }
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            MassMatrix::Diagonal(d) => rhs.component_div(d),
            MassMatrix::Dense { factor, .. } => factor.solve(rhs),
        }
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            MassMatrix::Diagonal(d) => {
                let mut out = rhs.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row /= d[i];
                }
                out
            }
            MassMatrix::Dense { factor, .. } => factor.solve(rhs),
        }
    }

    /// `Vᵀ M V` for a basis `V`.
    pub fn congruence(&self, basis: &DMatrix<f64>) -> Result<MassMatrix, LinalgError> {
        let scaled = match self {
            MassMatrix::Diagonal(d) => {
                let mut out = basis.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                out
            }
            MassMatrix::Dense { matrix, .. } => matrix * basis,
        };
        MassMatrix::from_dense(basis.transpose() * scaled)
    }

    /// `self - scale * other`, densified.
    pub fn minus_scaled(&self, scale: f64, other: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = other * (-scale);
        match self {
            MassMatrix::Diagonal(d) => {
                for i in 0..d.len() {
                    out[(i, i)] += d[i];
                }
            }
            MassMatrix::Dense { matrix, .. } => out += matrix,
        }
        out
    }
}

/// Left singular vectors and singular values of `x`, sorted descending.
///
/// Uses a dense thin SVD up to [`DENSE_SVD_LIMIT`] rows and the Gram-matrix
/// (method of snapshots) route above it.
pub fn left_singular(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    left_singular_with_limit(x, DENSE_SVD_LIMIT)
}

pub fn left_singular_with_limit(x: &DMatrix<f64>, dense_limit: usize) -> (DMatrix<f64>, Vec<f64>) {
    let (n, k) = x.shape();
    if n == 0 || k == 0 {
        return (DMatrix::zeros(n, 0), Vec::new());
    }
    if n <= dense_limit {
        let svd = x.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        sort_pairs(u, svd.singular_values.iter().copied().collect())
    } else {
        let gram = x.transpose() * x;
        let eig = gram.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut cols = Vec::new();
        let mut sigmas = Vec::new();
        let top = eig.eigenvalues[order[0]].max(0.0);
        for &j in &order {
            let lambda = eig.eigenvalues[j];
            if !(lambda > top * 1e-28) {
                break;
            }
            let sigma = lambda.sqrt();
            let col = (x * eig.eigenvectors.column(j)) / sigma;
            cols.push(col);
            sigmas.push(sigma);
        }
        let u = if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        (u, sigmas)
    }
}

fn sort_pairs(u: DMatrix<f64>, sigma: Vec<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let cols: Vec<DVector<f64>> = order.iter().map(|&j| u.column(j).into_owned()).collect();
    let sorted = order.iter().map(|&j| sigma[j]).collect();
    let u = if cols.is_empty() {
        DMatrix::zeros(u.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    };
    (u, sorted)
}

/// Number of singular values above the usual rank tolerance
/// `σ₁ · max(rows, cols) · ε`.
pub fn numerical_rank(sigma: &[f64], rows: usize, cols: usize) -> usize {
    let Some(&top) = sigma.first() else {
        return 0;
    };
    if !(top > 0.0) {
        return 0;
    }
    let tol = top * (rows.max(cols) as f64) * f64::EPSILON;
    sigma.iter().take_while(|&&s| s > tol).count()
}

/// Flips column signs so that each column's largest-magnitude entry is
/// positive (first such entry on ties).
pub fn normalize_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let mut best = 0.0;
        let mut sign = 1.0;
        for &val in col.iter() {
            if val.abs() > best {
                best = val.abs();
                sign = if val < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Largest absolute entry of `VᵀV - I`.
pub fn orthonormality_defect(v: &DMatrix<f64>) -> f64 {
    let gram = v.transpose() * v;
    let mut worst: f64 = 0.0;
    for j in 0..gram.ncols() {
        for i in 0..gram.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose
/// remaining norm falls below `drop_tol` times their original norm are
/// discarded.
pub fn orthonormalize(columns: &[DVector<f64>], drop_tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for col in columns {
        let original = col.norm();
        if !(original > 0.0) || !original.is_finite() {
            continue;
        }
        let mut w = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&w);
                w.axpy(-proj, q, 1.0);
            }
        }
        let remaining = w.norm();
        if remaining > drop_tol * original {
            basis.push(w / remaining);
        }
    }
    basis
}

/// Cosines of the principal angles between the column spans of two
/// orthonormal bases, descending.
pub fn principal_cosines(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let m = a.transpose() * b;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().map(|v| v.min(1.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest principal angle (radians) between two equally wide orthonormal
/// bases.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let cos = principal_cosines(a, b);
    let smallest = cos.last().copied().unwrap_or(1.0);
    // sin-based formula keeps precision for tiny angles
    let q = b - a * (a.transpose() * b);
    let sin = if q.ncols() == 0 {
        0.0
    } else {
        q.svd(false, false).singular_values.iter().fold(0.0f64, |m, &s| m.max(s))
    };
    if smallest > 0.7 {
        sin.min(1.0).asin()
    } else {
        smallest.max(-1.0).acos()
    }
}

/// Eigenvalues and eigenvectors of a general real square matrix.
///
/// Eigenvalues come from the real Schur form; each eigenvector is obtained by
/// complex inverse iteration on the shifted matrix.
pub fn eigen_pairs(a: &DMatrix<f64>) -> Vec<(Complex<f64>, DVector<Complex<f64>>)> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let values = a.clone().schur().complex_eigenvalues();
    let ac: DMatrix<Complex<f64>> = a.map(|v| Complex::new(v, 0.0));
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    for lambda in values.iter().copied() {
        // perturbed shift keeps the factorization nonsingular
        let shift = lambda + Complex::new(scale * 1e-10, scale * 1e-10);
        let mut shifted = ac.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let mut v: DVector<Complex<f64>> =
            DVector::from_fn(n, |i, _| Complex::new(1.0 + (i as f64) * 0.137, 0.5 - (i as f64) * 0.071));
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(next) => {
                    let norm = next.norm();
                    if !(norm > 0.0) || !norm.is_finite() {
                        break;
                    }
                    v = next / Complex::new(norm, 0.0);
                }
                None => break,
            }
        }
        out.push((lambda, v));
    }
    out
}
