use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{Basis, ReductorError, ReductorId, SnapshotSet};
use crate::linalg::{left_singular, numerical_rank};

/// Left singular pairs of `x` up to its numerical rank.
pub(crate) fn singular_pairs(x: &DMatrix<f64>) -> (Vec<DVector<f64>>, Vec<f64>) {
    let (u, sigma) = left_singular(x);
    let rank = numerical_rank(&sigma, x.nrows(), x.ncols()).min(u.ncols());
    let cols = (0..rank).map(|j| u.column(j).into_owned()).collect();
    (cols, sigma.into_iter().take(rank).collect())
}

pub(crate) fn svd_basis(id: ReductorId, x: &DMatrix<f64>, r: usize) -> Result<Basis, ReductorError> {
    if r == 0 {
        return Err(ReductorError::ZeroOrder);
    }
    let (cols, sigma) = singular_pairs(x);
    if cols.is_empty() {
        return Err(ReductorError::DegenerateTraining);
    }
    Ok(Basis::from_columns(id, x.nrows(), &cols, sigma, r))
}

/// `pod_r`: leading left singular vectors of the weighted primal snapshots.
pub fn pod(snapshots: &SnapshotSet, r: usize) -> Result<Basis, ReductorError> {
    svd_basis(ReductorId::PodR, &snapshots.weighted_primal(), r)
}

/// `gopod_r`: POD pairs re-ranked by `η_i = σ_i ‖C u_i‖₂`, descending. The
/// sort is stable, so ties keep singular value order.
pub fn gopod(snapshots: &SnapshotSet, output_map: &DMatrix<f64>, r: usize) -> Result<Basis, ReductorError> {
    if r == 0 {
        return Err(ReductorError::ZeroOrder);
    }
    let x = snapshots.weighted_primal();
    if output_map.ncols() != x.nrows() {
        return Err(ReductorError::Dimension {
            expected: x.nrows(),
            found: output_map.ncols(),
        });
    }
    let (cols, sigma) = singular_pairs(&x);
    if cols.is_empty() {
        return Err(ReductorError::DegenerateTraining);
    }
    let eta: Vec<f64> = cols.iter().zip(&sigma).map(|(u, s)| s * (output_map * u).norm()).collect();
    let mut order: Vec<usize> = (0..cols.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]));
    let ranked: Vec<DVector<f64>> = order.iter().map(|&i| cols[i].clone()).collect();
    let weights = order.iter().map(|&i| eta[i]).collect();
    Ok(Basis::from_columns(ReductorId::GopodR, x.nrows(), &ranked, weights, r))
}
