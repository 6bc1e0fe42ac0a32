use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use super::pod::singular_pairs;
use super::{Basis, ReductorError, ReductorId, SnapshotSet};
use crate::linalg::{eigen_pairs, numerical_rank};

/// Relative norm below which a candidate column counts as dependent.
const DROP_TOL: f64 = 1e-8;

struct Dmd {
    eigenvalues: Vec<Complex<f64>>,
    modes: Vec<DVector<Complex<f64>>>,
}

/// Shifted pairs `(X₀, X₁)` taken inside each block only.
fn pairs(blocks: &[DMatrix<f64>]) -> Result<(DMatrix<f64>, DMatrix<f64>), ReductorError> {
    let n = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let mut total = 0;
    for (i, b) in blocks.iter().enumerate() {
        if b.ncols() < 2 {
            return Err(ReductorError::TooFewSnapshots { block: i });
        }
        total += b.ncols() - 1;
    }
    let mut x0 = DMatrix::zeros(n, total);
    let mut x1 = DMatrix::zeros(n, total);
    let mut at = 0;
    for b in blocks {
        let k = b.ncols() - 1;
        x0.columns_mut(at, k).copy_from(&b.columns(0, k));
        x1.columns_mut(at, k).copy_from(&b.columns(1, k));
        at += k;
    }
    Ok((x0, x1))
}

fn decompose(blocks: &[DMatrix<f64>]) -> Result<Dmd, ReductorError> {
    let (x0, x1) = pairs(blocks)?;
    let svd = x0.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    // nalgebra does not sort singular values
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = numerical_rank(&sigma, x0.nrows(), x0.ncols());
    if rank == 0 {
        return Err(ReductorError::DegenerateTraining);
    }
    let ur = DMatrix::from_columns(&order[..rank].iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    // W Σ⁻¹
    let w_sinv = DMatrix::from_columns(
        &order[..rank]
            .iter()
            .zip(&sigma)
            .map(|(&i, s)| vt.row(i).transpose() / *s)
            .collect::<Vec<_>>(),
    );
    let lifted = &x1 * &w_sinv;
    let a_tilde = ur.transpose() * &lifted;
    let lifted_c = lifted.map(|v| Complex::new(v, 0.0));

    let mut pairs = eigen_pairs(&a_tilde);
    pairs.sort_by(|a, b| modulus(b.0).total_cmp(&modulus(a.0)));
    let eigenvalues = pairs.iter().map(|(l, _)| *l).collect();
    let modes = pairs.iter().map(|(_, v)| &lifted_c * v).collect();
    Ok(Dmd { eigenvalues, modes })
}

fn modulus(c: Complex<f64>) -> f64 {
    Float::hypot(c.re, c.im)
}

/// DMD eigenvalues of the primal snapshots, by decreasing modulus.
pub fn dmd_eigenvalues(snapshots: &SnapshotSet) -> Result<Vec<Complex<f64>>, ReductorError> {
    Ok(decompose(&snapshots.primal)?.eigenvalues)
}

/// Appends the part of `col` orthogonal to `basis` (two MGS passes) if it
/// is not negligible.
fn try_append(basis: &mut Vec<DVector<f64>>, col: &DVector<f64>) -> bool {
    let original = col.norm();
    if !(original > 0.0 && original.is_finite()) {
        return false;
    }
    let mut w = col.clone();
    for _ in 0..2 {
        for q in basis.iter() {
            let proj = q.dot(&w);
            w.axpy(-proj, q, 1.0);
        }
    }
    let rest = w.norm();
    if rest > DROP_TOL * original {
        basis.push(w / rest);
        true
    } else {
        false
    }
}

/// `dmd_r`: exact DMD modes ranked by `|λ|` (slowest first), split into
/// real and imaginary parts and orthonormalized. When the modes span fewer
/// than `r` directions the basis is completed with POD directions of the
/// same snapshots.
pub fn dmd_galerkin(snapshots: &SnapshotSet, r: usize) -> Result<Basis, ReductorError> {
    if r == 0 {
        return Err(ReductorError::ZeroOrder);
    }
    let n = snapshots.state_dim();
    let dmd = decompose(&snapshots.primal)?;
    let mut basis = Vec::new();
    let mut weights = Vec::new();
    for (lambda, mode) in dmd.eigenvalues.iter().zip(&dmd.modes) {
        if basis.len() >= r {
            break;
        }
        let re = mode.map(|c| c.re);
        let im = mode.map(|c| c.im);
        for part in [re, im] {
            if basis.len() < r && try_append(&mut basis, &part) {
                weights.push(modulus(*lambda));
            }
        }
    }
    if basis.len() < r {
        let (cols, _) = singular_pairs(&snapshots.weighted_primal());
        for c in &cols {
            if basis.len() >= r {
                break;
            }
            if try_append(&mut basis, c) {
                weights.push(0.0);
            }
        }
    }
    Ok(Basis::from_columns(ReductorId::DmdR, n, &basis, weights, r))
}
