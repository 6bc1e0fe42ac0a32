use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::pod::{singular_pairs, svd_basis};
use super::{Basis, ReductorError, ReductorId, SnapshotSet};
use crate::linalg::{left_singular, numerical_rank, DENSE_SVD_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdsVariant {
    /// Balanced concatenation of primal and dual snapshots.
    Ro,
    /// Empirical cross operator `X_C W X_Oᵀ` of the port-paired blocks.
    Wx,
    /// Cross operator of the aggregated (all ports summed) system.
    Wz,
}

/// `eds_ro_l`, `eds_wx_l` or `eds_wz_l`.
pub fn eds(snapshots: &SnapshotSet, variant: EdsVariant, r: usize) -> Result<Basis, ReductorError> {
    if r == 0 {
        return Err(ReductorError::ZeroOrder);
    }
    match variant {
        EdsVariant::Ro => {
            let (xc, xo) = (snapshots.weighted_primal(), snapshots.weighted_dual());
            let (tc, to) = (xc.norm(), xo.norm());
            if !(tc > 0.0 && to > 0.0) {
                return Err(ReductorError::DegenerateTraining);
            }
            let mut x = DMatrix::zeros(xc.nrows(), xc.ncols() + xo.ncols());
            x.columns_mut(0, xc.ncols()).copy_from(&(&xc / tc));
            x.columns_mut(xc.ncols(), xo.ncols()).copy_from(&(&xo / to));
            svd_basis(ReductorId::EdsRoL, &x, r)
        }
        EdsVariant::Wx => {
            if snapshots.primal.len() != snapshots.dual.len() {
                return Err(ReductorError::Inconsistent("cross operator needs one dual block per input port"));
            }
            let xc = snapshots.weighted_primal();
            let xo = snapshots.weighted_dual();
            cross_basis(ReductorId::EdsWxL, &xc, &xo, r, DENSE_SVD_LIMIT)
        }
        EdsVariant::Wz => {
            let (Some(p), Some(d)) = (&snapshots.aggregate_primal, &snapshots.aggregate_dual) else {
                return Err(ReductorError::Inconsistent("aggregated snapshots missing"));
            };
            let xc = snapshots.weighted(core::slice::from_ref(p));
            let xo = snapshots.weighted(core::slice::from_ref(d));
            cross_basis(ReductorId::EdsWzL, &xc, &xo, r, DENSE_SVD_LIMIT)
        }
    }
}

pub(crate) fn cross_basis(
    id: ReductorId,
    xc: &DMatrix<f64>,
    xo: &DMatrix<f64>,
    r: usize,
    dense_limit: usize,
) -> Result<Basis, ReductorError> {
    let (cols, sigma) = cross_left_singular(xc, xo, dense_limit);
    if cols.is_empty() {
        return Err(ReductorError::DegenerateTraining);
    }
    Ok(Basis::from_columns(id, xc.nrows(), &cols, sigma, r))
}

/// Left singular pairs of `xc · xoᵀ` up to numerical rank. Above
/// `dense_limit` rows the product is never formed: with thin factors
/// `xc = U_c S_c V_cᵀ`, `xo = U_o S_o V_oᵀ` the small core
/// `S_c V_cᵀ V_o S_o` is decomposed and lifted by `U_c`.
pub fn cross_left_singular(xc: &DMatrix<f64>, xo: &DMatrix<f64>, dense_limit: usize) -> (Vec<DVector<f64>>, Vec<f64>) {
    let n = xc.nrows();
    if n <= dense_limit {
        let w = xc * xo.transpose();
        let (u, sigma) = left_singular(&w);
        let rank = numerical_rank(&sigma, n, n).min(u.ncols());
        return (
            (0..rank).map(|j| u.column(j).into_owned()).collect(),
            sigma.into_iter().take(rank).collect(),
        );
    }
    let factors = |x: &DMatrix<f64>| {
        let (u, _) = singular_pairs(x);
        if u.is_empty() {
            return None;
        }
        let u = DMatrix::from_columns(&u);
        // S Vᵀ = Uᵀ X
        let svt = u.transpose() * x;
        Some((u, svt))
    };
    let (Some((uc, sc)), Some((_, so))) = (factors(xc), factors(xo)) else {
        return (Vec::new(), Vec::new());
    };
    let core = &sc * so.transpose();
    let svd = core.svd(true, false);
    let p = svd.u.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = numerical_rank(&sigma, n, n);
    let lifted = (0..rank).map(|k| &uc * p.column(order[k])).collect();
    (lifted, sigma.into_iter().take(rank).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_principal_angle, normalize_signs};
    use crate::reductors::pod;
    use alloc::vec;

    #[test]
    fn ro_equals_pod_for_identical_sets() {
        let x = DMatrix::from_fn(5, 7, |i, j| wave((i * i * 3 + j * 5 + i * j) as f64));
        let s = SnapshotSet::new(vec![x.clone()], vec![x], None, None, vec![0.5; 7]).unwrap();
        let a = eds(&s, EdsVariant::Ro, 4).unwrap();
        let b = pod(&s, 4).unwrap();
        assert!((a.matrix - b.matrix).amax() < 1e-12);
    }

    #[test]
    fn orthogonal_toy_keeps_both_directions() {
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let s = SnapshotSet::new(vec![e1], vec![e2], None, None, vec![1.0]).unwrap();
        let b = eds(&s, EdsVariant::Ro, 2).unwrap();
        assert_eq!(b.width(), 2);
        assert!(max_principal_angle(&b.matrix, &DMatrix::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn factored_cross_operator_matches_dense() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let xc = DMatrix::from_fn(30, 12, |_, _| rng.random::<f64>() - 0.5);
        let xo = DMatrix::from_fn(30, 12, |_, _| rng.random::<f64>() - 0.5);
        let (a, sa) = cross_left_singular(&xc, &xo, 1000);
        let (b, sb) = cross_left_singular(&xc, &xo, 0);
        assert_eq!(a.len(), b.len());
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x - y).abs() < 1e-10 * sa[0]);
        }
        let mut ma = DMatrix::from_columns(&a[..6]);
        let mut mb = DMatrix::from_columns(&b[..6]);
        normalize_signs(&mut ma);
        normalize_signs(&mut mb);
        assert!(max_principal_angle(&ma, &mb) < 1e-8);
    }

    fn wave(x: f64) -> f64 {
        num_traits::Float::sin(x)
    }
}
