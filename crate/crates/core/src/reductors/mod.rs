//! Galerkin reductors trained from simulation snapshots.
//!
//! | id         | basis                                                       |
//! |------------|-------------------------------------------------------------|
//! | `pod_r`    | leading left singular vectors of the primal snapshots       |
//! | `gopod_r`  | POD pairs re-ranked by `σ_i ‖C u_i‖`                        |
//! | `dmd_r`    | orthonormalized exact DMD modes, slowest first              |
//! | `eds_ro_l` | SVD of the balanced concatenation `[X_C/θ_C, X_O/θ_O]`      |
//! | `eds_wx_l` | left singular vectors of the empirical cross operator       |
//! | `eds_wz_l` | as `eds_wx_l` on the input/output-aggregated system         |
//!
//! Dual snapshots always come from the adjoint of the steady-state
//! linearization.

mod dmd;
mod eds;
mod pod;
mod projection;
mod snapshots;

pub use dmd::{dmd_eigenvalues, dmd_galerkin};
pub use eds::{eds, EdsVariant};
pub use pod::{gopod, pod};
pub use projection::{
    apply_gain_matching, galerkin_project, gain_mismatch, mean_abs, steady_gain, GainMismatch, Provenance,
    ReducedModel,
};
pub use snapshots::{
    aggregate_dual_block, aggregate_primal_block, collect_snapshots, dual_block, primal_block, quadrature_weights,
    SnapshotSet, TrainingInput, TrainingSpec, TRAINING_SCALE,
};

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::model::id_enum;
use crate::solvers::IntegrationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReductorId {
    PodR,
    GopodR,
    DmdR,
    EdsRoL,
    EdsWxL,
    EdsWzL,
}

id_enum!(ReductorId, "reductor", {
    PodR => "pod_r",
    GopodR => "gopod_r",
    DmdR => "dmd_r",
    EdsRoL => "eds_ro_l",
    EdsWxL => "eds_wx_l",
    EdsWzL => "eds_wz_l",
});

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductorError {
    #[error("degenerate training: all snapshots are zero")]
    DegenerateTraining,
    #[error("reduced order must be at least 1")]
    ZeroOrder,
    #[error("basis is not orthonormal (max |VᵀV − I| = {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("basis has {found} rows, model state has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("snapshot block {block} has fewer than 2 columns")]
    TooFewSnapshots { block: usize },
    #[error("snapshot blocks disagree: {0}")]
    Inconsistent(&'static str),
    #[error("training simulation for port {port} failed: {source}")]
    Training {
        port: String,
        #[source]
        source: IntegrationError,
    },
    #[error("model has no steady state; compute it before training")]
    NotCentered,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Orthonormal reduction basis, columns ordered by importance.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub reductor: ReductorId,
    /// `n × width`, orthonormal columns.
    pub matrix: DMatrix<f64>,
    /// Importance weights of the columns (singular values or `|λ|`).
    pub weights: Vec<f64>,
    /// Width originally requested when it exceeded the numerical rank.
    pub truncated_from: Option<usize>,
}

impl Basis {
    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn state_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The leading `r` columns (all of them when `r` exceeds the width).
    pub fn leading(&self, r: usize) -> DMatrix<f64> {
        self.matrix.columns(0, r.min(self.width())).into_owned()
    }

    pub(crate) fn from_columns(
        reductor: ReductorId,
        n: usize,
        columns: &[nalgebra::DVector<f64>],
        weights: Vec<f64>,
        requested: usize,
    ) -> Basis {
        let width = columns.len().min(requested);
        let mut matrix = if width == 0 {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&columns[..width])
        };
        crate::linalg::normalize_signs(&mut matrix);
        Basis {
            reductor,
            matrix,
            weights: weights.into_iter().take(width).collect(),
            truncated_from: (requested > width).then_some(requested),
        }
    }
}

/// Trains the basis of `id` at width `r` (capped at the numerical rank).
/// `output_map` is only used by `gopod_r`.
pub fn train(id: ReductorId, snapshots: &SnapshotSet, output_map: &DMatrix<f64>, r: usize) -> Result<Basis, ReductorError> {
    match id {
        ReductorId::PodR => pod(snapshots, r),
        ReductorId::GopodR => gopod(snapshots, output_map, r),
        ReductorId::DmdR => dmd_galerkin(snapshots, r),
        ReductorId::EdsRoL => eds(snapshots, EdsVariant::Ro, r),
        ReductorId::EdsWxL => eds(snapshots, EdsVariant::Wx, r),
        ReductorId::EdsWzL => eds(snapshots, EdsVariant::Wz, r),
    }
}

impl ReductorId {
    /// Whether training needs adjoint snapshots.
    pub fn needs_dual(self) -> bool {
        matches!(self, ReductorId::EdsRoL | ReductorId::EdsWxL)
    }

    /// Whether training needs the aggregated-system snapshots.
    pub fn needs_aggregate(self) -> bool {
        matches!(self, ReductorId::EdsWzL)
    }
}
