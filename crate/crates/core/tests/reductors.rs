mod common;

use gasmor_core::linalg::{max_principal_angle, MassMatrix};
use gasmor_core::reductors::{
    apply_gain_matching, collect_snapshots, dmd_eigenvalues, eds, galerkin_project, gain_mismatch, gopod, pod,
    steady_gain, EdsVariant, TrainingInput, TrainingSpec,
};
use gasmor_core::solvers::{integrate, make_stepper, IntegrateOptions};
use gasmor_core::system::{ConstantInput, LinearSystem};
use gasmor_core::{DMatrix, DVector, SnapshotSet, SolverId, System};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unweighted(blocks: Vec<DMatrix<f64>>, dual: Vec<DMatrix<f64>>) -> SnapshotSet {
    let k = blocks[0].ncols();
    SnapshotSet::new(blocks, dual, None, None, vec![1.0; k]).unwrap()
}

fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Random symmetric negative definite system with collocated ports.
fn symmetric_siso(rng: &mut ChaCha8Rng, n: usize) -> LinearSystem {
    let g = random(rng, n, n);
    let a = -(&g * g.transpose()) - DMatrix::identity(n, n) * 0.5;
    let b = random(rng, n, 1);
    LinearSystem::new(MassMatrix::from_diagonal(DVector::from_element(n, 1.0)).unwrap(), a, b.clone(), b.transpose()).unwrap()
}

#[test]
fn pod_projection_error_equals_tail_energy() {
    for seed in [3, 4] {
        let gap = common::pod_tail_gap(seed, 200, 2000, &[1, 10, 50, 120, 199]);
        assert!(gap < 1e-8, "seed {seed}: {gap:e}");
    }
}

#[test]
fn eds_ro_equals_pod_for_identical_dual() {
    assert!(common::eds_ro_pod_angle(5, &[1, 5, 12]) < 1e-8);
}

#[test]
fn dmd_recovers_linear_map_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lambdas = [0.98, -0.9, 0.75, 0.6, 0.4, 0.2];
    let p = random(&mut rng, 6, 6) + DMatrix::identity(6, 6) * 2.0;
    let map = &p * DMatrix::from_diagonal(&DVector::from_row_slice(&lambdas)) * p.clone().try_inverse().unwrap();
    let blocks: Vec<DMatrix<f64>> = (0..2)
        .map(|_| {
            let mut x = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let mut cols = Vec::new();
            for _ in 0..25 {
                cols.push(x.clone());
                x = &map * x;
            }
            DMatrix::from_columns(&cols)
        })
        .collect();
    let found = dmd_eigenvalues(&unweighted(blocks, vec![])).unwrap();
    assert_eq!(found.len(), 6);
    let mut expected = lambdas.to_vec();
    expected.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    for (l, want) in found.iter().zip(expected) {
        assert!((l.re - want).abs() < 1e-6 && l.im.abs() < 1e-6, "{l} vs {want}");
    }
}

fn impulse_spec(sys: &LinearSystem) -> TrainingSpec {
    TrainingSpec {
        input: TrainingInput::Impulse,
        ..TrainingSpec::uniform(sys.input_dim(), 1.0, 5.0, 0.01, SolverId::Imex2)
    }
}

#[test]
fn self_adjoint_system_has_equal_primal_and_dual_snapshots() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sys = symmetric_siso(&mut rng, 12);
    let set = collect_snapshots(&sys, &impulse_spec(&sys)).unwrap();
    let (xc, xo) = (set.weighted_primal(), set.weighted_dual());
    for j in 0..xc.ncols() {
        let (c, o) = (xc.column(j), xo.column(j));
        assert!((c - o).norm() <= 1e-12 * c.norm().max(1e-300), "column {j}");
    }
}

#[test]
fn cross_and_concatenation_agree_on_symmetric_siso() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let sys = symmetric_siso(&mut rng, 10);
    let set = collect_snapshots(&sys, &impulse_spec(&sys)).unwrap();
    for r in [1, 2, 3] {
        let ro = eds(&set, EdsVariant::Ro, r).unwrap();
        let wx = eds(&set, EdsVariant::Wx, r).unwrap();
        let angle = max_principal_angle(&ro.matrix, &wx.matrix);
        assert!(angle < 1e-3, "r = {r}: {angle}");
    }
}

#[test]
fn gopod_spans_pod_space_at_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    // rank 5 in 9 dimensions
    let x = random(&mut rng, 9, 5) * random(&mut rng, 5, 60);
    let set = unweighted(vec![x], vec![]);
    let c = random(&mut rng, 2, 9);
    let p = pod(&set, 5).unwrap();
    let g = gopod(&set, &c, 5).unwrap();
    assert_eq!(g.width(), 5);
    assert!(max_principal_angle(&p.matrix, &g.matrix) < 1e-10);
    // asking for more than the rank gives the same space
    let wide = gopod(&set, &c, 9).unwrap();
    assert_eq!(wide.truncated_from, Some(9));
    assert!(max_principal_angle(&p.matrix, &wide.matrix) < 1e-10);
}

#[test]
fn two_state_gain_by_hand() {
    let e = MassMatrix::from_dense(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0])).unwrap();
    let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let c = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
    // E⁻¹ = [[3, −1], [−1, 2]] / 5, so C E⁻¹ B = [−1/5, 4/5]
    let s = steady_gain(&c, &e, &b).unwrap();
    assert!((s[(0, 0)] + 0.2).abs() < 1e-15 && (s[(0, 1)] - 0.8).abs() < 1e-15);
}

#[test]
fn gain_matched_rom_reaches_full_steady_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 8;
    let g = random(&mut rng, n, n);
    let e = &g * g.transpose() + DMatrix::identity(n, n);
    // A = −E makes the true steady response exactly C E⁻¹ B u
    let sys = LinearSystem::new(MassMatrix::from_dense(e.clone()).unwrap(), -e, random(&mut rng, n, 2), random(&mut rng, 3, n)).unwrap();
    let u = DVector::from_vec(vec![0.7, -1.3]);
    let target = sys.static_gain() * &u;
    let basis = DMatrix::from_columns(&[DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }), DVector::from_fn(n, |i, _| if i == 3 { 1.0 } else { 0.0 })]);
    let rom = galerkin_project(&sys, &basis).unwrap();
    let mismatch = gain_mismatch(&sys, &rom).unwrap();
    assert!(mismatch.mean_abs > 1e-3);
    let rom = apply_gain_matching(rom, &mismatch.matrix);
    assert!(gain_mismatch(&sys, &rom).unwrap().matrix.amax() < 1e-12);
    let traj = integrate(&rom, &mut make_stepper(SolverId::Imex1), &ConstantInput(u), &DVector::zeros(2), 60.0, 0.05, IntegrateOptions::default()).unwrap();
    let last = traj.outputs.column(traj.outputs.ncols() - 1);
    assert!((last - &target).amax() < 1e-10 * target.amax(), "{last} vs {target}");
}

#[test]
fn identity_projection_reproduces_network_model_exactly() {
    assert_eq!(common::identity_projection_mismatches(), vec![]);
}
