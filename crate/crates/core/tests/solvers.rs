mod common;

use common::StiffTest;
use gasmor_core::evaluation::l2l2_error;
use gasmor_core::solvers::{integrate, make_stepper, max_stable_dt, IntegrateOptions};
use gasmor_core::system::FnInput;
use gasmor_core::{DVector, Discretization, GravityMode, SolverId, Stepper};

#[test]
fn richardson_orders_on_stiff_system() {
    for (solver, lo, hi) in [
        (SolverId::Imex1, 0.8, 1.2),
        (SolverId::Imex2, 1.8, 2.2),
        (SolverId::Rk2Hyp, 1.8, 2.2),
        (SolverId::Rk4, 3.8, 4.2),
        (SolverId::Rk4Hyp, 3.8, 4.2),
    ] {
        let (p, diffs) = common::richardson_order(solver, 0.04, 3);
        assert!((lo..=hi).contains(&p), "{solver}: slope {p} from {diffs:?}");
    }
}

#[test]
fn rosenbrock_global_error_tracks_tolerance() {
    let sys = StiffTest::new();
    let input = StiffTest::input();
    let reference = common::final_state(&sys, SolverId::Rk4, &input, &StiffTest::x0(), 1.0, 1e-4);
    for rtol in [1e-3, 1e-4] {
        let mut stepper = Stepper::Rosenbrock { rtol, atol: 1e-8 };
        let traj = integrate(&sys, &mut stepper, &input, &StiffTest::x0(), 1.0, 0.1, IntegrateOptions { snapshots: true }).unwrap();
        let states = traj.states.unwrap();
        let last = states.column(states.ncols() - 1);
        let err = (last - &reference).norm() / reference.norm();
        assert!(err <= 10.0 * rtol, "rtol {rtol}: {err:e}");
    }
}

fn demand_wave() -> FnInput {
    FnInput::new(2, |t| DVector::from_vec(vec![0.0, 5.0 * (2.0 * std::f64::consts::PI * t / 3600.0).sin()]))
}

#[test]
fn solvers_agree_on_single_pipe() {
    let model = common::single_pipe(Discretization::Endpoint, GravityMode::Off, 40.0);
    let x0 = DVector::zeros(2);
    let run = |id: SolverId, dt: f64| {
        integrate(&model, &mut make_stepper(id), &demand_wave(), &x0, 7200.0, dt, IntegrateOptions::default())
            .unwrap()
            .outputs
    };
    let reference = run(SolverId::Rk4, 0.5);
    let imex2 = run(SolverId::Imex2, 0.5);
    assert!(l2l2_error(&reference, &imex2, 0.5).unwrap() < 1e-5);
    // coarser steps: still the same solution to first-order accuracy
    let coarse = run(SolverId::Rk4, 10.0);
    for id in [SolverId::Imex1, SolverId::Rk2Hyp, SolverId::Rk4Hyp] {
        let err = l2l2_error(&coarse, &run(id, 10.0), 10.0).unwrap();
        assert!(err < 5e-2, "{id}: {err}");
    }
}

#[test]
fn hyperbolic_schemes_allow_larger_steps() {
    let [rk4, rk2hyp, rk4hyp] = common::hyperbolic_limits();
    assert!(rk2hyp >= 1.2 * rk4, "rk2hyp {rk2hyp} vs rk4 {rk4}");
    assert!(rk4hyp >= 1.2 * rk4, "rk4hyp {rk4hyp} vs rk4 {rk4}");
}

#[test]
fn stability_bound_holds_below_the_returned_step() {
    let model = common::single_pipe(Discretization::Endpoint, GravityMode::Off, 20.0);
    let x0 = DVector::from_vec(vec![100.0, 0.01]);
    for id in [SolverId::Rk4, SolverId::Rk2Hyp] {
        let bound = max_stable_dt(&model, id, &x0, 36_000.0, 1.0, 3600.0).unwrap();
        assert!(bound < 3600.0);
        for frac in [0.25, 0.5, 0.9, 1.0] {
            // a bracket whose upper end is stable comes straight back
            let dt = frac * bound;
            assert_eq!(max_stable_dt(&model, id, &x0, 36_000.0, 0.5 * dt, dt).unwrap(), dt, "{id} at {frac}");
        }
    }
}

#[test]
fn imex_steps_past_the_explicit_limit_without_friction_stiffness() {
    // at zero flow the linearized friction vanishes; the implicit linear part
    // carries the whole hyperbolic dynamics
    let model = common::single_pipe(Discretization::Endpoint, GravityMode::Off, 0.0);
    let x0 = DVector::from_vec(vec![100.0, 0.01]);
    for id in [SolverId::Imex1, SolverId::Imex2] {
        assert_eq!(max_stable_dt(&model, id, &x0, 36_000.0, 1.0, 3600.0).unwrap(), 3600.0);
    }
}
