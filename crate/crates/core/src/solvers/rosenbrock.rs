use nalgebra::DVector;
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;

use super::StepError;
use crate::system::{InputSignal, System};

/// Smallest admissible adaptive step [s].
pub const DT_MIN: f64 = 1e-9;

/// Outcome of one attempt of the adaptive Rosenbrock pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RosenbrockStep {
    /// New state when accepted, the old state otherwise.
    pub state: DVector<f64>,
    pub dt_used: f64,
    pub dt_next: f64,
    pub accepted: bool,
    /// Scaled error estimate (accepted when ≤ 1).
    pub error: f64,
}

/// One attempt of the second-order Rosenbrock method with `d = 1/(2+√2)`
/// and its embedded third-order error estimate.
///
/// The error is measured as `max_i |e_i| / max(rtol·max(|x_i|, |x⁺_i|), atol)`;
/// the next step is `0.8 Δt err^(−1/3)` clipped to `[0.2, 5] Δt`.
pub fn rosenbrock_adaptive<S: System + ?Sized>(
    sys: &S,
    x: &DVector<f64>,
    t: f64,
    dt_try: f64,
    input: &dyn InputSignal,
    rtol: f64,
    atol: f64,
) -> Result<RosenbrockStep, StepError> {
    if !(dt_try >= DT_MIN) {
        return Err(StepError::StepUnderflow { dt: dt_try, min: DT_MIN });
    }
    let h = dt_try;
    let d = 1.0 / (2.0 + 2.0.sqrt());
    let e32 = 6.0 + 2.0.sqrt();

    let jac = sys.jacobian(x)?;
    let w = sys.mass().minus_scaled(h * d, &jac).lu();
    if !w.is_invertible() {
        return Err(StepError::Singular { dt: h });
    }
    let solve = |rhs: &DVector<f64>| w.solve(rhs).ok_or(StepError::Singular { dt: h });

    let u0 = input.at(t);
    let f0 = sys.rhs(x, &u0)?;
    // time derivative of the forcing, by forward difference
    let delta = f64::EPSILON.sqrt() * t.abs().max(h);
    let hdt = if sys.input_dim() > 0 {
        let du = (input.at(t + delta) - &u0) / delta;
        sys.input_map() * du * (h * d)
    } else {
        DVector::zeros(x.len())
    };

    let k1 = solve(&(&f0 + &hdt))?;
    let f1 = sys.rhs(&(x + &k1 * (0.5 * h)), &input.at(t + 0.5 * h))?;
    let k2 = solve(&(&f1 - sys.mass().mul(&k1)))? + &k1;
    let next = x + &k2 * h;
    let f2 = sys.rhs(&next, &input.at(t + h))?;
    let rhs3 = &f2 - (sys.mass().mul(&k2) - &f1) * e32 - (sys.mass().mul(&k1) - &f0) * 2.0 + &hdt;
    let k3 = solve(&rhs3)?;

    let est = (&k1 - &k2 * 2.0 + &k3) * (h / 6.0);
    let mut err: f64 = 0.0;
    for i in 0..x.len() {
        let scale = (rtol * x[i].abs().max(next[i].abs())).max(atol);
        err = err.max(est[i].abs() / scale);
    }
    if !err.is_finite() {
        err = f64::INFINITY;
    }
    let factor = if err == 0.0 {
        5.0
    } else {
        (0.8 * (1.0 / err).powf(1.0 / 3.0)).clamp(0.2, 5.0)
    };
    let accepted = err <= 1.0;
    Ok(RosenbrockStep {
        state: if accepted { next } else { x.clone() },
        dt_used: h,
        dt_next: h * factor,
        accepted,
        error: err,
    })
}
