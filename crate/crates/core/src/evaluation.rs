//! ROM quality metrics: relative L2⊗L2 output errors over reduced orders,
//! MORscores and gain errors, and the reductor sweep.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
// float math without std; unused when a dependency links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::reductors::{apply_gain_matching, galerkin_project, gain_mismatch, Basis, ReductorId};
use crate::solvers::{integrate, IntegrateOptions, Stepper};
use crate::system::{InputSignal, System};

/// Default MORscore precision: 16 decimal digits.
pub const DEFAULT_EPS: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("output trajectories differ in shape: {fom:?} vs {rom:?}")]
    ShapeMismatch { fom: (usize, usize), rom: (usize, usize) },
    #[error("reports disagree on {0}")]
    Inconsistent(&'static str),
    #[error("nothing to compare")]
    Empty,
}

/// `√(Σ_k Δt ‖y_k − ŷ_k‖²) / √(Σ_k Δt ‖y_k‖²)` for `ports × samples`
/// matrices on one uniform grid. A zero reference gives 0 for a zero
/// difference and ∞ otherwise.
pub fn l2l2_error(y: &DMatrix<f64>, y_rom: &DMatrix<f64>, dt: f64) -> Result<f64, EvaluationError> {
    if y.shape() != y_rom.shape() {
        return Err(EvaluationError::ShapeMismatch {
            fom: y.shape(),
            rom: y_rom.shape(),
        });
    }
    let num = (y - y_rom).norm_squared() * dt;
    let den = y.norm_squared() * dt;
    Ok(if den > 0.0 {
        (num / den).sqrt()
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

/// Error per attempted reduced order; failed orders carry `∞` and a reason.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorCurve {
    pub orders: Vec<usize>,
    pub errors: Vec<f64>,
    pub failures: Vec<Option<String>>,
}

impl ErrorCurve {
    pub fn push(&mut self, r: usize, error: f64, failure: Option<String>) {
        self.orders.push(r);
        self.errors.push(if failure.is_some() || error.is_nan() { f64::INFINITY } else { error });
        self.failures.push(failure);
    }

    /// Error at order `r`, or at the largest evaluated order below it.
    pub fn at(&self, r: usize) -> Option<f64> {
        self.orders.iter().zip(&self.errors).filter(|(o, _)| **o <= r).max_by_key(|(o, _)| **o).map(|(_, e)| *e)
    }

    pub fn from_errors(errors: &[f64]) -> Self {
        let mut c = ErrorCurve::default();
        for (i, e) in errors.iter().enumerate() {
            c.push(i + 1, *e, None);
        }
        c
    }
}

/// `clamp(log₁₀ e / log₁₀ ε, 0, 1)`; `∞` and NaN map to 0.
pub fn normalized_accuracy(error: f64, eps: f64) -> f64 {
    if !(error < f64::INFINITY) {
        return 0.0;
    }
    if error <= eps {
        return 1.0;
    }
    if error >= 1.0 {
        return 0.0;
    }
    (error.log10() / eps.log10()).clamp(0.0, 1.0)
}

/// `μ = (1/r_max) Σ_{r=1..r_max} ŷ(r)`. With a stride, each evaluated order
/// stands in for the orders up to the next evaluated one.
pub fn morscore(curve: &ErrorCurve, eps: f64, r_max: usize) -> f64 {
    if r_max == 0 {
        return 0.0;
    }
    let sum: f64 = (1..=r_max)
        .map(|r| curve.at(r).map(|e| normalized_accuracy(e, eps)).unwrap_or(0.0))
        .sum();
    sum / r_max as f64
}

/// Wall-clock source; the core has no clock of its own.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// A clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub r_max: usize,
    pub stride: usize,
    pub gain_matching: bool,
    pub eps: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            r_max: 100,
            stride: 1,
            gain_matching: false,
            eps: DEFAULT_EPS,
        }
    }
}

impl SweepOptions {
    /// Orders evaluated for a state dimension `n`: `1, 1+s, …` up to
    /// `min(r_max, n)`, always including the last one.
    pub fn orders(&self, n: usize) -> Vec<usize> {
        let top = self.r_max.min(n);
        let stride = self.stride.max(1);
        let mut v: Vec<usize> = (1..=top).step_by(stride).collect();
        if v.last() != Some(&top) && top > 0 {
            v.push(top);
        }
        v
    }
}

/// Result of one reduced order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderResult {
    pub r: usize,
    pub error: f64,
    /// Mean absolute entry of the uncorrected gain mismatch.
    pub gain_error: f64,
    pub failure: Option<String>,
    pub simulate_seconds: f64,
}

/// Full-model reference shared by every order of a sweep.
pub struct Reference<'a> {
    pub input: &'a dyn InputSignal,
    pub horizon: f64,
    pub dt: f64,
    /// Absolute full-model outputs `ȳ + y`.
    pub outputs: DMatrix<f64>,
    /// Steady output `ȳ`.
    pub steady_output: DVector<f64>,
}

/// Projects onto the leading `r` basis columns (capped at the basis width),
/// simulates from the steady state and scores against the reference.
pub fn evaluate_order<S: System + ?Sized>(
    full: &S,
    basis: &Basis,
    r: usize,
    make_stepper: &dyn Fn() -> Stepper,
    reference: &Reference<'_>,
    gain_matching: bool,
    clock: &dyn Clock,
) -> OrderResult {
    let fail = |r: usize, why: String| OrderResult {
        r,
        error: f64::INFINITY,
        gain_error: f64::INFINITY,
        failure: Some(why),
        simulate_seconds: 0.0,
    };
    let v = basis.leading(r);
    let rom = match galerkin_project(full, &v) {
        Ok(rom) => rom,
        Err(e) => return fail(r, e.to_string()),
    };
    let mismatch = match gain_mismatch(full, &rom) {
        Ok(m) => m,
        Err(e) => return fail(r, e.to_string()),
    };
    let rom = if gain_matching {
        apply_gain_matching(rom, &mismatch.matrix)
    } else {
        rom
    };
    let start = clock.seconds();
    let traj = integrate(
        &rom,
        &mut make_stepper(),
        reference.input,
        &DVector::zeros(rom.order()),
        reference.horizon,
        reference.dt,
        IntegrateOptions::default(),
    );
    let elapsed = clock.seconds() - start;
    match traj {
        Ok(t) => {
            let y = t.absolute_outputs(&reference.steady_output);
            let error = l2l2_error(&reference.outputs, &y, reference.dt).unwrap_or(f64::INFINITY);
            OrderResult {
                r,
                error: if error.is_nan() { f64::INFINITY } else { error },
                gain_error: mismatch.mean_abs,
                failure: None,
                simulate_seconds: elapsed,
            }
        }
        Err(e) => OrderResult {
            gain_error: mismatch.mean_abs,
            simulate_seconds: elapsed,
            ..fail(r, e.to_string())
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub reductor: ReductorId,
    pub curve: ErrorCurve,
    /// Uncorrected mean absolute gain mismatch per evaluated order.
    pub gain_errors: Vec<f64>,
    pub morscore: f64,
    pub mean_gain_error: f64,
    /// Orders entering the MORscore.
    pub r_max: usize,
    pub eps: f64,
    pub train_seconds: f64,
    pub simulate_seconds: f64,
}

/// Collects per-order results (in any order) into a report.
pub fn assemble_report(reductor: ReductorId, mut results: Vec<OrderResult>, r_max: usize, eps: f64, train_seconds: f64) -> EvaluationReport {
    results.sort_by_key(|o| o.r);
    let mut curve = ErrorCurve::default();
    let mut gain_errors = Vec::with_capacity(results.len());
    let mut sim = 0.0;
    for o in results {
        curve.push(o.r, o.error, o.failure);
        gain_errors.push(o.gain_error);
        sim += o.simulate_seconds;
    }
    let finite: Vec<f64> = gain_errors.iter().copied().filter(|g| g.is_finite()).collect();
    let mean_gain_error = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    EvaluationReport {
        reductor,
        morscore: morscore(&curve, eps, r_max),
        curve,
        gain_errors,
        mean_gain_error,
        r_max,
        eps,
        train_seconds,
        simulate_seconds: sim,
    }
}

/// Sequential sweep over the orders of [`SweepOptions::orders`] for the
/// full model's state dimension. Orders beyond the basis width reuse the
/// full-width basis.
pub fn sweep<S: System + ?Sized>(
    full: &S,
    basis: &Basis,
    make_stepper: &dyn Fn() -> Stepper,
    reference: &Reference<'_>,
    options: SweepOptions,
    train_seconds: f64,
    clock: &dyn Clock,
) -> EvaluationReport {
    let orders = options.orders(full.state_dim());
    let r_max = orders.last().copied().unwrap_or(0);
    let mut cache: Vec<OrderResult> = Vec::new();
    let mut results = Vec::with_capacity(orders.len());
    for r in orders {
        let eff = r.min(basis.width());
        let res = match cache.iter().find(|o| o.r == eff) {
            Some(hit) => OrderResult { r, ..hit.clone() },
            None => {
                let res = evaluate_order(full, basis, eff, make_stepper, reference, options.gain_matching, clock);
                cache.push(res.clone());
                OrderResult { r, ..res }
            }
        };
        results.push(res);
    }
    assemble_report(basis.reductor, results, r_max, options.eps, train_seconds)
}

/// Ranking (indices into the input, best first) and error-vs-order series.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub ranking: Vec<usize>,
    pub series: Vec<(ReductorId, Vec<(usize, f64)>)>,
}

/// Sorts by MORscore descending, ties by mean gain error ascending.
pub fn compare(reports: &[EvaluationReport]) -> Result<Comparison, EvaluationError> {
    let first = reports.first().ok_or(EvaluationError::Empty)?;
    for r in reports {
        if r.r_max != first.r_max {
            return Err(EvaluationError::Inconsistent("r_max"));
        }
        if r.eps != first.eps {
            return Err(EvaluationError::Inconsistent("eps"));
        }
    }
    let mut ranking: Vec<usize> = (0..reports.len()).collect();
    ranking.sort_by(|&a, &b| {
        let (ra, rb) = (&reports[a], &reports[b]);
        rb.morscore
            .total_cmp(&ra.morscore)
            .then(ra.mean_gain_error.total_cmp(&rb.mean_gain_error))
    });
    let series = reports
        .iter()
        .map(|r| (r.reductor, r.curve.orders.iter().copied().zip(r.curve.errors.iter().copied()).collect()))
        .collect();
    Ok(Comparison { ranking, series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn l2l2_basics() {
        let y = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.5, 2.0]);
        assert_eq!(l2l2_error(&y, &y, 0.1).unwrap(), 0.0);
        assert_eq!(l2l2_error(&y, &DMatrix::zeros(2, 3), 0.1).unwrap(), 1.0);
        let a = DMatrix::from_element(1, 1, 4.0);
        let b = DMatrix::from_element(1, 1, 3.0);
        assert_eq!(l2l2_error(&a, &b, 7.0).unwrap(), 0.25);
        assert!(l2l2_error(&a, &y, 1.0).is_err());
    }

    #[test]
    fn morscore_extremes() {
        let eps = 1e-16;
        assert_eq!(morscore(&ErrorCurve::from_errors(&[1.0, 3.0, f64::INFINITY]), eps, 3), 0.0);
        assert_eq!(morscore(&ErrorCurve::from_errors(&[eps; 4]), eps, 4), 1.0);
        assert_eq!(morscore(&ErrorCurve::from_errors(&[1e-20; 4]), eps, 4), 1.0);
        assert_eq!(normalized_accuracy(f64::NAN, eps), 0.0);
        assert!((normalized_accuracy(1e-8, eps) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn strided_curve_holds_left_value() {
        let mut c = ErrorCurve::default();
        c.push(1, 1e-4, None);
        c.push(3, 1e-8, None);
        let mu = morscore(&c, 1e-16, 4);
        assert!((mu - (0.25 + 0.25 + 0.5 + 0.5) / 4.0).abs() < 1e-15);
        let o = SweepOptions { r_max: 10, stride: 4, ..Default::default() };
        assert_eq!(o.orders(100), vec![1, 5, 9, 10]);
        assert_eq!(o.orders(6), vec![1, 5, 6]);
    }

    fn report(id: ReductorId, mu: f64, gain: f64) -> EvaluationReport {
        EvaluationReport {
            reductor: id,
            curve: ErrorCurve::default(),
            gain_errors: vec![],
            morscore: mu,
            mean_gain_error: gain,
            r_max: 10,
            eps: 1e-16,
            train_seconds: 0.0,
            simulate_seconds: 0.0,
        }
    }

    #[test]
    fn ranking_and_tie_break() {
        let reps = [
            report(ReductorId::PodR, 0.1, 1.0),
            report(ReductorId::EdsRoL, 0.3, 1.0),
            report(ReductorId::DmdR, 0.1, 0.5),
        ];
        assert_eq!(compare(&reps).unwrap().ranking, vec![1, 2, 0]);
        assert_eq!(compare(&reps[..1]).unwrap().ranking, vec![0]);
        let mut odd = reps.clone();
        odd[2].r_max = 5;
        assert!(compare(&odd).is_err());
    }
}
