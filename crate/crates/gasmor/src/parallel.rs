//! Thread-parallel counterparts of the sequential core drivers. Results are
//! identical to the sequential ones: tasks are independent and are
//! reassembled in order.

use std::time::Instant;

use gasmor_core::evaluation::{assemble_report, evaluate_order, Clock, OrderResult, Reference, SweepOptions};
use gasmor_core::reductors::{
    aggregate_dual_block, aggregate_primal_block, dual_block, primal_block, quadrature_weights, train, ReductorError,
    TrainingSpec,
};
use gasmor_core::{Basis, DMatrix, DVector, EvaluationReport, InputSignal, ReductorId, SnapshotSet, Stepper, System};
use rayon::prelude::*;

/// Wall clock measured from its creation.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::start()
    }
}

impl Clock for WallClock {
    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

enum Task {
    Primal(usize),
    Dual(usize),
    AggregatePrimal,
    AggregateDual,
}

/// As [`gasmor_core::reductors::collect_snapshots`], one task per training
/// run. The aggregated runs are skipped unless `aggregate` is set.
pub fn collect_snapshots<S: System + Sync + ?Sized>(
    sys: &S,
    spec: &TrainingSpec,
    aggregate: bool,
) -> Result<SnapshotSet, ReductorError> {
    if spec.amplitudes.len() != sys.input_dim() {
        return Err(ReductorError::Dimension {
            expected: sys.input_dim(),
            found: spec.amplitudes.len(),
        });
    }
    let mut tasks: Vec<Task> = (0..sys.input_dim()).map(Task::Primal).collect();
    tasks.extend((0..sys.output_dim()).map(Task::Dual));
    if aggregate {
        tasks.extend([Task::AggregatePrimal, Task::AggregateDual]);
    }
    let blocks = tasks
        .par_iter()
        .map(|t| match t {
            Task::Primal(j) => primal_block(sys, spec, *j),
            Task::Dual(i) => dual_block(sys, spec, *i),
            Task::AggregatePrimal => aggregate_primal_block(sys, spec),
            Task::AggregateDual => aggregate_dual_block(sys, spec),
        })
        .collect::<Result<Vec<DMatrix<f64>>, _>>()?;
    let mut blocks = blocks.into_iter();
    let primal: Vec<_> = blocks.by_ref().take(sys.input_dim()).collect();
    let dual: Vec<_> = blocks.by_ref().take(sys.output_dim()).collect();
    let (agg_p, agg_d) = (blocks.next(), blocks.next());
    SnapshotSet::new(primal, dual, agg_p, agg_d, quadrature_weights(spec.horizon, spec.dt))
}

/// Trains several reductors concurrently from one snapshot set.
pub fn train_all(
    ids: &[ReductorId],
    snapshots: &SnapshotSet,
    output_map: &DMatrix<f64>,
    r: usize,
    clock: &WallClock,
) -> Vec<Result<(Basis, f64), ReductorError>> {
    ids.par_iter()
        .map(|id| {
            let start = clock.seconds();
            let basis = train(*id, snapshots, output_map, r)?;
            Ok((basis, clock.seconds() - start))
        })
        .collect()
}

/// Full-model reference that can be shared between threads.
pub struct SharedReference<'a> {
    pub input: &'a (dyn InputSignal + Sync),
    pub horizon: f64,
    pub dt: f64,
    pub outputs: DMatrix<f64>,
    pub steady_output: DVector<f64>,
}

impl SharedReference<'_> {
    fn view(&self) -> Reference<'_> {
        Reference {
            input: self.input,
            horizon: self.horizon,
            dt: self.dt,
            outputs: self.outputs.clone(),
            steady_output: self.steady_output.clone(),
        }
    }
}

/// As [`gasmor_core::evaluation::sweep`] with the distinct orders simulated
/// concurrently, each with a fresh copy of `stepper`.
pub fn sweep<S: System + Sync + ?Sized>(
    full: &S,
    basis: &Basis,
    stepper: &Stepper,
    reference: &SharedReference<'_>,
    options: SweepOptions,
    train_seconds: f64,
    clock: &WallClock,
) -> EvaluationReport {
    let orders = options.orders(full.state_dim());
    let r_max = orders.last().copied().unwrap_or(0);
    let mut distinct: Vec<usize> = orders.iter().map(|r| (*r).min(basis.width())).collect();
    distinct.dedup();
    let computed: Vec<OrderResult> = distinct
        .par_iter()
        .map(|&r| {
            let view = reference.view();
            evaluate_order(full, basis, r, &|| stepper.clone(), &view, options.gain_matching, clock)
        })
        .collect();
    let results = orders
        .iter()
        .map(|&r| {
            let eff = r.min(basis.width());
            let hit = computed.iter().find(|o| o.r == eff).expect("every effective order was evaluated");
            OrderResult { r, ..hit.clone() }
        })
        .collect();
    assemble_report(basis.reductor, results, r_max, options.eps, train_seconds)
}
