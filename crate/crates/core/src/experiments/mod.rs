//! Experiment harness: convergence in `M`, robustness to test-time shifts,
//! fraud-stream replay against baselines, and fit/export plumbing.
//!
//! Every run is deterministic given its config and seed. Sweep cells run in
//! parallel and rows are sorted before they are returned.

mod config;
mod convergence;
mod export;
mod fraud;
mod robustness;

pub use config::ExperimentConfig;
pub use convergence::{run_convergence, ConvergenceRow};
pub use export::{fit_and_export, ExportPaths, CURVE_GRID_POINTS};
pub use fraud::{run_fraud_replay, synthetic_scored_streams, FraudRow, Policy, SyntheticFraud};
pub use robustness::{modifier_grid, run_robustness, RobustnessRow, Sweep};

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::arrival::{simulate, Event, IntensityFunction, Realization};
use crate::error::Result;
use crate::estimators::{pooled_shortage, IntensityEstimate};
use crate::ode::SolverConfig;
use crate::policy::{derive_critical_curves, CriticalCurveSet};
use crate::rng::stream;
use crate::value_dist::ValueDistribution;

/// `count` independent realizations, realization `i` drawn from stream `i`
/// of `seed`.
pub fn simulate_batch(
    intensity: &IntensityFunction,
    dist: &ValueDistribution,
    horizon: f64,
    seed: u64,
    count: usize,
) -> Result<Vec<Realization>> {
    (0..count)
        .into_par_iter()
        .map(|i| simulate(intensity, dist, horizon, &mut stream(seed, i as u64)))
        .collect()
}

/// Fit the rate and mean shortage estimates on `train` and derive `n`
/// curves. Without a single training event the fitted rate is zero
/// everywhere, so every curve is identically zero.
pub fn fit_curves<F>(
    train: &[Realization],
    horizon: f64,
    n: usize,
    value_of: F,
    solver: &SolverConfig,
) -> Result<CriticalCurveSet>
where
    F: Fn(&Event) -> f64,
{
    let intensity = IntensityEstimate::fit(train, horizon)?;
    if train.iter().all(Realization::is_empty) {
        return CriticalCurveSet::constant(n, horizon, 0.0);
    }
    let phi = pooled_shortage(train, value_of)?;
    derive_critical_curves(&intensity.to_intensity(), &phi, n, horizon, solver)
}

/// Write rows as CSV with a header taken from the row's field names.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

mod streams {
    // Labels for `derive_seed` paths.
    pub const TRAIN: u64 = 1;
    pub const TEST: u64 = 2;
    pub const UNIFORM: u64 = 3;
}
