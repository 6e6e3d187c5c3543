//! Monte Carlo ensembles: many seeded runs of one scenario/strategy pair.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::scalar::{cast, Scalar};
use crate::sim::run::{run_with_context, SimContext};
use crate::sim::Strategy;

/// Summary row of one run inside an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow<T> {
    pub run_index: usize,
    pub seed: u64,
    /// Peak temperature over all devices, degC.
    pub max_temp_c: T,
    /// Violating grid samples over all devices divided by total samples.
    pub temp_violation_fraction: T,
    pub any_temp_violation: bool,
    /// Any power, battery or temperature violation on any device.
    pub any_violation: bool,
    pub total_cost: T,
    pub total_local: usize,
    pub total_offloaded: usize,
    pub total_final_battery_j: T,
}

/// Aggregates over an ensemble of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary<T> {
    pub rows: Vec<RunRow<T>>,
    pub mean_max_temp_c: T,
    pub max_max_temp_c: T,
    /// Fraction of runs with at least one over-limit temperature sample.
    pub temp_violation_run_fraction: T,
    /// Fraction of runs with any constraint violation.
    pub any_violation_run_fraction: T,
    /// Mean over runs of the per-sample violating fraction.
    pub mean_temp_violation_fraction: T,
    pub mean_total_cost: T,
    pub mean_total_local: T,
    pub mean_total_offloaded: T,
    pub mean_total_final_battery_j: T,
}

/// Run `n_runs` independent simulations with seeds `base_seed + run_index`.
///
/// Runs fan out over threads but the rows come back in run order, so the
/// result is independent of scheduling, and the first half of a `2n`-run
/// ensemble is exactly the `n`-run ensemble's rows.
pub fn monte_carlo<T: Scalar>(
    scenario: &Scenario<T>,
    strategy: &Strategy<T>,
    n_runs: usize,
    base_seed: u64,
) -> Result<EnsembleSummary<T>> {
    if n_runs == 0 {
        return Err(Error::ZeroMcBudget);
    }
    strategy.validate()?;
    let ctx = SimContext::new(scenario)?;
    let rows: Vec<RunRow<T>> = (0..n_runs)
        .into_par_iter()
        .map(|run_index| {
            let seed = base_seed.wrapping_add(run_index as u64);
            let result = run_with_context(&ctx, scenario, strategy, seed)?;
            Ok(RunRow {
                run_index,
                seed,
                max_temp_c: result.max_temp_c(),
                temp_violation_fraction: result.pooled_temp_violation_fraction(),
                any_temp_violation: result.any_temperature_violation(),
                any_violation: result.any_violation(),
                total_cost: result.total_cost(),
                total_local: result.total_local(),
                total_offloaded: result.total_offloaded(),
                total_final_battery_j: result.total_final_battery_j(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = cast::<T>(n_runs as f64);
    let frac = |count: usize| cast::<T>(count as f64) / n;
    let mean = |f: &dyn Fn(&RunRow<T>) -> T| rows.iter().map(f).fold(T::zero(), |a, b| a + b) / n;
    Ok(EnsembleSummary {
        mean_max_temp_c: mean(&|r| r.max_temp_c),
        max_max_temp_c: rows
            .iter()
            .map(|r| r.max_temp_c)
            .fold(T::neg_infinity(), T::max),
        temp_violation_run_fraction: frac(rows.iter().filter(|r| r.any_temp_violation).count()),
        any_violation_run_fraction: frac(rows.iter().filter(|r| r.any_violation).count()),
        mean_temp_violation_fraction: mean(&|r| r.temp_violation_fraction),
        mean_total_cost: mean(&|r| r.total_cost),
        mean_total_local: mean(&|r| cast::<T>(r.total_local as f64)),
        mean_total_offloaded: mean(&|r| cast::<T>(r.total_offloaded as f64)),
        mean_total_final_battery_j: mean(&|r| r.total_final_battery_j),
        rows,
    })
}
