//! Trajectory ensembles, their statistics and hypothesis tests.
//!
//! Trajectory `k` of an ensemble uses seed `base_seed + k`. Records are aggregated in seed
//! order, so parallel and sequential execution give identical statistics.

mod export;
mod hypothesis;
mod stats;
mod trajectory;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rules::RuleMode;
use crate::scenarios::Scenario;

pub use export::{write_histogram_csv, write_outcomes_csv, write_summary_json, write_trace_csv};
pub use hypothesis::{
    born_check, chi_square_gof, chi_square_homogeneity, compare_ensembles, indistinguishability_test, ks_two_sample,
    BornReport, BornRow, Comparison, Indistinguishability, TestResult, SIGNIFICANCE,
};
pub use stats::{EnsembleStats, Histogram, OutcomeCount, DEFAULT_BINS};
pub use trajectory::{run_trajectory, TracePoint, TrajectoryOptions, TrajectoryRecord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Worker pool when built with the `parallel` feature, otherwise sequential.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnsembleOptions {
    pub trajectory: TrajectoryOptions,
    pub execution: Execution,
}

fn run_one(scenario: &Scenario, mode: RuleMode, seed: u64, opts: &TrajectoryOptions) -> Result<TrajectoryRecord> {
    run_trajectory(scenario, mode, seed, opts).map_err(|e| Error::Trajectory { seed, source: Box::new(e) })
}

/// Runs trajectories with seeds `base_seed .. base_seed + n` and returns them in seed order.
pub fn run_records(
    scenario: &Scenario,
    mode: RuleMode,
    n: usize,
    base_seed: u64,
    opts: &EnsembleOptions,
) -> Result<Vec<TrajectoryRecord>> {
    if n == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    scenario.validate()?;
    let seeds = base_seed..base_seed + n as u64;
    let t = &opts.trajectory;
    match opts.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => seeds.into_par_iter().map(|seed| run_one(scenario, mode, seed, t)).collect(),
        _ => seeds.map(|seed| run_one(scenario, mode, seed, t)).collect(),
    }
}

pub fn run_ensemble_with(
    scenario: &Scenario,
    mode: RuleMode,
    n: usize,
    base_seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleStats> {
    let records = run_records(scenario, mode, n, base_seed, opts)?;
    Ok(EnsembleStats::from_records(&scenario.name, mode, base_seed, scenario.hit_window(), &records))
}

/// Runs `n` trajectories with default options.
pub fn run_ensemble(scenario: &Scenario, mode: RuleMode, n: usize, base_seed: u64) -> Result<EnsembleStats> {
    run_ensemble_with(scenario, mode, n, base_seed, &EnsembleOptions::default())
}
