use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trajectory::TrajectoryRecord;
use crate::rules::RuleMode;

pub const DEFAULT_BINS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCount {
    pub count: u64,
    pub frequency: f64,
}

/// Equal-width histogram of first-hit times. Hits outside `[edges[0], edges[last]]` go to
/// `outside`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub outside: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let hi = if hi > lo { hi } else { lo + 1.0 };
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
        edges[bins] = hi;
        Histogram { edges, counts: vec![0; bins], outside: 0 }
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, t: f64) {
        let lo = self.edges[0];
        let hi = self.edges[self.bins()];
        if !(lo..=hi).contains(&t) {
            self.outside += 1;
            return;
        }
        let bins = self.bins();
        let k = (((t - lo) / (hi - lo)) * bins as f64) as usize;
        self.counts[k.min(bins - 1)] += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub scenario: String,
    pub mode: RuleMode,
    pub base_seed: u64,
    pub n: u64,
    /// Keyed by outcome; see [`TrajectoryRecord::outcome`].
    pub outcomes: BTreeMap<String, OutcomeCount>,
    pub histogram: Histogram,
    /// Trajectories with at least one reduction.
    pub hits: u64,
    pub mean_hit_time: Option<f64>,
    pub var_hit_time: Option<f64>,
    /// Trajectories containing a reduction fed by a transition between same-ready components.
    pub forbidden: u64,
    #[serde(skip)]
    pub hit_times: Vec<f64>,
}

impl EnsembleStats {
    /// Aggregates records in the order given.
    pub fn from_records(
        scenario: &str,
        mode: RuleMode,
        base_seed: u64,
        window: (f64, f64),
        records: &[TrajectoryRecord],
    ) -> Self {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut histogram = Histogram::new(window.0, window.1, DEFAULT_BINS);
        let mut hit_times = Vec::new();
        let mut forbidden = 0;
        for r in records {
            *counts.entry(r.outcome.clone()).or_default() += 1;
            if let Some(t) = r.hit_time {
                histogram.add(t);
                hit_times.push(t);
            }
            if r.forbidden() {
                forbidden += 1;
            }
        }
        let n = records.len() as u64;
        let outcomes = counts
            .into_iter()
            .map(|(k, count)| (k, OutcomeCount { count, frequency: count as f64 / n as f64 }))
            .collect();
        let (mean, var) = mean_var(&hit_times);
        EnsembleStats {
            scenario: scenario.to_string(),
            mode,
            base_seed,
            n,
            outcomes,
            histogram,
            hits: hit_times.len() as u64,
            mean_hit_time: mean,
            var_hit_time: var,
            forbidden,
            hit_times,
        }
    }

    pub fn frequency(&self, outcome: &str) -> f64 {
        self.outcomes.get(outcome).map_or(0.0, |o| o.frequency)
    }

    pub fn count(&self, outcome: &str) -> u64 {
        self.outcomes.get(outcome).map_or(0, |o| o.count)
    }

    /// Fraction of trajectories with at least one reduction.
    pub fn hit_fraction(&self) -> f64 {
        self.hits as f64 / self.n as f64
    }
}

/// Sample mean and unbiased variance.
fn mean_var(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = (xs.len() > 1).then(|| xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0));
    (Some(mean), var)
}
