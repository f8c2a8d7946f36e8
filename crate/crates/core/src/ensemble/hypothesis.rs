//! Hypothesis tests on ensemble statistics. Every test uses a 0.01 significance threshold.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::stats::EnsembleStats;
use super::{run_ensemble_with, EnsembleOptions};
use crate::error::Result;
use crate::rules::RuleMode;
use crate::scenarios::Scenario;

pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornRow {
    pub outcome: String,
    pub expected: f64,
    pub observed: f64,
    pub deviation: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornReport {
    pub rows: Vec<BornRow>,
    pub pass: bool,
}

/// Compares outcome frequencies with expected weights at three binomial standard errors.
pub fn born_check(stats: &EnsembleStats, expected: &[(&str, f64)]) -> BornReport {
    let n = stats.n as f64;
    let rows: Vec<BornRow> = expected
        .iter()
        .map(|&(outcome, w)| {
            let observed = stats.frequency(outcome);
            let deviation = (observed - w).abs();
            let sigma = (w * (1.0 - w) / n).max(0.0).sqrt();
            BornRow {
                outcome: outcome.to_string(),
                expected: w,
                observed,
                deviation,
                sigma,
                pass: deviation == 0.0 || deviation < 3.0 * sigma,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    BornReport { rows, pass }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

fn chi2_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    match ChiSquared::new(df as f64) {
        Ok(d) => 1.0 - d.cdf(stat),
        Err(_) => f64::NAN,
    }
}

/// Pearson chi-square test that two count vectors come from one distribution.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> TestResult {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut used = 0usize;
    if na > 0 && nb > 0 {
        for (&x, &y) in a.iter().zip(b) {
            let col = (x + y) as f64;
            if col == 0.0 {
                continue;
            }
            used += 1;
            let ea = col * na as f64 / total;
            let eb = col * nb as f64 / total;
            stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
        }
    }
    let df = used.saturating_sub(1);
    TestResult { statistic: stat, df: df as f64, p_value: chi2_sf(stat, df) }
}

/// Pearson goodness-of-fit test of `observed` counts against cell probabilities `expected`
/// (rescaled to sum to one).
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> TestResult {
    let n: u64 = observed.iter().sum();
    let norm: f64 = expected.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = n as f64 * p / norm;
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        } else if o > 0 {
            return TestResult { statistic: f64::INFINITY, df: cells as f64, p_value: 0.0 };
        }
    }
    let df = cells.saturating_sub(1);
    TestResult { statistic: stat, df: df as f64, p_value: chi2_sf(stat, df) }
}

/// Kolmogorov distribution tail `Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    if a.is_empty() || b.is_empty() {
        return TestResult { statistic: 0.0, df: 0.0, p_value: 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    TestResult { statistic: d, df: ne, p_value: kolmogorov_q(lambda) }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub outcomes: TestResult,
    pub hit_times: TestResult,
    pub pass: bool,
}

/// Chi-square on outcome counts and KS on first-hit times. Passes when neither rejects.
pub fn compare_ensembles(a: &EnsembleStats, b: &EnsembleStats) -> Comparison {
    let keys: BTreeSet<&String> = a.outcomes.keys().chain(b.outcomes.keys()).collect();
    let ca: Vec<u64> = keys.iter().map(|k| a.count(k)).collect();
    let cb: Vec<u64> = keys.iter().map(|k| b.count(k)).collect();
    let outcomes = chi_square_homogeneity(&ca, &cb);
    let hit_times = ks_two_sample(&a.hit_times, &b.hit_times);
    let pass = outcomes.p_value > SIGNIFICANCE && hit_times.p_value > SIGNIFICANCE;
    Comparison { outcomes, hit_times, pass }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indistinguishability {
    pub standard: EnsembleStats,
    pub objective: EnsembleStats,
    pub comparison: Comparison,
}

/// Runs `n` standard-mode trajectories from `base_seed` and `n` objective-mode trajectories from
/// `base_seed + n`, then compares them.
pub fn indistinguishability_test(
    scenario: &Scenario,
    n: usize,
    base_seed: u64,
    opts: &EnsembleOptions,
) -> Result<Indistinguishability> {
    let standard = run_ensemble_with(scenario, RuleMode::standard(), n, base_seed, opts)?;
    let objective = run_ensemble_with(scenario, RuleMode::objective(), n, base_seed + n as u64, opts)?;
    let comparison = compare_ensembles(&standard, &objective);
    Ok(Indistinguishability { standard, objective, comparison })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_identical_counts() {
        let r = chi_square_homogeneity(&[10, 20, 30], &[10, 20, 30]);
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.df, 2.0);
    }

    #[test]
    fn chi2_textbook_two_by_two() {
        // 2x2 table [[30, 10], [20, 40]]: expected [[20, 20], [30, 30]], chi2 = 5 + 5 + 10/3 + 10/3.
        let r = chi_square_homogeneity(&[30, 20], &[10, 40]);
        assert!((r.statistic - (10.0 + 20.0 / 3.0)).abs() < 1e-12);
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn chi2_gof_exact_match() {
        let r = chi_square_gof(&[25, 75], &[0.25, 0.75]);
        assert_eq!(r.statistic, 0.0);
        let r = chi_square_gof(&[1, 0], &[0.0, 1.0]);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // Q(1.36) is the classic 5% critical point, Q(1.63) the 1% point.
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 1e-3);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn ks_self_comparison() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_disjoint_samples() {
        let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..200).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b);
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }
}
