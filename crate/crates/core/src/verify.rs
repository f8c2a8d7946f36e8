//! Acceptance suite shared by `readyrules verify` and the `acceptance` test target.

use std::f64::consts::FRAC_PI_3;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;

use crate::ensemble::{
    born_check, chi_square_gof, compare_ensembles, indistinguishability_test, run_ensemble_with, EnsembleOptions,
    TrajectoryOptions, SIGNIFICANCE,
};
use crate::error::Result;
use crate::pulse::{dissolve, drift_in_place, partial_reduction, pet_model, Branch, PetExperiment, ResolutionKernel};
use crate::rules::RuleMode;
use crate::scenarios::{build, ScenarioParams, CATALOG};
use crate::statedyn::{
    current_matrix, default_step, evolve, Component, CurrentMatrix, Factor, HamiltonianSchedule, Propagator,
    SystemState, Window,
};

const SEED: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {} [{verdict}] {}: {}", self.id, self.name, self.measured)
    }
}

fn finish(id: u8, name: &'static str, outcome: Result<(bool, String)>) -> CriterionResult {
    match outcome {
        Ok((pass, measured)) => CriterionResult { id, name, pass, measured },
        Err(e) => CriterionResult { id, name, pass: false, measured: format!("error: {e}") },
    }
}

fn audited() -> EnsembleOptions {
    EnsembleOptions {
        trajectory: TrajectoryOptions { audit: true, ..TrajectoryOptions::default() },
        ..EnsembleOptions::default()
    }
}

fn fast() -> EnsembleOptions {
    EnsembleOptions {
        trajectory: TrajectoryOptions { audit: false, ..TrajectoryOptions::default() },
        ..EnsembleOptions::default()
    }
}

/// Born recovery after a terminal observation.
pub fn born_recovery() -> CriterionResult {
    finish(
        1,
        "Born recovery",
        (|| {
            let n = 100_000;
            let start = Instant::now();
            let s = build("terminal_observation", &ScenarioParams::default().with_capture_modulus(0.25))?;
            let stats = run_ensemble_with(&s, RuleMode::standard(), n, SEED, &fast())?;
            let report = born_check(&stats, &[("D1' 1:B1*", 0.25), ("psi' D0 1:B0*", 0.75)]);
            let f = stats.frequency("D1' 1:B1*");
            let tol = 3.0 * (0.25f64 * 0.75 / n as f64).sqrt();
            Ok((
                report.pass,
                format!(
                    "capture frequency {f:.5} (target 0.25 +/- {tol:.4}), N = {n}, {:.1} s",
                    start.elapsed().as_secs_f64()
                ),
            ))
        })(),
    )
}

/// Every trajectory of a full-transfer run is hit.
pub fn unit_hit_probability() -> CriterionResult {
    finish(
        2,
        "unit total hit probability",
        (|| {
            let n = 10_000;
            let s = build("observer_on_board", &ScenarioParams::default().full_transfer())?;
            let stats = run_ensemble_with(&s, RuleMode::standard(), n, SEED, &fast())?;
            let all = stats.hits == stats.n && stats.count("D1 1:B1*") == stats.n;
            Ok((all, format!("{} of {} trajectories hit, all in D1 1:B1*: {all}", stats.hits, stats.n)))
        })(),
    )
}

/// Capture and no-capture choices exhaust the two-observer ensemble, and the forbidden outcome
/// appears only without rule 4.
pub fn two_observer_completeness() -> CriterionResult {
    finish(
        3,
        "two-observer completeness",
        (|| {
            let n = 100_000;
            let params = ScenarioParams::default();
            let with = run_ensemble_with(&build("two_observers", &params)?, RuleMode::standard(), n, SEED, &fast())?;
            let without =
                run_ensemble_with(&build("two_observers_no_rule4", &params)?, RuleMode::standard(), n, SEED, &fast())?;
            let capture: f64 =
                with.outcomes.iter().filter(|(k, _)| k.starts_with("D1 1:B1* 2:X")).map(|(_, o)| o.frequency).sum();
            let no_capture = with.frequency("psi' D0 1:B0* 2:B0*");
            let sum = capture + no_capture;
            let sigma = (capture * (1.0 - capture) / n as f64).sqrt();
            let complete = (sum - 1.0).abs() == 0.0 || (sum - 1.0).abs() < 3.0 * sigma;
            let anomaly = "D1' 1:B1* 2:B1*";
            let (on, off) = (with.count(anomaly), without.count(anomaly));
            Ok((
                complete && on == 0 && off > 0,
                format!(
                    "P(capture) {capture:.5} + P(no-capture choice) {no_capture:.5} = {sum:.6} (3 sigma {:.4}); \
                 {anomaly}: {on} with rule 4, {off} without",
                    3.0 * sigma
                ),
            ))
        })(),
    )
}

/// Standard and objective modes agree; a halved hazard is detected.
pub fn mode_indistinguishability() -> CriterionResult {
    finish(
        4,
        "mode indistinguishability",
        (|| {
            let n = 100_000;
            let s = build("observer_on_board", &ScenarioParams::default())?;
            let test = indistinguishability_test(&s, n, SEED, &fast())?;
            let mut biased = fast();
            biased.trajectory.hazard_scale = 0.5;
            let control = run_ensemble_with(&s, RuleMode::standard(), n, SEED + 2 * n as u64, &biased)?;
            let power = compare_ensembles(&test.standard, &control);
            let rejects = power.outcomes.p_value < SIGNIFICANCE;
            let c = &test.comparison;
            Ok((
                c.pass && rejects,
                format!(
                    "outcomes p = {:.4}, hit times p = {:.4}; biased control outcomes p = {:.2e}",
                    c.outcomes.p_value, c.hit_times.p_value, power.outcomes.p_value
                ),
            ))
        })(),
    )
}

fn two_level(g: f64) -> Result<(SystemState, HamiltonianSchedule)> {
    let state = SystemState::new(
        vec![
            Component::new(Complex64::new(1.0, 0.0), vec![Factor::particle()]),
            Component::new(Complex64::new(0.0, 0.0), vec![Factor::particle_primed()]),
        ],
        0.0,
    )?;
    let mut sched = HamiltonianSchedule::new();
    sched.couple(0, 1, Complex64::new(g, 0.0), Window::always());
    Ok((state, sched))
}

/// Rabi transfer, norm conservation and current/modulus consistency.
pub fn dynamics_oracle() -> CriterionResult {
    finish(
        5,
        "dynamics oracle",
        (|| {
            let mut worst_m = 0.0f64;
            let mut worst_norm = 0.0f64;
            let mut worst_j = 0.0f64;
            for g in [0.1, 1.0, 10.0] {
                let (mut state, sched) = two_level(g)?;
                let h = sched.matrix_at(0.0, 2)?;
                let t_end = 10.0 / g;
                let nominal = default_step(&h).expect("coupled");
                let steps = (t_end / nominal).ceil() as usize;
                let dt = t_end / steps as f64;
                let delta = 1e-4 / g;
                let mut prop = Propagator::new(h.clone());
                for k in 0..=steps {
                    let t = k as f64 * dt;
                    worst_m = worst_m.max((state.components[1].modulus() - (g * t).sin().powi(2)).abs());
                    let j = CurrentMatrix::from_matrix(&state, &h)?.net_into(1);
                    let amps: Vec<Complex64> = state.components.iter().map(|c| c.amplitude).collect();
                    let (mut fwd, mut back) = (amps.clone(), amps);
                    Propagator::new(h.clone()).step(&mut fwd, delta);
                    Propagator::new(h.clone()).step(&mut back, -delta);
                    let fd = (fwd[1].norm_sqr() - back[1].norm_sqr()) / (2.0 * delta);
                    worst_j = worst_j.max((j - fd).abs());
                    if k < steps {
                        let before = state.s();
                        prop.advance(&mut state, dt)?;
                        worst_norm = worst_norm.max((state.s() - before).abs());
                    }
                }
            }
            Ok((
            worst_m < 1e-6 && worst_norm < 1e-9 && worst_j < 1e-6,
            format!("max |m2 - sin^2(gt)| {worst_m:.2e}, max per-step norm drift {worst_norm:.2e}, max |J - dm/dt| {worst_j:.2e}"),
        ))
        })(),
    )
}

/// Expected first-hit probability per bin, plus the no-hit probability, from a fine-step run of
/// the bare two-component dynamics integrating `J+/s`.
fn hit_time_oracle(g: f64, t_end: f64, bins: usize) -> Result<Vec<f64>> {
    let (mut state, _) = two_level(g)?;
    let mut sched = HamiltonianSchedule::new();
    sched.couple(0, 1, Complex64::new(g, 0.0), Window::new(0.0, t_end));
    let per_bin = 2000;
    let dt = t_end / (bins * per_bin) as f64;
    let rate = |s: &SystemState| -> Result<f64> { Ok(current_matrix(s, &sched)?.net_into(1).max(0.0) / s.s()) };
    let mut probs = Vec::with_capacity(bins + 1);
    let mut r0 = rate(&state)?;
    for _ in 0..bins {
        let mut p = 0.0;
        for _ in 0..per_bin {
            state = evolve(&state, &sched, dt)?;
            let r1 = rate(&state)?;
            p += 0.5 * (r0 + r1) * dt;
            r0 = r1;
        }
        probs.push(p);
    }
    let total: f64 = probs.iter().sum();
    probs.push((1.0 - total).max(0.0));
    Ok(probs)
}

/// First-hit times follow `J(t)/s(t)`.
pub fn hit_time_density() -> CriterionResult {
    finish(
        6,
        "hit-time density",
        (|| {
            let n = 100_000;
            let params = ScenarioParams::default();
            let s = build("observer_on_board", &params)?;
            let stats = run_ensemble_with(&s, RuleMode::standard(), n, SEED, &fast())?;
            let h = &stats.histogram;
            let (lo, hi) = (h.edges[0], h.edges[h.bins()]);
            debug_assert!(lo == 0.0 && (hi - FRAC_PI_3).abs() < 1e-12);
            let expected = hit_time_oracle(params.capture_coupling, hi, h.bins())?;
            let mut observed = h.counts.clone();
            observed.push(stats.n - stats.hits);
            let test = chi_square_gof(&observed, &expected);
            Ok((
                test.p_value > SIGNIFICANCE && h.outside == 0,
                format!(
                    "chi-square {:.2} on {} dof, p = {:.4}, {} hits",
                    test.statistic, test.df, test.p_value, stats.hits
                ),
            ))
        })(),
    )
}

/// No observer is ever conscious of two states at once.
pub fn everett_exclusion() -> CriterionResult {
    finish(
        7,
        "Everett exclusion",
        (|| {
            let n = 1_000;
            let mut runs = 0;
            let mut failures = Vec::new();
            for name in CATALOG {
                let s = build(name, &ScenarioParams::default())?;
                for mode in [RuleMode::standard(), RuleMode::objective()] {
                    runs += 1;
                    if let Err(e) = run_ensemble_with(&s, mode, n, SEED, &audited()) {
                        failures.push(format!("{name}/{}: {e}", mode.variant));
                    }
                }
            }
            let measured = if failures.is_empty() {
                format!("0 violations in {runs} audited ensembles of {n} trajectories")
            } else {
                failures.join("; ")
            };
            Ok((failures.is_empty(), measured))
        })(),
    )
}

/// Drift conservation and monotonicity; PET ratio ordering over a parameter grid.
pub fn drift_and_pet() -> CriterionResult {
    finish(
        8,
        "rule 5 drift and PET ratios",
        (|| {
            let eta = 0.1;
            let mut pulse = dissolve(1.0, &ResolutionKernel::gaussian(0.05)?, 0.3, 50)?;
            let total = pulse.total();
            let mut max_drift = 0.0f64;
            let mut monotone = true;
            for _ in 0..1_000_000 {
                let before = pulse.mean_r();
                let below = pulse.weight_below_top();
                drift_in_place(&mut pulse, eta)?;
                let after = pulse.mean_r();
                max_drift = max_drift.max((pulse.total() - total).abs());
                // An increase below the spacing of representable means cannot show up.
                let resolvable = eta * below * pulse.bin_width() > 4.0 * f64::EPSILON * before;
                if after < before || (resolvable && after <= before) || (below == 0.0 && after != before) {
                    monotone = false;
                }
            }
            let mut grid_ok = true;
            let mut points = 0;
            for (ag, ant) in [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0), (4.0, 0.25)] {
                for beta in [0.1, 1.0, 5.0] {
                    points += 1;
                    let off = pet_model(&PetExperiment::standard(ag, ant, 100.0, 0.0, beta))?;
                    let on = pet_model(&PetExperiment::standard(ag, ant, 100.0, 0.05, beta))?;
                    grid_ok &= (off.r_ab - off.r_cd).abs() <= 1e-12 * off.r_cd && on.r_ab > on.r_cd;
                }
            }
            Ok((
            max_drift < 1e-12 && monotone && grid_ok,
            format!(
                "weight drift {max_drift:.2e} over 1e6 steps, mean r monotone: {monotone} (weight left below top bin {:.1e}), \
                 PET ordering on {points}/{points} grid points: {grid_ok}",
                pulse.weight_below_top()
            ),
        ))
        })(),
    )
}

/// A reduction at the resolution limit leaves a superposition.
pub fn resolution_limit() -> CriterionResult {
    finish(
        9,
        "resolution limit",
        (|| {
            let w = 0.05;
            let kernel = ResolutionKernel::gaussian(w)?;
            let (_, near) = partial_reduction((0.5, 0.5), w, &kernel, Branch::First)?;
            let (_, far) = partial_reduction((0.5, 0.5), 10.0 * w, &kernel, Branch::First)?;
            Ok((
                near > 0.5 * 0.5 && far < 1e-10 * 0.5,
                format!("surviving fraction {:.4} at gap w, {:.2e} at gap 10w", near / 0.5, far / 0.5),
            ))
        })(),
    )
}

pub fn run_all() -> Vec<CriterionResult> {
    vec![
        born_recovery(),
        unit_hit_probability(),
        two_observer_completeness(),
        mode_indistinguishability(),
        dynamics_oracle(),
        hit_time_density(),
        everett_exclusion(),
        drift_and_pet(),
        resolution_limit(),
    ]
}
