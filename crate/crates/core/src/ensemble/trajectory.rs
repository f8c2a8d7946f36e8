//! Single-trajectory engine.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{
    apply_rule1a, apply_rule2, apply_rule3, choose_component, rule4_mask, shares_ready, ReductionEvent, RuleMode,
    RuleVariant, Trigger,
};
use crate::scenarios::{Action, Scenario};
use crate::statedyn::{default_step, effective_matrix, HamiltonianSchedule, Matrix, Propagator, SystemState};

/// Components whose square modulus falls below this are left out of outcome keys.
const NEGLIGIBLE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryOptions {
    /// Fixed step; by default `2 pi / |g|max / 200` of the matrix active on each piece.
    pub dt: Option<f64>,
    /// Check the single-conscious-state invariant after every step and operation.
    pub audit: bool,
    /// Multiplies the hit rate. Values other than 1 deliberately break the rules.
    pub hazard_scale: f64,
    pub record_trace: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions { dt: None, audit: cfg!(debug_assertions), hazard_scale: 1.0, record_trace: false }
    }
}

/// State snapshot after one integration step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub moduli: Vec<f64>,
    pub currents: Vec<f64>,
    pub hazard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub events: Vec<ReductionEvent>,
    /// Rendered labels of the live components with nonzero modulus at the end of the run.
    pub final_labels: Vec<String>,
    pub final_s: f64,
    /// Time of the first reduction.
    pub hit_time: Option<f64>,
    /// The reduction path (chosen labels joined by `" -> "`), or the surviving superposition
    /// (labels joined by `" + "`) when nothing was reduced.
    pub outcome: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TracePoint>,
}

impl TrajectoryRecord {
    pub fn forbidden(&self) -> bool {
        self.events.iter().any(|e| e.forbidden_transition)
    }
}

/// Net current into every component: `2 Im(conj(c_n) (H c)_n)`.
fn net_currents(h: &Matrix, amps: &[Complex64], scratch: &mut [Complex64], out: &mut [f64]) {
    h.mul_vec(amps, scratch);
    for ((o, a), hc) in out.iter_mut().zip(amps).zip(scratch.iter()) {
        *o = 2.0 * (a.conj() * hc).im;
    }
}

fn positive_sum(values: &[f64], candidates: &[usize]) -> f64 {
    candidates.iter().map(|&n| values[n].max(0.0)).sum()
}

struct Engine<'a> {
    scenario: &'a Scenario,
    mode: RuleMode,
    opts: TrajectoryOptions,
    rule4: bool,
    rng: ChaCha8Rng,
    state: SystemState,
    base: HamiltonianSchedule,
    next_event: usize,
    trigger: Trigger,
    events: Vec<ReductionEvent>,
    trace: Vec<TracePoint>,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, mode: RuleMode, seed: u64, opts: TrajectoryOptions) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trigger = Trigger::draw(&mut rng);
        Ok(Engine {
            scenario,
            mode,
            opts,
            rule4: mode.rule4_enabled && scenario.rule4,
            rng,
            state: scenario.initial_state()?,
            base: scenario.initial_schedule(),
            next_event: 0,
            trigger,
            events: Vec::new(),
            trace: Vec::new(),
        })
    }

    fn audit(&self) -> Result<()> {
        if self.opts.audit {
            self.state.check_everett()?;
        }
        Ok(())
    }

    fn fire_due_events(&mut self) -> Result<()> {
        while let Some(ev) = self.scenario.events.get(self.next_event) {
            if ev.t > self.state.time + 1e-12 {
                break;
            }
            match &ev.action {
                Action::SpawnComponents { components, discontinuous, couplings } => {
                    let new = components.iter().map(|c| c.to_component()).collect();
                    let t = self.state.time;
                    apply_rule2(&mut self.state, new, *discontinuous, t)?;
                    for c in couplings {
                        self.base.push_entry(*c);
                    }
                }
                Action::EndWindow { pairs } => {
                    for &(m, n) in pairs {
                        self.base.end_window(m, n, self.state.time);
                    }
                }
                Action::SetIncoherent { indices } => {
                    for &i in indices {
                        self.state.components[i].incoherent = true;
                    }
                }
            }
            self.next_event += 1;
            self.audit()?;
        }
        Ok(())
    }

    fn schedule(&self) -> HamiltonianSchedule {
        if self.rule4 {
            rule4_mask(&self.state, &self.base)
        } else {
            self.base.clone()
        }
    }

    fn candidates(&self) -> Vec<usize> {
        self.scenario
            .subsystem
            .iter()
            .copied()
            .filter(|&n| n < self.state.len() && self.mode.is_eligible(&self.state.components[n]))
            .collect()
    }

    /// End of the current constant piece of the Hamiltonian.
    fn next_stop(&self, sched: &HamiltonianSchedule) -> f64 {
        let mut stop = self.scenario.duration;
        if let Some(ev) = self.scenario.events.get(self.next_event) {
            stop = stop.min(ev.t);
        }
        if let Some(b) = sched.next_breakpoint(self.state.time) {
            stop = stop.min(b);
        }
        stop
    }

    fn reduce(&mut self, hit: usize, h: &Matrix) -> Result<()> {
        let amps: Vec<Complex64> = self.state.components.iter().map(|c| c.amplitude).collect();
        let fed_by_same_ready = (0..self.state.len()).any(|m| {
            m != hit
                && 2.0 * (amps[hit].conj() * h.get(hit, m) * amps[m]).im > 0.0
                && shares_ready(&self.state.components[hit], &self.state.components[m])
        });
        let mut event = match self.mode.variant {
            RuleVariant::Standard => apply_rule3(&mut self.state, hit)?,
            RuleVariant::Objective => apply_rule1a(&mut self.state, hit)?,
        };
        event.forbidden_transition = fed_by_same_ready;
        self.events.push(event);
        self.trigger = Trigger::draw(&mut self.rng);
        self.audit()
    }

    fn run(mut self) -> Result<(SystemState, Vec<ReductionEvent>, Vec<TracePoint>)> {
        let duration = self.scenario.duration;
        self.fire_due_events()?;
        while self.state.time < duration {
            // Statuses may have changed since the last piece, so the mask is rebuilt.
            let sched = self.schedule();
            let stop = self.next_stop(&sched);
            let h = effective_matrix(&self.state, &sched)?;
            if !h.is_zero() {
                let dt = self.opts.dt.or_else(|| default_step(&h)).unwrap_or(stop - self.state.time);
                if self.integrate_piece(&h, dt, stop)? {
                    continue;
                }
            }
            self.state.time = stop;
            self.fire_due_events()?;
        }
        Ok((self.state, self.events, self.trace))
    }

    /// Integrates under `h` until `stop` or the next hit. Returns true on a hit.
    fn integrate_piece(&mut self, h: &Matrix, dt: f64, stop: f64) -> Result<bool> {
        let dim = self.state.len();
        let candidates = self.candidates();
        let mut prop = Propagator::new(h.clone());
        let mut amps: Vec<Complex64> = self.state.components.iter().map(|c| c.amplitude).collect();
        let mut prev = amps.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        let mut net0 = vec![0.0; dim];
        let mut net1 = vec![0.0; dim];
        net_currents(h, &amps, &mut scratch, &mut net0);
        let scale = self.opts.hazard_scale;
        loop {
            let remaining = stop - self.state.time;
            if remaining <= 1e-12 * stop.abs().max(1.0) {
                return Ok(false);
            }
            let s = self.state.s();
            if !(s > 0.0) {
                return Err(Error::DegenerateState(s));
            }
            let step = dt.min(remaining);
            let t0 = self.state.time;
            prev.copy_from_slice(&amps);
            prop.step(&mut amps, step);
            if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(Error::Numerical { time: t0, message: "non-finite amplitude".into() });
            }
            net_currents(h, &amps, &mut scratch, &mut net1);
            let increment: f64 =
                candidates.iter().map(|&n| (amps[n].norm_sqr() - prev[n].norm_sqr()).max(0.0)).sum::<f64>() / s * scale;
            let crossing = if candidates.is_empty() {
                None
            } else {
                self.trigger.accumulate(increment, positive_sum(&net0, &candidates), positive_sum(&net1, &candidates))
            };
            match crossing {
                None => {
                    for (c, a) in self.state.components.iter_mut().zip(&amps) {
                        c.amplitude = *a;
                    }
                    self.state.time = if step == remaining { stop } else { t0 + step };
                    self.state.refresh_s();
                    self.audit()?;
                    if self.opts.record_trace {
                        let hazard = positive_sum(&net1, &candidates) / self.state.s() * scale;
                        self.push_trace(&net1, hazard);
                    }
                    std::mem::swap(&mut net0, &mut net1);
                }
                Some(x) => {
                    amps.copy_from_slice(&prev);
                    if x > 0.0 {
                        prop.step(&mut amps, x * step);
                    }
                    for (c, a) in self.state.components.iter_mut().zip(&amps) {
                        c.amplitude = *a;
                    }
                    self.state.time = t0 + x * step;
                    self.state.refresh_s();
                    let mut at_hit = vec![0.0; dim];
                    net_currents(h, &amps, &mut scratch, &mut at_hit);
                    let draw = self.rng.random::<f64>();
                    let chosen = choose_component(&at_hit, &candidates, draw)
                        .or_else(|| {
                            let blended: Vec<f64> =
                                net0.iter().zip(&net1).map(|(a, b)| (1.0 - x) * a + x * b).collect();
                            choose_component(&blended, &candidates, draw)
                        })
                        .or_else(|| {
                            let gained: Vec<f64> = (0..dim).map(|n| amps[n].norm_sqr() - prev[n].norm_sqr()).collect();
                            choose_component(&gained, &candidates, draw)
                        })
                        .ok_or_else(|| Error::Numerical {
                            time: self.state.time,
                            message: "trigger fired with no current into any candidate".into(),
                        })?;
                    if self.opts.record_trace {
                        let hazard = positive_sum(&at_hit, &candidates) / self.state.s() * scale;
                        self.push_trace(&at_hit, hazard);
                    }
                    self.reduce(chosen, h)?;
                    return Ok(true);
                }
            }
        }
    }

    fn push_trace(&mut self, net: &[f64], hazard: f64) {
        self.trace.push(TracePoint { t: self.state.time, moduli: self.state.moduli(), currents: net.to_vec(), hazard });
    }
}

fn outcome_key(state: &SystemState, events: &[ReductionEvent]) -> String {
    if events.is_empty() {
        surviving(state).join(" + ")
    } else {
        events.iter().map(|e| e.chosen_labels.as_str()).collect::<Vec<_>>().join(" -> ")
    }
}

fn surviving(state: &SystemState) -> Vec<String> {
    state.components.iter().filter(|c| c.is_live() && c.modulus() > NEGLIGIBLE).map(|c| c.render()).collect()
}

/// Runs one trajectory of `scenario` from `seed`.
pub fn run_trajectory(
    scenario: &Scenario,
    mode: RuleMode,
    seed: u64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRecord> {
    if let Some(dt) = opts.dt {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("step size must be positive, got {dt}")));
        }
    }
    if !(opts.hazard_scale >= 0.0) || !opts.hazard_scale.is_finite() {
        return Err(Error::Config(format!("hazard scale must be nonnegative, got {}", opts.hazard_scale)));
    }
    let (state, events, trace) = Engine::new(scenario, mode, seed, *opts)?.run()?;
    Ok(TrajectoryRecord {
        seed,
        hit_time: events.first().map(|e| e.time),
        outcome: outcome_key(&state, &events),
        final_labels: surviving(&state),
        final_s: state.s(),
        events,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{build, ScenarioParams};

    fn opts() -> TrajectoryOptions {
        TrajectoryOptions { audit: true, ..TrajectoryOptions::default() }
    }

    #[test]
    fn detector_only_never_reduces_in_standard_mode() {
        let s = build("detector_only", &ScenarioParams::default()).unwrap();
        for seed in 0..20 {
            let r = run_trajectory(&s, RuleMode::standard(), seed, &opts()).unwrap();
            assert!(r.events.is_empty());
            assert_eq!(r.outcome, "psi D0 + D1");
            assert!((r.final_s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn detector_only_reduces_in_objective_mode() {
        let s = build("detector_only", &ScenarioParams::default().full_transfer()).unwrap();
        let r = run_trajectory(&s, RuleMode::objective(), 3, &opts()).unwrap();
        assert_eq!(r.events.len(), 1);
        assert_eq!(r.outcome, "D1");
    }

    #[test]
    fn full_transfer_always_hits() {
        let s = build("observer_on_board", &ScenarioParams::default().full_transfer()).unwrap();
        for seed in 0..200 {
            let r = run_trajectory(&s, RuleMode::standard(), seed, &opts()).unwrap();
            assert_eq!(r.outcome, "D1 1:B1*");
            let t = r.hit_time.unwrap();
            assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&t));
            assert!(r.final_s <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn reduction_leaves_one_live_component() {
        let s = build("observer_on_board", &ScenarioParams::default()).unwrap();
        for seed in 0..50 {
            let r = run_trajectory(&s, RuleMode::standard(), seed, &opts()).unwrap();
            let live = if r.events.is_empty() { 2 } else { 1 };
            assert_eq!(r.final_labels.len(), live, "{r:?}");
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let s = build("two_observers", &ScenarioParams::default()).unwrap();
        let a = run_trajectory(&s, RuleMode::standard(), 11, &opts()).unwrap();
        let b = run_trajectory(&s, RuleMode::standard(), 11, &opts()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_observers_every_trajectory_chooses() {
        let s = build("two_observers", &ScenarioParams::default()).unwrap();
        for seed in 0..100 {
            let r = run_trajectory(&s, RuleMode::standard(), seed, &opts()).unwrap();
            assert!(!r.events.is_empty());
            assert!(!r.forbidden());
            assert_ne!(r.outcome, "D1' 1:B1* 2:B1*");
        }
    }

    #[test]
    fn trace_records_each_step() {
        let s = build("observer_on_board", &ScenarioParams::default()).unwrap();
        let o = TrajectoryOptions { record_trace: true, ..opts() };
        let r = run_trajectory(&s, RuleMode::standard(), 1, &o).unwrap();
        assert!(!r.trace.is_empty());
        assert!(r.trace.windows(2).all(|w| w[0].t <= w[1].t));
    }

    #[test]
    fn zero_hazard_scale_never_hits() {
        let s = build("observer_on_board", &ScenarioParams::default().full_transfer()).unwrap();
        let o = TrajectoryOptions { hazard_scale: 0.0, ..opts() };
        let r = run_trajectory(&s, RuleMode::standard(), 1, &o).unwrap();
        assert!(r.events.is_empty());
        assert_eq!(r.outcome, "D1 1:B1~");
    }

    #[test]
    fn rejects_bad_step() {
        let s = build("observer_on_board", &ScenarioParams::default()).unwrap();
        let o = TrajectoryOptions { dt: Some(0.0), ..opts() };
        assert!(matches!(run_trajectory(&s, RuleMode::standard(), 1, &o), Err(Error::Config(_))));
    }
}
