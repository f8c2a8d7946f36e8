//! Reduction rules: the stochastic trigger, ready-state creation, boundary reduction,
//! the ready-state transition mask and the objective-reduction variant.

mod trigger;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statedyn::{BrainStatus, Component, CurrentMatrix, Factor, HamiltonianSchedule, SystemState};

pub use trigger::{choose_component, Trigger};

/// Which family of rules drives reductions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleVariant {
    /// Rules 1-4: only hits on ready components reduce the state.
    #[default]
    Standard,
    /// Rule 1a with 3mod, plus rules 1, 2 and 4: hits on incoherent components reduce the state.
    Objective,
}

impl fmt::Display for RuleVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleVariant::Standard => "standard",
            RuleVariant::Objective => "objective",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleMode {
    pub variant: RuleVariant,
    pub rule4_enabled: bool,
}

impl RuleMode {
    pub fn standard() -> Self {
        RuleMode { variant: RuleVariant::Standard, rule4_enabled: true }
    }

    pub fn objective() -> Self {
        RuleMode { variant: RuleVariant::Objective, rule4_enabled: true }
    }

    pub fn without_rule4(mut self) -> Self {
        self.rule4_enabled = false;
        self
    }

    /// Whether a hit on `c` can reduce the state under this mode.
    pub fn is_eligible(&self, c: &Component) -> bool {
        c.is_live()
            && match self.variant {
                RuleVariant::Standard => c.has_ready(),
                RuleVariant::Objective => c.incoherent,
            }
    }
}

impl Default for RuleMode {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AppliedRule {
    #[serde(rename = "3")]
    Rule3,
    #[serde(rename = "1a")]
    Rule1a,
    /// Rule 1a reduction followed by a 3mod promotion of a ready factor.
    #[serde(rename = "1a+3mod")]
    Rule1a3mod,
}

/// A boundary reduction at `time`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionEvent {
    pub time: f64,
    pub chosen: usize,
    pub rule: AppliedRule,
    /// Live components set to zero by this reduction.
    pub zeroed: Vec<usize>,
    /// `(observer, state)` pairs promoted from ready to conscious.
    pub promoted: Vec<(u32, u32)>,
    /// Labels of the chosen component after promotion.
    pub chosen_labels: String,
    /// The chosen component was fed by a transition between two components holding the same
    /// observer's ready state. Never set while rule 4 is enforced.
    pub forbidden_transition: bool,
}

/// Hit rate `(sum of positive net currents into subsystem) / s`, in 1/s.
pub fn hazard_from_currents(state: &SystemState, currents: &CurrentMatrix, subsystem: &[usize]) -> Result<f64> {
    let s = state.s();
    if !(s > 0.0) {
        return Err(Error::DegenerateState(s));
    }
    let mut positive = 0.0;
    for &n in subsystem {
        if n >= currents.dim() {
            return Err(Error::InvalidIndex { index: n, len: currents.dim() });
        }
        positive += currents.net_into(n).max(0.0);
    }
    Ok(positive / s)
}

/// Hit rate for `subsystem` under `sched` at the state's time.
pub fn hazard(state: &SystemState, sched: &HamiltonianSchedule, subsystem: &[usize]) -> Result<f64> {
    let currents = crate::statedyn::current_matrix(state, sched)?;
    hazard_from_currents(state, &currents, subsystem)
}

/// One flat-hazard step of the trigger: adds `hazard * dt` and, if the threshold is crossed,
/// chooses the hit component among `candidates` in proportion to their positive net currents.
pub fn advance_trigger<R: Rng + ?Sized>(
    trigger: &mut Trigger,
    hazard: f64,
    dt: f64,
    net_currents: &[f64],
    candidates: &[usize],
    rng: &mut R,
) -> Option<usize> {
    debug_assert!(hazard * dt < 0.1, "step too coarse for the trigger");
    trigger.accumulate(hazard * dt, hazard, hazard)?;
    choose_component(net_currents, candidates, rng.random::<f64>())
}

/// Rule 2: appends `new` components at `time`.
///
/// When `discontinuous`, every active brain factor of a new component becomes ready, except a
/// conscious factor that continues a state the same observer is already conscious of in a live
/// component. Unconscious and unknown factors are left alone. Returns the index range added.
pub fn apply_rule2(
    state: &mut SystemState,
    new: Vec<Component>,
    discontinuous: bool,
    time: f64,
) -> Result<std::ops::Range<usize>> {
    let start = state.len();
    let mut prepared = Vec::with_capacity(new.len());
    for (k, mut c) in new.into_iter().enumerate() {
        if c.amplitude.norm_sqr() != 0.0 {
            return Err(Error::RuleNotApplicable {
                rule: "2",
                message: format!("new component {} must start at amplitude 0", start + k),
            });
        }
        Component::check_labels(&c.labels)
            .map_err(|m| Error::validation(format!("components[{}].labels", start + k), m))?;
        if discontinuous {
            for f in &mut c.labels {
                if let Factor::Brain { observer, state: st, status } = f {
                    let continues = *status == BrainStatus::Conscious
                        && state
                            .components
                            .iter()
                            .filter(|c| c.is_live())
                            .any(|c| c.conscious_states().any(|p| p == (*observer, *st)));
                    if status.is_active() && !continues {
                        *status = BrainStatus::Ready;
                    }
                }
            }
        }
        c.birth_time = time;
        c.reduced = false;
        prepared.push(c);
    }
    state.components.extend(prepared);
    state.refresh_s();
    Ok(start..state.len())
}

fn promote_ready(c: &mut Component) -> Vec<(u32, u32)> {
    let mut promoted = Vec::new();
    for f in &mut c.labels {
        if let Factor::Brain { observer, state, status } = f {
            if *status == BrainStatus::Ready {
                *status = BrainStatus::Conscious;
                promoted.push((*observer, *state));
            }
        }
    }
    promoted
}

fn reduce_others(state: &mut SystemState, hit: usize) -> Vec<usize> {
    let mut zeroed = Vec::new();
    for (i, c) in state.components.iter_mut().enumerate() {
        if i != hit && c.is_live() {
            c.amplitude = num_complex::Complex64::new(0.0, 0.0);
            c.reduced = true;
            zeroed.push(i);
        }
    }
    state.refresh_s();
    zeroed
}

fn check_hit(state: &SystemState, hit: usize, rule: &'static str) -> Result<()> {
    let c = state.components.get(hit).ok_or(Error::InvalidIndex { index: hit, len: state.len() })?;
    if c.reduced {
        return Err(Error::RuleNotApplicable { rule, message: format!("component {hit} was already reduced") });
    }
    Ok(())
}

/// Rule 3: the hit component's ready factors become conscious and every other component is
/// reduced to zero. `s` is recomputed, not renormalized.
pub fn apply_rule3(state: &mut SystemState, hit: usize) -> Result<ReductionEvent> {
    check_hit(state, hit, "3")?;
    if !state.components[hit].has_ready() {
        return Err(Error::RuleNotApplicable {
            rule: "3",
            message: format!("component {hit} ({}) holds no ready brain factor", state.components[hit].render()),
        });
    }
    let promoted = promote_ready(&mut state.components[hit]);
    let zeroed = reduce_others(state, hit);
    Ok(ReductionEvent {
        time: state.time,
        chosen: hit,
        rule: AppliedRule::Rule3,
        zeroed,
        promoted,
        chosen_labels: state.components[hit].render(),
        forbidden_transition: false,
    })
}

/// Rule 1a: a hit on a locally incoherent component reduces every other component to zero.
/// A ready factor in the hit component is then promoted (3mod) without a second reduction.
pub fn apply_rule1a(state: &mut SystemState, hit: usize) -> Result<ReductionEvent> {
    check_hit(state, hit, "1a")?;
    if !state.components[hit].incoherent {
        return Err(Error::RuleNotApplicable {
            rule: "1a",
            message: format!("component {hit} ({}) is coherent with the others", state.components[hit].render()),
        });
    }
    let zeroed = reduce_others(state, hit);
    let promoted = promote_ready(&mut state.components[hit]);
    let rule = if promoted.is_empty() { AppliedRule::Rule1a } else { AppliedRule::Rule1a3mod };
    Ok(ReductionEvent {
        time: state.time,
        chosen: hit,
        rule,
        zeroed,
        promoted,
        chosen_labels: state.components[hit].render(),
        forbidden_transition: false,
    })
}

/// True when both components hold a ready factor for the same `(observer, state)`.
pub fn shares_ready(a: &Component, b: &Component) -> bool {
    a.ready_states().any(|p| b.ready_states().any(|q| p == q))
}

/// Rule 4: returns `sched` with every pair sharing a ready state masked.
pub fn rule4_mask(state: &SystemState, sched: &HamiltonianSchedule) -> HamiltonianSchedule {
    let mut out = sched.clone();
    let comps = &state.components;
    for m in 0..comps.len() {
        for n in (m + 1)..comps.len() {
            if shares_ready(&comps[m], &comps[n]) {
                out.mask_pair(m, n);
            }
        }
    }
    out
}
