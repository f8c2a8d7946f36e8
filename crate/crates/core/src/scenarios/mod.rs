//! Declarative scenarios: initial components, coupling windows and timed events.
//!
//! Component indices are global: initial components come first, and each spawn event appends
//! its components in order. Spawn events carry the couplings that feed the new components.

mod catalog;
mod file;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statedyn::{Component, Coupling, Factor, HamiltonianSchedule, SystemState};

pub use catalog::{build, catalog_names, ScenarioParams, CATALOG};
pub use file::{from_json_str, load, save, to_json_string};

/// A component as declared by a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSpec {
    pub labels: Vec<Factor>,
    pub amplitude: Complex64,
    pub incoherent: bool,
}

impl ComponentSpec {
    pub fn new(labels: Vec<Factor>, amplitude: f64) -> Self {
        ComponentSpec { labels, amplitude: Complex64::new(amplitude, 0.0), incoherent: false }
    }

    /// Zero-amplitude component for a spawn event.
    pub fn spawned(labels: Vec<Factor>) -> Self {
        Self::new(labels, 0.0)
    }

    pub fn incoherent(mut self) -> Self {
        self.incoherent = true;
        self
    }

    pub fn to_component(&self) -> Component {
        Component::new(self.amplitude, self.labels.clone()).incoherent(self.incoherent)
    }

    fn has_brain(&self) -> bool {
        self.labels.iter().any(|f| f.observer().is_some())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    SpawnComponents {
        components: Vec<ComponentSpec>,
        discontinuous: bool,
        couplings: Vec<Coupling>,
    },
    /// Closes the coupling windows of each listed pair.
    EndWindow {
        pairs: Vec<(usize, usize)>,
    },
    SetIncoherent {
        indices: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduledEvent {
    pub t: f64,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub components: Vec<ComponentSpec>,
    pub couplings: Vec<Coupling>,
    pub events: Vec<ScheduledEvent>,
    pub duration: f64,
    /// Components the stochastic trigger watches.
    pub subsystem: Vec<usize>,
    /// When false, the ready-state transition mask is never applied for this scenario.
    pub rule4: bool,
}

impl Scenario {
    /// Number of components once every spawn event has fired.
    pub fn total_components(&self) -> usize {
        self.components.len()
            + self
                .events
                .iter()
                .map(|e| match &e.action {
                    Action::SpawnComponents { components, .. } => components.len(),
                    _ => 0,
                })
                .sum::<usize>()
    }

    pub fn initial_state(&self) -> Result<SystemState> {
        SystemState::new(self.components.iter().map(ComponentSpec::to_component).collect(), 0.0)
    }

    pub fn initial_schedule(&self) -> HamiltonianSchedule {
        let mut s = HamiltonianSchedule::new();
        for c in &self.couplings {
            s.push_entry(*c);
        }
        s
    }

    /// Every coupling, including those introduced by spawn events.
    pub fn full_schedule(&self) -> HamiltonianSchedule {
        let mut s = self.initial_schedule();
        for e in &self.events {
            if let Action::SpawnComponents { couplings, .. } = &e.action {
                for c in couplings {
                    s.push_entry(*c);
                }
            }
        }
        s
    }

    /// Span of the coupling windows that feed the watched subsystem, clipped to the run.
    pub fn hit_window(&self) -> (f64, f64) {
        let full = self.full_schedule();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for e in full.entries().iter().filter(|e| e.row != e.col && self.subsystem.contains(&e.row)) {
            lo = lo.min(e.window.start);
            hi = hi.max(e.window.end);
        }
        if lo > hi {
            return (0.0, self.duration);
        }
        (lo.max(0.0), hi.min(self.duration))
    }

    /// Checks every structural invariant; built-ins and loaded files go through the same path.
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::validation("duration", format!("must be positive and finite, got {}", self.duration)));
        }
        if self.components.is_empty() {
            return Err(Error::validation("components", "at least one initial component is required"));
        }
        for (i, c) in self.components.iter().enumerate() {
            let path = format!("components[{i}]");
            Component::check_labels(&c.labels).map_err(|m| Error::validation(format!("{path}.labels"), m))?;
            if c.labels.iter().any(Factor::is_ready) {
                return Err(Error::validation(
                    format!("{path}.labels"),
                    "initial components may not hold ready brain factors; ready states are created by a discontinuous spawn (rule 2)",
                ));
            }
            if !(c.amplitude.re.is_finite() && c.amplitude.im.is_finite()) {
                return Err(Error::validation(format!("{path}.amplitude"), "must be finite"));
            }
        }
        let mut existing = self.components.len();
        check_couplings(&self.couplings, existing, "couplings")?;
        let mut last_t = 0.0;
        for (k, ev) in self.events.iter().enumerate() {
            let path = format!("events[{k}]");
            if !(0.0..=self.duration).contains(&ev.t) {
                return Err(Error::validation(
                    format!("{path}.t"),
                    format!("{} lies outside [0, {}]", ev.t, self.duration),
                ));
            }
            if ev.t < last_t {
                return Err(Error::validation(format!("{path}.t"), "events must be sorted by time"));
            }
            last_t = ev.t;
            match &ev.action {
                Action::SpawnComponents { components, discontinuous, couplings } => {
                    for (j, c) in components.iter().enumerate() {
                        let cpath = format!("{path}.payload.components[{j}]");
                        if c.amplitude.norm_sqr() != 0.0 {
                            return Err(Error::validation(
                                format!("{cpath}.amplitude"),
                                "spawned components must start at amplitude 0",
                            ));
                        }
                        Component::check_labels(&c.labels)
                            .map_err(|m| Error::validation(format!("{cpath}.labels"), m))?;
                        if !discontinuous && c.labels.iter().any(Factor::is_ready) {
                            return Err(Error::validation(
                                format!("{cpath}.labels"),
                                "ready brain factors can only come from a discontinuous spawn (rule 2)",
                            ));
                        }
                    }
                    existing += components.len();
                    check_couplings(couplings, existing, &format!("{path}.payload.couplings"))?;
                }
                Action::EndWindow { pairs } => {
                    for (j, &(m, n)) in pairs.iter().enumerate() {
                        if m >= existing || n >= existing {
                            return Err(Error::validation(
                                format!("{path}.payload.pairs[{j}]"),
                                format!("index out of range for {existing} components"),
                            ));
                        }
                    }
                }
                Action::SetIncoherent { indices } => {
                    if let Some(j) = indices.iter().position(|&i| i >= existing) {
                        return Err(Error::validation(
                            format!("{path}.payload.indices[{j}]"),
                            format!("index out of range for {existing} components"),
                        ));
                    }
                }
            }
        }
        if self.subsystem.is_empty() {
            return Err(Error::validation("subsystem", "must list at least one component"));
        }
        if let Some(j) = self.subsystem.iter().position(|&i| i >= existing) {
            return Err(Error::validation(
                format!("subsystem[{j}]"),
                format!("index out of range for {existing} components"),
            ));
        }
        self.full_schedule().validate(existing).map_err(|e| Error::validation("couplings", e.to_string()))
    }
}

fn check_couplings(couplings: &[Coupling], dim: usize, path: &str) -> Result<()> {
    for (j, c) in couplings.iter().enumerate() {
        if c.row >= dim || c.col >= dim {
            return Err(Error::validation(format!("{path}[{j}]"), format!("index out of range for {dim} components")));
        }
        if !(c.window.start < c.window.end) {
            return Err(Error::validation(format!("{path}[{j}]"), "t_start must be before t_end"));
        }
        if !(c.strength.re.is_finite() && c.strength.im.is_finite()) {
            return Err(Error::validation(format!("{path}[{j}]"), "coupling must be finite"));
        }
    }
    Ok(())
}
