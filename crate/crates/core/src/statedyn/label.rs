//! Subsystem factors that label a superposition component.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Status of one observer's brain factor inside a component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrainStatus {
    Conscious,
    /// Neither conscious nor unconscious; promotable only by a stochastic hit.
    Ready,
    Unconscious,
    /// Brain state of an observer who has not yet interacted (the `X` factor).
    Unknown,
}

impl BrainStatus {
    /// Conscious and ready states are the active ones.
    pub fn is_active(self) -> bool {
        matches!(self, BrainStatus::Conscious | BrainStatus::Ready)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorMode {
    D0,
    D1,
}

/// One subsystem factor of a component label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    /// Free particle wave `psi(t)`.
    Particle {
        #[serde(default)]
        primed: bool,
    },
    /// Detector (or any macroscopic device) in mode `D0`/`D1`; primed variants are distinct labels.
    Detector {
        #[serde(default)]
        device: u8,
        mode: DetectorMode,
        #[serde(default)]
        primed: bool,
    },
    /// Brain factor of observer `observer` in brain state `state`.
    Brain {
        observer: u32,
        #[serde(default)]
        state: u32,
        status: BrainStatus,
    },
}

impl Factor {
    pub fn particle() -> Self {
        Factor::Particle { primed: false }
    }

    pub fn particle_primed() -> Self {
        Factor::Particle { primed: true }
    }

    pub fn detector(mode: DetectorMode) -> Self {
        Factor::Detector { device: 0, mode, primed: false }
    }

    pub fn detector_primed(mode: DetectorMode) -> Self {
        Factor::Detector { device: 0, mode, primed: true }
    }

    pub fn device(device: u8, mode: DetectorMode) -> Self {
        Factor::Detector { device, mode, primed: false }
    }

    pub fn brain(observer: u32, state: u32, status: BrainStatus) -> Self {
        Factor::Brain { observer, state, status }
    }

    /// The `X` factor: an observer who has not interacted yet.
    pub fn unknown(observer: u32) -> Self {
        Factor::Brain { observer, state: 0, status: BrainStatus::Unknown }
    }

    pub fn observer(&self) -> Option<u32> {
        match self {
            Factor::Brain { observer, .. } => Some(*observer),
            _ => None,
        }
    }

    pub fn status(&self) -> Option<BrainStatus> {
        match self {
            Factor::Brain { status, .. } => Some(*status),
            _ => None,
        }
    }

    pub fn is_ready(&self) -> bool {
        self.status() == Some(BrainStatus::Ready)
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Particle { primed } => write!(f, "psi{}", if *primed { "'" } else { "" }),
            Factor::Detector { device, mode, primed } => {
                write!(f, "{:?}{}", mode, if *primed { "'" } else { "" })?;
                if *device != 0 {
                    write!(f, "#{device}")?;
                }
                Ok(())
            }
            Factor::Brain { observer, state, status } => match status {
                BrainStatus::Unknown => write!(f, "{observer}:X"),
                BrainStatus::Conscious => write!(f, "{observer}:B{state}*"),
                BrainStatus::Ready => write!(f, "{observer}:B{state}~"),
                BrainStatus::Unconscious => write!(f, "{observer}:B{state}-"),
            },
        }
    }
}

/// Renders a label list as space-separated factors, e.g. `D1 1:B1*`.
///
/// Conscious brain factors carry `*`, ready ones `~`, unconscious ones `-`.
pub fn render_labels(labels: &[Factor]) -> String {
    labels.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}
