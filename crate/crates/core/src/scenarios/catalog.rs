//! Built-in gedanken experiments.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use num_complex::Complex64;

use super::{Action, ComponentSpec, Scenario, ScheduledEvent};
use crate::error::{Error, Result};
use crate::statedyn::{BrainStatus, Coupling, DetectorMode, Factor, Window};

/// Names accepted by [`build`].
pub const CATALOG: [&str; 8] = [
    "detector_only",
    "observer_on_board",
    "terminal_observation",
    "two_observers",
    "two_observers_no_rule4",
    "cat_version_I",
    "cat_version_II",
    "cat_internal_alarm",
];

pub fn catalog_names() -> &'static [&'static str] {
    &CATALOG
}

/// Free parameters of the built-ins. Couplings in rad/s, times in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Particle/detector coupling.
    pub capture_coupling: f64,
    /// The capture interaction runs over `[0, capture_window)`.
    pub capture_window: f64,
    /// Physiological observation coupling; each observation lasts a quarter Rabi period.
    pub observation_coupling: f64,
    /// Observation time `t_ob` (terminal observation) or `t_ob(2)` (second observer).
    pub observation_time: f64,
    /// Internal-alarm coupling of the internal-alarm cat.
    pub internal_coupling: f64,
    pub duration: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            capture_coupling: 1.0,
            capture_window: FRAC_PI_3,
            observation_coupling: 20.0,
            observation_time: 1.5,
            internal_coupling: 0.5,
            duration: 3.0,
        }
    }
}

impl ScenarioParams {
    /// Capture window that leaves square modulus `p` in the capture branch.
    pub fn with_capture_modulus(mut self, p: f64) -> Self {
        self.capture_window = p.sqrt().asin() / self.capture_coupling;
        self
    }

    /// Capture window long enough to move all of the modulus.
    pub fn full_transfer(mut self) -> Self {
        self.capture_window = FRAC_PI_2 / self.capture_coupling;
        self
    }

    pub fn observation_length(&self) -> f64 {
        FRAC_PI_2 / self.observation_coupling
    }

    fn check(&self) -> Result<()> {
        let fields = [
            ("capture_coupling", self.capture_coupling),
            ("capture_window", self.capture_window),
            ("observation_coupling", self.observation_coupling),
            ("observation_time", self.observation_time),
            ("internal_coupling", self.internal_coupling),
            ("duration", self.duration),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("parameter {name} must be positive, got {v}")));
            }
        }
        if self.capture_window > self.duration {
            return Err(Error::Schedule("capture window extends past the end of the run".into()));
        }
        Ok(())
    }

    fn check_observation(&self) -> Result<()> {
        if self.observation_time <= self.capture_window {
            return Err(Error::Schedule(format!(
                "observation at {} must come after the capture interaction ends at {}",
                self.observation_time, self.capture_window
            )));
        }
        if self.observation_time + self.observation_length() > self.duration {
            return Err(Error::Schedule("observation does not complete before the end of the run".into()));
        }
        Ok(())
    }
}

fn couple(m: usize, n: usize, g: f64, start: f64, end: f64) -> [Coupling; 2] {
    let window = Window::new(start, end);
    let g = Complex64::new(g, 0.0);
    [Coupling { row: m, col: n, strength: g, window }, Coupling { row: n, col: m, strength: g.conj(), window }]
}

fn spawn(t: f64, components: Vec<ComponentSpec>, couplings: Vec<Coupling>) -> ScheduledEvent {
    ScheduledEvent { t, action: Action::SpawnComponents { components, discontinuous: true, couplings } }
}

fn conscious(obs: u32, st: u32) -> Factor {
    Factor::brain(obs, st, BrainStatus::Conscious)
}

fn ready(obs: u32, st: u32) -> Factor {
    Factor::brain(obs, st, BrainStatus::Ready)
}

fn unconscious(obs: u32, st: u32) -> Factor {
    Factor::brain(obs, st, BrainStatus::Unconscious)
}

use DetectorMode::{D0, D1};

/// Builds a catalog scenario. Branches that are macroscopically distinct are flagged incoherent
/// from the moment they exist, which only matters under objective reduction.
pub fn build(name: &str, params: &ScenarioParams) -> Result<Scenario> {
    params.check()?;
    let g = params.capture_coupling;
    let tf = params.capture_window;
    let g_obs = params.observation_coupling;
    let t_ob = params.observation_time;
    let t_ob_end = t_ob + params.observation_length();
    let scenario = |components, couplings: Vec<Coupling>, events, subsystem| Scenario {
        name: name.to_string(),
        components,
        couplings,
        events,
        duration: params.duration,
        subsystem,
        rule4: true,
    };

    let s = match name {
        "detector_only" => scenario(
            vec![
                ComponentSpec::new(vec![Factor::particle(), Factor::detector(D0)], 1.0).incoherent(),
                ComponentSpec::new(vec![Factor::detector(D1)], 0.0).incoherent(),
            ],
            couple(0, 1, g, 0.0, tf).to_vec(),
            vec![],
            vec![1],
        ),
        "observer_on_board" => scenario(
            vec![ComponentSpec::new(vec![Factor::particle(), Factor::detector(D0), conscious(1, 0)], 1.0).incoherent()],
            vec![],
            vec![spawn(
                0.0,
                vec![ComponentSpec::spawned(vec![Factor::detector(D1), ready(1, 1)]).incoherent()],
                couple(0, 1, g, 0.0, tf).to_vec(),
            )],
            vec![1],
        ),
        "terminal_observation" => {
            params.check_observation()?;
            let mut obs = couple(0, 2, g_obs, t_ob, t_ob_end).to_vec();
            obs.extend(couple(1, 3, g_obs, t_ob, t_ob_end));
            scenario(
                vec![
                    ComponentSpec::new(vec![Factor::particle(), Factor::detector(D0), Factor::unknown(1)], 1.0)
                        .incoherent(),
                    ComponentSpec::new(vec![Factor::detector(D1), Factor::unknown(1)], 0.0).incoherent(),
                ],
                couple(0, 1, g, 0.0, tf).to_vec(),
                vec![spawn(
                    t_ob,
                    vec![
                        ComponentSpec::spawned(vec![Factor::particle_primed(), Factor::detector(D0), ready(1, 0)])
                            .incoherent(),
                        ComponentSpec::spawned(vec![Factor::detector_primed(D1), ready(1, 1)]).incoherent(),
                    ],
                    obs,
                )],
                vec![2, 3],
            )
        }
        "two_observers" | "two_observers_no_rule4" => {
            params.check_observation()?;
            let mut obs = couple(0, 2, g_obs, t_ob, t_ob_end).to_vec();
            obs.extend(couple(1, 3, g_obs, t_ob, t_ob_end));
            let mut s = scenario(
                vec![ComponentSpec::new(
                    vec![Factor::particle(), Factor::detector(D0), conscious(1, 0), Factor::unknown(2)],
                    1.0,
                )
                .incoherent()],
                vec![],
                vec![
                    spawn(
                        0.0,
                        vec![ComponentSpec::spawned(vec![Factor::detector(D1), ready(1, 1), Factor::unknown(2)])
                            .incoherent()],
                        couple(0, 1, g, 0.0, tf).to_vec(),
                    ),
                    // Observer 1 keeps a state it is already conscious of; otherwise rule 2 makes it ready.
                    spawn(
                        t_ob,
                        vec![
                            ComponentSpec::spawned(vec![
                                Factor::particle_primed(),
                                Factor::detector(D0),
                                conscious(1, 0),
                                ready(2, 0),
                            ])
                            .incoherent(),
                            ComponentSpec::spawned(vec![Factor::detector_primed(D1), conscious(1, 1), ready(2, 1)])
                                .incoherent(),
                        ],
                        obs,
                    ),
                ],
                vec![1, 2, 3],
            );
            s.rule4 = name == "two_observers";
            s
        }
        // An outside observer watches the cat from the start; the cat itself cannot register
        // being knocked out.
        "cat_version_I" => scenario(
            vec![ComponentSpec::new(vec![Factor::detector(D0), conscious(1, 0), conscious(2, 0)], 1.0).incoherent()],
            vec![],
            vec![spawn(
                0.0,
                vec![ComponentSpec::spawned(vec![Factor::detector(D1), unconscious(1, 1), ready(2, 1)]).incoherent()],
                couple(0, 1, g, 0.0, tf).to_vec(),
            )],
            vec![1],
        ),
        "cat_version_II" => scenario(
            vec![ComponentSpec::new(vec![Factor::detector(D0), unconscious(1, 0)], 1.0).incoherent()],
            vec![],
            vec![spawn(
                0.0,
                vec![ComponentSpec::spawned(vec![Factor::detector(D1), ready(1, 1)]).incoherent()],
                couple(0, 1, g, 0.0, tf).to_vec(),
            )],
            vec![1],
        ),
        "cat_internal_alarm" => {
            let mut c = couple(0, 1, g, 0.0, tf).to_vec();
            c.extend(couple(0, 2, params.internal_coupling, 0.0, tf));
            scenario(
                vec![ComponentSpec::new(vec![Factor::device(0, D0), Factor::device(1, D0), unconscious(1, 0)], 1.0)
                    .incoherent()],
                vec![],
                vec![spawn(
                    0.0,
                    vec![
                        ComponentSpec::spawned(vec![Factor::device(0, D1), Factor::device(1, D0), ready(1, 1)])
                            .incoherent(),
                        ComponentSpec::spawned(vec![Factor::device(0, D0), Factor::device(1, D1), ready(1, 2)])
                            .incoherent(),
                    ],
                    c,
                )],
                vec![1, 2],
            )
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    s.validate()?;
    Ok(s)
}
