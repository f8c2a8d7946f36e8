//! JSON scenario files.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Action, ComponentSpec, Scenario, ScheduledEvent};
use crate::error::{Error, Result};
use crate::statedyn::{Coupling, Factor, Window};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    components: Vec<ComponentFile>,
    #[serde(default)]
    couplings: Vec<CouplingFile>,
    #[serde(default)]
    events: Vec<EventFile>,
    duration: f64,
    subsystem: Vec<usize>,
    #[serde(default = "yes")]
    rule4: bool,
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentFile {
    labels: Vec<Factor>,
    #[serde(default)]
    amplitude_re: f64,
    #[serde(default)]
    amplitude_im: f64,
    #[serde(default)]
    incoherent: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingFile {
    row: usize,
    col: usize,
    g_re: f64,
    #[serde(default)]
    g_im: f64,
    t_start: f64,
    t_end: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventFile {
    t: f64,
    action: String,
    payload: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpawnPayload {
    components: Vec<ComponentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    discontinuous: Option<bool>,
    #[serde(default)]
    couplings: Vec<CouplingFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairsPayload {
    pairs: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndicesPayload {
    indices: Vec<usize>,
}

impl From<&ComponentFile> for ComponentSpec {
    fn from(c: &ComponentFile) -> Self {
        ComponentSpec {
            labels: c.labels.clone(),
            amplitude: Complex64::new(c.amplitude_re, c.amplitude_im),
            incoherent: c.incoherent,
        }
    }
}

impl From<&ComponentSpec> for ComponentFile {
    fn from(c: &ComponentSpec) -> Self {
        ComponentFile {
            labels: c.labels.clone(),
            amplitude_re: c.amplitude.re,
            amplitude_im: c.amplitude.im,
            incoherent: c.incoherent,
        }
    }
}

impl From<&CouplingFile> for Coupling {
    fn from(c: &CouplingFile) -> Self {
        Coupling {
            row: c.row,
            col: c.col,
            strength: Complex64::new(c.g_re, c.g_im),
            window: Window::new(c.t_start, c.t_end),
        }
    }
}

impl From<&Coupling> for CouplingFile {
    fn from(c: &Coupling) -> Self {
        CouplingFile {
            row: c.row,
            col: c.col,
            g_re: c.strength.re,
            g_im: c.strength.im,
            t_start: c.window.start,
            t_end: c.window.end,
        }
    }
}

fn parse<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        Error::Validation { path, message: e.into_inner().to_string() }
    })
}

fn convert_event(k: usize, ev: EventFile) -> Result<ScheduledEvent> {
    let path = format!("events[{k}].payload");
    let action = match ev.action.as_str() {
        "spawn_components" => {
            let p: SpawnPayload = parse(ev.payload, &path)?;
            let components: Vec<ComponentSpec> = p.components.iter().map(ComponentSpec::from).collect();
            let discontinuous = match p.discontinuous {
                Some(d) => d,
                None if components.iter().any(ComponentSpec::has_brain) => {
                    return Err(Error::validation(
                        format!("{path}.discontinuous"),
                        "required when spawned components hold brain factors: rule 2 creates ready states only on a discontinuous change",
                    ));
                }
                None => false,
            };
            Action::SpawnComponents {
                components,
                discontinuous,
                couplings: p.couplings.iter().map(Coupling::from).collect(),
            }
        }
        "end_window" => Action::EndWindow { pairs: parse::<PairsPayload>(ev.payload, &path)?.pairs },
        "set_incoherent" => Action::SetIncoherent { indices: parse::<IndicesPayload>(ev.payload, &path)?.indices },
        other => {
            return Err(Error::validation(
                format!("events[{k}].action"),
                format!("unknown action {other:?}; expected spawn_components, end_window or set_incoherent"),
            ))
        }
    };
    Ok(ScheduledEvent { t: ev.t, action })
}

/// Parses and validates a scenario document.
pub fn from_json_str(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Validation { path: e.path().to_string(), message: e.into_inner().to_string() })?;
    let events = file.events.into_iter().enumerate().map(|(k, e)| convert_event(k, e)).collect::<Result<Vec<_>>>()?;
    let scenario = Scenario {
        name: file.name.unwrap_or_else(|| "custom".to_string()),
        components: file.components.iter().map(ComponentSpec::from).collect(),
        couplings: file.couplings.iter().map(Coupling::from).collect(),
        events,
        duration: file.duration,
        subsystem: file.subsystem,
        rule4: file.rule4,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn to_json_string(scenario: &Scenario) -> Result<String> {
    let events = scenario
        .events
        .iter()
        .map(|e| {
            let (action, payload) = match &e.action {
                Action::SpawnComponents { components, discontinuous, couplings } => (
                    "spawn_components",
                    serde_json::to_value(SpawnPayload {
                        components: components.iter().map(ComponentFile::from).collect(),
                        discontinuous: Some(*discontinuous),
                        couplings: couplings.iter().map(CouplingFile::from).collect(),
                    })?,
                ),
                Action::EndWindow { pairs } => {
                    ("end_window", serde_json::to_value(PairsPayload { pairs: pairs.clone() })?)
                }
                Action::SetIncoherent { indices } => {
                    ("set_incoherent", serde_json::to_value(IndicesPayload { indices: indices.clone() })?)
                }
            };
            Ok(EventFile { t: e.t, action: action.to_string(), payload })
        })
        .collect::<Result<Vec<_>>>()?;
    let file = ScenarioFile {
        name: Some(scenario.name.clone()),
        components: scenario.components.iter().map(ComponentFile::from).collect(),
        couplings: scenario.couplings.iter().map(CouplingFile::from).collect(),
        events,
        duration: scenario.duration,
        subsystem: scenario.subsystem.clone(),
        rule4: scenario.rule4,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    from_json_str(&text).map_err(|e| match e {
        Error::Validation { path: field, message } => {
            Error::Parse { path: path.display().to_string(), message: format!("{field}: {message}") }
        }
        other => other,
    })
}

pub fn save(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(scenario)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{build, ScenarioParams, CATALOG};

    const MINIMAL: &str = r#"{
        "components": [
            {"labels": [{"kind": "particle"}, {"kind": "detector", "mode": "D0"}], "amplitude_re": 1.0}
        ],
        "events": [
            {"t": 0.0, "action": "spawn_components", "payload": {
                "components": [{"labels": [{"kind": "detector", "mode": "D1"},
                                           {"kind": "brain", "observer": 1, "state": 1, "status": "ready"}]}],
                "discontinuous": true,
                "couplings": [{"row": 0, "col": 1, "g_re": 1.0, "t_start": 0.0, "t_end": 1.0},
                              {"row": 1, "col": 0, "g_re": 1.0, "t_start": 0.0, "t_end": 1.0}]
            }}
        ],
        "duration": 2.0,
        "subsystem": [1]
    }"#;

    #[test]
    fn parses_minimal_document() {
        let s = from_json_str(MINIMAL).unwrap();
        assert_eq!(s.total_components(), 2);
        assert!(s.rule4);
        assert_eq!(s.name, "custom");
    }

    #[test]
    fn catalog_round_trips() {
        for name in CATALOG {
            let s = build(name, &ScenarioParams::default()).unwrap();
            let back = from_json_str(&to_json_string(&s).unwrap()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn missing_discontinuous_flag_cites_rule_2() {
        let text = MINIMAL.replace(r#""discontinuous": true,"#, "");
        match from_json_str(&text) {
            Err(Error::Validation { path, message }) => {
                assert_eq!(path, "events[0].payload.discontinuous");
                assert!(message.contains("rule 2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_errors_carry_field_paths() {
        let text = MINIMAL.replace(r#""amplitude_re": 1.0"#, r#""amplitude_re": "one""#);
        match from_json_str(&text) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "components[0].amplitude_re"),
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace(
            r#""g_re": 1.0, "t_start": 0.0, "t_end": 1.0},"#,
            r#""g_re": true, "t_start": 0.0, "t_end": 1.0},"#,
        );
        match from_json_str(&text) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "events[0].payload.couplings[0].g_re"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_action_is_rejected() {
        let text = MINIMAL.replace("spawn_components", "spawn");
        assert!(matches!(from_json_str(&text), Err(Error::Validation { path, .. }) if path == "events[0].action"));
    }

    #[test]
    fn non_hermitian_couplings_are_rejected() {
        let text = MINIMAL.replace(r#"{"row": 1, "col": 0, "g_re": 1.0"#, r#"{"row": 1, "col": 0, "g_re": 2.0"#);
        assert!(from_json_str(&text).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = build("two_observers", &ScenarioParams::default()).unwrap();
        save(&s, &path).unwrap();
        assert_eq!(load(&path).unwrap(), s);
        std::fs::write(&path, "{").unwrap();
        assert!(matches!(load(&path), Err(Error::Parse { .. })));
    }
}
