use std::fs;

use readyrules::ensemble::{run_trajectory, TrajectoryOptions};
use readyrules::rules::RuleMode;
use readyrules::scenarios::{build, load, save, ScenarioParams, CATALOG};
use readyrules::statedyn::BrainStatus;
use readyrules::Error;

fn audited() -> TrajectoryOptions {
    TrajectoryOptions { audit: true, ..TrajectoryOptions::default() }
}

#[test]
fn every_builtin_runs_in_both_modes() {
    for name in CATALOG {
        let s = build(name, &ScenarioParams::default()).unwrap();
        for mode in [RuleMode::standard(), RuleMode::objective()] {
            for seed in 0..30 {
                run_trajectory(&s, mode, seed, &audited()).unwrap_or_else(|e| panic!("{name}/{}: {e}", mode.variant));
            }
        }
    }
}

#[test]
fn observer_on_board_pre_hit_state() {
    let s = build("observer_on_board", &ScenarioParams::default()).unwrap();
    let opts = TrajectoryOptions { hazard_scale: 0.0, record_trace: true, ..audited() };
    let r = run_trajectory(&s, RuleMode::standard(), 0, &opts).unwrap();
    assert_eq!(r.final_labels, vec!["psi D0 1:B0*", "D1 1:B1~"]);
    let last = r.trace.last().unwrap();
    assert!((last.moduli[1] - 0.75).abs() < 1e-6);
}

#[test]
fn cat_version_one_needs_the_outside_observer() {
    let s = build("cat_version_I", &ScenarioParams::default().full_transfer()).unwrap();
    let r = run_trajectory(&s, RuleMode::standard(), 3, &audited()).unwrap();
    assert_eq!(r.outcome, "D1 1:B1- 2:B1*");
}

#[test]
fn internal_alarm_competes_with_external_alarm() {
    let s = build("cat_internal_alarm", &ScenarioParams::default()).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..200 {
        let r = run_trajectory(&s, RuleMode::standard(), seed, &audited()).unwrap();
        seen.insert(r.outcome);
    }
    assert!(seen.contains("D1 D0#1 1:B1*"));
    assert!(seen.contains("D0 D1#1 1:B2*"));
}

#[test]
fn cat_version_two_arouses_the_cat() {
    let s = build("cat_version_II", &ScenarioParams::default().full_transfer()).unwrap();
    assert_eq!(s.components[0].labels[1].status(), Some(BrainStatus::Unconscious));
    let r = run_trajectory(&s, RuleMode::standard(), 0, &audited()).unwrap();
    assert_eq!(r.outcome, "D1 1:B1*");
}

fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
    let p = dir.path().join("s.json");
    fs::write(&p, body).unwrap();
    p
}

const SPAWN: &str = r#"{
  "components": [{"labels": [{"kind": "particle"}, {"kind": "brain", "observer": 1, "state": 0, "status": "conscious"}],
                  "amplitude_re": 1.0, "incoherent": true}],
  "events": [{"t": 0.0, "action": "spawn_components", "payload": {
      "components": [{"labels": [{"kind": "detector", "mode": "D1"},
                                 {"kind": "brain", "observer": 1, "state": 1, "status": "conscious"}],
                      "amplitude_re": AMP, "incoherent": true}],
      DISC
      "couplings": [{"row": 0, "col": 1, "g_re": 1.0, "t_start": 0.0, "t_end": 1.5},
                    {"row": 1, "col": 0, "g_re": G, "t_start": 0.0, "t_end": 1.5}]}}],
  "duration": 2.0,
  "subsystem": [1]
}"#;

fn spawn_file(amp: &str, disc: &str, g: &str) -> String {
    SPAWN.replace("AMP", amp).replace("DISC", disc).replace("G", g)
}

#[test]
fn loaded_spawn_becomes_ready_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = load(write(&dir, &spawn_file("0.0", r#""discontinuous": true,"#, "1.0"))).unwrap();
    let r = run_trajectory(&s, RuleMode::standard(), 0, &audited()).unwrap();
    assert_eq!(r.outcome, "D1 1:B1*");
}

#[test]
fn spawn_with_amplitude_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = load(write(&dir, &spawn_file("0.5", r#""discontinuous": true,"#, "1.0"))).unwrap_err();
    assert!(err.to_string().contains("events[0].payload.components[0].amplitude"), "{err}");
}

#[test]
fn spawn_without_discontinuity_flag_cites_rule_2() {
    let dir = tempfile::tempdir().unwrap();
    let err = load(write(&dir, &spawn_file("0.0", "", "1.0"))).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
    assert!(err.to_string().contains("rule 2"), "{err}");
}

#[test]
fn non_hermitian_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = load(write(&dir, &spawn_file("0.0", r#""discontinuous": true,"#, "0.5"))).unwrap_err();
    assert!(err.to_string().contains("Hermitian") || err.to_string().contains("hermitian"), "{err}");
}

#[test]
fn unknown_field_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let body = spawn_file("0.0", r#""discontinuous": true,"#, "1.0").replace(r#""duration""#, r#""durration""#);
    let err = load(write(&dir, &body)).unwrap_err();
    assert!(err.to_string().contains("durration"), "{err}");
}

#[test]
fn saved_builtins_load_back() {
    let dir = tempfile::tempdir().unwrap();
    for name in CATALOG {
        let s = build(name, &ScenarioParams::default()).unwrap();
        let p = dir.path().join(format!("{name}.json"));
        save(&s, &p).unwrap();
        assert_eq!(load(&p).unwrap(), s);
    }
}
