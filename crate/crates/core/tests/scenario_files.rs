use std::fs;

use ris_vlc::run::{execute, write_artifacts};
use ris_vlc::scenario::{bundled_names, bundled_scenario, load_scenario, Mode, ScenarioError};

const MINIMAL: &str = r#"{
  "geometry": {"slit_um": 4, "depth_mm": 1, "pd_length_mm": 0.2, "n_ris": 1.5},
  "wave": {"wavelength_nm": 550, "incidence_deg": 0}
}"#;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn file_stem_names_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let s = load_scenario(&write(&dir, "normal-550.json", MINIMAL)).unwrap();
    assert_eq!(s.name, "normal-550");
    assert_eq!(s.mode, Mode::Single);
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_scenario(&dir.path().join("absent.json")).unwrap_err();
    assert!(matches!(err, ScenarioError::Io { .. }));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = MINIMAL.replace("\"n_ris\": 1.5", "\"n_ris\": 1.5, \"colour\": \"red\"");
    match load_scenario(&write(&dir, "x.json", &text)).unwrap_err() {
        ScenarioError::Invalid { violations, .. } => {
            assert!(violations[0].path.starts_with("geometry"), "{violations:?}");
        }
        other => panic!("{other}"),
    }
    let text = MINIMAL.trim_end().trim_end_matches('}').to_owned()
        + r#", "actuator": {"kind": "metalens", "v_max_v": 1000, "stretch_max": 1.2, "gain": 2}}"#;
    assert!(load_scenario(&write(&dir, "y.json", &text)).is_err());
}

#[test]
fn array_keys_need_units_too() {
    let dir = tempfile::tempdir().unwrap();
    let text = MINIMAL.trim_end().trim_end_matches('}').to_owned()
        + r#", "sweep": {"parameter": "wavelength", "metric": "spot", "range": [400, 700]}}"#;
    match load_scenario(&write(&dir, "z.json", &text)).unwrap_err() {
        ScenarioError::Invalid { violations, .. } => {
            assert!(
                violations.iter().any(|v| v.path == "sweep.range"),
                "{violations:?}"
            );
        }
        other => panic!("{other}"),
    }
}

#[test]
fn every_bundled_scenario_runs_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for name in bundled_names() {
        let s = bundled_scenario(name).unwrap();
        let first = write_artifacts(&execute(&s).unwrap(), a.path()).unwrap();
        let second = write_artifacts(&execute(&s).unwrap(), b.path()).unwrap();
        for (x, y) in first.iter().zip(&second) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{name}");
        }
    }
}

#[test]
fn bundled_sweeps_have_no_failed_points() {
    for name in bundled_names() {
        let out = execute(&bundled_scenario(name).unwrap()).unwrap();
        for artifact in &out.artifacts {
            assert_eq!(artifact.failed_points, 0, "{name}");
        }
    }
}
