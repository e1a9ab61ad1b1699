//! Executes validated scenarios into result tables and writes them out as
//! CSV files plus a JSON sidecar holding run metadata.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error as ThisError;

use crate::bench::{
    compare_table, comparison_table, comparison_text, sweep_table, FrontEndKind, ReceiverFrontEnd,
};
use crate::diffraction::{center_offset_mm, profile_on_pd, spot_report};
use crate::error::{Error, ErrorCategory, Result};
use crate::optics::{refraction_angle, Angle, IncidentWave, SteeringGeometry, Wavelength};
use crate::radiometry::{transmittance, tuning_gain};
use crate::scenario::{
    Mode, Scenario, ScenarioError, SweepMetric, SweepParameter, SweepPlan, Violation,
};
use crate::table::{Cell, Table};
use crate::tuning::{solve, Actuator, DesignTarget, LiquidCrystalActuator, MetaLensActuator};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "RIS_VLC_OUT";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// File name inside the output directory.
    pub file_name: String,
    pub table: Table,
    /// Points that failed and were written as NaN.
    pub failed_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub scenario: String,
    pub mode: &'static str,
    pub artifacts: Vec<Artifact>,
    /// Human-readable rendering, when the mode has one.
    pub text: Option<String>,
}

#[derive(Debug, ThisError)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Model(#[from] Error),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl RunError {
    pub fn category(&self) -> &'static str {
        match self {
            RunError::Scenario(ScenarioError::Io { .. }) | RunError::Io { .. } => "io",
            RunError::Scenario(_) => "validation",
            RunError::Model(e) => match e.category() {
                ErrorCategory::Validation => "validation",
                ErrorCategory::Numerical => "numerical",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "validation" => 2,
            "numerical" => 3,
            _ => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Scenario(ScenarioError::Io { .. }) | RunError::Io { .. } => "Io",
            RunError::Scenario(ScenarioError::Parse { .. }) => "ParseError",
            RunError::Scenario(ScenarioError::Invalid { .. }) => "ValidationError",
            RunError::Scenario(ScenarioError::UnknownBundled(_)) => "UnknownScenario",
            RunError::Model(e) => e.kind(),
        }
    }

    fn violations(&self) -> &[Violation] {
        match self {
            RunError::Scenario(ScenarioError::Invalid { violations, .. }) => violations,
            _ => &[],
        }
    }

    /// Machine-readable error record, one JSON object.
    pub fn record(&self) -> serde_json::Value {
        let mut record = json!({
            "status": "error",
            "kind": self.kind(),
            "category": self.category(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        let violations = self.violations();
        if !violations.is_empty() {
            record["violations"] = violations
                .iter()
                .map(|v| json!({"path": v.path, "message": v.message}))
                .collect();
        }
        record
    }
}

/// Output directory: explicit flag, then the environment, then `out`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_owned();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(DEFAULT_OUT_DIR),
    }
}

pub fn execute(scenario: &Scenario) -> Result<RunOutput> {
    let name = &scenario.name;
    let (artifacts, text) = match &scenario.mode {
        Mode::Single => (vec![single(scenario)?], None),
        Mode::Sweep(plan) => (vec![sweep(scenario, plan)?], None),
        Mode::Design(target) => (vec![design(scenario, target)?], None),
        Mode::Bench(plan) => {
            let roster = plan
                .roster
                .iter()
                .map(|&k| front_end(scenario, k, plan.adj_lens))
                .collect::<Result<Vec<_>>>()?;
            let rows = compare_table(&roster, plan.step)?;
            let artifacts = vec![
                Artifact {
                    file_name: format!("{name}.csv"),
                    table: comparison_table(&rows),
                    failed_points: 0,
                },
                Artifact {
                    file_name: format!("{name}-sweep.csv"),
                    table: sweep_table(&rows),
                    failed_points: 0,
                },
            ];
            (artifacts, Some(comparison_text(&rows)))
        }
    };
    Ok(RunOutput {
        scenario: name.clone(),
        mode: scenario.mode.name(),
        artifacts,
        text,
    })
}

fn front_end(scenario: &Scenario, kind: FrontEndKind, adj_lens: Angle) -> Result<ReceiverFrontEnd> {
    let (g, w) = (scenario.geometry, scenario.wave);
    match kind {
        FrontEndKind::AdjLens => Ok(ReceiverFrontEnd::lens(kind).with_max_incidence(adj_lens)),
        FrontEndKind::MetalensRis => {
            let act = match scenario.actuator {
                Some(Actuator::MetaLens(a)) => a,
                _ => MetaLensActuator::she2018(g),
            };
            ReceiverFrontEnd::ris(*act.base_geometry(), w, Actuator::MetaLens(act))
        }
        FrontEndKind::LcRis => {
            let act = match scenario.actuator {
                Some(Actuator::LiquidCrystal(a)) => a,
                _ => LiquidCrystalActuator::sun2019(g.n_ris())?,
            };
            ReceiverFrontEnd::ris(g, w, Actuator::LiquidCrystal(act))
        }
        lens => Ok(ReceiverFrontEnd::lens(lens)),
    }
}

fn single(scenario: &Scenario) -> Result<Artifact> {
    let (g, w) = (&scenario.geometry, &scenario.wave);
    let theta = refraction_angle(g, w)?;
    let spot = spot_report(g, w)?;
    let t = transmittance(g, w)?;
    let mut table = Table::new([
        "wavelength_nm",
        "incidence_deg",
        "n_ris",
        "depth_mm",
        "refraction_angle_deg",
        "center_offset_mm",
        "spot_full_width_mm",
        "first_null_deg",
        "pd_coverage",
        "transmittance",
        "captured_power_w",
    ]);
    table.push(vec![
        Cell::Float(w.wavelength().nm()),
        Cell::Float(w.incidence().degrees()),
        Cell::Float(g.n_ris()),
        Cell::Float(g.depth_mm()),
        Cell::Float(theta.degrees()),
        Cell::Float(center_offset_mm(g, w)?),
        Cell::Float(spot.full_width_mm),
        Cell::Float(spot.first_null_angle.degrees()),
        Cell::Float(spot.pd_coverage),
        Cell::Float(t.value),
        Cell::Float(t.captured_power_w),
    ]);
    Ok(Artifact {
        file_name: format!("{}.csv", scenario.name),
        table,
        failed_points: 0,
    })
}

fn design(scenario: &Scenario, target: &DesignTarget) -> Result<Artifact> {
    let sol = solve(target, scenario.actuator.as_ref())?;
    let metric = target.metric;
    let mut table = Table::new([
        "metric",
        "target",
        "unit",
        "free_variable",
        "value",
        "achieved",
        "iterations",
        "slit_um",
        "depth_mm",
        "n_ris",
    ]);
    table.push(vec![
        metric.name().into(),
        Cell::Float(metric.to_display(metric.value())),
        metric.unit().into(),
        sol.free.name().into(),
        Cell::Float(sol.value),
        Cell::Float(sol.achieved),
        Cell::Int(sol.iterations as i64),
        Cell::Float(sol.geometry.slit_um()),
        Cell::Float(sol.geometry.depth_mm()),
        Cell::Float(sol.geometry.n_ris()),
    ]);
    Ok(Artifact {
        file_name: format!("{}.csv", scenario.name),
        table,
        failed_points: 0,
    })
}

fn apply(
    parameter: SweepParameter,
    value: f64,
    geom: SteeringGeometry,
    wave: IncidentWave,
    actuator: Option<&Actuator>,
) -> Result<(SteeringGeometry, IncidentWave)> {
    Ok(match parameter {
        SweepParameter::Wavelength => (geom, wave.with_wavelength(Wavelength::from_nm(value)?)),
        SweepParameter::NRis => (geom.with_n_ris(value)?, wave),
        SweepParameter::Depth => (geom.with_depth_mm(value)?, wave),
        SweepParameter::Incidence => (geom, wave.with_incidence(Angle::from_degrees(value))?),
        SweepParameter::Voltage => {
            let act = actuator.ok_or_else(|| {
                Error::UnsupportedDesign("a voltage sweep needs an actuator".into())
            })?;
            (act.drive(value, &geom), wave)
        }
    })
}

fn metric_columns(metric: SweepMetric) -> &'static [&'static str] {
    match metric {
        SweepMetric::RefractionAngle => &["refraction_angle_deg", "center_offset_mm"],
        SweepMetric::Transmittance => &["transmittance", "incidence_factor", "captured_power_w"],
        SweepMetric::Spot => &["full_width_mm", "first_null_deg", "pd_coverage"],
        SweepMetric::Profile => &["position_mm", "relative_intensity"],
        SweepMetric::TuningGain => &["transmittance_before", "transmittance_after", "gain"],
    }
}

/// Metric cells for one sweep point; several rows for a profile.
fn evaluate_point(
    scenario: &Scenario,
    plan: &SweepPlan,
    value: f64,
    series: Option<f64>,
) -> Result<Vec<Vec<f64>>> {
    let act = scenario.actuator.as_ref();
    let (g, w) = apply(plan.parameter, value, scenario.geometry, scenario.wave, act)?;
    let (g_full, w_full) = match (plan.series.as_ref(), series) {
        (Some((p, _)), Some(s)) => apply(*p, s, g, w, act)?,
        _ => (g, w),
    };
    Ok(match plan.metric {
        SweepMetric::RefractionAngle => vec![vec![
            refraction_angle(&g_full, &w_full)?.degrees(),
            center_offset_mm(&g_full, &w_full)?,
        ]],
        SweepMetric::Transmittance => {
            let t = transmittance(&g_full, &w_full)?;
            vec![vec![t.value, t.incidence_factor, t.captured_power_w]]
        }
        SweepMetric::Spot => {
            let s = spot_report(&g_full, &w_full)?;
            vec![vec![
                s.full_width_mm,
                s.first_null_angle.degrees(),
                s.pd_coverage,
            ]]
        }
        SweepMetric::Profile => {
            let p = profile_on_pd(&g_full, &w_full, plan.profile_samples)?;
            p.positions_mm
                .iter()
                .zip(&p.relative_intensity)
                .map(|(&u, &i)| vec![u, i])
                .collect()
        }
        SweepMetric::TuningGain => {
            // before: the base geometry at this point; after: the series state
            let gain = tuning_gain(&g, &g_full, &w)?;
            vec![vec![gain.before.value, gain.after.value, gain.gain]]
        }
    })
}

fn sweep(scenario: &Scenario, plan: &SweepPlan) -> Result<Artifact> {
    let series: Vec<Option<f64>> = match &plan.series {
        Some((_, values)) => values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let points: Vec<(Option<f64>, f64)> = series
        .iter()
        .flat_map(|&s| plan.values.iter().map(move |&v| (s, v)))
        .collect();
    let results: Vec<Result<Vec<Vec<f64>>>> = points
        .par_iter()
        .map(|&(s, v)| evaluate_point(scenario, plan, v, s))
        .collect();

    let mut header: Vec<&str> = Vec::new();
    if let Some((p, _)) = &plan.series {
        header.push(p.column());
    }
    header.push(plan.parameter.column());
    let columns = metric_columns(plan.metric);
    header.extend_from_slice(columns);
    let mut table = Table::new(header);
    let mut failed = 0;
    for (&(s, v), result) in points.iter().zip(results) {
        let rows = result.unwrap_or_else(|e| {
            warn!(
                "{}: point {} = {v} failed: {e}",
                scenario.name,
                plan.parameter.column()
            );
            failed += 1;
            vec![vec![f64::NAN; columns.len()]]
        });
        for metric in rows {
            let mut row: Vec<Cell> = s.map(Cell::Float).into_iter().collect();
            row.push(Cell::Float(v));
            row.extend(metric.into_iter().map(Cell::Float));
            table.push(row);
        }
    }
    Ok(Artifact {
        file_name: format!("{}.csv", scenario.name),
        table,
        failed_points: failed,
    })
}

/// Writes every artifact plus a `<stem>.meta.json` sidecar. Returns the
/// written CSV paths.
pub fn write_artifacts(output: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let io_err = |path: &Path| {
        let path = path.to_owned();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let generated = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut written = Vec::with_capacity(output.artifacts.len());
    for artifact in &output.artifacts {
        let path = dir.join(&artifact.file_name);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut writer = BufWriter::new(file);
        artifact
            .table
            .write_csv(&mut writer)
            .map_err(io_err(&path))?;
        writer.flush().map_err(io_err(&path))?;

        let stem = artifact.file_name.trim_end_matches(".csv");
        let meta_path = dir.join(format!("{stem}.meta.json"));
        let meta = json!({
            "scenario": output.scenario,
            "mode": output.mode,
            "artifact": artifact.file_name,
            "columns": artifact.table.header,
            "rows": artifact.table.rows.len(),
            "failed_points": artifact.failed_points,
            "generated_unix_s": generated,
            "tool_version": env!("CARGO_PKG_VERSION"),
        });
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
        fs::write(&meta_path, text).map_err(io_err(&meta_path))?;
        info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}

/// One summary line per artifact.
pub fn summary_lines(output: &RunOutput, written: &[PathBuf]) -> Vec<String> {
    output
        .artifacts
        .iter()
        .zip(written)
        .map(|(a, path)| {
            let mut line = format!(
                "{} ({}): wrote {} ({} rows",
                output.scenario,
                output.mode,
                path.display(),
                a.table.rows.len()
            );
            if a.failed_points > 0 {
                line.push_str(&format!(", {} failed points as NaN", a.failed_points));
            }
            line.push(')');
            line
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{bundled_scenario, parse_scenario};

    fn scenario(text: &str) -> Scenario {
        parse_scenario(text, "test", "test").unwrap()
    }

    #[test]
    fn fig2_left_first_row() {
        let out = execute(&bundled_scenario("fig2-left").unwrap()).unwrap();
        let t = &out.artifacts[0].table;
        assert_eq!(
            t.header[..3],
            ["n_ris", "wavelength_nm", "refraction_angle_deg"]
        );
        assert_eq!(t.rows.len(), 6 * 51);
        assert_eq!(t.rows[0][0], Cell::Float(1.4));
        assert_eq!(t.rows[0][1], Cell::Float(300.0));
        let Cell::Float(theta) = t.rows[0][2] else {
            panic!()
        };
        assert!((theta - 50.133).abs() < 0.5, "{theta}");
    }

    #[test]
    fn evanescent_single_evaluation_fails() {
        let s = scenario(
            r#"{"geometry": {"slit_um": 0.3, "depth_mm": 1, "pd_length_mm": 0.1, "n_ris": 1.1},
                "wave": {"wavelength_nm": 550, "incidence_deg": 60}}"#,
        );
        let err = RunError::from(execute(&s).unwrap_err());
        assert_eq!(err.kind(), "EvanescentOrder");
        assert_eq!(err.exit_code(), 3);
        assert_eq!(err.record()["kind"], "EvanescentOrder");
    }

    #[test]
    fn sweep_point_failures_become_nan() {
        let s = scenario(
            r#"{"geometry": {"slit_um": 0.6, "depth_mm": 1, "pd_length_mm": 0.01, "n_ris": 1.2},
                "wave": {"wavelength_nm": 400, "incidence_deg": 30},
                "sweep": {"parameter": "wavelength", "metric": "transmittance", "range_nm": [300, 600], "steps": 7}}"#,
        );
        let out = execute(&s).unwrap();
        let a = &out.artifacts[0];
        assert!(a.failed_points > 0);
        assert_eq!(a.table.rows[6][1].render(), "NaN");
    }

    #[test]
    fn design_reports_solution() {
        let s = scenario(
            r#"{"geometry": {"slit_um": 4, "depth_mm": 1, "pd_length_mm": 0.2, "n_ris": 1.5},
                "wave": {"wavelength_nm": 550, "incidence_deg": 0},
                "design": {"metric": "spot_width", "target_mm": 0.184108476414344, "free": "depth"}}"#,
        );
        let t = &execute(&s).unwrap().artifacts[0].table;
        let Cell::Float(y) = t.rows[0][4] else {
            panic!()
        };
        assert!((y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn out_dir_precedence() {
        assert_eq!(
            resolve_out_dir(Some(Path::new("given"))),
            PathBuf::from("given")
        );
    }

    #[test]
    fn artifacts_and_sidecar_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let out = execute(&bundled_scenario("fig3-right").unwrap()).unwrap();
        let written = write_artifacts(&out, dir.path()).unwrap();
        assert_eq!(written.len(), 1);
        let csv = fs::read_to_string(&written[0]).unwrap();
        assert!(csv.starts_with("wavelength_nm,position_mm,relative_intensity\n"));
        assert!(!csv.contains("generated"));
        let meta = fs::read_to_string(dir.path().join("fig3-right.meta.json")).unwrap();
        assert!(meta.contains("generated_unix_s"));
        assert_eq!(summary_lines(&out, &written).len(), 1);
    }
}
