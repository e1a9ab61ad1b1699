//! Scenario files: JSON input describing one evaluation, sweep, design or
//! bench run.
//!
//! Every numeric key carries its unit as a suffix (`_nm`, `_um`, `_mm`,
//! `_deg`, `_v`, `_w`); only a fixed set of dimensionless keys is exempt.
//! Loading parses, checks the unit discipline, deserializes, then validates
//! every field and reports all violations at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bench::FrontEndKind;
use crate::error::Error;
use crate::optics::{Angle, IncidentWave, SteeringGeometry, Wavelength};
use crate::radiometry::{grid, Spacing};
use crate::tuning::{
    Actuator, DesignTarget, FreeVariable, LiquidCrystalActuator, MetaLensActuator, TargetMetric,
};

pub const UNIT_SUFFIXES: [&str; 6] = ["_nm", "_um", "_mm", "_deg", "_v", "_w"];

/// Numeric keys that are dimensionless by nature.
pub const DIMENSIONLESS_KEYS: [&str; 10] = [
    "n_air",
    "n_ris",
    "n_base",
    "delta_n",
    "stretch_max",
    "order",
    "steps",
    "profile_samples",
    "range",
    "values",
];

pub const DEFAULT_PROFILE_SAMPLES: usize = 201;
pub const DEFAULT_SWEEP_STEPS: usize = 51;
pub const MAX_SWEEP_POINTS: usize = 100_000;

const BUNDLED: [(&str, &str); 7] = [
    ("fig2-left", include_str!("../scenarios/fig2-left.json")),
    ("fig2-right", include_str!("../scenarios/fig2-right.json")),
    ("fig3-left", include_str!("../scenarios/fig3-left.json")),
    ("fig3-right", include_str!("../scenarios/fig3-right.json")),
    ("fig4-top", include_str!("../scenarios/fig4-top.json")),
    ("fig4-bottom", include_str!("../scenarios/fig4-bottom.json")),
    ("table1", include_str!("../scenarios/table1.json")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Dotted field path, e.g. `geometry.slit_um`; empty for the whole file.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}: JSON syntax error at line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{origin}: {} invalid field(s): {}", violations.len(), join_violations(violations))]
    Invalid {
        origin: String,
        violations: Vec<Violation>,
    },

    #[error("no bundled scenario named {0:?}")]
    UnknownBundled(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub slit_um: f64,
    pub depth_mm: f64,
    pub pd_length_mm: f64,
    pub n_ris: f64,
    #[serde(default = "one")]
    pub n_air: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub wavelength_nm: f64,
    pub incidence_deg: f64,
    #[serde(default = "one")]
    pub power_w: f64,
    #[serde(default = "first_order")]
    pub order: u32,
}

fn one() -> f64 {
    1.0
}

fn first_order() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActuatorSpec {
    /// `metalens-she2018` or `lc-sun2019`.
    Preset {
        name: String,
    },
    Metalens {
        v_max_v: f64,
        stretch_max: f64,
    },
    LiquidCrystal {
        v_on_v: f64,
        v_sat_v: f64,
        delta_n: f64,
        /// Defaults to the geometry's `n_ris`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_base: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Wavelength,
    NRis,
    Depth,
    Incidence,
    Voltage,
}

impl SweepParameter {
    /// Unit suffix of the axis keys, without the underscore; empty when dimensionless.
    pub fn unit(&self) -> &'static str {
        match self {
            SweepParameter::Wavelength => "nm",
            SweepParameter::NRis => "",
            SweepParameter::Depth => "mm",
            SweepParameter::Incidence => "deg",
            SweepParameter::Voltage => "v",
        }
    }

    /// CSV column holding the parameter.
    pub fn column(&self) -> &'static str {
        match self {
            SweepParameter::Wavelength => "wavelength_nm",
            SweepParameter::NRis => "n_ris",
            SweepParameter::Depth => "depth_mm",
            SweepParameter::Incidence => "incidence_deg",
            SweepParameter::Voltage => "voltage_v",
        }
    }

    fn axis_key(&self, base: &str) -> String {
        match self.unit() {
            "" => base.to_owned(),
            unit => format!("{base}_{unit}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMetric {
    RefractionAngle,
    Transmittance,
    Spot,
    Profile,
    TuningGain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub metric: SweepMetric,
    /// `range_<unit>: [from, to]` or `values_<unit>: [...]`.
    #[serde(flatten)]
    pub axis: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub parameter: SweepParameter,
    #[serde(flatten)]
    pub axis: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMetric {
    RefractionAngle,
    SpotWidth,
    PdLanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeSpec {
    NRis,
    Depth,
    Voltage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub metric: DesignMetric,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_mm: Option<f64>,
    pub free: FreeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// Front-end kinds; all seven when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roster: Option<Vec<String>>,
    pub step_deg: f64,
    /// Envelope of the adjustable-element lens; 88 deg when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adj_lens_deg: Option<f64>,
}

/// File-level form of a scenario, as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub geometry: GeometrySpec,
    pub wave: WaveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuator: Option<ActuatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub parameter: SweepParameter,
    pub metric: SweepMetric,
    pub values: Vec<f64>,
    pub series: Option<(SweepParameter, Vec<f64>)>,
    pub profile_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub roster: Vec<FrontEndKind>,
    pub step: Angle,
    pub adj_lens: Angle,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Single,
    Sweep(SweepPlan),
    Design(DesignTarget),
    Bench(BenchPlan),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Single => "eval",
            Mode::Sweep(_) => "sweep",
            Mode::Design(_) => "design",
            Mode::Bench(_) => "bench",
        }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
    pub geometry: SteeringGeometry,
    pub wave: IncidentWave,
    pub actuator: Option<Actuator>,
    pub mode: Mode,
}

impl Scenario {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("scenario specs always serialize")
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_owned(),
        source,
    })?;
    let fallback = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_owned());
    parse_scenario(&text, &path.display().to_string(), &fallback)
}

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

pub fn bundled_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnknownBundled(name.to_owned()))?;
    parse_scenario(text, &format!("bundled:{name}"), name)
}

/// Parses and validates scenario JSON. `origin` labels error messages and
/// `fallback_name` names the run when the file has no `name`.
pub fn parse_scenario(
    text: &str,
    origin: &str,
    fallback_name: &str,
) -> Result<Scenario, ScenarioError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        origin: origin.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut violations = Vec::new();
    check_units(&value, "", &mut violations);
    let spec: ScenarioSpec = match serde_path_to_error::deserialize(value) {
        Ok(spec) => spec,
        Err(e) => {
            let path = e.path().to_string();
            violations.push(Violation {
                path: if path == "." { String::new() } else { path },
                message: e.into_inner().to_string(),
            });
            return Err(invalid(origin, violations));
        }
    };
    match validate(spec, fallback_name, &mut violations) {
        Some(scenario) if violations.is_empty() => Ok(scenario),
        _ => Err(invalid(origin, violations)),
    }
}

fn invalid(origin: &str, violations: Vec<Violation>) -> ScenarioError {
    ScenarioError::Invalid {
        origin: origin.to_owned(),
        violations,
    }
}

fn is_numeric(v: &Value) -> bool {
    match v {
        Value::Number(_) => true,
        Value::Array(items) => !items.is_empty() && items.iter().all(Value::is_number),
        _ => false,
    }
}

fn key_has_unit(key: &str) -> bool {
    DIMENSIONLESS_KEYS.contains(&key) || UNIT_SUFFIXES.iter().any(|s| key.ends_with(s))
}

fn check_units(value: &Value, path: &str, out: &mut Vec<Violation>) {
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                let child_path = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                if is_numeric(child) && !key_has_unit(key) {
                    out.push(Violation {
                        path: child_path.clone(),
                        message: "numeric key has no unit suffix (_nm, _um, _mm, _deg, _v, _w)"
                            .into(),
                    });
                }
                check_units(child, &child_path, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                check_units(child, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// Collects violations into a shared list, keyed by field path.
struct Checker<'a> {
    out: &'a mut Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.out.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn check<T>(&mut self, path: &str, result: crate::Result<T>) -> Option<T> {
        match result {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(path, model_message(&e));
                None
            }
        }
    }
}

fn model_message(e: &Error) -> String {
    match e {
        Error::OutOfRange {
            value, expected, ..
        } => format!("{value} is out of range (expected {expected})"),
        other => other.to_string(),
    }
}

fn reference_geometry() -> SteeringGeometry {
    SteeringGeometry::new(4.0, 1.0, 1.0, 1.5).expect("reference geometry is valid")
}

fn validate_geometry(spec: &GeometrySpec, c: &mut Checker) -> Option<SteeringGeometry> {
    let r = reference_geometry();
    let slit = c.check("geometry.slit_um", r.with_slit_um(spec.slit_um));
    let depth = c.check("geometry.depth_mm", r.with_depth_mm(spec.depth_mm));
    let pd = c.check(
        "geometry.pd_length_mm",
        r.with_pd_length_mm(spec.pd_length_mm),
    );
    let n_ris = c.check("geometry.n_ris", r.with_n_ris(spec.n_ris));
    let n_air = c.check("geometry.n_air", r.with_n_air(spec.n_air));
    slit.and(depth).and(pd).and(n_ris).and(n_air)?;
    SteeringGeometry::new(spec.slit_um, spec.depth_mm, spec.pd_length_mm, spec.n_ris)
        .and_then(|g| g.with_n_air(spec.n_air))
        .ok()
}

fn validate_wave(spec: &WaveSpec, c: &mut Checker) -> Option<IncidentWave> {
    let wl = c.check(
        "wave.wavelength_nm",
        Wavelength::from_nm(spec.wavelength_nm),
    );
    let inc = c.check(
        "wave.incidence_deg",
        Angle::from_degrees(spec.incidence_deg).incidence(),
    );
    let reference = IncidentWave::first_order(
        Wavelength::from_nm(550.0).expect("reference wavelength"),
        Angle::ZERO,
    )
    .expect("reference wave");
    let power = c.check("wave.power_w", reference.with_power_w(spec.power_w));
    let order = c.check("wave.order", reference.with_order(spec.order));
    power.and(order)?;
    IncidentWave::new(wl?, inc?, spec.power_w, spec.order).ok()
}

fn validate_actuator(
    spec: &ActuatorSpec,
    geometry: Option<&SteeringGeometry>,
    c: &mut Checker,
) -> Option<Actuator> {
    let geometry = geometry?;
    match spec {
        ActuatorSpec::Preset { name } => match name.as_str() {
            "metalens-she2018" => Some(Actuator::MetaLens(MetaLensActuator::she2018(*geometry))),
            "lc-sun2019" => c
                .check(
                    "actuator.name",
                    LiquidCrystalActuator::sun2019(geometry.n_ris()),
                )
                .map(Actuator::LiquidCrystal),
            other => {
                c.push(
                    "actuator.name",
                    format!("unknown preset {other:?} (expected \"metalens-she2018\" or \"lc-sun2019\")"),
                );
                None
            }
        },
        ActuatorSpec::Metalens {
            v_max_v,
            stretch_max,
        } => {
            let v = c.check(
                "actuator.v_max_v",
                MetaLensActuator::new(*v_max_v, 1.5, *geometry),
            );
            let s = c.check(
                "actuator.stretch_max",
                MetaLensActuator::new(1.0, *stretch_max, *geometry),
            );
            v.and(s)?;
            MetaLensActuator::new(*v_max_v, *stretch_max, *geometry)
                .ok()
                .map(Actuator::MetaLens)
        }
        ActuatorSpec::LiquidCrystal {
            v_on_v,
            v_sat_v,
            delta_n,
            n_base,
        } => {
            let n_base = n_base.unwrap_or(geometry.n_ris());
            match LiquidCrystalActuator::new(*v_on_v, *v_sat_v, n_base, *delta_n) {
                Ok(a) => Some(Actuator::LiquidCrystal(a)),
                Err(e) => {
                    let field = match &e {
                        Error::OutOfRange { field, .. } => *field,
                        _ => "",
                    };
                    let path = match field {
                        "v_on_v" | "v_sat_v" | "delta_n" | "n_base" => format!("actuator.{field}"),
                        "n_ris" => "actuator.n_base".to_owned(),
                        _ => "actuator".to_owned(),
                    };
                    c.push(path, model_message(&e));
                    None
                }
            }
        }
    }
}

/// Reads the `range_<unit>` / `values_<unit>` keys of a sweep axis.
fn axis_values(
    parameter: SweepParameter,
    axis: &BTreeMap<String, Vec<f64>>,
    steps: Option<usize>,
    spacing: Spacing,
    path: &str,
    c: &mut Checker,
) -> Option<Vec<f64>> {
    let range_key = parameter.axis_key("range");
    let values_key = parameter.axis_key("values");
    let mut ok = true;
    for key in axis.keys() {
        if *key != range_key && *key != values_key {
            c.push(
                format!("{path}.{key}"),
                format!(
                    "unexpected key for parameter with unit {:?}; use {range_key} or {values_key}",
                    parameter.unit()
                ),
            );
            ok = false;
        }
    }
    let values = match (axis.get(&range_key), axis.get(&values_key)) {
        (Some(_), Some(_)) => {
            c.push(
                path,
                format!("give either {range_key} or {values_key}, not both"),
            );
            return None;
        }
        (None, None) => {
            c.push(path, format!("missing {range_key} or {values_key}"));
            return None;
        }
        (Some(range), None) => {
            let p = format!("{path}.{range_key}");
            if range.len() != 2 {
                c.push(p, "range needs exactly two values [from, to]");
                return None;
            }
            let steps = steps.unwrap_or(DEFAULT_SWEEP_STEPS);
            if !(2..=MAX_SWEEP_POINTS).contains(&steps) {
                c.push(
                    format!("{path}.steps"),
                    format!("{steps} is out of range (expected 2..={MAX_SWEEP_POINTS})"),
                );
                return None;
            }
            if spacing == Spacing::Log && !(range[0] > 0.0 && range[1] > 0.0) {
                c.push(p, "log spacing needs positive endpoints");
                return None;
            }
            grid(range[0], range[1], steps, spacing)
        }
        (None, Some(values)) => {
            if steps.is_some() {
                c.push(format!("{path}.steps"), "steps only applies to a range");
                ok = false;
            }
            if values.is_empty() || values.len() > MAX_SWEEP_POINTS {
                c.push(
                    format!("{path}.{values_key}"),
                    "needs between 1 and 100000 values",
                );
                return None;
            }
            values.clone()
        }
    };
    ok.then_some(values)
}

/// Checks every axis value against the parameter's own domain.
fn check_axis_domain(
    parameter: SweepParameter,
    values: &[f64],
    geometry: &SteeringGeometry,
    actuator: Option<&Actuator>,
    path: &str,
    c: &mut Checker,
) -> bool {
    if parameter == SweepParameter::Voltage && actuator.is_none() {
        c.push(path, "a voltage sweep needs an actuator block");
        return false;
    }
    for &v in values {
        let result = match parameter {
            SweepParameter::Wavelength => Wavelength::from_nm(v).map(drop),
            SweepParameter::NRis => geometry.with_n_ris(v).map(drop),
            SweepParameter::Depth => geometry.with_depth_mm(v).map(drop),
            SweepParameter::Incidence => Angle::from_degrees(v).incidence().map(drop),
            SweepParameter::Voltage => {
                if v.is_finite() && v >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::OutOfRange {
                        field: "voltage_v",
                        value: v,
                        expected: "finite voltage >= 0",
                    })
                }
            }
        };
        if let Err(e) = result {
            c.push(path, model_message(&e));
            return false;
        }
    }
    true
}

fn validate_sweep(
    spec: &SweepSpec,
    geometry: Option<&SteeringGeometry>,
    actuator: Option<&Actuator>,
    c: &mut Checker,
) -> Option<SweepPlan> {
    let values = axis_values(
        spec.parameter,
        &spec.axis,
        spec.steps,
        spec.spacing,
        "sweep",
        c,
    );
    let series = match &spec.series {
        None => Some(None),
        Some(s) => {
            if s.parameter == spec.parameter {
                c.push(
                    "sweep.series.parameter",
                    "series parameter must differ from the swept parameter",
                );
            }
            axis_values(
                s.parameter,
                &s.axis,
                None,
                Spacing::Linear,
                "sweep.series",
                c,
            )
            .map(|v| Some((s.parameter, v)))
        }
    };
    if spec.metric == SweepMetric::TuningGain && spec.series.is_none() {
        c.push(
            "sweep.series",
            "tuning_gain compares against each series value; a series block is required",
        );
    }
    let samples = spec.profile_samples.unwrap_or(DEFAULT_PROFILE_SAMPLES);
    if spec.profile_samples.is_some() && spec.metric != SweepMetric::Profile {
        c.push(
            "sweep.profile_samples",
            "only applies to the profile metric",
        );
    }
    if !(3..=MAX_SWEEP_POINTS).contains(&samples) {
        c.push(
            "sweep.profile_samples",
            format!("{samples} is out of range (expected 3..={MAX_SWEEP_POINTS})"),
        );
    }
    let geometry = geometry?;
    let values = values?;
    let series = series?;
    let mut ok = check_axis_domain(spec.parameter, &values, geometry, actuator, "sweep", c);
    if let Some((p, v)) = &series {
        ok &= check_axis_domain(*p, v, geometry, actuator, "sweep.series", c);
    }
    ok.then_some(SweepPlan {
        parameter: spec.parameter,
        metric: spec.metric,
        values,
        series,
        profile_samples: samples,
    })
}

fn validate_design(
    spec: &DesignSpec,
    geometry: Option<&SteeringGeometry>,
    wave: Option<&IncidentWave>,
    actuator: Option<&Actuator>,
    c: &mut Checker,
) -> Option<DesignTarget> {
    let (wanted, unwanted) = match spec.metric {
        DesignMetric::RefractionAngle => (
            ("target_deg", spec.target_deg),
            ("target_mm", spec.target_mm),
        ),
        _ => (
            ("target_mm", spec.target_mm),
            ("target_deg", spec.target_deg),
        ),
    };
    if unwanted.1.is_some() {
        c.push(
            format!("design.{}", unwanted.0),
            format!("not used with this metric; give {}", wanted.0),
        );
    }
    let Some(value) = wanted.1 else {
        c.push(format!("design.{}", wanted.0), "missing target");
        return None;
    };
    let metric = match spec.metric {
        DesignMetric::RefractionAngle => TargetMetric::RefractionAngle(Angle::from_degrees(value)),
        DesignMetric::SpotWidth => TargetMetric::SpotWidth(value),
        DesignMetric::PdLanding => TargetMetric::PdLanding(value),
    };
    let free = match spec.free {
        FreeSpec::NRis => FreeVariable::NRis,
        FreeSpec::Depth => FreeVariable::Depth,
        FreeSpec::Voltage => FreeVariable::Voltage,
    };
    if free == FreeVariable::Voltage && actuator.is_none() {
        c.push("design.free", "voltage design needs an actuator block");
    }
    let target = DesignTarget::new(metric, *wave?, *geometry?, free);
    c.check(&format!("design.{}", wanted.0), target)
}

fn validate_bench(spec: &BenchSpec, c: &mut Checker) -> Option<BenchPlan> {
    let step = c.check(
        "bench.step_deg",
        crate::bench::rotation_grid(Angle::from_degrees(spec.step_deg)).map(drop),
    );
    let roster = match &spec.roster {
        None => Some(FrontEndKind::ALL.to_vec()),
        Some(names) => {
            let mut kinds = Vec::with_capacity(names.len());
            let mut ok = true;
            for (i, name) in names.iter().enumerate() {
                match name.parse::<FrontEndKind>() {
                    Ok(k) => kinds.push(k),
                    Err(msg) => {
                        c.push(format!("bench.roster[{i}]"), msg);
                        ok = false;
                    }
                }
            }
            ok.then_some(kinds)
        }
    };
    let adj_deg = spec
        .adj_lens_deg
        .unwrap_or(crate::bench::ADJ_LENS_DEFAULT_DEG);
    if !(adj_deg > 0.0 && adj_deg < 90.0) {
        c.push(
            "bench.adj_lens_deg",
            format!("{adj_deg} is out of range (expected 0 < angle < 90 deg)"),
        );
        return None;
    }
    step?;
    Some(BenchPlan {
        roster: roster?,
        step: Angle::from_degrees(spec.step_deg),
        adj_lens: Angle::from_degrees(adj_deg),
    })
}

fn validate(spec: ScenarioSpec, fallback_name: &str, out: &mut Vec<Violation>) -> Option<Scenario> {
    let mut c = Checker { out };
    let active: Vec<&str> = [
        ("sweep", spec.sweep.is_some()),
        ("design", spec.design.is_some()),
        ("bench", spec.bench.is_some()),
    ]
    .into_iter()
    .filter_map(|(n, on)| on.then_some(n))
    .collect();
    if active.len() > 1 {
        c.push(
            "",
            format!(
                "blocks {} are mutually exclusive; give at most one",
                active.join(" and ")
            ),
        );
    }
    if let Some(name) = &spec.name {
        if name.is_empty()
            || !name
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch))
            || name.starts_with('.')
        {
            c.push(
                "name",
                "use letters, digits, '-', '_' or '.' (it names the output files)",
            );
        }
    }
    let geometry = validate_geometry(&spec.geometry, &mut c);
    let wave = validate_wave(&spec.wave, &mut c);
    let actuator = spec
        .actuator
        .as_ref()
        .and_then(|a| validate_actuator(a, geometry.as_ref(), &mut c));
    let mode = if let Some(s) = &spec.sweep {
        validate_sweep(s, geometry.as_ref(), actuator.as_ref(), &mut c).map(Mode::Sweep)
    } else if let Some(d) = &spec.design {
        validate_design(
            d,
            geometry.as_ref(),
            wave.as_ref(),
            actuator.as_ref(),
            &mut c,
        )
        .map(Mode::Design)
    } else if let Some(b) = &spec.bench {
        validate_bench(b, &mut c).map(Mode::Bench)
    } else {
        Some(Mode::Single)
    };
    Some(Scenario {
        name: spec
            .name
            .clone()
            .unwrap_or_else(|| fallback_name.to_owned()),
        geometry: geometry?,
        wave: wave?,
        actuator,
        mode: mode?,
        spec,
    })
}
