//! Rotation sweeps of receiver front ends: fixed lenses described by their
//! published incidence envelopes against tunable RIS elements that re-steer
//! for every rotation angle.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{check_range, Result};
use crate::optics::{Angle, IncidentWave, SteeringGeometry};
use crate::radiometry::transmittance_onto_pd;
use crate::table::{Cell, Table};
use crate::tuning::{
    solve_voltage_nearest, Actuator, DesignTarget, FreeVariable, LiquidCrystalActuator,
    MetaLensActuator, TargetMetric,
};

// Grid angles built as i * step may land a few ulps past an envelope edge.
const ENVELOPE_SLACK_DEG: f64 = 1e-9;

/// Lens-with-adjustable-elements envelope; only "< 90 deg" is published, and
/// it has to sit between the CMBBP lens and the RIS elements.
pub const ADJ_LENS_DEFAULT_DEG: f64 = 88.0;
pub const CMBBP_ROLLOFF_START_DEG: f64 = 25.0;
/// Relative intensity the CMBBP rolloff reaches at its 85 deg edge.
pub const CMBBP_EDGE_INTENSITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrontEndKind {
    Convex,
    Gilcpc,
    Spherical,
    Cmbbp,
    AdjLens,
    MetalensRis,
    LcRis,
}

impl FrontEndKind {
    pub const ALL: [FrontEndKind; 7] = [
        FrontEndKind::Convex,
        FrontEndKind::Gilcpc,
        FrontEndKind::Spherical,
        FrontEndKind::Cmbbp,
        FrontEndKind::AdjLens,
        FrontEndKind::MetalensRis,
        FrontEndKind::LcRis,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FrontEndKind::Convex => "convex",
            FrontEndKind::Gilcpc => "gilcpc",
            FrontEndKind::Spherical => "spherical",
            FrontEndKind::Cmbbp => "cmbbp",
            FrontEndKind::AdjLens => "adj_lens",
            FrontEndKind::MetalensRis => "metalens_ris",
            FrontEndKind::LcRis => "lc_ris",
        }
    }

    pub fn is_ris(&self) -> bool {
        matches!(self, FrontEndKind::MetalensRis | FrontEndKind::LcRis)
    }
}

impl fmt::Display for FrontEndKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrontEndKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrontEndKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown front end {s:?}"))
    }
}

/// Closed-loop steering set-up of a RIS front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisSteering {
    pub geometry: SteeringGeometry,
    pub wave: IncidentWave,
    pub actuator: Actuator,
    /// Centre of the photodetector on the PD plane, millimetres from the slit axis.
    pub pd_center_mm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverFrontEnd {
    pub kind: FrontEndKind,
    pub max_incidence: Angle,
    /// Start of the CMBBP intensity rolloff.
    pub rolloff_start: Option<Angle>,
    /// Nominal spot size, millimetres.
    pub spot_mm: f64,
    pub tunable: bool,
    /// Drive voltage range (volts) as listed for the element.
    pub voltage_range: Option<(f64, f64)>,
    pub steering: Option<RisSteering>,
}

impl ReceiverFrontEnd {
    /// Fixed lens with a published incidence envelope.
    pub fn lens(kind: FrontEndKind) -> Self {
        let (max_deg, rolloff, tunable) = match kind {
            FrontEndKind::Convex => (36.2, None, false),
            FrontEndKind::Gilcpc => (40.0, None, false),
            FrontEndKind::Spherical => (45.0, None, false),
            FrontEndKind::Cmbbp => (85.0, Some(CMBBP_ROLLOFF_START_DEG), false),
            FrontEndKind::AdjLens => (ADJ_LENS_DEFAULT_DEG, None, true),
            FrontEndKind::MetalensRis | FrontEndKind::LcRis => {
                panic!("{kind} is a RIS front end, build it with ReceiverFrontEnd::ris")
            }
        };
        ReceiverFrontEnd {
            kind,
            max_incidence: Angle::from_degrees(max_deg),
            rolloff_start: rolloff.map(Angle::from_degrees),
            spot_mm: 1.0,
            tunable,
            voltage_range: None,
            steering: None,
        }
    }

    /// Tunable RIS element steered by `actuator`, with the PD centred on the
    /// slit axis.
    pub fn ris(geometry: SteeringGeometry, wave: IncidentWave, actuator: Actuator) -> Result<Self> {
        let (kind, voltage_range) = match actuator {
            Actuator::MetaLens(_) => (FrontEndKind::MetalensRis, (1000.0, 3000.0)),
            Actuator::LiquidCrystal(_) => (FrontEndKind::LcRis, (2.0, 5.0)),
        };
        let spot_mm = crate::diffraction::central_lobe_width_mm(&geometry, &wave)?;
        Ok(ReceiverFrontEnd {
            kind,
            max_incidence: Angle::RIGHT,
            rolloff_start: None,
            spot_mm,
            tunable: true,
            voltage_range: Some(voltage_range),
            steering: Some(RisSteering {
                geometry,
                wave,
                actuator,
                pd_center_mm: 0.0,
            }),
        })
    }

    /// The seven rows of the lens/meta-element comparison; RIS rows share
    /// `geometry` and `wave`.
    pub fn table1_roster(
        geometry: SteeringGeometry,
        wave: IncidentWave,
        metalens: MetaLensActuator,
        liquid_crystal: LiquidCrystalActuator,
    ) -> Result<Vec<Self>> {
        let mut roster: Vec<Self> = FrontEndKind::ALL[..5]
            .iter()
            .map(|&k| ReceiverFrontEnd::lens(k))
            .collect();
        roster.push(ReceiverFrontEnd::ris(
            *metalens.base_geometry(),
            wave,
            Actuator::MetaLens(metalens),
        )?);
        roster.push(ReceiverFrontEnd::ris(
            geometry,
            wave,
            Actuator::LiquidCrystal(liquid_crystal),
        )?);
        Ok(roster)
    }

    /// Overrides the incidence envelope, e.g. for the loosely specified adj_lens.
    pub fn with_max_incidence(mut self, max_incidence: Angle) -> Self {
        self.max_incidence = max_incidence;
        self
    }

    fn envelope_contains(&self, rotation: Angle) -> bool {
        rotation.degrees() <= self.max_incidence.degrees() + ENVELOPE_SLACK_DEG
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub detected: bool,
    pub relative_intensity: f64,
}

impl Detection {
    const MISSED: Detection = Detection {
        detected: false,
        relative_intensity: 0.0,
    };
}

fn cmbbp_rolloff(rotation_deg: f64, start_deg: f64, edge_deg: f64) -> f64 {
    if rotation_deg <= start_deg {
        1.0
    } else {
        let t = ((rotation_deg - start_deg) / (edge_deg - start_deg)).min(1.0);
        1.0 - (1.0 - CMBBP_EDGE_INTENSITY) * t
    }
}

/// Whether the front end still sees a source at `rotation`, and how much of it.
pub fn detect(front_end: &ReceiverFrontEnd, rotation: Angle) -> Detection {
    if !front_end.envelope_contains(rotation) {
        return Detection::MISSED;
    }
    match &front_end.steering {
        None => {
            let mut intensity = rotation.projection();
            if let Some(start) = front_end.rolloff_start {
                intensity *= cmbbp_rolloff(
                    rotation.degrees(),
                    start.degrees(),
                    front_end.max_incidence.degrees(),
                );
            }
            Detection {
                detected: true,
                relative_intensity: intensity.clamp(0.0, 1.0),
            }
        }
        Some(steering) => steer(steering, rotation).unwrap_or(Detection::MISSED),
    }
}

/// Re-solves the actuator so the pattern lands as close to the PD centre as
/// the drive range allows.
fn steer(steering: &RisSteering, rotation: Angle) -> Result<Detection> {
    let wave = steering.wave.with_incidence(rotation)?;
    let target = DesignTarget::new(
        TargetMetric::PdLanding(steering.pd_center_mm),
        wave,
        steering.geometry,
        FreeVariable::Voltage,
    )?;
    let solution = solve_voltage_nearest(&target, &steering.actuator)?;
    let geometry = steering
        .actuator
        .drive(solution.voltage, &steering.geometry);
    let miss = (solution.achieved - steering.pd_center_mm).abs();
    if miss > 0.5 * geometry.pd_length_mm() {
        return Ok(Detection::MISSED);
    }
    let t = transmittance_onto_pd(&geometry, &wave, steering.pd_center_mm)?;
    Ok(Detection {
        detected: true,
        relative_intensity: t.value,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationSweepResult {
    pub angles_deg: Vec<f64>,
    pub detected: Vec<bool>,
    pub relative_intensity: Vec<f64>,
}

impl RotationSweepResult {
    pub fn max_detected_deg(&self) -> Option<f64> {
        self.angles_deg
            .iter()
            .zip(&self.detected)
            .rev()
            .find(|(_, &d)| d)
            .map(|(&a, _)| a)
    }

    pub fn mean_detected_intensity(&self) -> Option<f64> {
        let (sum, n) = self
            .relative_intensity
            .iter()
            .zip(&self.detected)
            .filter(|(_, &d)| d)
            .fold((0.0, 0usize), |(s, n), (&i, _)| (s + i, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// Rotation angles `0, step, 2 step, ...` up to and including 90 deg.
pub fn rotation_grid(step: Angle) -> Result<Vec<f64>> {
    let step_deg = step.degrees();
    check_range(
        "step_deg",
        step_deg,
        step_deg > 0.0 && step_deg <= 90.0,
        "0 < step <= 90 deg",
    )?;
    let ratio = 90.0 / step_deg;
    let whole = (ratio + 1e-9).floor() as usize;
    let mut angles: Vec<f64> = (0..=whole).map(|i| i as f64 * step_deg).collect();
    match angles.last_mut() {
        Some(last) if (*last - 90.0).abs() <= 1e-9 => *last = 90.0,
        _ => angles.push(90.0),
    }
    Ok(angles)
}

pub fn rotation_sweep(front_end: &ReceiverFrontEnd, step: Angle) -> Result<RotationSweepResult> {
    let angles_deg = rotation_grid(step)?;
    let detections: Vec<Detection> = angles_deg
        .par_iter()
        .map(|&deg| detect(front_end, Angle::from_degrees(deg)))
        .collect();
    Ok(RotationSweepResult {
        detected: detections.iter().map(|d| d.detected).collect(),
        relative_intensity: detections.iter().map(|d| d.relative_intensity).collect(),
        angles_deg,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub kind: FrontEndKind,
    pub max_detected_deg: Option<f64>,
    pub mean_intensity: Option<f64>,
    pub tunable: bool,
    pub voltage_range: Option<(f64, f64)>,
    pub sweep: RotationSweepResult,
}

/// One row per front end, in roster order.
pub fn compare_table(front_ends: &[ReceiverFrontEnd], step: Angle) -> Result<Vec<ComparisonRow>> {
    front_ends
        .iter()
        .map(|fe| {
            let sweep = rotation_sweep(fe, step)?;
            Ok(ComparisonRow {
                kind: fe.kind,
                max_detected_deg: sweep.max_detected_deg(),
                mean_intensity: sweep.mean_detected_intensity(),
                tunable: fe.tunable,
                voltage_range: fe.voltage_range,
                sweep,
            })
        })
        .collect()
}

fn voltage_range_text(range: Option<(f64, f64)>) -> String {
    match range {
        Some((lo, hi)) => format!("{lo}-{hi}"),
        None => "none".to_owned(),
    }
}

/// Columns `kind, max_detected_deg, mean_intensity, tunable, voltage_range_v`.
pub fn comparison_table(rows: &[ComparisonRow]) -> Table {
    let mut t = Table::new([
        "kind",
        "max_detected_deg",
        "mean_intensity",
        "tunable",
        "voltage_range_v",
    ]);
    for r in rows {
        t.push(vec![
            r.kind.as_str().into(),
            Cell::Float(r.max_detected_deg.unwrap_or(f64::NAN)),
            Cell::Float(r.mean_intensity.unwrap_or(f64::NAN)),
            Cell::Bool(r.tunable),
            voltage_range_text(r.voltage_range).into(),
        ]);
    }
    t
}

/// Human-readable version of [`comparison_table`] with short numbers.
pub fn comparison_text(rows: &[ComparisonRow]) -> String {
    let mut t = Table::new([
        "kind",
        "max angle (deg)",
        "mean intensity",
        "tunable",
        "voltage (V)",
    ]);
    for r in rows {
        let fmt = |v: Option<f64>, digits: usize| match v {
            Some(v) => format!("{v:.digits$}"),
            None => "-".to_owned(),
        };
        t.push(vec![
            r.kind.as_str().into(),
            fmt(r.max_detected_deg, 1).into(),
            fmt(r.mean_intensity, 4).into(),
            (if r.tunable { "yes" } else { "no" }).into(),
            voltage_range_text(r.voltage_range).into(),
        ]);
    }
    t.to_aligned_text()
}

/// Long-format sweep data: `kind, angle_deg, detected, relative_intensity`.
pub fn sweep_table(rows: &[ComparisonRow]) -> Table {
    let mut t = Table::new(["kind", "angle_deg", "detected", "relative_intensity"]);
    for r in rows {
        let s = &r.sweep;
        for i in 0..s.angles_deg.len() {
            t.push(vec![
                r.kind.as_str().into(),
                Cell::Float(s.angles_deg[i]),
                Cell::Bool(s.detected[i]),
                Cell::Float(s.relative_intensity[i]),
            ]);
        }
    }
    t
}
