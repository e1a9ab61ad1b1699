//! Transmittance onto the photodetector and tuning gain between RIS states.
//!
//! Transmittance is the PD-captured share of the power incident on the slit:
//! the `cos(theta_a)` projection of the incoming wave times the fraction of the
//! diffraction pattern that lands on the PD aperture.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffraction::{center_offset_mm, pattern_power_fraction, pattern_power_in_window};
use crate::error::{check_range, Error, Result, TuningState};
use crate::optics::{
    refraction_angle, IncidentWave, SteeringGeometry, Wavelength, WAVELENGTH_MAX_NM,
    WAVELENGTH_MIN_NM,
};
use crate::quadrature::QuadratureConfig;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmittanceResult {
    /// `incidence_factor * capture_fraction`, in `[0, 1]`.
    pub value: f64,
    /// `cos(theta_a)`.
    pub incidence_factor: f64,
    /// Share of the diffraction pattern power landing on the PD.
    pub capture_fraction: f64,
    pub captured_power_w: f64,
}

impl TransmittanceResult {
    fn new(incidence_factor: f64, capture_fraction: f64, power_w: f64) -> Self {
        let value = (incidence_factor * capture_fraction).clamp(0.0, 1.0);
        TransmittanceResult {
            value,
            incidence_factor,
            capture_fraction,
            captured_power_w: value * power_w,
        }
    }
}

/// Transmittance with the PD centred under the steered pattern.
pub fn transmittance(geom: &SteeringGeometry, wave: &IncidentWave) -> Result<TransmittanceResult> {
    refraction_angle(geom, wave)?;
    let capture = pattern_power_fraction(geom, wave, 0.5 * geom.pd_length_mm())?;
    Ok(TransmittanceResult::new(
        wave.incidence().projection(),
        capture,
        wave.power_w(),
    ))
}

/// Transmittance onto a PD centred at `pd_center_mm` from the slit axis,
/// wherever the steered pattern happens to land.
pub fn transmittance_onto_pd(
    geom: &SteeringGeometry,
    wave: &IncidentWave,
    pd_center_mm: f64,
) -> Result<TransmittanceResult> {
    let landing = center_offset_mm(geom, wave)?;
    let half = 0.5 * geom.pd_length_mm();
    let offset = pd_center_mm - landing;
    let capture = pattern_power_in_window(
        geom,
        wave,
        offset - half,
        offset + half,
        &QuadratureConfig::default(),
    )?;
    Ok(TransmittanceResult::new(
        wave.incidence().projection(),
        capture,
        wave.power_w(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningGain {
    pub before: TransmittanceResult,
    pub after: TransmittanceResult,
    /// `after.value - before.value`; positive is a gain.
    pub gain: f64,
}

pub fn tuning_gain(
    geom_before: &SteeringGeometry,
    geom_after: &SteeringGeometry,
    wave: &IncidentWave,
) -> Result<TuningGain> {
    let before = transmittance(geom_before, wave).map_err(|e| e.in_state(TuningState::Before))?;
    let after = transmittance(geom_after, wave).map_err(|e| e.in_state(TuningState::After))?;
    Ok(TuningGain {
        before,
        after,
        gain: after.value - before.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `steps` grid points over `[from, to]`, endpoints exact.
pub fn grid(from: f64, to: f64, steps: usize, spacing: Spacing) -> Vec<f64> {
    let last = steps.saturating_sub(1).max(1) as f64;
    (0..steps)
        .map(|i| {
            if i == 0 {
                from
            } else if i + 1 == steps {
                to
            } else {
                let t = i as f64 / last;
                match spacing {
                    Spacing::Linear => from + t * (to - from),
                    Spacing::Log => from * (to / from).powf(t),
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub wavelength_nm: f64,
    pub result: Result<TransmittanceResult, Error>,
}

/// Transmittance over a wavelength band. Point failures are kept in place.
pub fn wavelength_sweep(
    geom: &SteeringGeometry,
    wave_template: &IncidentWave,
    band_nm: (f64, f64),
    steps: usize,
    spacing: Spacing,
) -> Result<Vec<SweepPoint>> {
    check_range("steps", steps as f64, steps >= 2, "steps >= 2")?;
    let (lo, hi) = band_nm;
    for (field, v) in [("band_from_nm", lo), ("band_to_nm", hi)] {
        check_range(
            field,
            v,
            (WAVELENGTH_MIN_NM..=WAVELENGTH_MAX_NM).contains(&v),
            "200 nm <= wavelength <= 2000 nm",
        )?;
    }
    Ok(grid(lo, hi, steps, spacing)
        .into_par_iter()
        .map(|nm| {
            let result = Wavelength::from_nm(nm)
                .and_then(|wl| transmittance(geom, &wave_template.with_wavelength(wl)));
            SweepPoint {
                wavelength_nm: nm,
                result,
            }
        })
        .collect())
}

/// Columns `wavelength_nm, transmittance, incidence_factor, captured_power_w`;
/// failed points are written as NaN.
pub fn sweep_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new([
        "wavelength_nm",
        "transmittance",
        "incidence_factor",
        "captured_power_w",
    ]);
    for p in points {
        let (v, f, w) = match &p.result {
            Ok(r) => (r.value, r.incidence_factor, r.captured_power_w),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        t.push(vec![
            Cell::Float(p.wavelength_nm),
            Cell::Float(v),
            Cell::Float(f),
            Cell::Float(w),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::Angle;

    fn wave(nm: f64, inc_deg: f64) -> IncidentWave {
        IncidentWave::new(
            Wavelength::from_nm(nm).unwrap(),
            Angle::from_degrees(inc_deg),
            1.0,
            1,
        )
        .unwrap()
    }

    fn geom(depth_mm: f64, pd_mm: f64) -> SteeringGeometry {
        SteeringGeometry::new(4.0, depth_mm, pd_mm, 1.5).unwrap()
    }

    #[test]
    fn grazing_incidence_transmits_nothing() {
        let t = transmittance(&geom(1.0, 0.2), &wave(550.0, 90.0)).unwrap();
        assert_eq!(t.value, 0.0);
        assert_eq!(t.captured_power_w, 0.0);
    }

    #[test]
    fn sixty_degrees_halves_transmittance() {
        let g = geom(1.0, 0.2);
        let t0 = transmittance(&g, &wave(550.0, 0.0)).unwrap();
        let t60 = transmittance(&g, &wave(550.0, 60.0)).unwrap();
        assert_eq!(t0.capture_fraction, t60.capture_fraction);
        assert!((t60.value / t0.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn central_lobe_window() {
        let g = geom(1.0, 0.184_108_476_414_344_3);
        let t = transmittance(&g, &wave(550.0, 0.0)).unwrap();
        assert!((t.value - 0.9028).abs() < 5e-4, "{}", t.value);
    }

    #[test]
    fn gain_identity_and_antisymmetry() {
        let (a, b) = (geom(0.2, 0.01), geom(1.0, 0.01));
        let w = wave(600.0, 0.0);
        assert_eq!(tuning_gain(&a, &a, &w).unwrap().gain, 0.0);
        let ab = tuning_gain(&a, &b, &w).unwrap().gain;
        let ba = tuning_gain(&b, &a, &w).unwrap().gain;
        assert_eq!(ab, -ba);
        assert!((-1.0..=1.0).contains(&ab));
    }

    #[test]
    fn gain_error_names_failing_state() {
        let ok = SteeringGeometry::new(4.0, 1.0, 0.01, 1.5).unwrap();
        let bad = SteeringGeometry::new(0.3, 1.0, 0.01, 1.1).unwrap();
        let err = tuning_gain(&ok, &bad, &wave(550.0, 60.0)).unwrap_err();
        assert!(matches!(
            err,
            Error::InState {
                state: TuningState::After,
                ..
            }
        ));
        assert_eq!(err.kind(), "EvanescentOrder");
        assert!(err.to_string().starts_with("after state"));
    }

    #[test]
    fn sweep_grid_endpoints() {
        let pts = wavelength_sweep(
            &geom(1.0, 0.01),
            &wave(550.0, 0.0),
            (400.0, 1000.0),
            2,
            Spacing::Linear,
        )
        .unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].wavelength_nm, 400.0);
        assert_eq!(pts[1].wavelength_nm, 1000.0);
        let log = grid(400.0, 1000.0, 5, Spacing::Log);
        assert_eq!(log[0], 400.0);
        assert_eq!(log[4], 1000.0);
        assert!((log[2] - (400.0f64 * 1000.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sweep_keeps_point_errors_in_place() {
        // order 1 stops propagating once 0.5 + lambda/0.6um >= 1.2
        let g = SteeringGeometry::new(0.6, 1.0, 0.01, 1.2).unwrap();
        let pts =
            wavelength_sweep(&g, &wave(400.0, 30.0), (300.0, 600.0), 7, Spacing::Linear).unwrap();
        assert!(pts[0].result.is_ok());
        assert_eq!(
            pts[6].result.as_ref().unwrap_err().kind(),
            "EvanescentOrder"
        );
        let table = sweep_table(&pts);
        assert_eq!(table.rows.len(), 7);
        assert_eq!(table.rows[6][1].render(), "NaN");
    }

    #[test]
    fn sweep_rejects_bad_band() {
        let g = geom(1.0, 0.01);
        assert!(
            wavelength_sweep(&g, &wave(550.0, 0.0), (100.0, 600.0), 5, Spacing::Linear).is_err()
        );
        assert!(
            wavelength_sweep(&g, &wave(550.0, 0.0), (400.0, 600.0), 1, Spacing::Linear).is_err()
        );
    }

    #[test]
    fn offset_pd_captures_less() {
        let g = geom(1.0, 0.2);
        let w = wave(550.0, 0.0);
        let landing = center_offset_mm(&g, &w).unwrap();
        let centred = transmittance_onto_pd(&g, &w, landing).unwrap();
        let plain = transmittance(&g, &w).unwrap();
        assert!((centred.value - plain.value).abs() < 1e-12);
        let shifted = transmittance_onto_pd(&g, &w, landing + 0.1).unwrap();
        assert!(shifted.value < centred.value);
    }
}
