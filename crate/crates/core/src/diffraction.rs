//! Single-slit Fraunhofer pattern inside the RIS slab.
//!
//! Diffraction happens after the wave enters the slab, so every pattern uses
//! the in-medium wavelength `lambda / n_ris`. The pattern envelope is centred on
//! the steered direction of the configured order.
//!
//! Two mappings from the photodetector plane to the diffraction variable are
//! used:
//!
//! * point intensities ([`fraunhofer_relative_intensity`], [`profile_on_pd`])
//!   use the exact direction `theta(u) = atan((u - c) / y)`;
//! * pattern power ([`pattern_power_fraction`]) integrates the far-field
//!   irradiance on the plane, where the lateral offset maps linearly onto the
//!   diffraction variable, `beta / 2 = pi a (u - c) / (lambda_m y)`. The exact
//!   mapping is not integrable over an infinite plane (the intensity tends to a
//!   non-zero constant as `|u| -> inf`), while the linear one integrates to
//!   exactly `lambda_m y / a`, which is the normalization used.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::optics::{refraction_angle, Angle, IncidentWave, SteeringGeometry};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::table::{Cell, Table};

/// Beyond this many lobes the cumulative pattern power switches from
/// quadrature to its asymptotic tail expansion (truncation error < 1e-12).
const ASYMPTOTIC_LOBES: f64 = 64.0;

/// `lambda / n_ris`, in nanometres.
pub fn medium_wavelength_nm(geom: &SteeringGeometry, wave: &IncidentWave) -> f64 {
    wave.wavelength().nm() / geom.n_ris()
}

/// `lambda_m / a`: sine of the first null about the pattern centre.
pub fn null_sine(geom: &SteeringGeometry, wave: &IncidentWave) -> f64 {
    medium_wavelength_nm(geom, wave) * 1e-3 / geom.slit_um()
}

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

fn sinc_squared(half_phase: f64) -> f64 {
    let s = sinc(half_phase);
    (s * s).min(1.0)
}

/// `I / I_max = [sin(beta/2) / (beta/2)]^2`, `beta/2 = pi a sin(theta) / lambda_m`,
/// with `theta` measured from the steered pattern centre.
pub fn fraunhofer_relative_intensity(
    geom: &SteeringGeometry,
    wave: &IncidentWave,
    theta: Angle,
) -> f64 {
    sinc_squared(PI * theta.sin() / null_sine(geom, wave))
}

/// Lateral displacement of the pattern centre on the PD plane, `y tan(theta_ris)`.
pub fn center_offset_mm(geom: &SteeringGeometry, wave: &IncidentWave) -> Result<f64> {
    Ok(geom.depth_mm() * refraction_angle(geom, wave)?.tan())
}

/// Relative intensity sampled across the photodetector.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    /// Lateral positions on the PD plane, millimetres from the slit axis.
    pub positions_mm: Vec<f64>,
    /// Intensity normalized to the pattern's central maximum.
    pub relative_intensity: Vec<f64>,
    pub center_offset_mm: f64,
    pub medium_wavelength_nm: f64,
}

impl IntensityProfile {
    pub fn len(&self) -> usize {
        self.positions_mm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions_mm.is_empty()
    }

    /// Columns `position_mm, relative_intensity`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["position_mm", "relative_intensity"]);
        for (&u, &i) in self.positions_mm.iter().zip(&self.relative_intensity) {
            t.push(vec![Cell::Float(u), Cell::Float(i)]);
        }
        t
    }
}

/// Samples the pattern at `samples` evenly spaced points over `[-x/2, x/2]`.
pub fn profile_on_pd(
    geom: &SteeringGeometry,
    wave: &IncidentWave,
    samples: usize,
) -> Result<IntensityProfile> {
    check_range("samples", samples as f64, samples >= 3, "samples >= 3")?;
    let center = center_offset_mm(geom, wave)?;
    let half = 0.5 * geom.pd_length_mm();
    let depth = geom.depth_mm();
    let last = (samples - 1) as f64;
    // (2i - last) / last is exactly antisymmetric, so mirrored samples match bitwise
    let positions_mm: Vec<f64> = (0..samples)
        .map(|i| half * ((2 * i) as f64 - last) / last)
        .collect();
    let relative_intensity = positions_mm
        .par_iter()
        .map(|&u| {
            let theta = Angle::from_radians(((u - center) / depth).atan());
            fraunhofer_relative_intensity(geom, wave, theta)
        })
        .collect();
    Ok(IntensityProfile {
        positions_mm,
        relative_intensity,
        center_offset_mm: center,
        medium_wavelength_nm: medium_wavelength_nm(geom, wave),
    })
}

/// Central-lobe geometry on the photodetector plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotReport {
    /// Central-lobe full width, `2 y tan(first_null_angle)`; `+inf` when the
    /// first null lies beyond the horizon.
    pub full_width_mm: f64,
    pub first_null_angle: Angle,
    /// Fraction of the pattern power landing on the photodetector.
    pub pd_coverage: f64,
    /// `lambda_m / a >= 1`: the central lobe fills the half-space.
    pub null_beyond_horizon: bool,
}

pub fn spot_report(geom: &SteeringGeometry, wave: &IncidentWave) -> Result<SpotReport> {
    refraction_angle(geom, wave)?;
    let ratio = null_sine(geom, wave);
    let pd_coverage = pattern_power_fraction(geom, wave, 0.5 * geom.pd_length_mm())?;
    if ratio >= 1.0 {
        return Ok(SpotReport {
            full_width_mm: f64::INFINITY,
            first_null_angle: Angle::RIGHT,
            pd_coverage,
            null_beyond_horizon: true,
        });
    }
    let first_null_angle = Angle::from_radians(ratio.asin());
    Ok(SpotReport {
        full_width_mm: 2.0 * geom.depth_mm() * first_null_angle.tan(),
        first_null_angle,
        pd_coverage,
        null_beyond_horizon: false,
    })
}

/// Central-lobe full width, or `NullBeyondHorizon`.
pub fn central_lobe_width_mm(geom: &SteeringGeometry, wave: &IncidentWave) -> Result<f64> {
    let ratio = null_sine(geom, wave);
    if ratio >= 1.0 {
        return Err(Error::NullBeyondHorizon { ratio });
    }
    Ok(2.0 * geom.depth_mm() * ratio.asin().tan())
}

/// Paraxial null spacing on the PD plane, `lambda_m y / a`, in millimetres.
pub fn lobe_pitch_mm(geom: &SteeringGeometry, wave: &IncidentWave) -> f64 {
    null_sine(geom, wave) * geom.depth_mm()
}

/// Fraction of pattern power within `|u - c| <= halfwidth_mm`.
pub fn pattern_power_fraction(
    geom: &SteeringGeometry,
    wave: &IncidentWave,
    halfwidth_mm: f64,
) -> Result<f64> {
    pattern_power_fraction_with(geom, wave, halfwidth_mm, &QuadratureConfig::default())
}

pub fn pattern_power_fraction_with(
    geom: &SteeringGeometry,
    wave: &IncidentWave,
    halfwidth_mm: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    if halfwidth_mm == f64::INFINITY {
        return Ok(1.0);
    }
    check_range(
        "window_halfwidth_mm",
        halfwidth_mm,
        halfwidth_mm >= 0.0,
        "window half-width >= 0",
    )?;
    let lobes = halfwidth_mm / lobe_pitch_mm(geom, wave);
    Ok((2.0 * cumulative_power(lobes, config)?).clamp(0.0, 1.0))
}

/// Fraction of pattern power landing on `[lo_mm, hi_mm]`, both measured from
/// the pattern centre.
pub fn pattern_power_in_window(
    geom: &SteeringGeometry,
    wave: &IncidentWave,
    lo_mm: f64,
    hi_mm: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    if lo_mm.is_nan() || hi_mm.is_nan() || lo_mm > hi_mm {
        return Err(Error::OutOfRange {
            field: "window_mm",
            value: hi_mm - lo_mm,
            expected: "lower edge <= upper edge",
        });
    }
    let pitch = lobe_pitch_mm(geom, wave);
    let hi = cumulative_power(hi_mm / pitch, config)?;
    let lo = cumulative_power(lo_mm / pitch, config)?;
    Ok((hi - lo).clamp(0.0, 1.0))
}

/// `S(X) = integral_0^X sinc^2(pi t) dt`; odd in `X`, `S(inf) = 1/2`.
pub fn cumulative_power(lobes: f64, config: &QuadratureConfig) -> Result<f64> {
    if lobes.is_nan() {
        return Err(Error::OutOfRange {
            field: "window_lobes",
            value: lobes,
            expected: "a number",
        });
    }
    if lobes < 0.0 {
        return Ok(-cumulative_power(-lobes, config)?);
    }
    if lobes.is_infinite() {
        return Ok(0.5);
    }
    if lobes > ASYMPTOTIC_LOBES {
        return Ok(0.5 - asymptotic_tail(lobes));
    }
    let integrand = |t: f64| sinc_squared(PI * t);
    let whole = lobes.floor() as usize;
    let pieces = whole + 1;
    let piece_config = QuadratureConfig {
        abs_tol: config.abs_tol / pieces as f64,
        ..*config
    };
    let mut sum = 0.0;
    // split at the nulls so each panel sees one smooth lobe
    for k in 0..whole {
        sum += integrate(integrand, k as f64, (k + 1) as f64, &piece_config)?;
    }
    sum += integrate(integrand, whole as f64, lobes, &piece_config)?;
    Ok(sum)
}

/// `integral_X^inf sin^2(pi t) / (pi t)^2 dt` for large `X`, from repeated
/// integration by parts of the oscillating part.
fn asymptotic_tail(x: f64) -> f64 {
    let w = 2.0 * PI;
    let (s, c) = (w * x).sin_cos();
    // integral_X^inf cos(w t) / t^2 dt
    let oscillating =
        -s / (w * x * x) + 2.0 * c / (w * w * x.powi(3)) + 6.0 * s / (w.powi(3) * x.powi(4));
    (1.0 / x - oscillating) / (2.0 * PI * PI)
}
