//! Angle, wavelength and slab-geometry types plus the forward steering solver.
//!
//! The steered direction inside the RIS slab follows the grating equation
//! combined with refraction at the air/RIS interface:
//!
//! ```text
//! n_ris * sin(theta_ris) = n_air * sin(theta_a) + m * lambda / a
//! ```
//!
//! The slit width `a` doubles as the grating pitch: a single slit is the only
//! lateral length scale of the receiver, so the order-dependent term uses it.
//! The diffracted order adds to the tangential component (`+ m lambda / a`).

use std::f64::consts::FRAC_PI_2;

use crate::error::{check_range, Error, Result};

/// Lowest wavelength accepted by the toolkit, in nanometres.
pub const WAVELENGTH_MIN_NM: f64 = 200.0;
/// Highest wavelength accepted by the toolkit, in nanometres.
pub const WAVELENGTH_MAX_NM: f64 = 2000.0;
/// Upper bound on any RIS refractive index.
pub const N_RIS_MAX: f64 = 2.5;
/// Upper bound on the ambient index.
pub const N_AIR_MAX: f64 = 1.001;
/// Highest diffraction order an [`IncidentWave`] may carry.
pub const MAX_ORDER: u32 = 3;

// Slack for angles converted from degrees that land a few ulps past 90.
const RIGHT_ANGLE_SLACK: f64 = 1e-12;

/// Vacuum wavelength in nanometres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn from_nm(nm: f64) -> Result<Self> {
        check_range(
            "wavelength_nm",
            nm,
            (WAVELENGTH_MIN_NM..=WAVELENGTH_MAX_NM).contains(&nm),
            "200 nm <= wavelength <= 2000 nm",
        )
        .map(Wavelength)
    }

    pub fn nm(self) -> f64 {
        self.0
    }

    pub fn mm(self) -> f64 {
        self.0 * 1e-6
    }
}

/// A plane angle. Stored in radians; degrees appear only at I/O boundaries.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const RIGHT: Angle = Angle(FRAC_PI_2);

    pub fn from_radians(rad: f64) -> Self {
        Angle(rad)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Angle(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn sin(self) -> f64 {
        self.0.sin()
    }

    pub fn cos(self) -> f64 {
        self.0.cos()
    }

    pub fn tan(self) -> f64 {
        self.0.tan()
    }

    /// `cos(theta)` projection of a beam onto a surface normal, exactly zero
    /// at grazing incidence.
    pub fn projection(self) -> f64 {
        if (self.0.abs() - FRAC_PI_2).abs() <= RIGHT_ANGLE_SLACK {
            0.0
        } else {
            self.0.cos()
        }
    }

    /// Validates an incidence angle, `0 <= theta <= pi/2`.
    pub fn incidence(self) -> Result<Self> {
        let rad = self.0;
        if (FRAC_PI_2..=FRAC_PI_2 + RIGHT_ANGLE_SLACK).contains(&rad) {
            return Ok(Angle::RIGHT);
        }
        check_range(
            "incidence_deg",
            rad.to_degrees(),
            (0.0..=FRAC_PI_2).contains(&rad),
            "0 deg <= incidence <= 90 deg",
        )?;
        Ok(self)
    }
}

/// Slab geometry of a single-slit RIS receiver.
///
/// * `slit_um` - slit width `a` in micrometres (also the grating pitch)
/// * `depth_mm` - RIS physical depth `y`, slit to photodetector, in millimetres
/// * `pd_length_mm` - photodetector length `x` in millimetres
/// * `n_air`, `n_ris` - refractive indices of the incidence medium and the slab
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringGeometry {
    slit_um: f64,
    depth_mm: f64,
    pd_length_mm: f64,
    n_air: f64,
    n_ris: f64,
}

impl SteeringGeometry {
    /// Geometry with `n_air = 1.0`.
    pub fn new(slit_um: f64, depth_mm: f64, pd_length_mm: f64, n_ris: f64) -> Result<Self> {
        Ok(SteeringGeometry {
            slit_um: check_slit(slit_um)?,
            depth_mm: check_depth(depth_mm)?,
            pd_length_mm: check_pd_length(pd_length_mm)?,
            n_air: 1.0,
            n_ris: check_n_ris(n_ris)?,
        })
    }

    pub fn with_n_air(mut self, n_air: f64) -> Result<Self> {
        self.n_air = check_range(
            "n_air",
            n_air,
            (1.0..=N_AIR_MAX).contains(&n_air),
            "1.0 <= n_air <= 1.001",
        )?;
        Ok(self)
    }

    pub fn with_slit_um(mut self, slit_um: f64) -> Result<Self> {
        self.slit_um = check_slit(slit_um)?;
        Ok(self)
    }

    pub fn with_depth_mm(mut self, depth_mm: f64) -> Result<Self> {
        self.depth_mm = check_depth(depth_mm)?;
        Ok(self)
    }

    pub fn with_pd_length_mm(mut self, pd_length_mm: f64) -> Result<Self> {
        self.pd_length_mm = check_pd_length(pd_length_mm)?;
        Ok(self)
    }

    pub fn with_n_ris(mut self, n_ris: f64) -> Result<Self> {
        self.n_ris = check_n_ris(n_ris)?;
        Ok(self)
    }

    pub fn slit_um(&self) -> f64 {
        self.slit_um
    }

    pub fn slit_mm(&self) -> f64 {
        self.slit_um * 1e-3
    }

    pub fn depth_mm(&self) -> f64 {
        self.depth_mm
    }

    pub fn pd_length_mm(&self) -> f64 {
        self.pd_length_mm
    }

    pub fn n_air(&self) -> f64 {
        self.n_air
    }

    pub fn n_ris(&self) -> f64 {
        self.n_ris
    }
}

fn check_slit(v: f64) -> Result<f64> {
    check_range("slit_um", v, v > 0.0, "slit > 0")
}

fn check_depth(v: f64) -> Result<f64> {
    check_range("depth_mm", v, v > 0.0, "depth > 0")
}

fn check_pd_length(v: f64) -> Result<f64> {
    check_range("pd_length_mm", v, v > 0.0, "pd_length > 0")
}

pub(crate) fn check_n_ris(v: f64) -> Result<f64> {
    check_range("n_ris", v, v > 1.0 && v <= N_RIS_MAX, "1.0 < n_ris <= 2.5")
}

/// Monochromatic plane wave arriving at the slit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    wavelength: Wavelength,
    incidence: Angle,
    power_w: f64,
    order: u32,
}

impl IncidentWave {
    pub fn new(wavelength: Wavelength, incidence: Angle, power_w: f64, order: u32) -> Result<Self> {
        Ok(IncidentWave {
            wavelength,
            incidence: incidence.incidence()?,
            power_w: check_range("power_w", power_w, power_w >= 0.0, "power >= 0")?,
            order: check_order(order)?,
        })
    }

    /// First-order wave carrying 1 W.
    pub fn first_order(wavelength: Wavelength, incidence: Angle) -> Result<Self> {
        Self::new(wavelength, incidence, 1.0, 1)
    }

    pub fn with_wavelength(mut self, wavelength: Wavelength) -> Self {
        self.wavelength = wavelength;
        self
    }

    pub fn with_incidence(mut self, incidence: Angle) -> Result<Self> {
        self.incidence = incidence.incidence()?;
        Ok(self)
    }

    pub fn with_order(mut self, order: u32) -> Result<Self> {
        self.order = check_order(order)?;
        Ok(self)
    }

    pub fn with_power_w(mut self, power_w: f64) -> Result<Self> {
        self.power_w = check_range("power_w", power_w, power_w >= 0.0, "power >= 0")?;
        Ok(self)
    }

    pub fn wavelength(&self) -> Wavelength {
        self.wavelength
    }

    pub fn incidence(&self) -> Angle {
        self.incidence
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

fn check_order(order: u32) -> Result<u32> {
    if order <= MAX_ORDER {
        Ok(order)
    } else {
        Err(Error::OutOfRange {
            field: "order",
            value: order as f64,
            expected: "order in {0, 1, 2, 3}",
        })
    }
}

/// `lambda / a`, dimensionless.
pub fn wavelength_over_slit(geom: &SteeringGeometry, wave: &IncidentWave) -> f64 {
    wave.wavelength.nm() * 1e-3 / geom.slit_um
}

// Sine of the refracted direction for an arbitrary order; >= 1 means evanescent.
fn sine_for_order(geom: &SteeringGeometry, wave: &IncidentWave, order: u32) -> f64 {
    transmitted_sine(
        geom.n_air,
        wave.incidence.sin(),
        order as f64 * wavelength_over_slit(geom, wave),
        geom.n_ris,
    )
}

fn transmitted_sine(n_in: f64, sin_in: f64, grating_term: f64, n_out: f64) -> f64 {
    (n_in * sin_in + grating_term) / n_out
}

/// Sine of the steered direction inside the slab for the wave's own order.
pub fn grating_sine(geom: &SteeringGeometry, wave: &IncidentWave) -> f64 {
    sine_for_order(geom, wave, wave.order)
}

/// Direction of the `m`-th order inside the RIS slab, measured from the slab normal.
pub fn refraction_angle(geom: &SteeringGeometry, wave: &IncidentWave) -> Result<Angle> {
    let sine = grating_sine(geom, wave);
    if sine >= 1.0 {
        return Err(Error::EvanescentOrder {
            order: wave.order,
            sine,
        });
    }
    Ok(Angle(sine.asin()))
}

/// Plain Snell refraction between two media.
pub fn snell_angle(n_in: f64, n_out: f64, theta_in: Angle) -> Result<Angle> {
    let index_ok = |n: f64| (1.0..=N_RIS_MAX).contains(&n);
    check_range("n_in", n_in, index_ok(n_in), "1.0 <= n_in <= 2.5")?;
    check_range("n_out", n_out, index_ok(n_out), "1.0 <= n_out <= 2.5")?;
    let theta_in = theta_in.incidence()?;
    let ratio = transmitted_sine(n_in, theta_in.sin(), 0.0, n_out);
    if ratio > 1.0 {
        return Err(Error::TotalInternalReflection { ratio });
    }
    Ok(Angle(ratio.asin()))
}

/// Largest order `m` whose steered direction still propagates in the slab,
/// or `None` when even the zeroth order is evanescent.
pub fn max_propagating_order(geom: &SteeringGeometry, wave: &IncidentWave) -> Option<u32> {
    let propagates = |m: u32| sine_for_order(geom, wave, m) < 1.0;
    if !propagates(0) {
        return None;
    }
    let step = wavelength_over_slit(geom, wave);
    let headroom = geom.n_ris - geom.n_air * wave.incidence.sin();
    // closed-form estimate, then settle on the exact predicate
    let mut m = (headroom / step).floor().clamp(0.0, u32::MAX as f64 - 1.0) as u32;
    while m > 0 && !propagates(m) {
        m -= 1;
    }
    while propagates(m + 1) {
        m += 1;
    }
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(slit_um: f64, n_ris: f64) -> SteeringGeometry {
        SteeringGeometry::new(slit_um, 0.75, 1.0, n_ris).unwrap()
    }

    fn wave(nm: f64, inc_deg: f64, order: u32) -> IncidentWave {
        IncidentWave::new(
            Wavelength::from_nm(nm).unwrap(),
            Angle::from_degrees(inc_deg),
            1.0,
            order,
        )
        .unwrap()
    }

    #[test]
    fn fig2_endpoints_at_300nm() {
        let w = wave(300.0, 90.0, 1);
        let low = refraction_angle(&geom(4.0, 1.4), &w).unwrap().degrees();
        let high = refraction_angle(&geom(4.0, 1.9), &w).unwrap().degrees();
        assert!((low - 50.133).abs() < 0.5, "{low}");
        assert!((high - 34.377).abs() < 0.5, "{high}");
        // asin(1.075 / 1.4), asin(1.075 / 1.9)
        assert!((low - 50.161_850_194_352_81).abs() < 1e-10);
        assert!((high - 34.457_131_746_252_93).abs() < 1e-10);
    }

    #[test]
    fn zeroth_order_normal_incidence_is_undeviated() {
        for n in [1.1, 1.5, 2.5] {
            let a = refraction_angle(&geom(4.0, n), &wave(550.0, 0.0, 0)).unwrap();
            assert_eq!(a.radians(), 0.0);
        }
    }

    #[test]
    fn zeroth_order_oblique_is_snell() {
        let a = refraction_angle(&geom(4.0, 1.5), &wave(550.0, 30.0, 0)).unwrap();
        assert!((a.degrees() - 19.471_220_634_490_69).abs() < 1e-10);
    }

    #[test]
    fn snell_examples() {
        assert_eq!(snell_angle(1.0, 1.5, Angle::ZERO).unwrap().radians(), 0.0);
        let a = snell_angle(1.0, 1.4, Angle::from_degrees(90.0)).unwrap();
        assert!((a.degrees() - 45.584_691_402_807_03).abs() < 1e-10);
        let err = snell_angle(1.5, 1.0, Angle::from_degrees(60.0)).unwrap_err();
        match err {
            Error::TotalInternalReflection { ratio } => assert!((ratio - 1.299_038).abs() < 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evanescent_order_is_reported() {
        // 1 + 2.0 > 1.1
        let g = SteeringGeometry::new(0.4, 0.75, 1.0, 1.1).unwrap();
        let err = refraction_angle(&g, &wave(800.0, 90.0, 1)).unwrap_err();
        assert_eq!(err.kind(), "EvanescentOrder");
    }

    #[test]
    fn max_order_examples() {
        assert_eq!(
            max_propagating_order(&geom(4.0, 1.5), &wave(600.0, 0.0, 0)),
            Some(9)
        );
        assert_eq!(
            max_propagating_order(&geom(4.0, 1.4), &wave(300.0, 90.0, 0)),
            Some(5)
        );
        let g = SteeringGeometry::new(0.4, 0.75, 1.0, 1.1).unwrap();
        assert_eq!(max_propagating_order(&g, &wave(800.0, 90.0, 0)), Some(0));
    }

    #[test]
    fn max_order_none_when_zeroth_order_is_evanescent() {
        let g = SteeringGeometry::new(4.0, 0.75, 1.0, 1.0005)
            .unwrap()
            .with_n_air(1.001)
            .unwrap();
        assert_eq!(max_propagating_order(&g, &wave(550.0, 90.0, 0)), None);
    }

    #[test]
    fn max_order_matches_brute_force() {
        for &(slit, n, nm, inc) in &[
            (4.0, 1.5, 600.0, 0.0),
            (100.0, 1.508, 550.0, 90.0),
            (1.0, 2.5, 200.0, 45.0),
            (0.5, 1.01, 2000.0, 10.0),
        ] {
            let g = geom(slit, n);
            let w = wave(nm, inc, 0);
            let mut m = 0u32;
            while sine_for_order(&g, &w, m + 1) < 1.0 {
                m += 1;
            }
            assert_eq!(max_propagating_order(&g, &w), Some(m));
        }
    }

    #[test]
    fn grazing_projection_is_exactly_zero() {
        assert_eq!(Angle::from_degrees(90.0).projection(), 0.0);
        assert_eq!(Angle::ZERO.projection(), 1.0);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(Wavelength::from_nm(199.0).is_err());
        assert!(Wavelength::from_nm(2001.0).is_err());
        assert!(SteeringGeometry::new(-1.0, 1.0, 1.0, 1.5).is_err());
        assert!(SteeringGeometry::new(4.0, 1.0, 1.0, 1.0).is_err());
        assert!(SteeringGeometry::new(4.0, 1.0, 1.0, 2.6).is_err());
        assert!(geom(4.0, 1.5).with_n_air(1.01).is_err());
        let wl = Wavelength::from_nm(550.0).unwrap();
        assert!(IncidentWave::new(wl, Angle::from_degrees(91.0), 1.0, 1).is_err());
        assert!(IncidentWave::new(wl, Angle::from_degrees(-1.0), 1.0, 1).is_err());
        assert!(IncidentWave::new(wl, Angle::ZERO, -1.0, 1).is_err());
        assert!(IncidentWave::new(wl, Angle::ZERO, 1.0, 4).is_err());
    }
}
