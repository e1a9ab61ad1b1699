//! Actuator models for the two tunable RIS realizations and the inverse
//! design solvers built on top of them.
//!
//! Both voltage-to-state maps are linear between their end stops and clamped
//! outside them:
//!
//! * meta-lens on a dielectric-elastomer actuator: lateral stretch
//!   `s(v) = 1 + v / v_max * (s_max - 1)`, slit `a -> s a`, depth `y -> y / s^2`
//!   (the elastomer is treated as incompressible, so `a^2 y` is conserved);
//! * liquid-crystal cell: `n(v) = n_base + (v - v_on) / (v_sat - v_on) * delta_n`.

use log::warn;

use crate::diffraction::{center_offset_mm, central_lobe_width_mm};
use crate::error::{check_range, Error, Result};
use crate::optics::{
    check_n_ris, refraction_angle, wavelength_over_slit, Angle, IncidentWave, SteeringGeometry,
    N_RIS_MAX,
};

/// Bisection never takes more steps than this.
pub const MAX_BISECTION_STEPS: usize = 60;
/// Relative tolerance on the forward metric for voltage solves.
pub const VOLTAGE_REL_TOL: f64 = 1e-6;
// Absolute floor for targets at zero (e.g. landing on the slit axis).
const VOLTAGE_ABS_TOL: f64 = 1e-12;

/// Voltage plus the physical state it produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorState {
    pub requested_v: f64,
    /// Voltage after clamping to the active interval.
    pub applied_v: f64,
    pub clamped: bool,
    pub physical: PhysicalState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhysicalState {
    /// Lateral stretch ratio of a meta-lens.
    Stretch(f64),
    /// Refractive index of a liquid-crystal cell.
    Index(f64),
}

/// Meta-lens with artificial muscles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaLensActuator {
    v_max: f64,
    stretch_max: f64,
    base: SteeringGeometry,
}

impl MetaLensActuator {
    pub const DEFAULT_V_MAX: f64 = 1000.0;

    pub fn new(v_max: f64, stretch_max: f64, base: SteeringGeometry) -> Result<Self> {
        check_range("v_max_v", v_max, v_max > 0.0, "v_max > 0")?;
        check_range(
            "stretch_max",
            stretch_max,
            stretch_max > 1.0,
            "stretch_max > 1",
        )?;
        Ok(MetaLensActuator {
            v_max,
            stretch_max,
            base,
        })
    }

    /// 0-1 kV drive. The stretch end stop makes the small-angle spot width
    /// (`~ y / a`, i.e. `~ s^-3`) sweep the 21.4-37.7 um band.
    pub fn she2018(base: SteeringGeometry) -> Self {
        MetaLensActuator {
            v_max: Self::DEFAULT_V_MAX,
            stretch_max: (37.7f64 / 21.4).cbrt(),
            base,
        }
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn stretch_max(&self) -> f64 {
        self.stretch_max
    }

    pub fn base_geometry(&self) -> &SteeringGeometry {
        &self.base
    }

    pub fn voltage_range(&self) -> (f64, f64) {
        (0.0, self.v_max)
    }

    pub fn state(&self, v: f64) -> ActuatorState {
        let applied = v.clamp(0.0, self.v_max);
        let clamped = applied != v;
        if clamped {
            warn!("meta-lens drive {v} V clamped to {applied} V");
        }
        ActuatorState {
            requested_v: v,
            applied_v: applied,
            clamped,
            physical: PhysicalState::Stretch(1.0 + applied / self.v_max * (self.stretch_max - 1.0)),
        }
    }

    pub fn stretch(&self, v: f64) -> f64 {
        match self.state(v).physical {
            PhysicalState::Stretch(s) => s,
            PhysicalState::Index(_) => unreachable!(),
        }
    }

    pub fn apply(&self, v: f64) -> SteeringGeometry {
        let s = self.stretch(v);
        if s == 1.0 {
            return self.base;
        }
        self.base
            .with_slit_um(self.base.slit_um() * s)
            .and_then(|g| g.with_depth_mm(self.base.depth_mm() / (s * s)))
            .expect("stretching keeps lengths positive")
    }
}

/// Liquid-crystal cell with embedded nano-disks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiquidCrystalActuator {
    v_on: f64,
    v_sat: f64,
    n_base: f64,
    delta_n: f64,
}

impl LiquidCrystalActuator {
    pub const DEFAULT_V_ON: f64 = 3.0;
    pub const DEFAULT_V_SAT: f64 = 5.0;
    pub const DEFAULT_DELTA_N: f64 = 0.3;

    pub fn new(v_on: f64, v_sat: f64, n_base: f64, delta_n: f64) -> Result<Self> {
        check_range("v_on_v", v_on, v_on > 0.0, "v_on > 0")?;
        check_range("v_sat_v", v_sat, v_sat > v_on, "v_sat > v_on")?;
        check_n_ris(n_base)?;
        check_range(
            "delta_n",
            delta_n,
            (0.2..=0.4).contains(&delta_n),
            "0.2 <= delta_n <= 0.4",
        )?;
        check_range(
            "n_base + delta_n",
            n_base + delta_n,
            n_base + delta_n <= N_RIS_MAX,
            "n_base + delta_n <= 2.5",
        )?;
        Ok(LiquidCrystalActuator {
            v_on,
            v_sat,
            n_base,
            delta_n,
        })
    }

    /// 3-5 V drive with an index swing of 0.3.
    pub fn sun2019(n_base: f64) -> Result<Self> {
        Self::new(
            Self::DEFAULT_V_ON,
            Self::DEFAULT_V_SAT,
            n_base,
            Self::DEFAULT_DELTA_N,
        )
    }

    pub fn v_on(&self) -> f64 {
        self.v_on
    }

    pub fn v_sat(&self) -> f64 {
        self.v_sat
    }

    pub fn n_base(&self) -> f64 {
        self.n_base
    }

    pub fn delta_n(&self) -> f64 {
        self.delta_n
    }

    pub fn voltage_range(&self) -> (f64, f64) {
        (self.v_on, self.v_sat)
    }

    pub fn state(&self, v: f64) -> ActuatorState {
        let fraction = (v - self.v_on) / (self.v_sat - self.v_on);
        let clamped = !(0.0..=1.0).contains(&fraction);
        if clamped {
            warn!(
                "liquid-crystal drive {v} V outside [{}, {}] V, index clamped",
                self.v_on, self.v_sat
            );
        }
        let fraction = fraction.clamp(0.0, 1.0);
        ActuatorState {
            requested_v: v,
            applied_v: self.v_on + fraction * (self.v_sat - self.v_on),
            clamped,
            physical: PhysicalState::Index(self.n_base + fraction * self.delta_n),
        }
    }

    pub fn index(&self, v: f64) -> f64 {
        match self.state(v).physical {
            PhysicalState::Index(n) => n,
            PhysicalState::Stretch(_) => unreachable!(),
        }
    }

    pub fn apply(&self, v: f64, base: &SteeringGeometry) -> SteeringGeometry {
        base.with_n_ris(self.index(v))
            .expect("liquid-crystal index stays within the material range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Actuator {
    MetaLens(MetaLensActuator),
    LiquidCrystal(LiquidCrystalActuator),
}

impl Actuator {
    pub fn voltage_range(&self) -> (f64, f64) {
        match self {
            Actuator::MetaLens(a) => a.voltage_range(),
            Actuator::LiquidCrystal(a) => a.voltage_range(),
        }
    }

    /// Geometry at drive `v`. A meta-lens stretches its own base geometry; a
    /// liquid-crystal cell retunes the index of `fixed`.
    pub fn drive(&self, v: f64, fixed: &SteeringGeometry) -> SteeringGeometry {
        match self {
            Actuator::MetaLens(a) => a.apply(v),
            Actuator::LiquidCrystal(a) => a.apply(v, fixed),
        }
    }

    pub fn state(&self, v: f64) -> ActuatorState {
        match self {
            Actuator::MetaLens(a) => a.state(v),
            Actuator::LiquidCrystal(a) => a.state(v),
        }
    }
}

/// Quantity an inverse design aims at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetMetric {
    RefractionAngle(Angle),
    /// Central-lobe full width on the PD, millimetres.
    SpotWidth(f64),
    /// Pattern-centre offset on the PD plane, millimetres from the slit axis.
    PdLanding(f64),
}

impl TargetMetric {
    /// Target in solver units: radians for angles, millimetres otherwise.
    pub fn value(&self) -> f64 {
        match *self {
            TargetMetric::RefractionAngle(a) => a.radians(),
            TargetMetric::SpotWidth(mm) | TargetMetric::PdLanding(mm) => mm,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TargetMetric::RefractionAngle(_) => "refraction_angle",
            TargetMetric::SpotWidth(_) => "spot_width",
            TargetMetric::PdLanding(_) => "pd_landing",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            TargetMetric::RefractionAngle(_) => "deg",
            _ => "mm",
        }
    }

    /// Converts a solver-unit value to the unit reported by [`TargetMetric::unit`].
    pub fn to_display(&self, value: f64) -> f64 {
        match self {
            TargetMetric::RefractionAngle(_) => value.to_degrees(),
            _ => value,
        }
    }

    /// Forward pipeline: the metric produced by `geom` under `wave`.
    pub fn evaluate(&self, geom: &SteeringGeometry, wave: &IncidentWave) -> Result<f64> {
        match self {
            TargetMetric::RefractionAngle(_) => Ok(refraction_angle(geom, wave)?.radians()),
            TargetMetric::SpotWidth(_) => central_lobe_width_mm(geom, wave),
            TargetMetric::PdLanding(_) => center_offset_mm(geom, wave),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TargetMetric::RefractionAngle(a) => {
                let deg = a.degrees();
                check_range(
                    "target_deg",
                    deg,
                    deg > 0.0 && deg < 90.0,
                    "0 < angle < 90 deg",
                )?;
            }
            TargetMetric::SpotWidth(mm) => {
                check_range("target_mm", mm, mm > 0.0, "spot width > 0")?;
            }
            TargetMetric::PdLanding(mm) => {
                check_range("target_mm", mm, mm >= 0.0, "landing offset >= 0")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeVariable {
    NRis,
    Depth,
    Voltage,
}

impl FreeVariable {
    pub fn name(&self) -> &'static str {
        match self {
            FreeVariable::NRis => "n_ris",
            FreeVariable::Depth => "depth",
            FreeVariable::Voltage => "voltage",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            FreeVariable::NRis => "",
            FreeVariable::Depth => "mm",
            FreeVariable::Voltage => "V",
        }
    }
}

/// One inverse-design problem: hit `metric` by moving `free`, all other
/// geometry fields fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTarget {
    pub metric: TargetMetric,
    pub wave: IncidentWave,
    pub geometry: SteeringGeometry,
    pub free: FreeVariable,
}

impl DesignTarget {
    pub fn new(
        metric: TargetMetric,
        wave: IncidentWave,
        geometry: SteeringGeometry,
        free: FreeVariable,
    ) -> Result<Self> {
        metric.validate()?;
        Ok(DesignTarget {
            metric,
            wave,
            geometry,
            free,
        })
    }
}

/// Index that steers `wave` to `theta_target`:
/// `n = (n_air sin(theta_a) + m lambda / a) / sin(theta_target)`.
pub fn solve_index_for_angle(
    wave: &IncidentWave,
    slit_um: f64,
    n_air: f64,
    theta_target: Angle,
) -> Result<f64> {
    let deg = theta_target.degrees();
    check_range(
        "target_deg",
        deg,
        deg > 0.0 && deg < 90.0,
        "0 < angle < 90 deg",
    )?;
    check_range("slit_um", slit_um, slit_um > 0.0, "slit > 0")?;
    let grating = wave.order() as f64 * wave.wavelength().nm() * 1e-3 / slit_um;
    let index = (n_air * wave.incidence().sin() + grating) / theta_target.sin();
    if index > 1.0 && index <= N_RIS_MAX {
        Ok(index)
    } else {
        Err(Error::OutOfMaterialRange { index })
    }
}

/// Depth whose central lobe spans `spot_target_mm`:
/// `y = w / (2 tan(asin(lambda_m / a)))`.
pub fn solve_depth_for_spot(
    slit_um: f64,
    n_ris: f64,
    wave: &IncidentWave,
    spot_target_mm: f64,
) -> Result<f64> {
    check_range(
        "target_mm",
        spot_target_mm,
        spot_target_mm > 0.0,
        "spot width > 0",
    )?;
    check_range("slit_um", slit_um, slit_um > 0.0, "slit > 0")?;
    let ratio = wave.wavelength().nm() / n_ris * 1e-3 / slit_um;
    if ratio >= 1.0 {
        return Err(Error::NullBeyondHorizon { ratio });
    }
    Ok(spot_target_mm / (2.0 * ratio.asin().tan()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSolution {
    pub voltage: f64,
    /// Metric reached at `voltage`, in solver units.
    pub achieved: f64,
    /// Bisection steps taken (0 when an end stop already meets the target).
    pub iterations: usize,
    /// Target was out of reach and the nearer end stop was returned.
    pub saturated: bool,
}

/// Bisection on the drive voltage against the forward pipeline
/// actuator -> geometry -> metric.
pub fn solve_voltage(target: &DesignTarget, actuator: &Actuator) -> Result<VoltageSolution> {
    let metric = |v: f64| {
        target
            .metric
            .evaluate(&actuator.drive(v, &target.geometry), &target.wave)
    };
    bisect(metric, actuator.voltage_range(), target.metric.value()).map_err(|e| match e {
        Error::Infeasible {
            target: t,
            low,
            high,
        } => Error::Infeasible {
            target: target.metric.to_display(t),
            low: target.metric.to_display(low),
            high: target.metric.to_display(high),
        },
        other => other,
    })
}

/// Bisection of a metric that is monotone over `bracket`.
fn bisect<F>(metric: F, bracket: (f64, f64), goal: f64) -> Result<VoltageSolution>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = bracket;
    let tol = (VOLTAGE_REL_TOL * goal.abs()).max(VOLTAGE_ABS_TOL);
    let solution = |voltage, achieved, iterations| VoltageSolution {
        voltage,
        achieved,
        iterations,
        saturated: false,
    };

    let f_lo = metric(lo)?;
    if (f_lo - goal).abs() <= tol {
        return Ok(solution(lo, f_lo, 0));
    }
    let f_hi = metric(hi)?;
    if (f_hi - goal).abs() <= tol {
        return Ok(solution(hi, f_hi, 0));
    }
    let (low, high) = if f_lo <= f_hi {
        (f_lo, f_hi)
    } else {
        (f_hi, f_lo)
    };
    if goal < low || goal > high {
        return Err(Error::Infeasible {
            target: goal,
            low,
            high,
        });
    }

    let increasing = f_hi > f_lo;
    let (mut a, mut b) = (lo, hi);
    for step in 1..=MAX_BISECTION_STEPS {
        let mid = 0.5 * (a + b);
        let f = metric(mid)?;
        if f < low || f > high {
            return Err(Error::NonMonotonic { lo, hi });
        }
        if (f - goal).abs() <= tol {
            return Ok(solution(mid, f, step));
        }
        if (f < goal) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::NonConvergent {
        iterations: MAX_BISECTION_STEPS,
    })
}

/// Like [`solve_voltage`], but an out-of-reach target saturates the actuator
/// at whichever end stop comes closer.
pub fn solve_voltage_nearest(
    target: &DesignTarget,
    actuator: &Actuator,
) -> Result<VoltageSolution> {
    match solve_voltage(target, actuator) {
        Err(Error::Infeasible { .. }) => {
            let goal = target.metric.value();
            let (lo, hi) = actuator.voltage_range();
            let at = |v: f64| {
                target
                    .metric
                    .evaluate(&actuator.drive(v, &target.geometry), &target.wave)
            };
            let (f_lo, f_hi) = (at(lo)?, at(hi)?);
            let (voltage, achieved) = if (f_lo - goal).abs() <= (f_hi - goal).abs() {
                (lo, f_lo)
            } else {
                (hi, f_hi)
            };
            Ok(VoltageSolution {
                voltage,
                achieved,
                iterations: 0,
                saturated: true,
            })
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSolution {
    pub free: FreeVariable,
    /// Solved value of the free variable (index, millimetres or volts).
    pub value: f64,
    /// Geometry realizing the design.
    pub geometry: SteeringGeometry,
    /// Forward metric of `geometry`, in the metric's display unit.
    pub achieved: f64,
    pub iterations: usize,
}

/// Dispatches a design target to the matching closed form or to the voltage
/// bisection.
pub fn solve(target: &DesignTarget, actuator: Option<&Actuator>) -> Result<DesignSolution> {
    let g = &target.geometry;
    let wave = &target.wave;
    let (value, geometry, iterations) = match (target.metric, target.free) {
        (TargetMetric::RefractionAngle(theta), FreeVariable::NRis) => {
            let n = solve_index_for_angle(wave, g.slit_um(), g.n_air(), theta)?;
            (n, g.with_n_ris(n)?, 0)
        }
        (TargetMetric::PdLanding(mm), FreeVariable::NRis) => {
            let theta = Angle::from_radians((mm / g.depth_mm()).atan());
            let n = solve_index_for_angle(wave, g.slit_um(), g.n_air(), theta)?;
            (n, g.with_n_ris(n)?, 0)
        }
        (TargetMetric::SpotWidth(mm), FreeVariable::NRis) => {
            // asin(lambda / (n a)) = atan(w / 2y)
            let sine = (mm / (2.0 * g.depth_mm())).atan().sin();
            let n = wavelength_over_slit(g, wave) / sine;
            if !(n > 1.0 && n <= N_RIS_MAX) {
                return Err(Error::OutOfMaterialRange { index: n });
            }
            (n, g.with_n_ris(n)?, 0)
        }
        (TargetMetric::SpotWidth(mm), FreeVariable::Depth) => {
            let y = solve_depth_for_spot(g.slit_um(), g.n_ris(), wave, mm)?;
            (y, g.with_depth_mm(y)?, 0)
        }
        (TargetMetric::PdLanding(mm), FreeVariable::Depth) => {
            let tan = refraction_angle(g, wave)?.tan();
            if tan <= 0.0 || mm <= 0.0 {
                return Err(Error::UnsupportedDesign(
                    "landing offset needs a steered (non-normal) order and a positive target"
                        .into(),
                ));
            }
            let y = mm / tan;
            (y, g.with_depth_mm(y)?, 0)
        }
        (TargetMetric::RefractionAngle(_), FreeVariable::Depth) => {
            return Err(Error::UnsupportedDesign(
                "the refraction angle does not depend on the slab depth".into(),
            ))
        }
        (_, FreeVariable::Voltage) => {
            let actuator = actuator.ok_or_else(|| {
                Error::UnsupportedDesign("voltage design needs an actuator".into())
            })?;
            let sol = solve_voltage(target, actuator)?;
            (sol.voltage, actuator.drive(sol.voltage, g), sol.iterations)
        }
    };
    let achieved = target
        .metric
        .to_display(target.metric.evaluate(&geometry, wave)?);
    Ok(DesignSolution {
        free: target.free,
        value,
        geometry,
        achieved,
        iterations,
    })
}
