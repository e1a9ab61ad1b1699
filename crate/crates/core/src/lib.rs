//! Numerical model of a reconfigurable-surface receiver for visible light
//! links: grating-refraction steering, single-slit diffraction onto the
//! photodetector, transmittance, actuator tuning with inverse solvers, and a
//! rotation bench comparing tunable surfaces against fixed lenses.

pub mod bench;
pub mod diffraction;
pub mod error;
pub mod optics;
pub mod quadrature;
pub mod radiometry;
pub mod run;
pub mod scenario;
pub mod table;
pub mod tuning;

pub use error::{Error, ErrorCategory, Result, TuningState};
pub use optics::{Angle, IncidentWave, SteeringGeometry, Wavelength};
