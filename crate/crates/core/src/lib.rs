//! Simulation of spectrally engineered slow-light cavities.
//!
//! The pipeline runs in four stages, each in its own module:
//!
//! 1. [`profile`]: a piecewise-linear intensity absorption coefficient
//!    `alpha(nu)` built from an inhomogeneous background line with burned
//!    transmission windows.
//! 2. [`kk`]: the real index deviation and group index obtained from
//!    `alpha(nu)` through the narrowband Kramers-Kronig (Hilbert) relation,
//!    either in closed form or by an FFT convolution on samples.
//! 3. [`cavity`]: the complex field transmission of a lossy dispersive
//!    Fabry-Perot etalon, and the resonances extracted from it.
//! 4. [`pulse`]: time-domain envelopes pushed through the cavity transfer
//!    function, with ring-down analysis.
//!
//! [`metrics`] collects the closed-form slow-light figures of merit and the
//! quasi-static window-width sweep that ties the stages together.

pub mod cavity;
pub mod error;
pub mod grid;
pub mod kk;
pub mod metrics;
pub mod profile;
pub mod pulse;

pub use cavity::{CavityConfig, FieldTransfer, ModeRow, ModeTable};
pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use kk::DispersionProfile;
pub use metrics::SlowLightReport;
pub use profile::{AbsorptionProfile, BackgroundShape, HoleSpec};
pub use pulse::{PulseEnvelope, RingDown};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum wavelength of the Pr:YSO 3H4-1D2 transition (m).
pub const PR_YSO_WAVELENGTH: f64 = 605.976e-9;

/// Optical carrier frequency matching [`PR_YSO_WAVELENGTH`] (Hz).
pub const DEFAULT_CARRIER: f64 = SPEED_OF_LIGHT / PR_YSO_WAVELENGTH;

/// Real refractive index of the Y2SiO5 host.
pub const DEFAULT_BACKGROUND_INDEX: f64 = 1.8;
