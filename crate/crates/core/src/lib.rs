//! Real-time monitoring of a resonantly driven two-level system through
//! sequences of unsharp two-outcome measurements.
//!
//! - [`povm`]: states, the diagonal positive measurement class, single updates
//! - [`nseries`]: closed-form statistics of N-series and the regime time scales
//! - [`dynamics`]: resonant Rabi evolution in the interaction picture
//! - [`meter`]: system ⊗ meter realization of the same measurement
//! - [`trajectory`]: Monte Carlo simulation of a single monitored system
//! - [`analysis`]: spectra, Wiener filtering, truncation, regime classification

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod meter;
pub mod nseries;
pub mod povm;
pub mod trajectory;

pub use num_complex;

pub use analysis::{Regime, RegimeThresholds, SpectrumRecord};
pub use dynamics::HamiltonianSpec;
pub use error::{Error, Result};
pub use nseries::{NBound, NSeriesOutcome, RegimeParams};
pub use povm::{Operation, Outcome, PovmParams, StateVector};
pub use trajectory::{Engine, TrajectoryConfig, TrajectoryRecord};
