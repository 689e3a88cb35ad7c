//! Analytic model and random-walk simulator for molecular signal
//! reconstruction by a perfectly absorbing spherical receiver.
//!
//! The molecules of a signal live in the shell between the receiver
//! (radius `a`) and the reception volume (radius `b`). During a sampling
//! period `T` the receiver counts the molecules that hit its surface, and the
//! counted concentration is compared with the shell concentration. The
//! crate provides:
//!
//! * [`kernels`]: complementary error function, first-hitting probability,
//!   capture fraction and the 1D point-source concentration.
//! * [`dspp`]: moments of the absorbed count as a doubly stochastic Poisson
//!   process driven by a Gaussian shell count.
//! * [`distortion`]: the mean-square concentration error and its derivative.
//! * [`optimize`]: bracketed minimization over the sampling period, the
//!   receiver radius and the sampling frequency, plus parameter sweeps.
//! * [`montecarlo`]: a seeded 3D random walk with an absorbing sphere, DSPP
//!   sampling and the 1D concentration trace.
//!
//! All quantities are SI internally: meters, seconds, molecules per cubic
//! meter (per meter for the 1D trace).

pub mod distortion;
pub mod dspp;
mod error;
pub mod exec;
pub mod kernels;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use distortion::{DistortionInputs, DistortionValue};
pub use dspp::{SignalModel, StationaryMoments};
pub use error::{Error, Result};
pub use exec::Exec;
pub use kernels::{ChannelParams, ReceiverGeometry};
pub use montecarlo::{McEstimate, TrialRecord, WalkParams};
pub use optimize::{OptimumResult, SweepSpec};
pub use rng::RngSeed;

/// Micrometers to meters.
pub const UM: f64 = 1e-6;
