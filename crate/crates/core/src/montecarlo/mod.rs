//! Particle-level simulation of the sampling receiver.
//!
//! Trials, draw chunks and trace chunks each own a `(seed, stream)` pair, so
//! every result here is identical under sequential and parallel execution.

mod estimate;
mod sampling;
mod trace;
mod walk;

pub use estimate::{
    estimate_distortion, estimate_distortion_curve, simulate_trials, McEstimate, SignalMode,
    SimulationSetup, TrialHistory,
};
pub use sampling::{
    distribution_pair, distribution_pair_with_fraction, sample_reconstruction, sample_signal, Binning,
    DistributionPair, Histogram, SampleSummary, DEFAULT_DRAWS,
};
pub use trace::{concentration_trace, window_means, TracePoint, TraceSpec};
pub use walk::{random_start, run_trial, walk_molecule, StepLaw, TrialRecord, WalkParams};
