//! Discrete-time, input-driven stochastic bit reservoirs.
//!
//! A reservoir applies the same ordered list of k-local stochastic gates at
//! every time step. Gate kernels may depend on the scalar drive `u(t)`; the
//! builder rejects circuits that break the locality, depth, stochasticity or
//! drive-slope bounds before anything is simulated.

mod exact;
mod fading;
mod gate;
mod input;
mod sampling;
mod spec;
mod state;

pub use fading::{FadingMemoryEstimate, FadingMemoryProbe};
pub use gate::{DriveFn, Kernel, StochasticGate};
pub use input::{InputMeasure, InputSequence, MeasureKind};
pub use sampling::{EnsembleSidecar, TrajectoryEnsemble};
pub use spec::{build_reservoir, DrivePolicy, InitialState, Reservoir, ReservoirSpec};
pub use state::BitstringDistribution;

/// Default number of probe points used for the drive-slope check.
pub const PROBE_POINTS: usize = 256;
