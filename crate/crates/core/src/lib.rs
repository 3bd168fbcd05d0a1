//! Reservoir-computing laboratory for transfer learning between chaotic
//! systems.
//!
//! An echo state network is trained on time series from one dynamical
//! system, then driven through a subset of its input channels by a
//! *different* system. When the driven reservoir synchronizes with the
//! driver, its remaining outputs infer the driver's unmeasured variables.
//!
//! - [`dynamics`]: ODE families, RK4, coupled networks, datasets.
//! - [`reservoir`]: weight construction and the state update.
//! - [`training`]: ridge readout and grid search.
//! - [`inference`]: closed-loop, driven, chained, and parallel runs.
//! - [`metrics`]: synchronization errors, horizons, Lyapunov exponents.
//! - [`harness`]: registered experiments, config files, CSV artifacts.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod inference;
pub mod metrics;
pub mod reservoir;
pub mod seeds;
pub mod training;

pub use dynamics::{
    CoupledNetworkSpec, DatasetSplit, Family, SamplingProtocol, SystemSpec, Trajectory,
};
pub use error::{Error, Result};
pub use inference::{ChannelMode, DriveMask};
pub use reservoir::{ReadoutMatrix, Reservoir, ReservoirConfig, ReservoirState, ReservoirWeights};
pub use training::{GridSpec, Objective, TrainedReservoir};
