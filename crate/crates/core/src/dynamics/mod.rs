//! Ground-truth generators: the ODE families, an RK4 integrator, globally
//! coupled networks, and the record/normalize/split data pipeline.
//!
//! Sign conventions follow the standard forms of each system: the Lorenz
//! `z` equation is `ż = xy - cz` and the Chen `x` equation is
//! `ẋ = a(y - x)`.

mod dataset;
mod integrate;
mod network;
mod system;
mod trajectory;

pub use dataset::{make_dataset, random_initial, record, DatasetSplit, SamplingProtocol};
pub use integrate::{integrate, rk4_step, Rk4, DIVERGENCE_BOUND};
pub use network::CoupledNetworkSpec;
pub use system::{Family, SystemSpec, VectorField, GRAVITY};
pub use trajectory::{Normalization, Scaler, Trajectory};

pub(crate) use integrate::advance;
