//! Markov chains, observation kernels, controls and scenarios.

mod chain;
mod control;
mod kernel;
mod scenario;
mod sensor;

pub use chain::{state_marginal, state_marginals, validate_chain, MarkovChain, STOCHASTIC_TOL};
pub use control::{control_count, enumerate_controls, Allocation, Control};
pub use kernel::{GaussianKernel, KernelSet};
pub use scenario::{ExplicitControl, ObservationSource, Scenario};
pub use sensor::{build_observation_model, energy, sensing_cost, SensorSpec};

pub(crate) use control::binomial;
