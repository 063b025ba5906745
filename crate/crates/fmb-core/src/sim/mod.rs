//! Stabilizer simulation and circuit execution.
//!
//! - [`pauli`]: n-qubit Pauli operators with sign tracking;
//! - [`tableau`]: the stabilizer tableau simulator and Pauli conjugation
//!   through circuits;
//! - [`noise`]: the stochastic Pauli + readout-confusion noise model;
//! - [`frame`]: bit-packed Pauli-frame sampling of noisy shot outcomes;
//! - [`backend`]: the executor abstraction over noiseless / noisy / replayed
//!   circuit execution.
//!
//! Widths up to 64 qubits are supported; outcomes are packed into `u64`
//! bit masks with qubit position 0 in the least significant bit.

pub mod backend;
pub mod frame;
pub mod noise;
pub mod pauli;
pub mod tableau;

pub use backend::{Backend, Counts, JobKey, NoiselessBackend, NoisyBackend};
pub use frame::simulate_noisy_shots;
pub use noise::NoiseModel;
pub use pauli::PauliOperator;
pub use tableau::{conjugate_pauli, simulate_ideal_output, Tableau};

use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("qubit index {0} out of range for width {1}")]
    QubitOutOfRange(usize, usize),
    #[error("circuit width {0} exceeds the 64-qubit simulator limit")]
    WidthTooLarge(usize),
    #[error("operator width {0} does not match circuit width {1}")]
    WidthMismatch(usize, usize),
    #[error("final state is not a computational basis state")]
    NotDefiniteOutcome,
    #[error("noise model is missing a rate: {0}")]
    IncompleteNoiseModel(String),
    #[error("need at least one shot")]
    NoShots,
    #[error("counts unavailable for replay: {0}")]
    MissingCounts(String),
}
