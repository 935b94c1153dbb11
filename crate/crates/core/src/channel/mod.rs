//! Pauli channels on Bell-diagonal two-qubit states.
//!
//! Every channel here is a Pauli channel, and Bell-diagonal states are closed
//! under Pauli channels and entanglement swapping, so a state is just its
//! four Bell weights. Error labels `I, Z, X, Y` map to `Φ+, Φ−, Ψ+, Ψ−`
//! and compose by XOR of the index (the Klein four-group).

mod bell;
mod pauli;
mod swap;

pub use bell::{BellDiagonalState, BellIndex};
pub use pauli::{apply, compose, Channel};
pub use swap::{fidelity, final_state, noisy_bsm, swap_chain};
