//! Minimal statevector emulation: state preparation, block-encoding of the
//! local estimator matrices, Hadamard-test readout, and shot sampling.

mod block;
mod circuit;
mod element;
mod hadamard;
mod prep;
mod state;
#[cfg(test)]
mod tests;

pub use block::{block_encode, block_encode_dense, pad_to_power_of_two, BlockEncoding, Realization};
pub use circuit::{Circuit, Gate, LoweredGate};
pub use element::{
    estimate_element, real_coefficients, ElementEstimate, Embedding, QuantumEstimateConfig,
    ReadoutMode,
};
pub use hadamard::{hadamard_test_cross, hadamard_test_diag, sample_p0};
pub use prep::prepare_state;
pub use state::StateVector;
