//! Hadamard-test circuits reading expectation values off block-encodings,
//! and shot sampling of their outcome probabilities.

use super::block::BlockEncoding;
use super::circuit::{Circuit, Gate};
use super::state::StateVector;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Probability of measuring the test ancilla as 0 in the diagonal test:
/// p0 = (1 + Re(<psi| M |psi>) / alpha) / 2, with |psi> prepared by
/// `prep_psi` on the system register.
pub fn hadamard_test_diag(be: &BlockEncoding, prep_psi: &Circuit) -> Result<f64> {
    if prep_psi.n_qubits() != be.system_qubits {
        return Err(Error::QubitMismatch(format!(
            "state preparation on {} qubits, encoding expects {}",
            prep_psi.n_qubits(),
            be.system_qubits
        )));
    }
    let total = 1 + be.total_qubits();
    let system_first = 1 + be.ancillas;
    let mut state = StateVector::zero_state(total);
    state.apply_circuit(&prep_psi.shifted(system_first, total))?;
    state.apply_gate(&Gate::H(0));
    be.apply(&mut state, 1, Some((0, true)))?;
    state.apply_gate(&Gate::H(0));
    Ok(state.probability_zero(0))
}

/// Cross test with controlled state preparations:
/// p0 = (1 + Re(<phi| M |psi>) / alpha) / 2.
pub fn hadamard_test_cross(
    be: &BlockEncoding,
    prep_phi: &Circuit,
    prep_psi: &Circuit,
) -> Result<f64> {
    for prep in [prep_phi, prep_psi] {
        if prep.n_qubits() != be.system_qubits {
            return Err(Error::QubitMismatch(format!(
                "state preparation on {} qubits, encoding expects {}",
                prep.n_qubits(),
                be.system_qubits
            )));
        }
    }
    let total = 1 + be.total_qubits();
    let system_first = 1 + be.ancillas;
    let mut state = StateVector::zero_state(total);
    state.apply_gate(&Gate::H(0));
    // |1> branch: prepare |psi> and run the encoding.
    state.apply_gate(&Gate::Controlled {
        control: 0,
        value: true,
        circuit: Box::new(prep_psi.shifted(system_first, total)),
    });
    be.apply(&mut state, 1, Some((0, true)))?;
    // |0> branch: prepare |phi>.
    state.apply_gate(&Gate::Controlled {
        control: 0,
        value: false,
        circuit: Box::new(prep_phi.shifted(system_first, total)),
    });
    state.apply_gate(&Gate::H(0));
    Ok(state.probability_zero(0))
}

/// Frequency estimate of p0 from a binomial draw with `shots` samples.
pub fn sample_p0(p0: f64, shots: u64, rng: &mut impl Rng) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if !(0.0..=1.0 + 1e-12).contains(&p0) || p0.is_nan() {
        return Err(Error::Quantum(format!("probability {p0} outside [0, 1]")));
    }
    let p = p0.clamp(0.0, 1.0);
    let binomial = Binomial::new(shots, p)
        .map_err(|e| Error::Quantum(format!("binomial sampling: {e}")))?;
    Ok(binomial.sample(rng) as f64 / shots as f64)
}
