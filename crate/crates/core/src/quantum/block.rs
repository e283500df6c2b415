//! Block-encoding of real matrices as the top-left block of a unitary.
//!
//! The construction follows the uniformly-controlled-rotation pattern: for
//! an n-qubit matrix with entries prescaled by max|M_ij|, the unitary acts
//! on one rotation ancilla, an n-qubit row register, and the n-qubit
//! system register as
//!
//!   (H on rows) . oracle . (swap rows/columns) . (H on rows),
//!
//! where the oracle rotates the ancilla by 2 arccos(M_ij / max|M|) under
//! the control pattern (i, j). The subnormalization is alpha = 2^n max|M|.
//! The same unitary is also available as a dense matrix assembled from
//! Kronecker products, which gives an independent realization of the same
//! encoding for cross-checks and faster small-case simulation.

use super::circuit::{Circuit, Gate};
use super::state::StateVector;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub enum Realization {
    Circuit(Circuit),
    Dense(DMatrix<Complex64>),
}

#[derive(Debug, Clone)]
pub struct BlockEncoding {
    /// Subnormalization: the top-left block equals M / alpha.
    pub alpha: f64,
    /// Ancilla count m = n + 1.
    pub ancillas: usize,
    /// System qubit count n.
    pub system_qubits: usize,
    pub realization: Realization,
}

impl BlockEncoding {
    pub fn total_qubits(&self) -> usize {
        self.ancillas + self.system_qubits
    }

    /// Applies the encoding unitary to a state whose qubit layout places
    /// the m + n encoding qubits starting at `first`, optionally under a
    /// control qubit below `first`.
    pub fn apply(
        &self,
        state: &mut StateVector,
        first: usize,
        control: Option<(usize, bool)>,
    ) -> Result<()> {
        match &self.realization {
            Realization::Circuit(c) => {
                let shifted = c.shifted(first, state.n_qubits());
                match control {
                    None => state.apply_circuit(&shifted)?,
                    Some((q, value)) => state.apply_gate(&Gate::Controlled {
                        control: q,
                        value,
                        circuit: Box::new(shifted),
                    }),
                }
            }
            Realization::Dense(u) => state.apply_dense(u, first, control),
        }
        Ok(())
    }

    /// alpha * (<0^m| (x) I) U (|0^m> (x) I): must reproduce the encoded
    /// matrix up to roundoff.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.system_qubits;
        let total = self.total_qubits();
        let dim = 1 << n;
        let mut block = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut amps = vec![Complex64::ZERO; 1 << total];
            amps[col] = Complex64::ONE; // ancillas |0^m>, system |col>
            let mut state = StateVector::from_amplitudes(total, amps).unwrap();
            self.apply(&mut state, 0, None).unwrap();
            for row in 0..dim {
                block[(row, col)] = state.amplitudes()[row] * self.alpha;
            }
        }
        block
    }
}

fn scaled_entries(m: &DMatrix<f64>) -> Result<(usize, f64, DMatrix<f64>)> {
    let dim = m.nrows();
    if dim != m.ncols() || dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Quantum(format!(
            "block-encoding needs a square power-of-two matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let max_abs = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max_abs == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let n = dim.trailing_zeros() as usize;
    Ok((n.max(1), max_abs, m / max_abs))
}

/// Gate-level block-encoding of a real matrix (zero-padded to the next
/// power of two by the caller). alpha = 2^n max|M_ij|, m = n + 1 ancillas.
pub fn block_encode(m: &DMatrix<f64>) -> Result<BlockEncoding> {
    let (n, max_abs, scaled) = scaled_entries(m)?;
    let total = 2 * n + 1;
    // Layout: rotation ancilla 0, row register 1..=n, system n+1..=2n.
    let mut circuit = Circuit::new(total);
    for q in 1..=n {
        circuit.push(Gate::H(q));
    }
    for i in 0..(1 << n) {
        for j in 0..(1 << n) {
            let theta = 2.0 * scaled[(i, j)].clamp(-1.0, 1.0).acos();
            let mut controls = Vec::with_capacity(2 * n);
            for q in 0..n {
                controls.push((1 + q, (i >> (n - 1 - q)) & 1 == 1));
            }
            for q in 0..n {
                controls.push((1 + n + q, (j >> (n - 1 - q)) & 1 == 1));
            }
            circuit.push(Gate::McRy {
                controls,
                target: 0,
                theta,
            });
        }
    }
    for q in 0..n {
        circuit.push(Gate::Swap(1 + q, 1 + n + q));
    }
    for q in 1..=n {
        circuit.push(Gate::H(q));
    }
    Ok(BlockEncoding {
        alpha: (1 << n) as f64 * max_abs,
        ancillas: n + 1,
        system_qubits: n,
        realization: Realization::Circuit(circuit),
    })
}

/// The same encoding assembled as a dense unitary from Kronecker products;
/// an independent realization used as cross-check and small-case fast path.
pub fn block_encode_dense(m: &DMatrix<f64>) -> Result<BlockEncoding> {
    let (n, max_abs, scaled) = scaled_entries(m)?;
    let dim = 1 << n;
    let big = 1 << (2 * n + 1);

    // Oracle: block diagonal over (i, j), rotating the top qubit.
    let mut oracle = DMatrix::<Complex64>::zeros(big, big);
    for i in 0..dim {
        for j in 0..dim {
            let theta = 2.0 * scaled[(i, j)].clamp(-1.0, 1.0).acos();
            let (sin, cos) = (theta / 2.0).sin_cos();
            let index = i * dim + j;
            oracle[(index, index)] = Complex64::new(cos, 0.0);
            oracle[(index, index + big / 2)] = Complex64::new(-sin, 0.0);
            oracle[(index + big / 2, index)] = Complex64::new(sin, 0.0);
            oracle[(index + big / 2, index + big / 2)] = Complex64::new(cos, 0.0);
        }
    }

    // Row/column register swap.
    let mut swap = DMatrix::<Complex64>::zeros(big, big);
    for a in 0..2usize {
        for i in 0..dim {
            for j in 0..dim {
                swap[(a * dim * dim + j * dim + i, a * dim * dim + i * dim + j)] =
                    Complex64::ONE;
            }
        }
    }

    // Hadamards on the row register.
    let h1 = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ],
    );
    let mut h_rows = DMatrix::<Complex64>::identity(1, 1);
    for _ in 0..n {
        h_rows = h_rows.kronecker(&h1);
    }
    let eye2 = DMatrix::<Complex64>::identity(2, 2);
    let eye_sys = DMatrix::<Complex64>::identity(dim, dim);
    let k = eye2.kronecker(&h_rows).kronecker(&eye_sys);

    let u = &k * &swap * &oracle * &k;
    Ok(BlockEncoding {
        alpha: dim as f64 * max_abs,
        ancillas: n + 1,
        system_qubits: n,
        realization: Realization::Dense(u),
    })
}

/// Zero-pads a rectangular block into the leading corner of the next
/// power-of-two square matrix (at least 2x2).
pub fn pad_to_power_of_two(m: &DMatrix<f64>) -> DMatrix<f64> {
    let need = m.nrows().max(m.ncols()).max(2);
    let dim = need.next_power_of_two();
    let mut padded = DMatrix::zeros(dim, dim);
    padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    padded
}
