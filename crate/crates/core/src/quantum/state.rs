//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of the basis index. Every gate
//! application takes a control mask so that controlled forms of all gates,
//! including whole controlled subcircuits, run through the same code path.

use super::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// Control condition: the state index must satisfy
/// `(index & mask) == value`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ControlMask {
    mask: usize,
    value: usize,
}

impl ControlMask {
    fn with(self, bit: usize, wanted: bool) -> Self {
        Self {
            mask: self.mask | bit,
            value: self.value | if wanted { bit } else { 0 },
        }
    }

    #[inline]
    fn matches(self, index: usize) -> bool {
        index & self.mask == self.value
    }
}

impl StateVector {
    pub fn zero_state(n: usize) -> Self {
        assert!(n >= 1 && n <= 26, "unsupported qubit count {n}");
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        Self { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::QubitMismatch(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        let state = Self { n, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Quantum(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[inline]
    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n - 1 - qubit)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Probability of measuring qubit `qubit` as 0.
    pub fn probability_zero(&self, qubit: usize) -> f64 {
        let bit = self.bit(qubit);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability that all the given qubits measure 0.
    pub fn probability_all_zero(&self, qubits: &[usize]) -> f64 {
        let mask: usize = qubits.iter().map(|&q| self.bit(q)).sum();
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n {
            return Err(Error::QubitMismatch(format!(
                "circuit on {} qubits applied to {}-qubit state",
                circuit.n_qubits(),
                self.n
            )));
        }
        for gate in circuit.gates() {
            self.apply_gate_masked(gate, ControlMask::default());
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        self.apply_gate_masked(gate, ControlMask::default());
    }

    fn apply_gate_masked(&mut self, gate: &Gate, ctrl: ControlMask) {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            Gate::H(q) => self.apply_1q(
                [
                    [Complex64::new(inv_sqrt2, 0.0), Complex64::new(inv_sqrt2, 0.0)],
                    [
                        Complex64::new(inv_sqrt2, 0.0),
                        Complex64::new(-inv_sqrt2, 0.0),
                    ],
                ],
                *q,
                ctrl,
            ),
            Gate::X(q) => self.apply_1q(
                [
                    [Complex64::ZERO, Complex64::ONE],
                    [Complex64::ONE, Complex64::ZERO],
                ],
                *q,
                ctrl,
            ),
            Gate::Ry { target, theta } => self.apply_1q(ry_matrix(*theta), *target, ctrl),
            Gate::Rz { target, theta } => {
                let half = theta / 2.0;
                self.apply_1q(
                    [
                        [Complex64::from_polar(1.0, -half), Complex64::ZERO],
                        [Complex64::ZERO, Complex64::from_polar(1.0, half)],
                    ],
                    *target,
                    ctrl,
                )
            }
            Gate::Cnot { control, target } => {
                let ctrl = ctrl.with(self.bit(*control), true);
                self.apply_1q(
                    [
                        [Complex64::ZERO, Complex64::ONE],
                        [Complex64::ONE, Complex64::ZERO],
                    ],
                    *target,
                    ctrl,
                )
            }
            Gate::Cz(a, b) => {
                let ctrl = ctrl.with(self.bit(*a), true);
                self.apply_1q(
                    [
                        [Complex64::ONE, Complex64::ZERO],
                        [Complex64::ZERO, -Complex64::ONE],
                    ],
                    *b,
                    ctrl,
                )
            }
            Gate::Swap(a, b) => self.apply_swap(*a, *b, ctrl),
            Gate::McRy {
                controls,
                target,
                theta,
            } => {
                let mut ctrl = ctrl;
                for &(q, wanted) in controls {
                    ctrl = ctrl.with(self.bit(q), wanted);
                }
                self.apply_1q(ry_matrix(*theta), *target, ctrl)
            }
            Gate::Controlled {
                control,
                value,
                circuit,
            } => {
                let ctrl = ctrl.with(self.bit(*control), *value);
                for inner in circuit.gates() {
                    self.apply_gate_masked(inner, ctrl);
                }
            }
        }
    }

    fn apply_1q(&mut self, u: [[Complex64; 2]; 2], target: usize, ctrl: ControlMask) {
        let bit = self.bit(target);
        for i in 0..self.amps.len() {
            if i & bit != 0 || !ctrl.matches(i) {
                continue;
            }
            let j = i | bit;
            let (x, y) = (self.amps[i], self.amps[j]);
            self.amps[i] = u[0][0] * x + u[0][1] * y;
            self.amps[j] = u[1][0] * x + u[1][1] * y;
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize, ctrl: ControlMask) {
        let (ba, bb) = (self.bit(a), self.bit(b));
        for i in 0..self.amps.len() {
            // Swap the |01> and |10> pair once.
            if i & ba != 0 || i & bb == 0 || !ctrl.matches(i) {
                continue;
            }
            let j = (i | ba) & !bb;
            self.amps.swap(i, j);
        }
    }

    /// Applies a dense unitary on the contiguous qubit range starting at
    /// `first`, optionally under a control qubit. Used by dense-realization
    /// block-encodings.
    pub fn apply_dense(
        &mut self,
        u: &DMatrix<Complex64>,
        first: usize,
        control: Option<(usize, bool)>,
    ) {
        let k = (u.nrows() as f64).log2().round() as usize;
        assert_eq!(1 << k, u.nrows());
        assert!(first + k <= self.n);
        let ctrl = match control {
            Some((q, v)) => ControlMask::default().with(self.bit(q), v),
            None => ControlMask::default(),
        };
        let low_bits = self.n - first - k; // qubits below the block
        let block_mask = ((1 << k) - 1) << low_bits;
        let mut scratch = vec![Complex64::ZERO; 1 << k];
        for base in 0..self.amps.len() {
            if base & block_mask != 0 || !ctrl.matches(base) {
                continue;
            }
            for s in 0..(1 << k) {
                scratch[s] = self.amps[base | (s << low_bits)];
            }
            for r in 0..(1 << k) {
                let mut acc = Complex64::ZERO;
                for (s, v) in scratch.iter().enumerate() {
                    acc += u[(r, s)] * v;
                }
                self.amps[base | (r << low_bits)] = acc;
            }
        }
    }
}

fn ry_matrix(theta: f64) -> [[Complex64; 2]; 2] {
    let (sin, cos) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(cos, 0.0), Complex64::new(-sin, 0.0)],
        [Complex64::new(sin, 0.0), Complex64::new(cos, 0.0)],
    ]
}
