//! Gate-list circuits, their dense matrices, and OpenQASM export.

use super::state::StateVector;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry { target: usize, theta: f64 },
    Rz { target: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    /// Ry on `target` applied when every control qubit matches its wanted
    /// value.
    McRy {
        controls: Vec<(usize, bool)>,
        target: usize,
        theta: f64,
    },
    /// A whole subcircuit (over the same register) applied under one
    /// control qubit.
    Controlled {
        control: usize,
        value: bool,
        circuit: Box<Circuit>,
    },
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) => vec![*q],
            Gate::Ry { target, .. } | Gate::Rz { target, .. } => vec![*target],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cz(a, b) | Gate::Swap(a, b) => vec![*a, *b],
            Gate::McRy {
                controls, target, ..
            } => {
                let mut qs: Vec<usize> = controls.iter().map(|(q, _)| *q).collect();
                qs.push(*target);
                qs
            }
            Gate::Controlled {
                control, circuit, ..
            } => {
                let mut qs: Vec<usize> = (0..circuit.n_qubits()).collect();
                qs.push(*control);
                qs
            }
        }
    }

    fn shifted(&self, offset: usize, new_n: usize) -> Gate {
        match self {
            Gate::H(q) => Gate::H(q + offset),
            Gate::X(q) => Gate::X(q + offset),
            Gate::Ry { target, theta } => Gate::Ry {
                target: target + offset,
                theta: *theta,
            },
            Gate::Rz { target, theta } => Gate::Rz {
                target: target + offset,
                theta: *theta,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: control + offset,
                target: target + offset,
            },
            Gate::Cz(a, b) => Gate::Cz(a + offset, b + offset),
            Gate::Swap(a, b) => Gate::Swap(a + offset, b + offset),
            Gate::McRy {
                controls,
                target,
                theta,
            } => Gate::McRy {
                controls: controls.iter().map(|&(q, v)| (q + offset, v)).collect(),
                target: target + offset,
                theta: *theta,
            },
            Gate::Controlled {
                control,
                value,
                circuit,
            } => Gate::Controlled {
                control: control + offset,
                value: *value,
                circuit: Box::new(circuit.shifted(offset, new_n)),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "circuits need at least one qubit");
        Self { n, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) {
        for q in gate.qubits() {
            assert!(q < self.n, "gate touches qubit {q} of {}", self.n);
        }
        self.gates.push(gate);
    }

    /// The same circuit on a larger register, all qubits moved up by
    /// `offset`.
    pub fn shifted(&self, offset: usize, new_n: usize) -> Circuit {
        assert!(self.n + offset <= new_n);
        Circuit {
            n: new_n,
            gates: self.gates.iter().map(|g| g.shifted(offset, new_n)).collect(),
        }
    }

    /// The circuit applied to |0...0>.
    pub fn run_from_zero(&self) -> StateVector {
        let mut state = StateVector::zero_state(self.n);
        state
            .apply_circuit(self)
            .expect("circuit and state qubit counts agree");
        state
    }

    /// Column-by-column dense matrix of the circuit.
    pub fn dense_unitary(&self) -> DMatrix<Complex64> {
        let dim = 1 << self.n;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut amps = vec![Complex64::ZERO; dim];
            amps[col] = Complex64::ONE;
            let mut state = StateVector::from_amplitudes(self.n, amps).unwrap();
            state.apply_circuit(self).unwrap();
            for (row, amp) in state.amplitudes().iter().enumerate() {
                u[(row, col)] = *amp;
            }
        }
        u
    }

    /// Lowers to the primitive set accepted by the OpenQASM writer.
    pub fn lowered(&self) -> Result<Vec<LoweredGate>> {
        let mut out = Vec::new();
        for gate in &self.gates {
            lower_gate(gate, None, &mut out)?;
        }
        Ok(out)
    }

    /// OpenQASM 2.0 text of the lowered circuit.
    pub fn to_qasm(&self) -> Result<String> {
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        out.push_str(&format!("qreg q[{}];\n", self.n));
        for op in self.lowered()? {
            out.push_str(&op.qasm_line());
            out.push('\n');
        }
        Ok(out)
    }
}

/// Primitives with direct qelib1 equivalents.
#[derive(Debug, Clone, Copy)]
pub enum LoweredGate {
    H(usize),
    X(usize),
    Ry(usize, f64),
    Rz(usize, f64),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    Ch(usize, usize),
    Cry(usize, usize, f64),
    Crz(usize, usize, f64),
    Ccx(usize, usize, usize),
    Cswap(usize, usize, usize),
}

impl LoweredGate {
    fn qasm_line(&self) -> String {
        match self {
            LoweredGate::H(q) => format!("h q[{q}];"),
            LoweredGate::X(q) => format!("x q[{q}];"),
            LoweredGate::Ry(q, t) => format!("ry({t}) q[{q}];"),
            LoweredGate::Rz(q, t) => format!("rz({t}) q[{q}];"),
            LoweredGate::Cx(c, t) => format!("cx q[{c}],q[{t}];"),
            LoweredGate::Cz(a, b) => format!("cz q[{a}],q[{b}];"),
            LoweredGate::Swap(a, b) => format!("swap q[{a}],q[{b}];"),
            LoweredGate::Ch(c, t) => format!("ch q[{c}],q[{t}];"),
            LoweredGate::Cry(c, t, theta) => format!("cry({theta}) q[{c}],q[{t}];"),
            LoweredGate::Crz(c, t, theta) => format!("crz({theta}) q[{c}],q[{t}];"),
            LoweredGate::Ccx(a, b, t) => format!("ccx q[{a}],q[{b}],q[{t}];"),
            LoweredGate::Cswap(c, a, b) => format!("cswap q[{c}],q[{a}],q[{b}];"),
        }
    }

    /// Equivalent [`Gate`] for simulation, so the lowering can be verified
    /// against the original circuit.
    pub fn to_gate(&self, n: usize) -> Gate {
        let wrap = |control: usize, gate: Gate| {
            let mut inner = Circuit::new(n);
            inner.gates.push(gate);
            Gate::Controlled {
                control,
                value: true,
                circuit: Box::new(inner),
            }
        };
        match *self {
            LoweredGate::H(q) => Gate::H(q),
            LoweredGate::X(q) => Gate::X(q),
            LoweredGate::Ry(q, theta) => Gate::Ry { target: q, theta },
            LoweredGate::Rz(q, theta) => Gate::Rz { target: q, theta },
            LoweredGate::Cx(c, t) => Gate::Cnot {
                control: c,
                target: t,
            },
            LoweredGate::Cz(a, b) => Gate::Cz(a, b),
            LoweredGate::Swap(a, b) => Gate::Swap(a, b),
            LoweredGate::Ch(c, t) => wrap(c, Gate::H(t)),
            LoweredGate::Cry(c, t, theta) => Gate::McRy {
                controls: vec![(c, true)],
                target: t,
                theta,
            },
            LoweredGate::Crz(c, t, theta) => wrap(c, Gate::Rz { target: t, theta }),
            LoweredGate::Ccx(a, b, t) => wrap(a, Gate::Cnot { control: b, target: t }),
            LoweredGate::Cswap(c, a, b) => wrap(c, Gate::Swap(a, b)),
        }
    }
}

fn lower_gate(
    gate: &Gate,
    extra: Option<usize>,
    out: &mut Vec<LoweredGate>,
) -> Result<()> {
    match (gate, extra) {
        (Gate::H(q), None) => out.push(LoweredGate::H(*q)),
        (Gate::H(q), Some(c)) => out.push(LoweredGate::Ch(c, *q)),
        (Gate::X(q), None) => out.push(LoweredGate::X(*q)),
        (Gate::X(q), Some(c)) => out.push(LoweredGate::Cx(c, *q)),
        (Gate::Ry { target, theta }, None) => out.push(LoweredGate::Ry(*target, *theta)),
        (Gate::Ry { target, theta }, Some(c)) => out.push(LoweredGate::Cry(c, *target, *theta)),
        (Gate::Rz { target, theta }, None) => out.push(LoweredGate::Rz(*target, *theta)),
        (Gate::Rz { target, theta }, Some(c)) => out.push(LoweredGate::Crz(c, *target, *theta)),
        (Gate::Cnot { control, target }, None) => out.push(LoweredGate::Cx(*control, *target)),
        (Gate::Cnot { control, target }, Some(c)) => {
            out.push(LoweredGate::Ccx(c, *control, *target))
        }
        (Gate::Cz(a, b), None) => out.push(LoweredGate::Cz(*a, *b)),
        (Gate::Cz(a, b), Some(c)) => {
            // ccz = H on the target around a ccx.
            out.push(LoweredGate::H(*b));
            out.push(LoweredGate::Ccx(c, *a, *b));
            out.push(LoweredGate::H(*b));
        }
        (Gate::Swap(a, b), None) => out.push(LoweredGate::Swap(*a, *b)),
        (Gate::Swap(a, b), Some(c)) => out.push(LoweredGate::Cswap(c, *a, *b)),
        (
            Gate::McRy {
                controls,
                target,
                theta,
            },
            extra,
        ) => {
            let mut all = controls.clone();
            if let Some(c) = extra {
                all.push((c, true));
            }
            lower_mcry(&all, *target, *theta, out);
        }
        (
            Gate::Controlled {
                control,
                value,
                circuit,
            },
            None,
        ) => {
            if !*value {
                out.push(LoweredGate::X(*control));
            }
            for inner in circuit.gates() {
                lower_gate(inner, Some(*control), out)?;
            }
            if !*value {
                out.push(LoweredGate::X(*control));
            }
        }
        (Gate::Controlled { .. }, Some(_)) => {
            return Err(Error::Quantum(
                "nested controlled subcircuits are not supported by the QASM writer".into(),
            ))
        }
    }
    Ok(())
}

/// Gray-code multiplexed-rotation compilation of a multi-controlled Ry:
/// the rotation pattern is expressed as a uniformly controlled rotation
/// whose angle vector is zero except at the wanted control pattern, then
/// decomposed into 2^k alternating Ry and CNOT gates.
fn lower_mcry(controls: &[(usize, bool)], target: usize, theta: f64, out: &mut Vec<LoweredGate>) {
    let k = controls.len();
    if k == 0 {
        out.push(LoweredGate::Ry(target, theta));
        return;
    }
    if k == 1 {
        if controls[0].1 {
            out.push(LoweredGate::Cry(controls[0].0, target, theta));
        } else {
            out.push(LoweredGate::X(controls[0].0));
            out.push(LoweredGate::Cry(controls[0].0, target, theta));
            out.push(LoweredGate::X(controls[0].0));
        }
        return;
    }
    let size = 1 << k;
    // Pattern index: bit (k-1-p) holds the wanted value of controls[p].
    let pattern: usize = controls
        .iter()
        .enumerate()
        .filter(|(_, (_, wanted))| *wanted)
        .map(|(p, _)| 1 << (k - 1 - p))
        .sum();
    let gray = |i: usize| i ^ (i >> 1);
    // phi_i = 2^-k sum_j (-1)^(popcount(g(i) & j)) a_j with a = theta at the
    // pattern only.
    let scale = theta / size as f64;
    for i in 0..size {
        let sign = if (gray(i) & pattern).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        out.push(LoweredGate::Ry(target, sign * scale));
        let diff_bit = if i + 1 < size {
            gray(i) ^ gray(i + 1)
        } else {
            gray(size - 1) ^ gray(0)
        };
        let b = diff_bit.trailing_zeros() as usize;
        let control = controls[k - 1 - b].0;
        out.push(LoweredGate::Cx(control, target));
    }
}
