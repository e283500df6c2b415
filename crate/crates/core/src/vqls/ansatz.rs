//! Fixed-structure Ry-CZ ansatzes with real output amplitudes.

use crate::error::{Error, Result};
use crate::quantum::{Circuit, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzLayout {
    /// Per layer: an Ry column, then a CZ ring closing (n-1, 0).
    Circular,
    /// Per layer: Ry column, CZ on even pairs, Ry column, CZ on odd pairs.
    Alternating,
}

impl AnsatzLayout {
    pub fn name(&self) -> &'static str {
        match self {
            AnsatzLayout::Circular => "circular",
            AnsatzLayout::Alternating => "alternating",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(AnsatzLayout::Circular),
            "alternating" => Ok(AnsatzLayout::Alternating),
            other => Err(Error::Vqls(format!("unknown ansatz layout '{other}'"))),
        }
    }
}

/// Number of rotation angles: one initial column plus one column per layer
/// for the circular layout, two columns per layer for the alternating one.
pub fn parameter_count(layout: AnsatzLayout, n: usize, layers: usize) -> usize {
    match layout {
        AnsatzLayout::Circular => n * (layers + 1),
        AnsatzLayout::Alternating => n * (2 * layers + 1),
    }
}

pub fn build_ansatz(
    layout: AnsatzLayout,
    n: usize,
    layers: usize,
    params: &[f64],
) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Vqls(format!("ansatz needs at least 2 qubits, got {n}")));
    }
    if layers < 1 {
        return Err(Error::Vqls("ansatz needs at least one layer".into()));
    }
    let expected = parameter_count(layout, n, layers);
    if params.len() != expected {
        return Err(Error::Vqls(format!(
            "{} layout with n={n}, L={layers} takes {expected} parameters, got {}",
            layout.name(),
            params.len()
        )));
    }
    let mut circuit = Circuit::new(n);
    let mut next = params.iter();
    let ry_column = |circuit: &mut Circuit, next: &mut std::slice::Iter<f64>| {
        for q in 0..n {
            circuit.push(Gate::Ry {
                target: q,
                theta: *next.next().unwrap(),
            });
        }
    };
    ry_column(&mut circuit, &mut next);
    for _ in 0..layers {
        match layout {
            AnsatzLayout::Circular => {
                ry_column(&mut circuit, &mut next);
                for q in 0..n {
                    circuit.push(Gate::Cz(q, (q + 1) % n));
                }
            }
            AnsatzLayout::Alternating => {
                ry_column(&mut circuit, &mut next);
                let mut q = 0;
                while q + 1 < n {
                    circuit.push(Gate::Cz(q, q + 1));
                    q += 2;
                }
                ry_column(&mut circuit, &mut next);
                let mut q = 1;
                while q + 1 < n {
                    circuit.push(Gate::Cz(q, q + 1));
                    q += 2;
                }
            }
        }
    }
    Ok(circuit)
}
