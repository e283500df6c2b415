//! State preparation for real amplitude vectors.
//!
//! A binary tree of subvector norms drives one Ry rotation per tree node,
//! uniformly controlled on the path prefix. Intermediate levels rotate by
//! nonnegative magnitude ratios; the leaf level carries the signs, which an
//! Ry covers directly since its angle may exceed pi.

use super::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Builds a circuit mapping |0..0> on `n` qubits to the normalized,
/// zero-padded vector `v`.
pub fn prepare_state(v: &[f64], n: usize) -> Result<Circuit> {
    if v.is_empty() || v.len() > (1 << n) {
        return Err(Error::Quantum(format!(
            "cannot prepare a length-{} vector on {n} qubits",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Quantum("non-finite amplitude".into()));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroStateVector);
    }

    // levels[l][j]: for l = n the signed leaves, above that the subtree
    // norms.
    let dim = 1 << n;
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut leaves = vec![0.0; dim];
    for (i, x) in v.iter().enumerate() {
        leaves[i] = x / norm;
    }
    levels.push(leaves);
    for _ in 0..n {
        let below = levels.last().unwrap();
        let level: Vec<f64> = below
            .chunks(2)
            .map(|pair| (pair[0] * pair[0] + pair[1] * pair[1]).sqrt())
            .collect();
        levels.push(level);
    }
    levels.reverse(); // levels[l] now has 2^l entries

    let mut circuit = Circuit::new(n);
    for l in 0..n {
        for j in 0..(1 << l) {
            let parent = levels[l][j];
            if parent == 0.0 {
                continue;
            }
            let c0 = levels[l + 1][2 * j];
            let c1 = levels[l + 1][2 * j + 1];
            let theta = 2.0 * c1.atan2(c0);
            if theta == 0.0 {
                continue;
            }
            if l == 0 {
                circuit.push(Gate::Ry { target: 0, theta });
            } else {
                let controls = (0..l)
                    .map(|q| (q, (j >> (l - 1 - q)) & 1 == 1))
                    .collect();
                circuit.push(Gate::McRy {
                    controls,
                    target: l,
                    theta,
                });
            }
        }
    }
    Ok(circuit)
}
