//! Per-element estimator evaluation through block-encodings and Hadamard
//! tests.
//!
//! Each of the up-to-25 terms of the local expansion is one expectation
//! value x^T M y, reconstructed from an ancilla probability as
//! alpha (2 p0 - 1) ||x|| ||y||. Zero matrices (the S/C/D families at
//! lowest order) and zero restricted vectors are skipped: their terms
//! contribute nothing and need no circuit. The default local embedding
//! block-encodes each 3x3 family block padded to 4x4 and prepares the
//! restricted, renormalized sub-states on its support; the global mode
//! reproduces the literal construction with the full zero pattern on
//! ceil(log2(total DOFs)) qubits.

use super::block::{block_encode, block_encode_dense, pad_to_power_of_two, BlockEncoding};
use super::hadamard::{hadamard_test_cross, hadamard_test_diag, sample_p0};
use super::prep::prepare_state;
use crate::error::{Error, Result};
use crate::estimator::LocalMatrices;
use crate::fem::DofMap;
use crate::mesh::Mesh;
use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest dense-realization register (2n+1 qubits) worth materializing.
const DENSE_QUBIT_CAP: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReadoutMode {
    /// Exact ancilla probabilities from the statevector.
    Exact,
    /// Binomial shot sampling of each probability.
    Shots(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Embedding {
    /// Encode each local block on its own support (4x4 padded).
    Local,
    /// Encode the full global zero pattern of every matrix.
    Global,
}

#[derive(Debug, Clone, Copy)]
pub struct QuantumEstimateConfig {
    pub mode: ReadoutMode,
    pub embedding: Embedding,
    pub seed: u64,
    /// Prefer the dense unitary realization where small enough.
    pub dense: bool,
}

impl QuantumEstimateConfig {
    pub fn exact() -> Self {
        Self {
            mode: ReadoutMode::Exact,
            embedding: Embedding::Local,
            seed: 0,
            dense: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ElementEstimate {
    pub eta1_sq: f64,
    pub eta2_sq: f64,
    pub eta3_sq: f64,
    pub eta4_sq: f64,
    /// Largest subnormalization over the element's evaluated terms.
    pub max_alpha: f64,
    /// Number of Hadamard tests actually run.
    pub tests_run: usize,
}

impl ElementEstimate {
    pub fn eta_k_sq(&self) -> f64 {
        self.eta1_sq + self.eta2_sq + self.eta3_sq + self.eta4_sq
    }
}

/// Extracts real parts, rejecting vectors with nontrivial imaginary parts:
/// the Ry-only state preparation covers real amplitudes only.
pub fn real_coefficients(coeffs: &DVector<Complex64>) -> Result<Vec<f64>> {
    let max_im = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_im > 1e-12 * (1.0 + scale) {
        return Err(Error::ComplexAmplitudes(max_im));
    }
    Ok(coeffs.iter().map(|c| c.re).collect())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn term_seed(seed: u64, element: usize, term: usize) -> u64 {
    splitmix64(splitmix64(seed ^ (element as u64).wrapping_mul(0x9E37_79B9)) ^ term as u64)
}

/// One side of a term: which vector it draws from and on which DOFs.
#[derive(Clone, Copy, PartialEq)]
enum Side<'a> {
    Field(&'a [usize; 3]),
    Source(usize, &'a [usize; 3]),
}

struct TermRunner<'a> {
    config: &'a QuantumEstimateConfig,
    element: usize,
    e_full: &'a [f64],
    f_coeffs: &'a [[f64; 3]],
    n_global: usize,
    term_index: usize,
    max_alpha: f64,
    tests_run: usize,
}

impl<'a> TermRunner<'a> {
    fn side_vector_local(&self, side: Side) -> Vec<f64> {
        match side {
            Side::Field(dofs) => dofs.iter().map(|&d| self.e_full[d]).collect(),
            Side::Source(element, _) => self.f_coeffs[element].to_vec(),
        }
    }

    fn side_vector_global(&self, side: Side) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.n_global];
        match side {
            Side::Field(_) => v[..self.e_full.len()].copy_from_slice(self.e_full),
            Side::Source(element, dofs) => {
                for (l, &d) in dofs.iter().enumerate() {
                    v[d] = self.f_coeffs[element][l];
                }
            }
        }
        v
    }

    fn encode(&self, padded: &DMatrix<f64>) -> Result<BlockEncoding> {
        let n = padded.nrows().trailing_zeros() as usize;
        if self.config.dense && 2 * n + 1 <= DENSE_QUBIT_CAP {
            block_encode_dense(padded)
        } else {
            block_encode(padded)
        }
    }

    /// Evaluates x^T M y for one term of the expansion.
    fn run(&mut self, block: &Matrix3<f64>, x: Side, y: Side) -> Result<f64> {
        let term = self.term_index;
        self.term_index += 1;
        if block.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let (x_vec, y_vec, matrix, diagonal) = match self.config.embedding {
            Embedding::Local => {
                let x_vec = self.side_vector_local(x);
                let y_vec = self.side_vector_local(y);
                let matrix = pad_to_power_of_two(&DMatrix::from_fn(3, 3, |i, j| block[(i, j)]));
                let diagonal = x == y;
                (x_vec, y_vec, matrix, diagonal)
            }
            Embedding::Global => {
                let x_vec = self.side_vector_global(x);
                let y_vec = self.side_vector_global(y);
                let dim = 1 << self.n_global;
                let mut matrix = DMatrix::zeros(dim, dim);
                let (row_dofs, col_dofs) = (side_dofs(x), side_dofs(y));
                for i in 0..3 {
                    for j in 0..3 {
                        matrix[(row_dofs[i], col_dofs[j])] += block[(i, j)];
                    }
                }
                let diagonal = x_vec == y_vec;
                (x_vec, y_vec, matrix, diagonal)
            }
        };
        let x_norm = x_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y_norm = y_vec.iter().map(|v| v * v).sum::<f64>().sqrt();
        if x_norm == 0.0 || y_norm == 0.0 {
            return Ok(0.0);
        }
        let be = self.encode(&matrix)?;
        self.max_alpha = self.max_alpha.max(be.alpha);
        self.tests_run += 1;
        let n_sys = be.system_qubits;
        let p0 = if diagonal {
            hadamard_test_diag(&be, &prepare_state(&x_vec, n_sys)?)?
        } else {
            hadamard_test_cross(
                &be,
                &prepare_state(&x_vec, n_sys)?,
                &prepare_state(&y_vec, n_sys)?,
            )?
        };
        let p0 = match self.config.mode {
            ReadoutMode::Exact => p0,
            ReadoutMode::Shots(shots) => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(term_seed(self.config.seed, self.element, term));
                sample_p0(p0, shots, &mut rng)?
            }
        };
        Ok(be.alpha * (2.0 * p0 - 1.0) * x_norm * y_norm)
    }
}

fn side_dofs<'a>(side: Side<'a>) -> &'a [usize; 3] {
    match side {
        Side::Field(dofs) => dofs,
        Side::Source(_, dofs) => dofs,
    }
}

/// Quantum evaluation of one element's estimator terms.
///
/// `e_full` is the real full DOF vector (free solution plus lifted
/// boundary values), `f_coeffs` the per-element source projections. The
/// global embedding requires 2^n >= total DOF count with `n` the register
/// size chosen automatically.
pub fn estimate_element(
    mesh: &Mesh,
    dofmap: &DofMap,
    matrices: &LocalMatrices,
    element: usize,
    e_full: &[f64],
    f_coeffs: &[[f64; 3]],
    config: &QuantumEstimateConfig,
) -> Result<ElementEstimate> {
    if element >= mesh.n_triangles() {
        return Err(Error::InvalidElement(element));
    }
    if e_full.len() != dofmap.n_total() || f_coeffs.len() != mesh.n_triangles() {
        return Err(Error::Quantum(
            "coefficient vectors do not match the mesh".into(),
        ));
    }
    let n_global = usize::BITS as usize - (dofmap.n_total() - 1).leading_zeros() as usize;
    let block = &matrices.elements[element];
    let mut runner = TermRunner {
        config,
        element,
        e_full,
        f_coeffs,
        n_global: n_global.max(1),
        term_index: 0,
        max_alpha: 0.0,
        tests_run: 0,
    };

    let f_side = Side::Source(element, &block.dofs);
    let e_side = Side::Field(&block.dofs);
    let eta1_sq = runner.run(&block.mass, f_side, f_side)?
        + runner.run(&block.curl_curl, e_side, e_side)?
        + runner.run(&block.mass, e_side, e_side)?
        - 2.0 * runner.run(&block.cross_curl, f_side, e_side)?
        + 2.0 * runner.run(&block.mass, f_side, e_side)?
        - 2.0 * runner.run(&block.cross_curl, e_side, e_side)?;
    let eta2_sq = runner.run(&block.div_div, e_side, e_side)?;

    let mut eta3_sq = 0.0;
    let mut eta4_sq = 0.0;
    for inc in mesh.triangle_edges(element) {
        let Some(face_idx) = matrices.face_of_edge[inc.edge] else {
            continue;
        };
        let face = &matrices.faces[face_idx];
        let own_first = face.elements.0 == element;
        let (own_dofs, other_dofs) = if own_first {
            (&face.dofs.0, &face.dofs.1)
        } else {
            (&face.dofs.1, &face.dofs.0)
        };
        let own = Side::Field(own_dofs);
        let other = Side::Field(other_dofs);
        let transposed;
        let (c_own, c_other, c_cross, m_own, m_other, m_cross) = if own_first {
            (
                &face.curl_jump.0,
                &face.curl_jump.1,
                &face.curl_jump.2,
                &face.normal_jump.0,
                &face.normal_jump.1,
                &face.normal_jump.2,
            )
        } else {
            transposed = (
                face.curl_jump.2.transpose(),
                face.normal_jump.2.transpose(),
            );
            (
                &face.curl_jump.1,
                &face.curl_jump.0,
                &transposed.0,
                &face.normal_jump.1,
                &face.normal_jump.0,
                &transposed.1,
            )
        };
        eta3_sq += 0.5 * runner.run(c_own, own, own)?
            + 0.5 * runner.run(c_other, other, other)?
            + runner.run(c_cross, own, other)?;
        eta4_sq += 0.5 * runner.run(m_own, own, own)?
            + 0.5 * runner.run(m_other, other, other)?
            + runner.run(m_cross, own, other)?;
    }

    Ok(ElementEstimate {
        eta1_sq,
        eta2_sq,
        eta3_sq,
        eta4_sq,
        max_alpha: runner.max_alpha,
        tests_run: runner.tests_run,
    })
}
