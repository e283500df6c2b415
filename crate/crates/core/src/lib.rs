//! Hybrid quantum-classical adaptive mesh refinement for the 2D
//! time-harmonic Maxwell cavity problem.
//!
//! The crate provides the full loop `mesh -> solve -> estimate -> mark ->
//! refine` for the lowest-order Nedelec discretization of the curl-curl
//! cavity problem on the L-shaped domain, with three interchangeable ways
//! of evaluating the residual a posteriori error estimator:
//!
//! - direct elementwise quadrature ([`estimator::estimate_classical`]),
//! - quadratic forms over local matrices ([`estimator::estimate_from_forms`]),
//! - emulated quantum circuits: block-encodings of the local matrices read
//!   out through Hadamard tests, exactly or with shot sampling
//!   ([`quantum::estimate_element`]).
//!
//! A variational quantum linear solver ([`vqls`]) and the experiment
//! drivers ([`driver`]) round out the reproduction of the benchmark study.

pub mod driver;
pub(crate) mod seeding;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod geom;
pub mod mesh;
pub mod quantum;
pub mod vqls;

pub use error::{Error, Result};
