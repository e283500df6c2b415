//! Lowest-order Nedelec discretization of the cavity problem: basis,
//! DOF map, assembly, direct solve, and benchmark utilities.

pub mod benchmark;
mod dofmap;
pub mod quadrature;
mod system;
mod error_norm;
mod whitney;

pub use dofmap::{BoundaryCondition, DofMap};
pub use error_norm::hcurl_error;
pub use quadrature::Quadrature;
pub use system::{
    assemble, element_mass, element_stiffness, eval_fe_curl, eval_fe_field, interpolate,
    solve_classical, CsrMatrix, FemSystem, Material, SOLVE_RESIDUAL,
};
pub use whitney::ElementBasis;

use nalgebra::DVector;
use num_complex::Complex64;

/// CSV dump of a DOF vector: `dofIndex, re, im`.
pub fn dump_dof_vector(coeffs: &DVector<Complex64>) -> String {
    let mut out = String::from("dofIndex,re,im\n");
    for (i, v) in coeffs.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", v.re, v.im));
    }
    out
}

/// Matrix-market-style coordinate dump of the assembled system matrix.
pub fn dump_system(system: &FemSystem) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate complex general\n");
    out.push_str(&format!(
        "{} {} {}\n",
        system.matrix.n(),
        system.matrix.n(),
        system.matrix.nnz()
    ));
    for (r, c, v) in system.matrix.triplets() {
        out.push_str(&format!("{} {} {} {}\n", r + 1, c + 1, v.re, v.im));
    }
    out
}
