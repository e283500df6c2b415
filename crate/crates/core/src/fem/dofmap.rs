//! One degree of freedom per mesh edge, with boundary constraints.
//!
//! Interior edges are numbered first (0..n_free, ordered by edge id), then
//! boundary edges. The constrained boundary DOFs carry prescribed values:
//! zero for the homogeneous perfect-conductor condition, or the tangential
//! edge integrals of a given boundary field for lifted inhomogeneous data.

use super::quadrature::Quadrature;
use crate::geom::{Point, Vec2};
use crate::mesh::Mesh;
use nalgebra::DVector;
use num_complex::Complex64;

pub enum BoundaryCondition<'a> {
    /// nu x E = 0 on the whole boundary: constrained DOFs are zero.
    HomogeneousPec,
    /// Tangential data interpolated from a field: each boundary edge DOF is
    /// the integral of the field's tangential component along the edge.
    Tangential(&'a dyn Fn(Point) -> Vec2),
}

#[derive(Debug, Clone)]
pub struct DofMap {
    edge_to_dof: Vec<usize>,
    dof_to_edge: Vec<usize>,
    n_free: usize,
    /// sigma per (triangle, local edge): +1 when the local traversal
    /// matches the canonical edge direction.
    tri_signs: Vec<[f64; 3]>,
    /// Prescribed values of the constrained DOFs, indexed by dof - n_free.
    boundary_values: Vec<Complex64>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, bc: BoundaryCondition, quad: &Quadrature) -> Self {
        let n_edges = mesh.n_edges();
        let mut interior: Vec<usize> = Vec::new();
        let mut boundary: Vec<usize> = Vec::new();
        for e in 0..n_edges {
            if mesh.is_boundary_edge(e) {
                boundary.push(e);
            } else {
                interior.push(e);
            }
        }
        let n_free = interior.len();
        let mut edge_to_dof = vec![0usize; n_edges];
        let mut dof_to_edge = vec![0usize; n_edges];
        for (dof, &e) in interior.iter().chain(boundary.iter()).enumerate() {
            edge_to_dof[e] = dof;
            dof_to_edge[dof] = e;
        }
        let boundary_values = boundary
            .iter()
            .map(|&e| match &bc {
                BoundaryCondition::HomogeneousPec => Complex64::ZERO,
                BoundaryCondition::Tangential(field) => {
                    let [a, b] = mesh.edge_points(e);
                    let tangent = (b - a).normalize();
                    let value =
                        quad.integrate_edge(a, b, &mut |p: Point| field(p).dot(&tangent));
                    Complex64::new(value, 0.0)
                }
            })
            .collect();
        let tri_signs = (0..mesh.n_triangles())
            .map(|t| mesh.triangle_edges(t).map(|inc| inc.sign))
            .collect();
        Self {
            edge_to_dof,
            dof_to_edge,
            n_free,
            tri_signs,
            boundary_values,
        }
    }

    /// Number of free (unconstrained) DOFs.
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Total DOF count (one per mesh edge).
    pub fn n_total(&self) -> usize {
        self.edge_to_dof.len()
    }

    pub fn dof_of_edge(&self, edge: usize) -> usize {
        self.edge_to_dof[edge]
    }

    pub fn edge_of_dof(&self, dof: usize) -> usize {
        self.dof_to_edge[dof]
    }

    pub fn is_free(&self, dof: usize) -> bool {
        dof < self.n_free
    }

    pub fn sign(&self, triangle: usize, local_edge: usize) -> f64 {
        self.tri_signs[triangle][local_edge]
    }

    pub fn boundary_value(&self, dof: usize) -> Complex64 {
        debug_assert!(dof >= self.n_free);
        self.boundary_values[dof - self.n_free]
    }

    /// Full coefficient vector over all edges: the free solution followed
    /// by the prescribed boundary values.
    pub fn full_vector(&self, free: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(free.len(), self.n_free);
        let mut full = DVector::zeros(self.n_total());
        full.rows_mut(0, self.n_free).copy_from(free);
        for (i, &v) in self.boundary_values.iter().enumerate() {
            full[self.n_free + i] = v;
        }
        full
    }
}
