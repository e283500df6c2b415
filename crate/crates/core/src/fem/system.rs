//! Assembly of the curl-curl system and its sparse direct solve.

use super::dofmap::DofMap;
use super::quadrature::Quadrature;
use super::whitney::ElementBasis;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::Mesh;
use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;

/// Relative residual the direct solve must reach.
pub const SOLVE_RESIDUAL: f64 = 1e-10;

/// Material and frequency parameters, constant over the domain.
#[derive(Debug, Clone, Copy)]
pub struct Material {
    pub wavenumber: Complex64,
    pub eps_r: Complex64,
    pub mu_r: Complex64,
}

impl Material {
    /// k = 1, eps_r = mu_r = 1: the benchmark normalization with
    /// eps_r k^2 = 1 required by the estimator reformulation.
    pub fn benchmark() -> Self {
        Self {
            wavenumber: Complex64::ONE,
            eps_r: Complex64::ONE,
            mu_r: Complex64::ONE,
        }
    }

    /// Whether eps_r k^2 = 1 and mu_r = 1 hold (within 1e-12).
    pub fn is_normalized(&self) -> bool {
        (self.eps_r * self.wavenumber * self.wavenumber - Complex64::ONE).norm() <= 1e-12
            && (self.mu_r - Complex64::ONE).norm() <= 1e-12
    }
}

/// Sparse complex matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, Complex64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&i| (triplets[i].0, triplets[i].1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<Complex64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &i in &order {
            let (r, c, v) = triplets[i];
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = DVector::zeros(self.n);
        for r in 0..self.n {
            let mut acc = Complex64::ZERO;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * x[self.cols[i]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut dense = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                dense[(r, self.cols[i])] = self.vals[i];
            }
        }
        dense
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max_ij |A_ij - A_ji|.
    pub fn symmetry_error(&self) -> f64 {
        let mut map = std::collections::HashMap::new();
        for r in 0..self.n {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                map.insert((r, self.cols[i]), self.vals[i]);
            }
        }
        let mut err: f64 = 0.0;
        for (&(r, c), &v) in &map {
            let vt = map.get(&(c, r)).copied().unwrap_or(Complex64::ZERO);
            err = err.max((v - vt).norm());
        }
        err
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.cols[i], self.vals[i]))
        })
    }
}

/// The eliminated linear system A E = F over the free DOFs.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub matrix: CsrMatrix,
    pub rhs: DVector<Complex64>,
    pub material: Material,
}

/// Local 3x3 curl-curl stiffness of one element: curl constants
/// outer-producted with the area.
pub fn element_stiffness(basis: &ElementBasis) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |l, m| basis.curl(l) * basis.curl(m) * basis.area())
}

/// Local 3x3 mass matrix by quadrature.
pub fn element_mass(basis: &ElementBasis, pts: [Point; 3], quad: &Quadrature) -> DMatrix<f64> {
    let mut mass = DMatrix::zeros(3, 3);
    for l in 0..3 {
        for m in l..3 {
            let v = quad.integrate_triangle(pts, &mut |p: Point| {
                basis.value(l, p).dot(&basis.value(m, p))
            });
            mass[(l, m)] = v;
            mass[(m, l)] = v;
        }
    }
    mass
}

/// Assembles A[i][j] = int mu_r^-1 curl(phi_i) curl(phi_j) - k^2 eps_r
/// phi_i . phi_j and F[i] = int source . phi_i, eliminating constrained
/// DOFs with their prescribed values folded into the right-hand side.
pub fn assemble(
    mesh: &Mesh,
    dofmap: &DofMap,
    material: Material,
    source: &dyn Fn(Point) -> Vector2<Complex64>,
    quad: &Quadrature,
) -> Result<FemSystem> {
    let n_free = dofmap.n_free();
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut rhs = DVector::<Complex64>::zeros(n_free);
    let mu_inv = Complex64::ONE / material.mu_r;
    let k2eps = material.wavenumber * material.wavenumber * material.eps_r;

    for t in 0..mesh.n_triangles() {
        let basis = ElementBasis::new(mesh, t)?;
        let pts = mesh.triangle_points(t);
        let stiff = element_stiffness(&basis);
        let mass = element_mass(&basis, pts, quad);
        let incidence = mesh.triangle_edges(t);
        let dofs = incidence.map(|inc| dofmap.dof_of_edge(inc.edge));

        for l in 0..3 {
            let row = dofs[l];
            if !dofmap.is_free(row) {
                continue;
            }
            let load = quad.integrate_triangle(pts, &mut |p: Point| {
                let phi = basis.value(l, p);
                let f = source(p);
                f.x * phi.x + f.y * phi.y
            });
            rhs[row] += load;
            for m in 0..3 {
                let entry = mu_inv * stiff[(l, m)] - k2eps * mass[(l, m)];
                let col = dofs[m];
                if dofmap.is_free(col) {
                    triplets.push((row, col, entry));
                } else {
                    rhs[row] -= entry * dofmap.boundary_value(col);
                }
            }
        }
    }

    Ok(FemSystem {
        matrix: CsrMatrix::from_triplets(n_free, &triplets),
        rhs,
        material,
    })
}

/// Direct sparse solve of the eliminated system. The relative residual must
/// reach 1e-10, otherwise the achieved value is reported as an error.
pub fn solve_classical(system: &FemSystem) -> Result<DVector<Complex64>> {
    use faer::prelude::*;
    use faer::sparse::{SparseColMat, Triplet};

    let n = system.matrix.n();
    let triplets: Vec<Triplet<usize, usize, c64>> = system
        .matrix
        .triplets()
        .map(|(r, c, v)| Triplet::new(r, c, c64::new(v.re, v.im)))
        .collect();
    let a = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Fem(format!("sparse matrix creation failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Fem(format!("sparse LU factorization failed: {e:?}")))?;
    let mut rhs = Mat::<c64>::zeros(n, 1);
    for i in 0..n {
        rhs[(i, 0)] = c64::new(system.rhs[i].re, system.rhs[i].im);
    }
    let x = lu.solve(&rhs);
    let solution = DVector::from_fn(n, |i, _| Complex64::new(x[(i, 0)].re, x[(i, 0)].im));

    let residual_vec = system.matrix.matvec(&solution) - &system.rhs;
    let rhs_norm = system.rhs.norm();
    let residual = if rhs_norm > 0.0 {
        residual_vec.norm() / rhs_norm
    } else {
        residual_vec.norm()
    };
    if residual > SOLVE_RESIDUAL {
        return Err(Error::SolveResidual {
            achieved: residual,
            required: SOLVE_RESIDUAL,
        });
    }
    Ok(solution)
}

/// Tangential edge-integral interpolant of a real field, as a full
/// coefficient vector over all edges.
pub fn interpolate(
    mesh: &Mesh,
    dofmap: &DofMap,
    field: &dyn Fn(Point) -> crate::geom::Vec2,
    quad: &Quadrature,
) -> DVector<Complex64> {
    let mut coeffs = DVector::zeros(dofmap.n_total());
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edge_points(e);
        let tangent = (b - a).normalize();
        let value = quad.integrate_edge(a, b, &mut |p: Point| field(p).dot(&tangent));
        coeffs[dofmap.dof_of_edge(e)] = Complex64::new(value, 0.0);
    }
    coeffs
}

/// Evaluates the finite element field at a point of element `t` from a full
/// coefficient vector.
pub fn eval_fe_field(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    t: usize,
    basis: &ElementBasis,
    p: Point,
) -> Vector2<Complex64> {
    let mut value = Vector2::new(Complex64::ZERO, Complex64::ZERO);
    let incidence = mesh.triangle_edges(t);
    for l in 0..3 {
        let c = coeffs[dofmap.dof_of_edge(incidence[l].edge)];
        let phi = basis.value(l, p);
        value.x += c * phi.x;
        value.y += c * phi.y;
    }
    value
}

/// Constant curl of the finite element field on element `t`.
pub fn eval_fe_curl(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    t: usize,
    basis: &ElementBasis,
) -> Complex64 {
    let incidence = mesh.triangle_edges(t);
    (0..3)
        .map(|l| coeffs[dofmap.dof_of_edge(incidence[l].edge)] * basis.curl(l))
        .sum()
}
