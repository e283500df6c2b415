//! The estimator as quadratic forms over local matrices.
//!
//! Element families (3x3 over the element's DOFs, weight h_K^2 baked in):
//! mass M_K, curl-curl cross term S_K, double-curl C_K, divergence D_K.
//! Face families (3x3 over each side's DOFs, weight h_f baked in): curl
//! jumps C_{K1 K2 f} and normal jumps M_{K1 K2 f}. At lowest order S_K,
//! C_K, and D_K vanish; they are still assembled by quadrature and their
//! vanishing is asserted in tests rather than assumed.

use super::{LocalEstimator, SourceField};
use crate::error::{Error, Result};
use crate::fem::{element_mass, DofMap, ElementBasis, Quadrature};
use crate::geom::{perp, Point};
use crate::mesh::Mesh;
use nalgebra::{DVector, Matrix3, Vector2};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct ElementBlock {
    pub element: usize,
    /// Global DOF ids of the three local edges.
    pub dofs: [usize; 3],
    pub h_k: f64,
    /// M_K = h_K^2 int phi_i . phi_j.
    pub mass: Matrix3<f64>,
    /// S_K = h_K^2 int phi_i . curl curl phi_j.
    pub cross_curl: Matrix3<f64>,
    /// C_K = h_K^2 int curl curl phi_i . curl curl phi_j.
    pub curl_curl: Matrix3<f64>,
    /// D_K = h_K^2 int div phi_i div phi_j.
    pub div_div: Matrix3<f64>,
}

#[derive(Debug, Clone)]
pub struct FaceBlock {
    pub edge: usize,
    /// The two incident elements (K1, K2).
    pub elements: (usize, usize),
    pub dofs: ([usize; 3], [usize; 3]),
    pub h_f: f64,
    /// (C_{K1K1f}, C_{K2K2f}, C_{K1K2f}); rows of the cross block are K1
    /// DOFs, columns K2 DOFs.
    pub curl_jump: (Matrix3<f64>, Matrix3<f64>, Matrix3<f64>),
    /// The analogous normal-jump family (M_{K1K1f}, M_{K2K2f}, M_{K1K2f}).
    pub normal_jump: (Matrix3<f64>, Matrix3<f64>, Matrix3<f64>),
}

#[derive(Debug, Clone)]
pub struct LocalMatrices {
    pub elements: Vec<ElementBlock>,
    pub faces: Vec<FaceBlock>,
    /// Edge id -> index into `faces` (interior edges only).
    pub face_of_edge: Vec<Option<usize>>,
}

/// Assembles all local matrix families with the given quadrature.
pub fn build_local_matrices(
    mesh: &Mesh,
    dofmap: &DofMap,
    quad: &Quadrature,
) -> Result<LocalMatrices> {
    let mut elements = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let basis = ElementBasis::new(mesh, t)?;
        let pts = mesh.triangle_points(t);
        let geo = mesh.element_geometry(t)?;
        let h_k2 = geo.h_k * geo.h_k;
        let incidence = mesh.triangle_edges(t);
        let mass = element_mass(&basis, pts, quad) * h_k2;
        let mut cross_curl = Matrix3::zeros();
        let mut curl_curl = Matrix3::zeros();
        let mut div_div = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                cross_curl[(i, j)] = h_k2
                    * quad.integrate_triangle(pts, &mut |p: Point| {
                        basis.value(i, p).dot(&basis.curl_curl(j, p))
                    });
                curl_curl[(i, j)] = h_k2
                    * quad.integrate_triangle(pts, &mut |p: Point| {
                        basis.curl_curl(i, p).dot(&basis.curl_curl(j, p))
                    });
                div_div[(i, j)] = h_k2
                    * quad.integrate_triangle(pts, &mut |p: Point| {
                        basis.div(i, p) * basis.div(j, p)
                    });
            }
        }
        elements.push(ElementBlock {
            element: t,
            dofs: incidence.map(|inc| dofmap.dof_of_edge(inc.edge)),
            h_k: geo.h_k,
            mass: Matrix3::from_fn(|i, j| mass[(i, j)]),
            cross_curl,
            curl_curl,
            div_div,
        });
    }

    let mut faces = Vec::new();
    let mut face_of_edge = vec![None; mesh.n_edges()];
    for e in 0..mesh.n_edges() {
        if mesh.is_boundary_edge(e) {
            continue;
        }
        let (t1, t2) = mesh.edge_triangles(e);
        let t2 = t2.expect("interior edge with one triangle");
        let b1 = ElementBasis::new(mesh, t1)?;
        let b2 = ElementBasis::new(mesh, t2)?;
        let g1 = mesh.element_geometry(t1)?;
        let g2 = mesh.element_geometry(t2)?;
        let inc1 = mesh.triangle_edges(t1);
        let inc2 = mesh.triangle_edges(t2);
        let l1 = (0..3).find(|&l| inc1[l].edge == e).unwrap();
        let l2 = (0..3).find(|&l| inc2[l].edge == e).unwrap();
        let nu1 = g1.edges[l1].normal;
        let nu2 = g2.edges[l2].normal;
        let [a, b] = mesh.edge_points(e);
        let h_f = g1.edges[l1].h_f;

        let curl_block = |ba: &ElementBasis, na, bb: &ElementBasis, nb| {
            Matrix3::from_fn(|i, j| {
                h_f * quad.integrate_edge(a, b, &mut |_p: Point| {
                    (perp(na) * ba.curl(i)).dot(&(perp(nb) * bb.curl(j)))
                })
            })
        };
        let normal_block = |ba: &ElementBasis, na: crate::geom::Vec2,
                            bb: &ElementBasis, nb: crate::geom::Vec2| {
            Matrix3::from_fn(|i, j| {
                h_f * quad.integrate_edge(a, b, &mut |p: Point| {
                    ba.value(i, p).dot(&na) * bb.value(j, p).dot(&nb)
                })
            })
        };

        face_of_edge[e] = Some(faces.len());
        faces.push(FaceBlock {
            edge: e,
            elements: (t1, t2),
            dofs: (
                inc1.map(|inc| dofmap.dof_of_edge(inc.edge)),
                inc2.map(|inc| dofmap.dof_of_edge(inc.edge)),
            ),
            h_f,
            curl_jump: (
                curl_block(&b1, nu1, &b1, nu1),
                curl_block(&b2, nu2, &b2, nu2),
                curl_block(&b1, nu1, &b2, nu2),
            ),
            normal_jump: (
                normal_block(&b1, nu1, &b1, nu1),
                normal_block(&b2, nu2, &b2, nu2),
                normal_block(&b1, nu1, &b2, nu2),
            ),
        });
    }

    Ok(LocalMatrices {
        elements,
        faces,
        face_of_edge,
    })
}

/// Elementwise L2 projection of the source onto the local Whitney space:
/// three coefficients per element.
pub fn project_source<S: SourceField>(
    mesh: &Mesh,
    source: &S,
    quad: &Quadrature,
) -> Result<Vec<[Complex64; 3]>> {
    let mut coeffs = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let basis = ElementBasis::new(mesh, t)?;
        let pts = mesh.triangle_points(t);
        let mass = element_mass(&basis, pts, quad);
        let inv = mass
            .try_inverse()
            .ok_or_else(|| Error::Estimator(format!("singular local mass on element {t}")))?;
        let mut load = [Complex64::ZERO; 3];
        for (l, entry) in load.iter_mut().enumerate() {
            *entry = quad.integrate_triangle(pts, &mut |p: Point| {
                let f = source.eval(t, p);
                let phi = basis.value(l, p);
                f.x * phi.x + f.y * phi.y
            });
        }
        let mut projected = [Complex64::ZERO; 3];
        for i in 0..3 {
            for j in 0..3 {
                projected[i] += load[j] * inv[(i, j)];
            }
        }
        coeffs.push(projected);
    }
    Ok(coeffs)
}

/// The projected source as a field, for running the quadrature path on the
/// same data as the quadratic forms.
pub struct ProjectedSource<'a> {
    bases: Vec<ElementBasis>,
    coeffs: &'a [[Complex64; 3]],
}

impl<'a> ProjectedSource<'a> {
    pub fn new(mesh: &Mesh, coeffs: &'a [[Complex64; 3]]) -> Result<Self> {
        let bases = (0..mesh.n_triangles())
            .map(|t| ElementBasis::new(mesh, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bases, coeffs })
    }
}

impl SourceField for ProjectedSource<'_> {
    fn eval(&self, element: usize, p: Point) -> Vector2<Complex64> {
        let basis = &self.bases[element];
        let mut value = Vector2::new(Complex64::ZERO, Complex64::ZERO);
        for l in 0..3 {
            let phi = basis.value(l, p);
            let c = self.coeffs[element][l];
            value.x += c * phi.x;
            value.y += c * phi.y;
        }
        value
    }
}

fn qform(x: &[Complex64; 3], a: &Matrix3<f64>, y: &[Complex64; 3]) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            acc += x[i].conj() * a[(i, j)] * y[j];
        }
    }
    acc
}

fn gather(coeffs: &DVector<Complex64>, dofs: &[usize; 3]) -> [Complex64; 3] {
    [coeffs[dofs[0]], coeffs[dofs[1]], coeffs[dofs[2]]]
}

/// Evaluates the estimator from the quadratic-form expansion. `f_coeffs`
/// are the per-element projection coefficients of the source; the result
/// matches [`super::estimate_classical`] run on the projected source.
pub fn estimate_from_forms(
    coeffs: &DVector<Complex64>,
    f_coeffs: &[[Complex64; 3]],
    matrices: &LocalMatrices,
    mesh: &Mesh,
    dofmap: &DofMap,
) -> Result<LocalEstimator> {
    if coeffs.len() != dofmap.n_total() {
        return Err(Error::Estimator(format!(
            "coefficient vector has length {}, expected {}",
            coeffs.len(),
            dofmap.n_total()
        )));
    }
    if f_coeffs.len() != matrices.elements.len() || matrices.elements.len() != mesh.n_triangles() {
        return Err(Error::Estimator(
            "local matrices and source coefficients do not match the mesh".into(),
        ));
    }

    let n = mesh.n_triangles();
    let mut estimator = LocalEstimator {
        eta1_sq: vec![0.0; n],
        eta2_sq: vec![0.0; n],
        eta3_sq: vec![0.0; n],
        eta4_sq: vec![0.0; n],
    };

    for (k, block) in matrices.elements.iter().enumerate() {
        let e_loc = gather(coeffs, &block.dofs);
        let f_loc = f_coeffs[k];
        estimator.eta1_sq[k] = qform(&f_loc, &block.mass, &f_loc).re
            + qform(&e_loc, &block.curl_curl, &e_loc).re
            + qform(&e_loc, &block.mass, &e_loc).re
            - 2.0 * qform(&f_loc, &block.cross_curl, &e_loc).re
            + 2.0 * qform(&f_loc, &block.mass, &e_loc).re
            - 2.0 * qform(&e_loc, &block.cross_curl, &e_loc).re;
        estimator.eta2_sq[k] = qform(&e_loc, &block.div_div, &e_loc).re;

        for inc in mesh.triangle_edges(k) {
            let Some(face_idx) = matrices.face_of_edge[inc.edge] else {
                continue;
            };
            let face = &matrices.faces[face_idx];
            let e1 = gather(coeffs, &face.dofs.0);
            let e2 = gather(coeffs, &face.dofs.1);
            // The face total is symmetric in the two sides; evaluate it as
            // seen from this element so each element's sum is independent.
            let (from_first, c_own, c_other, m_own, m_other) = if face.elements.0 == k {
                (true, &face.curl_jump.0, &face.curl_jump.1, &face.normal_jump.0, &face.normal_jump.1)
            } else {
                (false, &face.curl_jump.1, &face.curl_jump.0, &face.normal_jump.1, &face.normal_jump.0)
            };
            let (own, other) = if from_first { (&e1, &e2) } else { (&e2, &e1) };
            let cross_curl = if from_first {
                qform(&e1, &face.curl_jump.2, &e2).re
            } else {
                // C_{K2 K1 f} is the transpose of the stored cross block.
                qform(&e2, &face.curl_jump.2.transpose(), &e1).re
            };
            let cross_normal = if from_first {
                qform(&e1, &face.normal_jump.2, &e2).re
            } else {
                qform(&e2, &face.normal_jump.2.transpose(), &e1).re
            };
            estimator.eta3_sq[k] += 0.5
                * (qform(own, c_own, own).re + qform(other, c_other, other).re
                    + 2.0 * cross_curl);
            estimator.eta4_sq[k] += 0.5
                * (qform(own, m_own, own).re + qform(other, m_other, other).re
                    + 2.0 * cross_normal);
        }
    }
    Ok(estimator)
}
