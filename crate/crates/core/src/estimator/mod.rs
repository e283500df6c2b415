//! Residual a posteriori error estimation for the cavity problem at the
//! eps_r k^2 = 1, mu_r = 1 normalization.
//!
//! The four local contributions per element K are
//!
//! - eta1: h_K^2 || F - curl curl E_h + E_h ||^2 on K,
//! - eta2: h_K^2 || div E_h ||^2 on K,
//! - eta3: 1/2 sum over interior faces of h_f times the squared tangential
//!   jump of curl E_h,
//! - eta4: the same with the normal jump of E_h,
//!
//! each computable either by direct quadrature ([`estimate_classical`]) or
//! through the local-matrix quadratic forms ([`estimate_from_forms`]).
//! Boundary faces contribute nothing.

mod forms;

pub use forms::{
    build_local_matrices, estimate_from_forms, project_source, ElementBlock, FaceBlock,
    LocalMatrices, ProjectedSource,
};

use crate::error::{Error, Result};
use crate::fem::{eval_fe_curl, eval_fe_field, DofMap, ElementBasis, Material, Quadrature};
use crate::geom::{perp, Point};
use crate::mesh::Mesh;
use nalgebra::{DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

/// Per-element estimator contributions; all four terms are squared norms.
#[derive(Debug, Clone)]
pub struct LocalEstimator {
    pub eta1_sq: Vec<f64>,
    pub eta2_sq: Vec<f64>,
    pub eta3_sq: Vec<f64>,
    pub eta4_sq: Vec<f64>,
}

impl LocalEstimator {
    pub fn n_elements(&self) -> usize {
        self.eta1_sq.len()
    }

    pub fn eta_k_sq(&self, k: usize) -> f64 {
        self.eta1_sq[k] + self.eta2_sq[k] + self.eta3_sq[k] + self.eta4_sq[k]
    }

    pub fn eta_k(&self, k: usize) -> f64 {
        self.eta_k_sq(k).max(0.0).sqrt()
    }

    /// Global estimator: root of the sum of all element contributions.
    pub fn global(&self) -> f64 {
        (0..self.n_elements())
            .map(|k| self.eta_k_sq(k))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }
}

/// A source field that may depend on the element it is evaluated in; this
/// is what lets the elementwise projection of F run through the same
/// estimation path as the exact F.
pub trait SourceField: Sync {
    fn eval(&self, element: usize, p: Point) -> Vector2<Complex64>;
}

/// A plain pointwise source.
pub struct PointSource<F: Fn(Point) -> Vector2<Complex64> + Sync>(pub F);

impl<F: Fn(Point) -> Vector2<Complex64> + Sync> SourceField for PointSource<F> {
    fn eval(&self, _element: usize, p: Point) -> Vector2<Complex64> {
        (self.0)(p)
    }
}

/// Direct-quadrature evaluation of the four estimator terms.
pub fn estimate_classical<S: SourceField>(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    source: &S,
    material: &Material,
    quad: &Quadrature,
) -> Result<LocalEstimator> {
    estimate_classical_impl(mesh, dofmap, coeffs, source, material, quad, 1.0)
}

/// Test hook for the selftest's mutation check: flips the sign of the
/// second restriction in both jump operators.
#[doc(hidden)]
pub fn estimate_classical_with_flipped_jump<S: SourceField>(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    source: &S,
    material: &Material,
    quad: &Quadrature,
) -> Result<LocalEstimator> {
    estimate_classical_impl(mesh, dofmap, coeffs, source, material, quad, -1.0)
}

fn estimate_classical_impl<S: SourceField>(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    source: &S,
    material: &Material,
    quad: &Quadrature,
    jump_sign: f64,
) -> Result<LocalEstimator> {
    if coeffs.len() != dofmap.n_total() {
        return Err(Error::Estimator(format!(
            "coefficient vector has length {}, expected {}",
            coeffs.len(),
            dofmap.n_total()
        )));
    }
    if !material.is_normalized() {
        return Err(Error::Estimator(
            "estimator requires eps_r k^2 = 1 and mu_r = 1".into(),
        ));
    }

    let per_element: Result<Vec<[f64; 4]>> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| element_terms(mesh, dofmap, coeffs, source, quad, t, jump_sign))
        .collect();
    let per_element = per_element?;

    Ok(LocalEstimator {
        eta1_sq: per_element.iter().map(|v| v[0]).collect(),
        eta2_sq: per_element.iter().map(|v| v[1]).collect(),
        eta3_sq: per_element.iter().map(|v| v[2]).collect(),
        eta4_sq: per_element.iter().map(|v| v[3]).collect(),
    })
}

fn element_terms<S: SourceField>(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    source: &S,
    quad: &Quadrature,
    t: usize,
    jump_sign: f64,
) -> Result<[f64; 4]> {
    let basis = ElementBasis::new(mesh, t)?;
    let pts = mesh.triangle_points(t);
    let geo = mesh.element_geometry(t)?;
    let h_k2 = geo.h_k * geo.h_k;
    let incidence = mesh.triangle_edges(t);

    // Equation residual F - curl curl E_h + E_h; the curl-curl term
    // vanishes at lowest order but is kept in the integrand.
    let eta1 = h_k2
        * quad.integrate_triangle(pts, &mut |p: Point| {
            let f = source.eval(t, p);
            let e = eval_fe_field(mesh, dofmap, coeffs, t, &basis, p);
            let mut cc = Vector2::new(Complex64::ZERO, Complex64::ZERO);
            for l in 0..3 {
                let c = coeffs[dofmap.dof_of_edge(incidence[l].edge)];
                let v = basis.curl_curl(l, p);
                cc.x += c * v.x;
                cc.y += c * v.y;
            }
            (f.x - cc.x + e.x).norm_sqr() + (f.y - cc.y + e.y).norm_sqr()
        });

    // Divergence residual; identically zero for the Whitney basis.
    let eta2 = h_k2
        * quad.integrate_triangle(pts, &mut |p: Point| {
            let div: Complex64 = (0..3)
                .map(|l| coeffs[dofmap.dof_of_edge(incidence[l].edge)] * basis.div(l, p))
                .sum();
            div.norm_sqr()
        });

    let mut eta3 = 0.0;
    let mut eta4 = 0.0;
    for (l, edge_geo) in geo.edges.iter().enumerate() {
        let e = incidence[l].edge;
        if mesh.is_boundary_edge(e) {
            continue;
        }
        let (t1, t2) = mesh.edge_triangles(e);
        let other = if t1 == t { t2.unwrap() } else { t1 };
        let other_basis = ElementBasis::new(mesh, other)?;
        let other_geo = mesh.element_geometry(other)?;
        let other_incidence = mesh.triangle_edges(other);
        let l_other = (0..3)
            .find(|&m| other_incidence[m].edge == e)
            .expect("edge adjacency out of sync");
        let nu_self = edge_geo.normal;
        let nu_other = other_geo.edges[l_other].normal;
        let [a, b] = mesh.edge_points(e);
        let h_f = edge_geo.h_f;

        let curl_self = eval_fe_curl(mesh, dofmap, coeffs, t, &basis);
        let curl_other = eval_fe_curl(mesh, dofmap, coeffs, other, &other_basis);
        // Tangential jump of the (scalar, in 2D) curl: s x nu = s * perp(nu).
        let jump_t = quad.integrate_edge(a, b, &mut |_p: Point| {
            let j_x = curl_self * perp(nu_self).x + curl_other * perp(nu_other).x * jump_sign;
            let j_y = curl_self * perp(nu_self).y + curl_other * perp(nu_other).y * jump_sign;
            j_x.norm_sqr() + j_y.norm_sqr()
        });
        eta3 += 0.5 * h_f * jump_t;

        // Normal jump of the field itself.
        let jump_n = quad.integrate_edge(a, b, &mut |p: Point| {
            let v_self = eval_fe_field(mesh, dofmap, coeffs, t, &basis, p);
            let v_other = eval_fe_field(mesh, dofmap, coeffs, other, &other_basis, p);
            let j = v_self.x * nu_self.x + v_self.y * nu_self.y
                + (v_other.x * nu_other.x + v_other.y * nu_other.y) * jump_sign;
            j.norm_sqr()
        });
        eta4 += 0.5 * h_f * jump_n;
    }

    Ok([eta1, eta2, eta3, eta4])
}

/// Maximum marking strategy: all elements with eta_K >= theta * max eta_K'.
pub fn mark(estimator: &LocalEstimator, theta: f64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidTheta(theta));
    }
    let n = estimator.n_elements();
    if n == 0 {
        return Err(Error::Estimator("no elements to mark".into()));
    }
    let max = (0..n).map(|k| estimator.eta_k(k)).fold(0.0, f64::max);
    Ok((0..n)
        .filter(|&k| estimator.eta_k(k) >= theta * max)
        .collect())
}
