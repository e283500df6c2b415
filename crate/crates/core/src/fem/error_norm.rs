//! True H(curl) error against a known exact solution.

use super::dofmap::DofMap;
use super::quadrature::Quadrature;
use super::system::{eval_fe_curl, eval_fe_field};
use super::whitney::ElementBasis;
use crate::error::Result;
use crate::geom::{Point, Vec2};
use crate::mesh::Mesh;
use nalgebra::DVector;
use num_complex::Complex64;

/// Per-element and global H(curl) errors of the FE field given by the full
/// coefficient vector, against `exact` with elementwise-constant-free curl
/// `exact_curl`.
pub fn hcurl_error(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &DVector<Complex64>,
    exact: &dyn Fn(Point) -> Vec2,
    exact_curl: &dyn Fn(Point) -> f64,
    quad: &Quadrature,
) -> Result<(Vec<f64>, f64)> {
    assert_eq!(coeffs.len(), dofmap.n_total());
    let mut per_element = Vec::with_capacity(mesh.n_triangles());
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let basis = ElementBasis::new(mesh, t)?;
        let pts = mesh.triangle_points(t);
        let fe_curl = eval_fe_curl(mesh, dofmap, coeffs, t, &basis);
        let l2 = quad.integrate_triangle(pts, &mut |p: Point| {
            let fe = eval_fe_field(mesh, dofmap, coeffs, t, &basis, p);
            let ex = exact(p);
            (fe.x - Complex64::new(ex.x, 0.0)).norm_sqr()
                + (fe.y - Complex64::new(ex.y, 0.0)).norm_sqr()
        });
        let curl = quad.integrate_triangle(pts, &mut |p: Point| {
            (fe_curl - Complex64::new(exact_curl(p), 0.0)).norm_sqr()
        });
        let sq = l2 + curl;
        per_element.push(sq.max(0.0).sqrt());
        total += sq;
    }
    Ok((per_element, total.max(0.0).sqrt()))
}
