//! Lowest-order Nedelec (Whitney edge) basis on a triangle.
//!
//! Local edge `l` runs from vertex slot `l` to slot `(l+1) % 3`; the basis
//! function is `lambda_l grad(lambda_{l+1}) - lambda_{l+1} grad(lambda_l)`,
//! flipped to the canonical global edge orientation by the incidence sign.
//! Its tangential component integrates to one along its own edge and to
//! zero along the other two.

use crate::error::{Error, Result};
use crate::geom::{cross2, perp, signed_area2, Point, Vec2};
use crate::mesh::Mesh;

const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct ElementBasis {
    points: [Point; 3],
    grads: [Vec2; 3],
    signs: [f64; 3],
    curls: [f64; 3],
    area: f64,
}

impl ElementBasis {
    pub fn new(mesh: &Mesh, t: usize) -> Result<Self> {
        if t >= mesh.n_triangles() {
            return Err(Error::InvalidElement(t));
        }
        let signs = mesh.triangle_edges(t).map(|inc| inc.sign);
        Self::from_points(mesh.triangle_points(t), signs)
    }

    /// Basis on a free-standing triangle; `signs` flip each local edge to
    /// its canonical orientation (all +1 treats local orientation as
    /// canonical).
    pub fn from_points(points: [Point; 3], signs: [f64; 3]) -> Result<Self> {
        let area = 0.5 * signed_area2(points[0], points[1], points[2]);
        if area.abs() < DEGENERATE_AREA {
            return Err(Error::DegenerateTriangle(area));
        }
        let grads = [
            perp(points[2] - points[1]) / (2.0 * area),
            perp(points[0] - points[2]) / (2.0 * area),
            perp(points[1] - points[0]) / (2.0 * area),
        ];
        let mut curls = [0.0; 3];
        for l in 0..3 {
            curls[l] = signs[l] * 2.0 * cross2(grads[l], grads[(l + 1) % 3]);
        }
        Ok(Self {
            points,
            grads,
            signs,
            curls,
            area,
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let a2 = 2.0 * self.area;
        [
            signed_area2(p, self.points[1], self.points[2]) / a2,
            signed_area2(p, self.points[2], self.points[0]) / a2,
            signed_area2(p, self.points[0], self.points[1]) / a2,
        ]
    }

    /// Value of the basis function of local edge `l` at `p`.
    pub fn value(&self, l: usize, p: Point) -> Vec2 {
        let lambda = self.barycentric(p);
        let (i, j) = (l, (l + 1) % 3);
        (self.grads[j] * lambda[i] - self.grads[i] * lambda[j]) * self.signs[l]
    }

    /// Curl of the basis function of local edge `l`; constant over the
    /// element at lowest order.
    pub fn curl(&self, l: usize) -> f64 {
        self.curls[l]
    }

    /// Curl of the curl; vanishes identically at lowest order but kept as a
    /// basis query so higher-order terms assemble through the same path.
    pub fn curl_curl(&self, _l: usize, _p: Point) -> Vec2 {
        Vec2::zeros()
    }

    /// Divergence; vanishes identically at lowest order.
    pub fn div(&self, _l: usize, _p: Point) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::Quadrature;
    use crate::mesh::lshape_mesh;

    fn reference() -> ElementBasis {
        ElementBasis::from_points(
            [
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            [1.0; 3],
        )
        .unwrap()
    }

    #[test]
    fn edge_duality_on_reference_triangle() {
        let basis = reference();
        let quad = Quadrature::new(4, 3).unwrap();
        let pts = basis.points;
        for l in 0..3 {
            for m in 0..3 {
                let (a, b) = (pts[m], pts[(m + 1) % 3]);
                let tangent = (b - a).normalize();
                let integral =
                    quad.integrate_edge(a, b, &mut |p: Point| basis.value(l, p).dot(&tangent));
                let expected = if l == m { 1.0 } else { 0.0 };
                assert!(
                    (integral - expected).abs() < 1e-13,
                    "edge {m}, basis {l}: {integral}"
                );
            }
        }
    }

    #[test]
    fn edge_duality_with_canonical_signs() {
        let mesh = lshape_mesh(1).unwrap();
        let quad = Quadrature::new(4, 3).unwrap();
        for t in [0usize, 5, 11] {
            let basis = ElementBasis::new(&mesh, t).unwrap();
            let incidence = mesh.triangle_edges(t);
            for l in 0..3 {
                for m in 0..3 {
                    let [a, b] = mesh.edge_points(incidence[m].edge);
                    let tangent = (b - a).normalize();
                    let integral =
                        quad.integrate_edge(a, b, &mut |p: Point| basis.value(l, p).dot(&tangent));
                    let expected = if l == m { 1.0 } else { 0.0 };
                    assert!((integral - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn curl_is_constant_and_matches_finite_differences() {
        let basis = ElementBasis::from_points(
            [
                Point::new(0.1, 0.2),
                Point::new(1.4, 0.3),
                Point::new(0.6, 1.5),
            ],
            [1.0, -1.0, 1.0],
        )
        .unwrap();
        let h = 1e-6;
        for l in 0..3 {
            for p in [Point::new(0.7, 0.6), Point::new(0.5, 0.5)] {
                let dy_dx = (basis.value(l, Point::new(p.x + h, p.y)).y
                    - basis.value(l, Point::new(p.x - h, p.y)).y)
                    / (2.0 * h);
                let dx_dy = (basis.value(l, Point::new(p.x, p.y + h)).x
                    - basis.value(l, Point::new(p.x, p.y - h)).x)
                    / (2.0 * h);
                assert!((dy_dx - dx_dy - basis.curl(l)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn div_and_curl_curl_vanish() {
        let basis = reference();
        let p = Point::new(0.25, 0.25);
        for l in 0..3 {
            assert_eq!(basis.div(l, p), 0.0);
            assert_eq!(basis.curl_curl(l, p), Vec2::zeros());
            // Finite-difference check that div really is zero pointwise.
            let h = 1e-6;
            let ddx = (basis.value(l, Point::new(p.x + h, p.y)).x
                - basis.value(l, Point::new(p.x - h, p.y)).x)
                / (2.0 * h);
            let ddy = (basis.value(l, Point::new(p.x, p.y + h)).y
                - basis.value(l, Point::new(p.x, p.y - h)).y)
                / (2.0 * h);
            assert!((ddx + ddy).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let result = ElementBasis::from_points(
            [
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
            ],
            [1.0; 3],
        );
        assert!(matches!(result, Err(Error::DegenerateTriangle(_))));
    }
}
