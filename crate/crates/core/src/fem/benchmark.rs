//! The singular L-shape benchmark: exact solution, matching source term,
//! and boundary data.
//!
//! With k = 1 and eps_r = mu_r = 1, the field E = grad(r^(2/3) sin(2 phi/3))
//! solves curl curl E - E = -E (its curl vanishes), so the source is -E and
//! the boundary data is the tangential trace of E. The polar angle is
//! measured from the positive x-axis so that the two slit faces sit at
//! phi = 0 and phi = 3 pi / 2.

use crate::error::{Error, Result};
use crate::geom::{Point, Vec2};
use nalgebra::Vector2;
use num_complex::Complex64;

const ORIGIN_TOL: f64 = 1e-14;

/// Polar angle in [0, 3 pi / 2] with the slit faces at the interval ends.
pub fn polar_angle(p: Point) -> f64 {
    let phi = p.y.atan2(p.x);
    if phi < 0.0 {
        phi + 2.0 * std::f64::consts::PI
    } else {
        phi
    }
}

/// The scalar potential r^(2/3) sin(2 phi / 3).
pub fn scalar_potential(p: Point) -> f64 {
    let r = p.coords.norm();
    let phi = polar_angle(p);
    r.powf(2.0 / 3.0) * (2.0 * phi / 3.0).sin()
}

/// Exact solution grad(r^(2/3) sin(2 phi / 3)); diverges like r^(-1/3) at
/// the reentrant corner.
pub fn exact_solution(p: Point) -> Result<Vec2> {
    let r = p.coords.norm();
    if r < ORIGIN_TOL {
        return Err(Error::Fem(
            "exact solution is singular at the reentrant corner".into(),
        ));
    }
    let phi = polar_angle(p);
    let amp = (2.0 / 3.0) * r.powf(-1.0 / 3.0);
    let (sin_p, cos_p) = phi.sin_cos();
    let e_r = Vec2::new(cos_p, sin_p);
    let e_phi = Vec2::new(-sin_p, cos_p);
    let (sin_a, cos_a) = (2.0 * phi / 3.0).sin_cos();
    Ok((e_r * sin_a + e_phi * cos_a) * amp)
}

/// Source term of the benchmark: F = curl curl E - E = -E.
pub fn benchmark_source(p: Point) -> Result<Vec2> {
    exact_solution(p).map(|e| -e)
}

/// Source as a complex field for assembly.
pub fn source_field(p: Point) -> Vector2<Complex64> {
    let f = benchmark_source(p).expect("quadrature point at the singular corner");
    Vector2::new(Complex64::new(f.x, 0.0), Complex64::new(f.y, 0.0))
}

/// Boundary data for the tangential lifting.
pub fn boundary_field(p: Point) -> Vec2 {
    exact_solution(p).expect("boundary quadrature point at the singular corner")
}

#[cfg(test)]
mod tests {
    use super::*;

    // Interior points away from the slit, where central differences stay
    // inside the domain.
    fn sample_points() -> Vec<Point> {
        vec![
            Point::new(0.3, 0.4),
            Point::new(-0.5, 0.2),
            Point::new(-0.7, -0.6),
            Point::new(-0.05, -0.9),
            Point::new(0.9, 0.95),
        ]
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for p in sample_points() {
            let e = exact_solution(p).unwrap();
            let fd = Vec2::new(
                (scalar_potential(Point::new(p.x + h, p.y))
                    - scalar_potential(Point::new(p.x - h, p.y)))
                    / (2.0 * h),
                (scalar_potential(Point::new(p.x, p.y + h))
                    - scalar_potential(Point::new(p.x, p.y - h)))
                    / (2.0 * h),
            );
            assert!((e - fd).norm() < 1e-5, "at {p:?}: {e:?} vs {fd:?}");
        }
    }

    #[test]
    fn value_on_positive_x_axis() {
        let e = exact_solution(Point::new(1.0, 0.0)).unwrap();
        assert!((e - Vec2::new(0.0, 2.0 / 3.0)).norm() < 1e-14);
        // Same point by differencing the potential: central in x along the
        // slit face (where the potential vanishes), one-sided in y to stay
        // inside the domain.
        let h = 1e-6;
        let fd_x = (scalar_potential(Point::new(1.0 + h, 0.0))
            - scalar_potential(Point::new(1.0 - h, 0.0)))
            / (2.0 * h);
        let fd_y = (scalar_potential(Point::new(1.0, h)) - scalar_potential(Point::new(1.0, 0.0)))
            / h;
        assert!((e - Vec2::new(fd_x, fd_y)).norm() < 1e-5);
    }

    #[test]
    fn curl_vanishes() {
        let h = 1e-6;
        for p in sample_points() {
            let dy_dx = (exact_solution(Point::new(p.x + h, p.y)).unwrap().y
                - exact_solution(Point::new(p.x - h, p.y)).unwrap().y)
                / (2.0 * h);
            let dx_dy = (exact_solution(Point::new(p.x, p.y + h)).unwrap().x
                - exact_solution(Point::new(p.x, p.y - h)).unwrap().x)
                / (2.0 * h);
            assert!((dy_dx - dx_dy).abs() < 1e-5);
        }
    }

    #[test]
    fn magnitude_scales_like_inverse_cube_root() {
        for p in sample_points() {
            let e = exact_solution(p).unwrap();
            let r = p.coords.norm();
            assert!((e.norm() * r.powf(1.0 / 3.0) - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn source_is_negated_solution_and_divergence_free() {
        let h = 1e-5;
        for p in sample_points() {
            let f = benchmark_source(p).unwrap();
            let e = exact_solution(p).unwrap();
            assert!((f + e).norm() < 1e-15);
            let ddx = (benchmark_source(Point::new(p.x + h, p.y)).unwrap().x
                - benchmark_source(Point::new(p.x - h, p.y)).unwrap().x)
                / (2.0 * h);
            let ddy = (benchmark_source(Point::new(p.x, p.y + h)).unwrap().y
                - benchmark_source(Point::new(p.x, p.y - h)).unwrap().y)
                / (2.0 * h);
            assert!((ddx + ddy).abs() < 1e-4, "div F = {} at {p:?}", ddx + ddy);
        }
    }

    #[test]
    fn origin_is_rejected() {
        assert!(exact_solution(Point::origin()).is_err());
    }

    #[test]
    fn potential_vanishes_on_slit_faces() {
        assert!(scalar_potential(Point::new(0.5, 0.0)).abs() < 1e-14);
        // Just inside the domain next to the lower slit face.
        let p = Point::new(-1e-12, -0.5);
        assert!(scalar_potential(p).abs() < 1e-6);
    }
}
