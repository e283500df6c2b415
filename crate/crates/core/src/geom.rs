//! Small 2D geometry helpers shared across modules.

pub type Point = nalgebra::Point2<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;

/// z-component of the cross product of two in-plane vectors.
#[inline]
pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotate a vector by +90 degrees (counterclockwise).
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Twice the signed area of the triangle (a, b, c); positive for
/// counterclockwise orientation.
#[inline]
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    cross2(b - a, c - a)
}
