//! Coarse meshes of the L-shaped domain [-1,1]^2 \ [0,1]x[-1,0].

use super::{refine, Mesh};
use crate::error::{Error, Result};
use crate::geom::Point;

const BOUNDARY_TOL: f64 = 1e-12;

/// Conforming mesh of the L-shape. `resolution = 1` is the coarsest mesh
/// (18 triangles, 22 interior edges, so the eliminated system fits in 5
/// qubits); every further resolution step refines all elements, splitting
/// each triangle into four.
pub fn lshape_mesh(resolution: usize) -> Result<Mesh> {
    if resolution == 0 {
        return Err(Error::Mesh("resolution must be at least 1".into()));
    }
    let mut mesh = coarse_lshape()?;
    for _ in 1..resolution {
        let all: Vec<usize> = (0..mesh.n_triangles()).collect();
        mesh = refine(&mesh, &all)?;
    }
    Ok(mesh)
}

/// The 18-triangle base mesh: each of the three unit squares is fanned
/// around its center, with extra perimeter points on the two slit faces and
/// on the two interior square-to-square interfaces.
fn coarse_lshape() -> Result<Mesh> {
    let vertices = vec![
        Point::new(-1.0, -1.0), // 0
        Point::new(0.0, -1.0),  // 1
        Point::new(0.0, -0.5),  // 2
        Point::new(0.0, 0.0),   // 3, reentrant corner
        Point::new(0.5, 0.0),   // 4
        Point::new(1.0, 0.0),   // 5
        Point::new(1.0, 1.0),   // 6
        Point::new(0.0, 1.0),   // 7
        Point::new(-1.0, 1.0),  // 8
        Point::new(-1.0, 0.0),  // 9
        Point::new(-0.5, -0.5), // 10, center of the lower-left square
        Point::new(-0.5, 0.0),  // 11
        Point::new(-0.5, 0.5),  // 12, center of the upper-left square
        Point::new(0.0, 0.5),   // 13
        Point::new(0.5, 0.5),   // 14, center of the upper-right square
    ];
    let fans: [[usize; 3]; 18] = [
        [0, 1, 10],
        [1, 2, 10],
        [2, 3, 10],
        [3, 11, 10],
        [11, 9, 10],
        [9, 0, 10],
        [9, 11, 12],
        [11, 3, 12],
        [3, 13, 12],
        [13, 7, 12],
        [7, 8, 12],
        [8, 9, 12],
        [3, 4, 14],
        [4, 5, 14],
        [5, 6, 14],
        [6, 7, 14],
        [7, 13, 14],
        [13, 3, 14],
    ];
    // Seed newest-vertex bisection: rotate so the longest edge sits between
    // the first two vertices.
    let triangles: Vec<[usize; 3]> = fans
        .iter()
        .map(|tri| {
            let mut longest = 0;
            let mut best = 0.0;
            for l in 0..3 {
                let len = (vertices[tri[(l + 1) % 3]] - vertices[tri[l]]).norm();
                if len > best {
                    best = len;
                    longest = l;
                }
            }
            [tri[longest], tri[(longest + 1) % 3], tri[(longest + 2) % 3]]
        })
        .collect();
    let n = triangles.len();
    Mesh::build(vertices, triangles, vec![0; n], (0..n).collect())
}

/// Whether a point lies on the boundary of the L-shape, within 1e-12.
pub fn on_lshape_boundary(p: Point) -> bool {
    let t = BOUNDARY_TOL;
    let within = |v: f64, lo: f64, hi: f64| v >= lo - t && v <= hi + t;
    ((p.x + 1.0).abs() <= t && within(p.y, -1.0, 1.0))
        || ((p.x - 1.0).abs() <= t && within(p.y, 0.0, 1.0))
        || ((p.y + 1.0).abs() <= t && within(p.x, -1.0, 0.0))
        || ((p.y - 1.0).abs() <= t && within(p.x, -1.0, 1.0))
        || (p.y.abs() <= t && within(p.x, 0.0, 1.0))
        || (p.x.abs() <= t && within(p.y, -1.0, 0.0))
}
