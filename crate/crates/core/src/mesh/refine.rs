//! Newest-vertex bisection with conformity closure.
//!
//! Marked elements have all three edges tagged for bisection, which splits
//! them into four children (two bisection levels, creating a vertex inside
//! every original edge). The closure loop then tags the refinement edge of
//! any triangle that has some tagged edge, and each triangle is subdivided
//! according to which of its edges ended up tagged. Every tagged edge is
//! split from both sides, so the result is conforming.

use super::Mesh;
use crate::error::{Error, Result};
use crate::geom::Point;

/// Refines the marked elements, returning a new conforming mesh with
/// parent/child genealogy recorded in [`Mesh::ancestor`].
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Result<Mesh> {
    if marked.is_empty() {
        return Err(Error::EmptyMarkedSet);
    }
    let n_tri = mesh.n_triangles();
    let mut edge_marked = vec![false; mesh.n_edges()];
    for &t in marked {
        if t >= n_tri {
            return Err(Error::InvalidElement(t));
        }
        for inc in mesh.triangle_edges(t) {
            edge_marked[inc.edge] = true;
        }
    }

    // Closure: a triangle with any tagged edge must have its refinement
    // edge (local edge 0) tagged. Tagging is monotone, so the fixpoint is
    // reached in at most n_tri passes.
    let mut passes = 0;
    loop {
        let mut changed = false;
        for t in 0..n_tri {
            let inc = mesh.triangle_edges(t);
            if (edge_marked[inc[1].edge] || edge_marked[inc[2].edge])
                && !edge_marked[inc[0].edge]
            {
                edge_marked[inc[0].edge] = true;
                changed = true;
            }
        }
        passes += 1;
        if !changed {
            break;
        }
        if passes > n_tri {
            return Err(Error::Mesh(
                "conformity closure did not terminate".into(),
            ));
        }
    }

    // New vertices at the midpoints of tagged edges.
    let mut vertices: Vec<Point> = (0..mesh.n_vertices()).map(|v| mesh.vertex(v)).collect();
    let mut midpoint = vec![usize::MAX; mesh.n_edges()];
    for (e, &m) in edge_marked.iter().enumerate() {
        if m {
            let [a, b] = mesh.edge_points(e);
            midpoint[e] = vertices.len();
            vertices.push(Point::from((a.coords + b.coords) * 0.5));
        }
    }

    let mut triangles = Vec::with_capacity(n_tri * 2);
    let mut generation = Vec::new();
    let mut ancestor = Vec::new();
    let mut push = |tri: [usize; 3], gen: u32, anc: usize, out: &mut Vec<[usize; 3]>| {
        out.push(tri);
        generation.push(gen);
        ancestor.push(anc);
    };

    for t in 0..n_tri {
        let [v0, v1, v2] = mesh.triangle(t);
        let inc = mesh.triangle_edges(t);
        let m = [
            midpoint[inc[0].edge],
            midpoint[inc[1].edge],
            midpoint[inc[2].edge],
        ];
        let tagged = [
            edge_marked[inc[0].edge],
            edge_marked[inc[1].edge],
            edge_marked[inc[2].edge],
        ];
        let g = mesh.generation(t);
        match tagged {
            [false, false, false] => push([v0, v1, v2], g, t, &mut triangles),
            [true, false, false] => {
                push([v2, v0, m[0]], g + 1, t, &mut triangles);
                push([v1, v2, m[0]], g + 1, t, &mut triangles);
            }
            [true, true, false] => {
                push([v2, v0, m[0]], g + 1, t, &mut triangles);
                push([m[0], v1, m[1]], g + 2, t, &mut triangles);
                push([v2, m[0], m[1]], g + 2, t, &mut triangles);
            }
            [true, false, true] => {
                push([m[0], v2, m[2]], g + 2, t, &mut triangles);
                push([v0, m[0], m[2]], g + 2, t, &mut triangles);
                push([v1, v2, m[0]], g + 1, t, &mut triangles);
            }
            [true, true, true] => {
                push([m[0], v2, m[2]], g + 2, t, &mut triangles);
                push([v0, m[0], m[2]], g + 2, t, &mut triangles);
                push([m[0], v1, m[1]], g + 2, t, &mut triangles);
                push([v2, m[0], m[1]], g + 2, t, &mut triangles);
            }
            _ => unreachable!("closure left a tagged edge without the refinement edge"),
        }
    }

    Mesh::build(vertices, triangles, generation, ancestor)
}
