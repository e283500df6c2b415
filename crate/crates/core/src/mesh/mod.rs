//! Conforming triangulations of the L-shaped domain and their adaptive
//! refinement by newest-vertex bisection.
//!
//! Triangles are stored counterclockwise with their refinement edge between
//! the first two vertices. Edges carry a canonical global orientation from
//! the lower vertex index to the higher one; the per-triangle traversal sign
//! relative to that orientation is what makes edge-DOF bookkeeping
//! deterministic downstream.

mod lshape;
mod refine;

pub use lshape::{lshape_mesh, on_lshape_boundary};
pub use refine::refine;

use crate::error::{Error, Result};
use crate::geom::{signed_area2, Point, Vec2};

/// Incidence of a triangle with one of its three edges.
#[derive(Debug, Clone, Copy)]
pub struct TriEdge {
    /// Global edge id.
    pub edge: usize,
    /// +1 if the local traversal (v_l -> v_{l+1}) matches the canonical
    /// low-index -> high-index direction, -1 otherwise.
    pub sign: f64,
}

/// Per-edge geometric data as seen from one element.
#[derive(Debug, Clone, Copy)]
pub struct EdgeGeometry {
    /// Global edge id.
    pub edge: usize,
    /// Edge diameter (its length).
    pub h_f: f64,
    /// Outward unit normal of the element across this edge.
    pub normal: Vec2,
}

/// Geometry summary of one element.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    /// Element diameter: the longest edge length.
    pub h_k: f64,
    pub area: f64,
    pub edges: [EdgeGeometry; 3],
}

/// A conforming triangulation with adjacency and refinement genealogy.
///
/// Immutable after construction; [`refine`] returns a new mesh.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    /// Vertex index triples, counterclockwise. The refinement edge for
    /// newest-vertex bisection is the edge between slots 0 and 1.
    triangles: Vec<[usize; 3]>,
    /// Vertex pairs, canonical orientation low index -> high index.
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[TriEdge; 3]>,
    edge_tris: Vec<(usize, Option<usize>)>,
    boundary: Vec<bool>,
    generation: Vec<u32>,
    /// Id of the triangle in the mesh this one was refined from (own id for
    /// meshes built from scratch or for triangles a refinement left alone).
    ancestor: Vec<usize>,
}

impl Mesh {
    /// Assembles adjacency from raw vertices and triangles and checks
    /// orientation. `ancestor` and `generation` follow the triangle order.
    pub(crate) fn build(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        generation: Vec<u32>,
        ancestor: Vec<usize>,
    ) -> Result<Self> {
        assert_eq!(triangles.len(), generation.len());
        assert_eq!(triangles.len(), ancestor.len());

        let mut edge_ids: std::collections::HashMap<[usize; 2], usize> =
            std::collections::HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_tris: Vec<(usize, Option<usize>)> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());

        for (t, tri) in triangles.iter().enumerate() {
            let a2 = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a2 <= 0.0 {
                return Err(Error::Mesh(format!(
                    "triangle {t} is not counterclockwise (signed area {})",
                    0.5 * a2
                )));
            }
            let mut incidence = [TriEdge { edge: 0, sign: 1.0 }; 3];
            for l in 0..3 {
                let (u, v) = (tri[l], tri[(l + 1) % 3]);
                let key = [u.min(v), u.max(v)];
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_tris.push((t, None));
                    edges.len() - 1
                });
                if edge_tris[id].0 != t {
                    if edge_tris[id].1.is_some() {
                        return Err(Error::Mesh(format!(
                            "edge {id} shared by more than two triangles"
                        )));
                    }
                    edge_tris[id].1 = Some(t);
                }
                incidence[l] = TriEdge {
                    edge: id,
                    sign: if u < v { 1.0 } else { -1.0 },
                };
            }
            tri_edges.push(incidence);
        }

        let boundary = edge_tris.iter().map(|(_, second)| second.is_none()).collect();

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            edge_tris,
            boundary,
            generation,
            ancestor,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_interior_edges(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// The three corner points of triangle `t`, counterclockwise.
    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].map(|v| self.vertices[v])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edge_points(e);
        (b - a).norm()
    }

    /// Unit tangent along the canonical (low index -> high index) direction.
    pub fn edge_tangent(&self, e: usize) -> Vec2 {
        let [a, b] = self.edge_points(e);
        (b - a).normalize()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary[e]
    }

    /// The one or two triangles incident to an edge.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_tris[e]
    }

    /// Edge incidence of triangle `t`; local edge `l` runs from vertex slot
    /// `l` to slot `(l+1) % 3`.
    pub fn triangle_edges(&self, t: usize) -> [TriEdge; 3] {
        self.tri_edges[t]
    }

    pub fn generation(&self, t: usize) -> u32 {
        self.generation[t]
    }

    /// Triangle id in the previous mesh this triangle descends from.
    pub fn ancestor(&self, t: usize) -> usize {
        self.ancestor[t]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * signed_area2(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Diameter, area, and per-edge lengths and outward unit normals of an
    /// element.
    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        if t >= self.triangles.len() {
            return Err(Error::InvalidElement(t));
        }
        let pts = self.triangle_points(t);
        let mut edges = [EdgeGeometry {
            edge: 0,
            h_f: 0.0,
            normal: Vec2::zeros(),
        }; 3];
        let mut h_k: f64 = 0.0;
        for l in 0..3 {
            let (a, b) = (pts[l], pts[(l + 1) % 3]);
            let d = b - a;
            let len = d.norm();
            let tangent = d / len;
            // Outward for a counterclockwise triangle: tangent rotated -90 deg.
            edges[l] = EdgeGeometry {
                edge: self.tri_edges[t][l].edge,
                h_f: len,
                normal: Vec2::new(tangent.y, -tangent.x),
            };
            h_k = h_k.max(len);
        }
        Ok(ElementGeometry {
            h_k,
            area: self.area(t),
            edges,
        })
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.n_triangles() {
            let pts = self.triangle_points(t);
            for l in 0..3 {
                let u = pts[(l + 1) % 3] - pts[l];
                let v = pts[(l + 2) % 3] - pts[l];
                let angle = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos();
                min = min.min(angle);
            }
        }
        min
    }

    /// Exhaustive conformity scan: every interior edge is shared by exactly
    /// two triangles, every boundary edge by one, every triangle is
    /// counterclockwise, and triangle/edge incidence is consistent.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![0usize; self.n_edges()];
        for t in 0..self.n_triangles() {
            if self.area(t) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} has non-positive area")));
            }
            for inc in self.tri_edges[t] {
                seen[inc.edge] += 1;
                let (t1, t2) = self.edge_tris[inc.edge];
                if t1 != t && t2 != Some(t) {
                    return Err(Error::Mesh(format!(
                        "triangle {t} not registered on its edge {}",
                        inc.edge
                    )));
                }
            }
        }
        for (e, &count) in seen.iter().enumerate() {
            let expected = if self.boundary[e] { 1 } else { 2 };
            if count != expected {
                return Err(Error::Mesh(format!(
                    "edge {e} incident to {count} triangles, expected {expected}"
                )));
            }
        }
        Ok(())
    }

    /// Plain-text dump: header `nv nt ne`, vertex lines `x y`, triangle
    /// lines `v0 v1 v2`, edge lines `v0 v1 boundaryFlag`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} {}\n",
            self.n_vertices(),
            self.n_triangles(),
            self.n_edges()
        ));
        for p in &self.vertices {
            out.push_str(&format!("{} {}\n", p.x, p.y));
        }
        for t in &self.triangles {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for (e, edge) in self.edges.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {}\n",
                edge[0],
                edge[1],
                u8::from(self.boundary[e])
            ));
        }
        out
    }
}
