use super::{ConvexPolygon, Point};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// A boundary segment `a -> b` lying on polygon face `face`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub face: usize,
}

/// Conforming triangulation with counter-clockwise triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub nodes: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    boundary_normals: Vec<Point>,
    h: f64,
}

fn sorted(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriMesh {
    /// Builds a mesh and checks indices, orientation and conformity.
    pub fn from_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::validation("mesh has no triangles"));
        }
        let nn = nodes.len();
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::validation("mesh node is not finite"));
        }
        let mut count: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= nn) {
                return Err(Error::validation(format!("triangle {k} references a missing node")));
            }
            let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
            if (b - a).cross(c - a) <= 0.0 {
                return Err(Error::validation(format!(
                    "triangle {k} is degenerate or clockwise"
                )));
            }
            for e in 0..3 {
                count.entry(sorted(t[e], t[(e + 1) % 3])).or_insert((0, k)).0 += 1;
            }
        }
        if let Some((e, _)) = count.iter().find(|(_, c)| c.0 > 2) {
            return Err(Error::validation(format!("edge {e:?} is shared by more than two triangles")));
        }
        let mut on_boundary: Vec<(usize, usize)> = count
            .iter()
            .filter(|(_, c)| c.0 == 1)
            .map(|(e, _)| *e)
            .collect();
        on_boundary.sort_unstable();
        let mut declared: Vec<(usize, usize)> =
            boundary_edges.iter().map(|e| sorted(e.a, e.b)).collect();
        declared.sort_unstable();
        if declared != on_boundary {
            return Err(Error::validation(
                "boundary edge list does not match the triangulation boundary",
            ));
        }
        let boundary_normals = boundary_edges
            .iter()
            .map(|e| {
                let d = nodes[e.b] - nodes[e.a];
                let l = d.norm();
                let n = Point::new(d.y / l, -d.x / l);
                let t = triangles[count[&sorted(e.a, e.b)].1];
                let third = t.iter().copied().find(|&i| i != e.a && i != e.b).unwrap();
                if (nodes[third] - nodes[e.a]).dot(n) > 0.0 {
                    -n
                } else {
                    n
                }
            })
            .collect();
        let mut mesh = TriMesh {
            nodes,
            triangles,
            boundary_edges,
            boundary_normals,
            h: 0.0,
        };
        mesh.h = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_diameter(t))
            .fold(0.0, f64::max);
        Ok(mesh)
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.points(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.points(t);
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.points(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Unique edges with sorted endpoints, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| sorted(t[k], t[(k + 1) % 3])))
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Outward unit normal of boundary edge `i`.
    pub fn boundary_normal(&self, i: usize) -> Point {
        self.boundary_normals[i]
    }

    /// Splits every triangle into four by joining edge midpoints.
    pub fn refine_uniform(&self) -> TriMesh {
        let mut nodes = self.nodes.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        for (a, b) in self.edges() {
            mid.insert((a, b), nodes.len());
            nodes.push(self.nodes[a].midpoint(self.nodes[b]));
        }
        let m = |a: usize, b: usize| mid[&sorted(a, b)];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let md = m(e.a, e.b);
            boundary_edges.push(BoundaryEdge { a: e.a, b: md, face: e.face });
            boundary_edges.push(BoundaryEdge { a: md, b: e.b, face: e.face });
        }
        TriMesh::from_parts(nodes, triangles, boundary_edges).expect("refinement preserves validity")
    }
}

/// Fans whose spokes exceed this multiple of the shortest face are too thin.
const FAN_ASPECT_LIMIT: f64 = 2.5;

/// Coarsest triangulation of a convex polygon.
///
/// Polygons with at most four vertices are fanned from vertex 0. Larger ones
/// are fanned from the centroid unless the spokes are much longer than the
/// faces (many-sided polygons), where [`ring_triangulation`] is used.
pub fn base_triangulation(poly: &ConvexPolygon) -> TriMesh {
    let v = poly.vertices();
    let n = v.len();
    let c = poly.centroid();
    let spoke = v.iter().map(|p| p.dist(c)).fold(0.0, f64::max);
    let shortest = poly.faces().iter().map(|f| f.length).fold(f64::INFINITY, f64::min);
    if n > 4 && spoke > FAN_ASPECT_LIMIT * shortest {
        return ring_triangulation(poly);
    }
    let mut nodes = v.to_vec();
    let mut triangles = Vec::new();
    if n <= 4 {
        for i in 1..n - 1 {
            triangles.push([0, i, i + 1]);
        }
    } else {
        let c = nodes.len();
        nodes.push(poly.centroid());
        for i in 0..n {
            triangles.push([c, i, (i + 1) % n]);
        }
    }
    let boundary_edges = (0..n)
        .map(|i| BoundaryEdge { a: i, b: (i + 1) % n, face: i })
        .collect();
    TriMesh::from_parts(nodes, triangles, boundary_edges).expect("fan triangulation is valid")
}

/// Point at arclength fraction `t` of the boundary, scaled by `tau` about `c`.
fn perimeter_point(poly: &ConvexPolygon, c: Point, tau: f64, t: f64) -> Point {
    let total: f64 = poly.faces().iter().map(|f| f.length).sum();
    let mut s = t * total;
    for f in poly.faces() {
        if s <= f.length {
            return c + (f.at(s / f.length) - c) * tau;
        }
        s -= f.length;
    }
    c + (poly.vertices()[0] - c) * tau
}

/// Quasi-uniform triangulation by nested rings.
///
/// Ring `k` of `M` is the polygon scaled by `k / M` about its centroid,
/// sampled at equal arclength fractions; the outer ring carries the polygon
/// vertices and subdivides faces longer than the median face. Consecutive
/// rings are zipped along matching fractions, which line up along rays from
/// the centroid, so every triangle is positively oriented.
pub fn ring_triangulation(poly: &ConvexPolygon) -> TriMesh {
    let c = poly.centroid();
    let faces = poly.faces();
    let mut lengths: Vec<f64> = faces.iter().map(|f| f.length).collect();
    lengths.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let spacing = lengths[lengths.len() / 2];
    let total: f64 = faces.iter().map(|f| f.length).sum();

    // outer ring: (point, fraction, face of the segment starting here)
    let mut outer: Vec<(Point, f64, usize)> = Vec::new();
    let mut acc = 0.0;
    for (fi, f) in faces.iter().enumerate() {
        let m = ((f.length / spacing).round() as usize).max(1);
        for j in 0..m {
            let s = j as f64 / m as f64;
            outer.push((f.at(s), (acc + s * f.length) / total, fi));
        }
        acc += f.length;
    }
    let n_outer = outer.len();
    let inradius = faces.iter().map(|f| (f.start - c).dot(f.normal)).fold(f64::INFINITY, f64::min);
    let rings = ((inradius / spacing).round() as usize).max(1);

    let mut nodes = vec![c];
    // each ring as (first node index, fractions)
    let mut levels: Vec<(usize, Vec<f64>)> = Vec::new();
    for k in 1..rings {
        let tau = k as f64 / rings as f64;
        let count = ((n_outer as f64 * tau).round() as usize).max(3);
        let start = nodes.len();
        let fr: Vec<f64> = (0..count).map(|i| i as f64 / count as f64).collect();
        nodes.extend(fr.iter().map(|&t| perimeter_point(poly, c, tau, t)));
        levels.push((start, fr));
    }
    let start = nodes.len();
    nodes.extend(outer.iter().map(|o| o.0));
    levels.push((start, outer.iter().map(|o| o.1).collect()));

    let mut triangles = Vec::new();
    let (s0, f0) = &levels[0];
    for i in 0..f0.len() {
        triangles.push([0, s0 + i, s0 + (i + 1) % f0.len()]);
    }
    for w in levels.windows(2) {
        let ((sa, fa), (sb, fb)) = (&w[0], &w[1]);
        let (na, nb) = (fa.len(), fb.len());
        let next = |f: &[f64], i: usize| if i + 1 < f.len() { f[i + 1] } else { 1.0 };
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            let advance_outer = j < nb && (i == na || next(fb, j) <= next(fa, i));
            if advance_outer {
                triangles.push([sa + i % na, sb + j, sb + (j + 1) % nb]);
                j += 1;
            } else {
                triangles.push([sa + i, sb + j % nb, sa + (i + 1) % na]);
                i += 1;
            }
        }
    }
    let boundary_edges = (0..n_outer)
        .map(|i| BoundaryEdge { a: start + i, b: start + (i + 1) % n_outer, face: outer[i].2 })
        .collect();
    TriMesh::from_parts(nodes, triangles, boundary_edges).expect("ring triangulation is valid")
}

/// Base triangulation refined `level` times.
pub fn triangulate_level(poly: &ConvexPolygon, level: usize) -> TriMesh {
    let mut m = base_triangulation(poly);
    for _ in 0..level {
        m = m.refine_uniform();
    }
    m
}

/// Refines the base triangulation until the mesh size is at most `target_h`.
pub fn triangulate(poly: &ConvexPolygon, target_h: f64) -> Result<TriMesh> {
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(Error::validation(format!("target_h must be positive, got {target_h}")));
    }
    let mut m = base_triangulation(poly);
    while m.h() > target_h {
        m = m.refine_uniform();
    }
    Ok(m)
}
