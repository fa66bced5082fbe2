use crate::geometry::{Point, TriMesh};
use crate::C64;
use std::collections::HashMap;

/// Geometry of one triangle: area and barycentric gradients.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeom {
    pub pts: [Point; 3],
    pub area: f64,
    pub grad_l: [[f64; 2]; 3],
}

impl ElementGeom {
    pub fn new(pts: [Point; 3]) -> Self {
        let [p0, p1, p2] = pts;
        let area = 0.5 * (p1 - p0).cross(p2 - p0);
        let k = 1.0 / (2.0 * area);
        let grad_l = [
            [(p1.y - p2.y) * k, (p2.x - p1.x) * k],
            [(p2.y - p0.y) * k, (p0.x - p2.x) * k],
            [(p0.y - p1.y) * k, (p1.x - p0.x) * k],
        ];
        ElementGeom { pts, area, grad_l }
    }

    pub fn point(&self, l: [f64; 3]) -> Point {
        let [a, b, c] = self.pts;
        Point::new(
            l[0] * a.x + l[1] * b.x + l[2] * c.x,
            l[0] * a.y + l[1] * b.y + l[2] * c.y,
        )
    }
}

/// Local edge nodes 3, 4, 5 sit on edges (0,1), (1,2), (2,0).
pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_gradients(g: &ElementGeom, l: [f64; 3]) -> [[f64; 2]; 6] {
    let gl = &g.grad_l;
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out[i] = [s * gl[i][0], s * gl[i][1]];
    }
    for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
        for d in 0..2 {
            out[3 + k][d] = 4.0 * (l[a] * gl[b][d] + l[b] * gl[a][d]);
        }
    }
    out
}

/// Constant Hessians of the six local basis functions.
pub fn p2_hessians(g: &ElementGeom) -> [[[f64; 2]; 2]; 6] {
    let gl = &g.grad_l;
    let mut out = [[[0.0; 2]; 2]; 6];
    for i in 0..3 {
        for r in 0..2 {
            for c in 0..2 {
                out[i][r][c] = 4.0 * gl[i][r] * gl[i][c];
            }
        }
    }
    for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
        for r in 0..2 {
            for c in 0..2 {
                out[3 + k][r][c] = 4.0 * (gl[a][r] * gl[b][c] + gl[b][r] * gl[a][c]);
            }
        }
    }
    out
}

/// Boundary data attached to a scalar P2 node.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNode {
    pub node: usize,
    /// `(face id, outward normal)` for each distinct face through the node.
    pub faces: Vec<(usize, Point)>,
}

impl BoundaryNode {
    pub fn is_corner(&self) -> bool {
        self.faces.len() > 1
    }
}

/// Taylor-Hood P2/P1 space on a triangulation.
///
/// Scalar P2 nodes are the mesh vertices followed by the edges in sorted
/// endpoint order. Velocity dofs are component-major: `c * n_scalar + node`.
/// Pressure dofs are the mesh vertices.
#[derive(Clone, Debug)]
pub struct TaylorHood {
    mesh: TriMesh,
    edges: Vec<(usize, usize)>,
    elem_nodes: Vec<[usize; 6]>,
    geoms: Vec<ElementGeom>,
    boundary_nodes: Vec<BoundaryNode>,
    on_boundary: Vec<bool>,
}

impl TaylorHood {
    pub fn new(mesh: TriMesh) -> Self {
        let edges = mesh.edges();
        let nv = mesh.n_nodes();
        let edge_id: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(k, &e)| (e, nv + k)).collect();
        let eid = |a: usize, b: usize| edge_id[&(a.min(b), a.max(b))];
        let elem_nodes = mesh
            .triangles
            .iter()
            .map(|t| {
                let mut n = [t[0], t[1], t[2], 0, 0, 0];
                for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
                    n[3 + k] = eid(t[a], t[b]);
                }
                n
            })
            .collect();
        let geoms = (0..mesh.n_triangles())
            .map(|t| ElementGeom::new(mesh.points(t)))
            .collect();
        let mut faces: std::collections::BTreeMap<usize, Vec<(usize, Point)>> = Default::default();
        for (i, e) in mesh.boundary_edges.iter().enumerate() {
            let n = mesh.boundary_normal(i);
            for node in [e.a, e.b, eid(e.a, e.b)] {
                let f = faces.entry(node).or_default();
                if !f.iter().any(|(id, _)| *id == e.face) {
                    f.push((e.face, n));
                }
            }
        }
        let n_scalar = nv + edges.len();
        let mut on_boundary = vec![false; n_scalar];
        let boundary_nodes = faces
            .into_iter()
            .map(|(node, faces)| {
                on_boundary[node] = true;
                BoundaryNode { node, faces }
            })
            .collect();
        TaylorHood {
            mesh,
            edges,
            elem_nodes,
            geoms,
            boundary_nodes,
            on_boundary,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_scalar(&self) -> usize {
        self.mesh.n_nodes() + self.edges.len()
    }

    pub fn n_vel(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn n_pres(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn vel_dof(&self, component: usize, node: usize) -> usize {
        component * self.n_scalar() + node
    }

    pub fn elem_nodes(&self, t: usize) -> &[usize; 6] {
        &self.elem_nodes[t]
    }

    pub fn geom(&self, t: usize) -> &ElementGeom {
        &self.geoms[t]
    }

    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary_nodes
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.on_boundary[node]
    }

    /// Flags for velocity dofs on the boundary (both components).
    pub fn boundary_vel_mask(&self) -> Vec<bool> {
        let mut m = self.on_boundary.clone();
        m.extend_from_slice(&self.on_boundary);
        m
    }

    /// Flags for pressure dofs (vertices) on the boundary.
    pub fn boundary_pres_mask(&self) -> Vec<bool> {
        self.on_boundary[..self.n_pres()].to_vec()
    }

    /// Coordinates of scalar P2 node `s`.
    pub fn node_point(&self, s: usize) -> Point {
        let nv = self.mesh.n_nodes();
        if s < nv {
            self.mesh.nodes[s]
        } else {
            let (a, b) = self.edges[s - nv];
            self.mesh.nodes[a].midpoint(self.mesh.nodes[b])
        }
    }

    /// Nodal interpolant of a vector field.
    pub fn interpolate(&self, f: impl Fn(Point) -> [C64; 2]) -> Vec<C64> {
        let ns = self.n_scalar();
        let mut u = vec![C64::new(0.0, 0.0); 2 * ns];
        for s in 0..ns {
            let v = f(self.node_point(s));
            u[s] = v[0];
            u[ns + s] = v[1];
        }
        u
    }

    /// Nodal P1 interpolant of a scalar field.
    pub fn interpolate_pressure(&self, f: impl Fn(Point) -> C64) -> Vec<C64> {
        self.mesh.nodes.iter().map(|&p| f(p)).collect()
    }

    /// Value and Jacobian `J[i][j] = d_j u_i` of a velocity at a point of element `t`.
    pub fn eval_velocity(&self, u: &[C64], t: usize, l: [f64; 3]) -> ([C64; 2], [[C64; 2]; 2]) {
        let g = &self.geoms[t];
        let nodes = &self.elem_nodes[t];
        let phi = p2_values(l);
        let dphi = p2_gradients(g, l);
        let ns = self.n_scalar();
        let zero = C64::new(0.0, 0.0);
        let mut val = [zero; 2];
        let mut jac = [[zero; 2]; 2];
        for k in 0..6 {
            for c in 0..2 {
                let coef = u[c * ns + nodes[k]];
                val[c] += coef * phi[k];
                jac[c][0] += coef * dphi[k][0];
                jac[c][1] += coef * dphi[k][1];
            }
        }
        (val, jac)
    }

    /// Constant Hessians `H[c][r][s] = d_r d_s u_c` of a velocity on element `t`.
    pub fn eval_velocity_hessian(&self, u: &[C64], t: usize) -> [[[C64; 2]; 2]; 2] {
        let h = p2_hessians(&self.geoms[t]);
        let nodes = &self.elem_nodes[t];
        let ns = self.n_scalar();
        let mut out = [[[C64::new(0.0, 0.0); 2]; 2]; 2];
        for k in 0..6 {
            for c in 0..2 {
                let coef = u[c * ns + nodes[k]];
                for r in 0..2 {
                    for s in 0..2 {
                        out[c][r][s] += coef * h[k][r][s];
                    }
                }
            }
        }
        out
    }

    /// Value and gradient of a P1 pressure at a point of element `t`.
    pub fn eval_pressure(&self, p: &[C64], t: usize, l: [f64; 3]) -> (C64, [C64; 2]) {
        let g = &self.geoms[t];
        let tri = self.mesh.triangles[t];
        let mut v = C64::new(0.0, 0.0);
        let mut grad = [C64::new(0.0, 0.0); 2];
        for k in 0..3 {
            let coef = p[tri[k]];
            v += coef * l[k];
            grad[0] += coef * g.grad_l[k][0];
            grad[1] += coef * g.grad_l[k][1];
        }
        (v, grad)
    }
}
