use super::assembly::{edge_p2, BoundaryCondition};
use super::space::{p2_gradients, p2_values, TaylorHood};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::C64;

pub type VectorFn<'a> = &'a (dyn Fn(Point) -> [C64; 2] + Sync);
pub type MatrixFn<'a> = &'a (dyn Fn(Point) -> [[C64; 2]; 2] + Sync);
pub type TractionFn<'a> = &'a (dyn Fn(Point, Point) -> [C64; 2] + Sync);

/// Right-hand side data of the resolvent problem.
#[derive(Clone, Copy)]
pub enum Load<'a> {
    /// `(f, v)` for a body force `f`.
    Volume(VectorFn<'a>),
    /// `<div F, v> = -(F, grad v)` with `F[a][j]` the matrix field.
    Divergence(MatrixFn<'a>),
    /// Boundary traction `int g(x, n) . v`.
    Boundary(TractionFn<'a>),
}

/// Assembles the velocity load vector. Dirichlet rows are zeroed.
pub fn load_vector(space: &TaylorHood, load: Load<'_>, bc: &BoundaryCondition) -> Result<Vec<C64>> {
    let ns = space.n_scalar();
    let mut b = vec![C64::new(0.0, 0.0); 2 * ns];
    match load {
        Load::Volume(f) => {
            let rule = TriangleRule::high_order();
            for t in 0..space.mesh().n_triangles() {
                let g = space.geom(t);
                let nodes = space.elem_nodes(t);
                for (l, &w) in rule.bary.iter().zip(&rule.weights) {
                    let fv = f(g.point(*l));
                    let phi = p2_values(*l);
                    for k in 0..6 {
                        let s = w * g.area * phi[k];
                        b[nodes[k]] += fv[0] * s;
                        b[ns + nodes[k]] += fv[1] * s;
                    }
                }
            }
        }
        Load::Divergence(f) => {
            let rule = TriangleRule::high_order();
            for t in 0..space.mesh().n_triangles() {
                let g = space.geom(t);
                let nodes = space.elem_nodes(t);
                for (l, &w) in rule.bary.iter().zip(&rule.weights) {
                    let fm = f(g.point(*l));
                    let dphi = p2_gradients(g, *l);
                    for k in 0..6 {
                        for a in 0..2 {
                            let v = fm[a][0] * dphi[k][0] + fm[a][1] * dphi[k][1];
                            b[a * ns + nodes[k]] -= v * (w * g.area);
                        }
                    }
                }
            }
        }
        Load::Boundary(gf) => {
            if bc.is_dirichlet() {
                return Err(Error::validation(
                    "boundary traction data is incompatible with a Dirichlet condition",
                ));
            }
            let mesh = space.mesh();
            let (xs, ws) = gauss_legendre(6);
            let nv = mesh.n_nodes();
            for (ei, e) in mesh.boundary_edges.iter().enumerate() {
                let n = mesh.boundary_normal(ei);
                let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
                let len = pa.dist(pb);
                let key = (e.a.min(e.b), e.a.max(e.b));
                let mid = nv + space.edges().binary_search(&key).expect("boundary edge is a mesh edge");
                let vel = [e.a, mid, e.b];
                for (&s, &w) in xs.iter().zip(&ws) {
                    let gv = gf(pa + (pb - pa) * s, n);
                    let phi = edge_p2(s);
                    for k in 0..3 {
                        let c = w * len * phi[k];
                        b[vel[k]] += gv[0] * c;
                        b[ns + vel[k]] += gv[1] * c;
                    }
                }
            }
        }
    }
    if bc.is_dirichlet() {
        for (i, fixed) in space.boundary_vel_mask().into_iter().enumerate() {
            if fixed {
                b[i] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(b)
}
