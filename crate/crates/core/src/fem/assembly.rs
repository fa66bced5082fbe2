use super::space::{p2_gradients, p2_values, TaylorHood};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::sparse::Csr;
use serde::{Deserialize, Serialize};

/// Boundary condition of the resolvent problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// No-slip `u = 0` on the boundary.
    Dirichlet,
    /// Traction-free `{Du + mu Du^T} n - phi n = 0`.
    Neumann { mu: f64 },
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        if let BoundaryCondition::Neumann { mu } = *self {
            if !(mu.is_finite() && mu > -1.0 && mu <= 1.0) {
                return Err(Error::validation(format!("mu must lie in (-1, 1], got {mu}")));
            }
        }
        Ok(())
    }

    /// Weight of the transposed-gradient term in the viscous form.
    pub fn mu(&self) -> f64 {
        match *self {
            BoundaryCondition::Dirichlet => 0.0,
            BoundaryCondition::Neumann { mu } => mu,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet)
    }
}

/// All real operators of the Taylor-Hood discretization.
#[derive(Clone, Debug)]
pub struct Operators {
    /// Velocity mass matrix.
    pub mass: Csr,
    /// Vector Laplacian form `(grad u, grad v)`.
    pub laplace: Csr,
    /// Transposed-gradient form `sum_ab (d_a u_b, d_b v_a)`.
    pub cross: Csr,
    /// `B[q][v] = (q, div v)`, pressure rows by velocity columns.
    pub div: Csr,
    /// `Gamma[q][v] = int_{boundary} q v.n`.
    pub flux: Csr,
    pub mass_pres: Csr,
    pub stiff_pres: Csr,
}

impl Operators {
    /// `A_mu = A_0 + mu D`.
    pub fn viscous(&self, mu: f64) -> Csr {
        self.laplace.add_scaled(&self.cross, mu)
    }

    /// Viscous form used by a boundary condition.
    pub fn viscous_for(&self, bc: &BoundaryCondition) -> Csr {
        self.viscous(bc.mu())
    }

    /// `H^1` Gram matrix `M + A_0`.
    pub fn h1_gram(&self) -> Csr {
        self.mass.add_scaled(&self.laplace, 1.0)
    }

    /// Mean-value functional `m = M_q 1` on pressures.
    pub fn pressure_mean(&self) -> Vec<f64> {
        self.mass_pres.matvec(&vec![1.0; self.mass_pres.ncols])
    }
}

pub fn assemble(space: &TaylorHood) -> Operators {
    let rule = TriangleRule::dunavant4();
    let mesh = space.mesh();
    let ns = space.n_scalar();
    let nv = 2 * ns;
    let np = space.n_pres();
    let mut tm = Vec::new();
    let mut ta = Vec::new();
    let mut td = Vec::new();
    let mut tb = Vec::new();
    let mut tmq = Vec::new();
    let mut tkq = Vec::new();
    for t in 0..mesh.n_triangles() {
        let g = space.geom(t);
        let nodes = space.elem_nodes(t);
        let tri = mesh.triangles[t];
        let mut ms = [[0.0; 6]; 6];
        let mut ks = [[0.0; 6]; 6];
        // dd[a][b][i][j] = int d_a phi_j d_b phi_i
        let mut dd = [[[[0.0; 6]; 6]; 2]; 2];
        let mut bb = [[[0.0; 6]; 3]; 2];
        let mut mq = [[0.0; 3]; 3];
        for (l, &w) in rule.bary.iter().zip(&rule.weights) {
            let wa = w * g.area;
            let phi = p2_values(*l);
            let dphi = p2_gradients(g, *l);
            for i in 0..6 {
                for j in 0..6 {
                    ms[i][j] += wa * phi[i] * phi[j];
                    ks[i][j] += wa * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
                    for a in 0..2 {
                        for b in 0..2 {
                            dd[a][b][i][j] += wa * dphi[j][a] * dphi[i][b];
                        }
                    }
                }
                for q in 0..3 {
                    for c in 0..2 {
                        bb[c][q][i] += wa * l[q] * dphi[i][c];
                    }
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    mq[a][b] += wa * l[a] * l[b];
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                for c in 0..2 {
                    let (r, s) = (c * ns + nodes[i], c * ns + nodes[j]);
                    tm.push((r, s, ms[i][j]));
                    ta.push((r, s, ks[i][j]));
                }
                for a in 0..2 {
                    for b in 0..2 {
                        td.push((a * ns + nodes[i], b * ns + nodes[j], dd[a][b][i][j]));
                    }
                }
            }
            for q in 0..3 {
                for c in 0..2 {
                    tb.push((tri[q], c * ns + nodes[i], bb[c][q][i]));
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                tmq.push((tri[a], tri[b], mq[a][b]));
                let k = g.area * (g.grad_l[a][0] * g.grad_l[b][0] + g.grad_l[a][1] * g.grad_l[b][1]);
                tkq.push((tri[a], tri[b], k));
            }
        }
    }
    Operators {
        mass: Csr::from_triplets(nv, nv, tm),
        laplace: Csr::from_triplets(nv, nv, ta),
        cross: Csr::from_triplets(nv, nv, td),
        div: Csr::from_triplets(np, nv, tb),
        flux: assemble_flux(space),
        mass_pres: Csr::from_triplets(np, np, tmq),
        stiff_pres: Csr::from_triplets(np, np, tkq),
    }
}

/// P2 trace basis on an edge `a -> mid -> b` at parameter `s`.
pub(crate) fn edge_p2(s: f64) -> [f64; 3] {
    [(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)]
}

fn assemble_flux(space: &TaylorHood) -> Csr {
    let mesh = space.mesh();
    let ns = space.n_scalar();
    let (xs, ws) = gauss_legendre(3);
    let nv = mesh.n_nodes();
    let mut t = Vec::new();
    for (ei, e) in mesh.boundary_edges.iter().enumerate() {
        let n = mesh.boundary_normal(ei);
        let len = mesh.nodes[e.a].dist(mesh.nodes[e.b]);
        let (lo, hi) = (e.a.min(e.b), e.a.max(e.b));
        let mid = nv + space.edges().binary_search(&(lo, hi)).expect("boundary edge is a mesh edge");
        let vel = [e.a, mid, e.b];
        for (&s, &w) in xs.iter().zip(&ws) {
            let psi = [1.0 - s, s];
            let phi = edge_p2(s);
            for (qi, &q) in [e.a, e.b].iter().enumerate() {
                for (k, &node) in vel.iter().enumerate() {
                    let v = w * len * psi[qi] * phi[k];
                    t.push((q, node, v * n.x));
                    t.push((q, ns + node, v * n.y));
                }
            }
        }
    }
    Csr::from_triplets(space.n_pres(), 2 * ns, t)
}
