use super::config::Domain;
use crate::error::Result;
use crate::fem::{load_vector, BoundaryCondition, Load};
use crate::geometry::{ConvexPolygon, Point};
use crate::norms::integrate;
use crate::solver::StokesSystem;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Manufactured solutions on the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ManufacturedCase {
    /// Stream-function bubble velocity, cubic pressure, no-slip.
    DirichletBubble,
    /// `u = (sin pi y, sin pi x)`, `phi = cos pi x cos pi y`, traction data.
    NeumannTrig { mu: f64 },
}

type Jac = [[f64; 2]; 2];

/// `x^2 (1 - x)^2` and its first three derivatives.
fn quartic(x: f64) -> [f64; 4] {
    [
        x * x * (1.0 - x).powi(2),
        2.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
        2.0 - 12.0 * x + 12.0 * x * x,
        24.0 * x - 12.0,
    ]
}

impl ManufacturedCase {
    pub fn bc(&self) -> BoundaryCondition {
        match *self {
            ManufacturedCase::DirichletBubble => BoundaryCondition::Dirichlet,
            ManufacturedCase::NeumannTrig { mu } => BoundaryCondition::Neumann { mu },
        }
    }

    /// Exact velocity, its Jacobian `J[i][j] = d_j u_i`, and its Laplacian.
    pub fn velocity(&self, p: Point) -> ([f64; 2], Jac, [f64; 2]) {
        match self {
            ManufacturedCase::DirichletBubble => {
                let (a, b) = (quartic(p.x), quartic(p.y));
                let u = [a[0] * b[1], -a[1] * b[0]];
                let j = [[a[1] * b[1], a[0] * b[2]], [-a[2] * b[0], -a[1] * b[1]]];
                let lap = [a[2] * b[1] + a[0] * b[3], -(a[3] * b[0] + a[1] * b[2])];
                (u, j, lap)
            }
            ManufacturedCase::NeumannTrig { .. } => {
                let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
                let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
                let u = [sy, sx];
                let j = [[0.0, PI * cy], [PI * cx, 0.0]];
                (u, j, [-PI * PI * sy, -PI * PI * sx])
            }
        }
    }

    /// Exact pressure and gradient.
    pub fn pressure(&self, p: Point) -> (f64, [f64; 2]) {
        match self {
            ManufacturedCase::DirichletBubble => {
                (p.x.powi(3) + p.y.powi(3) - 0.5, [3.0 * p.x * p.x, 3.0 * p.y * p.y])
            }
            ManufacturedCase::NeumannTrig { .. } => {
                let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
                let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
                (cx * cy, [-PI * sx * cy, -PI * cx * sy])
            }
        }
    }

    /// `f = lambda u - Delta u + grad phi`.
    pub fn force(&self, lambda: C64, p: Point) -> [C64; 2] {
        let (u, _, lap) = self.velocity(p);
        let (_, gp) = self.pressure(p);
        [0, 1].map(|i| lambda * u[i] + C64::new(gp[i] - lap[i], 0.0))
    }

    /// `g = {Du + mu Du^T} n - phi n`.
    pub fn traction(&self, p: Point, n: Point) -> [C64; 2] {
        let mu = self.bc().mu();
        let (_, j, _) = self.velocity(p);
        let (phi, _) = self.pressure(p);
        let nn = [n.x, n.y];
        [0, 1].map(|a| {
            let s: f64 = (0..2).map(|k| (j[a][k] + mu * j[k][a]) * nn[k]).sum();
            C64::new(s - phi * nn[a], 0.0)
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub velocity_error: f64,
    pub pressure_error: f64,
    pub velocity_order: Option<f64>,
    pub pressure_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub case: ManufacturedCase,
    pub lambda: [f64; 2],
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn min_orders(&self) -> (f64, f64) {
        let m = |f: fn(&ConvergenceRow) -> Option<f64>| {
            self.rows.iter().filter_map(f).fold(f64::INFINITY, f64::min)
        };
        (m(|r| r.velocity_order), m(|r| r.pressure_order))
    }

    pub fn to_table(&self, header: &str) -> String {
        let mut s = format!("{header}\nlevel,h,n_dofs,velocity_error,pressure_error,velocity_order,pressure_order\n");
        let o = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.6e},{},{:.6e},{:.6e},{},{}\n",
                r.level,
                r.h,
                r.n_dofs,
                r.velocity_error,
                r.pressure_error,
                o(r.velocity_order),
                o(r.pressure_order)
            ));
        }
        s
    }
}

/// L2 errors and observed orders on successive uniform refinements of the unit square.
pub fn convergence_study(case: ManufacturedCase, lambda: C64, levels: &[usize]) -> Result<ConvergenceStudy> {
    let domain = Domain::Polygon(ConvexPolygon::unit_square());
    let bc = case.bc();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &level in levels {
        let system = StokesSystem::new(domain.mesh(level)?, bc)?;
        let space = system.space();
        let force = |p: Point| case.force(lambda, p);
        let mut load = load_vector(space, Load::Volume(&force), &bc)?;
        if !bc.is_dirichlet() {
            let g = |p: Point, n: Point| case.traction(p, n);
            let lb = load_vector(space, Load::Boundary(&g), &bc)?;
            for (a, b) in load.iter_mut().zip(lb) {
                *a += b;
            }
        }
        let (u, phi) = system.factor(lambda)?.solve_fields(&load);
        let eu = integrate(space, None, |t, l| {
            let (v, _) = space.eval_velocity(&u, t, l);
            let (ex, _, _) = case.velocity(space.geom(t).point(l));
            (v[0] - ex[0]).norm_sqr() + (v[1] - ex[1]).norm_sqr()
        })
        .sqrt();
        let ep = integrate(space, None, |t, l| {
            let (v, _) = space.eval_pressure(&phi, t, l);
            (v - case.pressure(space.geom(t).point(l)).0).norm_sqr()
        })
        .sqrt();
        let h = system.h();
        let order = |e_prev: f64, h_prev: f64, e: f64| (e_prev / e).ln() / (h_prev / h).ln();
        let (vo, po) = match rows.last() {
            Some(prev) => (
                Some(order(prev.velocity_error, prev.h, eu)),
                Some(order(prev.pressure_error, prev.h, ep)),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            level,
            h,
            n_dofs: system.n_total(),
            velocity_error: eu,
            pressure_error: ep,
            velocity_order: vo,
            pressure_order: po,
        });
    }
    Ok(ConvergenceStudy { case, lambda: [lambda.re, lambda.im], rows })
}
