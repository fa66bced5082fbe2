//! Saddle-point solves for `lambda u - div(A grad u) + grad phi = f`, `div u = 0`.
//!
//! Unknowns are ordered `[u | phi | sigma]`. For Dirichlet data the boundary
//! velocity rows and columns are eliminated symmetrically and `sigma` is a
//! Lagrange multiplier fixing the pressure mean. The matrix is complex
//! symmetric, so adjoint solves reuse the factorization with conjugation.
//!
//! The dense multiplier row would fill the whole LU, so the factorized matrix
//! pins the last pressure dof instead and the multiplier system is recovered
//! by bordering: the unconstrained saddle has the constant pressures as its
//! only kernel, which fixes `sigma` and the pressure shift in closed form.

use crate::error::{Error, Result};
use crate::fem::{assemble, load_vector, BoundaryCondition, Load, Operators, TaylorHood};
use crate::geometry::TriMesh;
use crate::C64;
use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Spectral parameter inside the open sector `|arg lambda| < theta`
/// (the positive half-line when `theta = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorSample {
    lambda: C64,
    theta: f64,
}

impl SectorSample {
    pub fn new(modulus: f64, arg: f64, theta: f64) -> Result<Self> {
        if !(modulus.is_finite() && modulus > 0.0) {
            return Err(Error::validation(format!("|lambda| must be positive, got {modulus}")));
        }
        if !(theta.is_finite() && (0.0..PI).contains(&theta)) {
            return Err(Error::validation(format!("sector angle must lie in [0, pi), got {theta}")));
        }
        let inside = if theta == 0.0 { arg == 0.0 } else { arg.abs() < theta };
        if !arg.is_finite() || !inside {
            return Err(Error::validation(format!("arg lambda = {arg} lies outside the sector of half-angle {theta}")));
        }
        Ok(SectorSample {
            lambda: C64::from_polar(modulus, arg),
            theta,
        })
    }

    pub fn from_complex(lambda: C64, theta: f64) -> Result<Self> {
        Self::new(lambda.norm(), lambda.arg(), theta)
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn modulus(&self) -> f64 {
        self.lambda.norm()
    }

    pub fn arg(&self) -> f64 {
        self.lambda.arg()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Residuals and warnings attached to a solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveDiagnostics {
    /// Relative residual of the momentum rows.
    pub momentum_residual: f64,
    /// Euclidean norm of `B u` over the pressure rows.
    pub divergence_residual: f64,
    /// `|lambda| <= 1/h^2`.
    pub resolved: bool,
    pub condition_estimate: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: Vec<C64>,
    pub p: Vec<C64>,
    pub lambda: C64,
    pub diagnostics: SolveDiagnostics,
}

/// Discretized resolvent problem on one mesh with one boundary condition.
pub struct StokesSystem {
    space: TaylorHood,
    ops: Operators,
    bc: BoundaryCondition,
    fixed: Vec<bool>,
    n_total: usize,
    /// Entry values `a + i m`: `a` is the lambda-free part, `m` the mass part.
    tagged: SparseColMat<usize, C64>,
    /// Same encoding for the factorized matrix (pinned pressure, no multiplier).
    tagged_factor: SparseColMat<usize, C64>,
    symbolic: SymbolicLu<usize>,
    /// Pressure mean weights `int psi_q` and their sum, Dirichlet only.
    mean: Option<(Vec<f64>, f64)>,
}

impl StokesSystem {
    pub fn new(mesh: TriMesh, bc: BoundaryCondition) -> Result<Self> {
        bc.validate()?;
        faer::set_global_parallelism(faer::Par::Seq);
        let space = TaylorHood::new(mesh);
        let ops = assemble(&space);
        Self::from_parts(space, ops, bc)
    }

    pub fn from_parts(space: TaylorHood, ops: Operators, bc: BoundaryCondition) -> Result<Self> {
        bc.validate()?;
        let nv = space.n_vel();
        let np = space.n_pres();
        let dirichlet = bc.is_dirichlet();
        let fixed = if dirichlet { space.boundary_vel_mask() } else { vec![false; nv] };
        let n_total = nv + np + usize::from(dirichlet);
        let visc = ops.viscous_for(&bc);
        let mut t: Vec<Triplet<usize, usize, C64>> = Vec::new();
        let re = |v: f64| C64::new(v, 0.0);
        for (i, j, v) in visc.triplets() {
            if !fixed[i] && !fixed[j] {
                t.push(Triplet::new(i, j, re(v)));
            }
        }
        for (i, j, v) in ops.mass.triplets() {
            if !fixed[i] && !fixed[j] {
                t.push(Triplet::new(i, j, C64::new(0.0, v)));
            }
        }
        for (i, f) in fixed.iter().enumerate() {
            if *f {
                t.push(Triplet::new(i, i, re(1.0)));
            }
        }
        for (q, j, v) in ops.div.triplets() {
            if !fixed[j] {
                t.push(Triplet::new(nv + q, j, re(-v)));
                t.push(Triplet::new(j, nv + q, re(-v)));
            }
        }
        let pin = nv + np - 1;
        let tf: Vec<Triplet<usize, usize, C64>> = if dirichlet {
            t.iter()
                .copied()
                .filter(|e| e.row != pin && e.col != pin)
                .chain(std::iter::once(Triplet::new(pin, pin, re(1.0))))
                .collect()
        } else {
            t.clone()
        };
        let mean = if dirichlet {
            let m = ops.pressure_mean();
            let s = nv + np;
            for (q, &w) in m.iter().enumerate() {
                t.push(Triplet::new(s, nv + q, re(w)));
                t.push(Triplet::new(nv + q, s, re(w)));
            }
            let total = m.iter().sum();
            Some((m, total))
        } else {
            None
        };
        let tagged = SparseColMat::try_new_from_triplets(n_total, n_total, &t)
            .map_err(|e| Error::numerical(format!("system assembly failed: {e:?}")))?;
        let nf = nv + np;
        let tagged_factor = SparseColMat::try_new_from_triplets(nf, nf, &tf)
            .map_err(|e| Error::numerical(format!("system assembly failed: {e:?}")))?;
        let symbolic = SymbolicLu::try_new(tagged_factor.symbolic())
            .map_err(|e| Error::numerical(format!("symbolic factorization failed: {e:?}")))?;
        Ok(StokesSystem {
            space,
            ops,
            bc,
            fixed,
            n_total,
            tagged,
            tagged_factor,
            symbolic,
            mean,
        })
    }

    pub fn space(&self) -> &TaylorHood {
        &self.space
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_vel(&self) -> usize {
        self.space.n_vel()
    }

    pub fn n_pres(&self) -> usize {
        self.space.n_pres()
    }

    /// Flags of eliminated velocity dofs (empty set for Neumann).
    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn h(&self) -> f64 {
        self.space.mesh().h()
    }

    pub fn resolved(&self, lambda: C64) -> bool {
        lambda.norm() <= 1.0 / (self.h() * self.h())
    }

    /// Assembled system matrix for a given spectral parameter.
    pub fn matrix(&self, lambda: C64) -> SparseColMat<usize, C64> {
        realize(&self.tagged, lambda)
    }

    /// Coordinate-format text export `i j re im`, one entry per line.
    pub fn export_coo(&self, lambda: C64) -> String {
        use std::fmt::Write as _;
        let m = self.matrix(lambda);
        let mut s = String::new();
        let sym = m.symbolic();
        for j in 0..self.n_total {
            let r = sym.col_ptr()[j]..sym.col_ptr()[j + 1];
            for (i, v) in sym.row_idx()[r.clone()].iter().zip(&m.val()[r]) {
                writeln!(s, "{i} {j} {:.17e} {:.17e}", v.re, v.im).unwrap();
            }
        }
        s
    }

    /// Factorizes the system for `lambda` (any complex value).
    pub fn factor(&self, lambda: C64) -> Result<Resolvent<'_>> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::validation("lambda is not finite"));
        }
        let matrix = self.matrix(lambda);
        let pinned = realize(&self.tagged_factor, lambda);
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), pinned.as_ref()).map_err(|e| {
            Error::Singular(format!("factorization failed at lambda = {lambda}: {e:?}"))
        })?;
        let r = Resolvent { system: self, lambda, matrix, lu };
        // probe with a random right-hand side: zero pivots show up as a blown residual
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let b: Vec<C64> = (0..self.n_total)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let x = r.solve_raw(&b);
        let res = r.residual(&x, &b);
        if !res.is_finite() || res > 1e-6 {
            return Err(Error::Singular(format!(
                "system is singular at lambda = {lambda} (probe residual {res:.3e})"
            )));
        }
        Ok(r)
    }

    /// One-shot solve for a load vector on the velocity rows.
    pub fn solve(&self, sample: &SectorSample, load: &[C64]) -> Result<Solution> {
        self.factor(sample.lambda())?.solve(load)
    }

    pub fn solve_load(&self, sample: &SectorSample, load: Load<'_>) -> Result<Solution> {
        let b = load_vector(&self.space, load, &self.bc)?;
        self.solve(sample, &b)
    }
}

/// A factorized system at a fixed spectral parameter.
pub struct Resolvent<'a> {
    system: &'a StokesSystem,
    lambda: C64,
    matrix: SparseColMat<usize, C64>,
    lu: Lu<usize, C64>,
}

fn realize(tagged: &SparseColMat<usize, C64>, lambda: C64) -> SparseColMat<usize, C64> {
    let mut m = tagged.clone();
    for v in m.val_mut() {
        *v = C64::new(v.re, 0.0) + lambda * v.im;
    }
    m
}

fn to_mat(b: &[C64]) -> Mat<C64> {
    Mat::from_fn(b.len(), 1, |i, _| b[i])
}

fn from_mat(m: &Mat<C64>) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn inf_norm(x: &[C64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.norm()))
}

impl<'a> Resolvent<'a> {
    pub fn system(&self) -> &'a StokesSystem {
        self.system
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    /// `K x` with the assembled matrix.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let sym = self.matrix.symbolic();
        let val = self.matrix.val();
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for j in 0..x.len() {
            for k in sym.col_ptr()[j]..sym.col_ptr()[j + 1] {
                y[sym.row_idx()[k]] += val[k] * x[j];
            }
        }
        y
    }

    fn residual(&self, x: &[C64], b: &[C64]) -> f64 {
        let kx = self.apply(x);
        let r: Vec<C64> = kx.iter().zip(b).map(|(a, c)| a - c).collect();
        inf_norm(&r) / inf_norm(b).max(f64::MIN_POSITIVE)
    }

    /// `K^{-1} b` on the full unknown vector.
    pub fn solve_raw(&self, b: &[C64]) -> Vec<C64> {
        self.solve_bordered(b, Conj::No)
    }

    /// `K^{-H} b`; `K` is complex symmetric so `K^H = conj(K)`.
    pub fn solve_adjoint_raw(&self, b: &[C64]) -> Vec<C64> {
        self.solve_bordered(b, Conj::Yes)
    }

    fn solve_bordered(&self, b: &[C64], conj: Conj) -> Vec<C64> {
        let s = self.system;
        let Some((m, total)) = &s.mean else {
            let mut x = to_mat(b);
            self.lu.solve_in_place_with_conj(conj, x.as_mut());
            return from_mat(&x);
        };
        let (nv, np) = (s.n_vel(), s.n_pres());
        // constants span the kernel of the unconstrained saddle, so testing with
        // them isolates the multiplier
        let sigma = b[nv..nv + np].iter().sum::<C64>() / *total;
        let mut r = to_mat(&b[..nv + np]);
        for q in 0..np {
            r[(nv + q, 0)] -= sigma * m[q];
        }
        r[(nv + np - 1, 0)] = C64::new(0.0, 0.0);
        self.lu.solve_in_place_with_conj(conj, r.as_mut());
        let mut x = from_mat(&r);
        let mx: C64 = (0..np).map(|q| x[nv + q] * m[q]).sum();
        let shift = (b[nv + np] - mx) / *total;
        for v in &mut x[nv..nv + np] {
            *v += shift;
        }
        x.push(sigma);
        x
    }

    /// Embeds a velocity load into the full right-hand side.
    pub fn lift(&self, load: &[C64]) -> Vec<C64> {
        let s = self.system;
        let mut b = vec![C64::new(0.0, 0.0); s.n_total];
        for (i, v) in load.iter().enumerate() {
            if !s.fixed[i] {
                b[i] = *v;
            }
        }
        b
    }

    /// Velocity and pressure of the solution for a velocity load.
    pub fn solve_fields(&self, load: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let s = self.system;
        let x = self.solve_raw(&self.lift(load));
        let nv = s.n_vel();
        (x[..nv].to_vec(), x[nv..nv + s.n_pres()].to_vec())
    }

    pub fn solve(&self, load: &[C64]) -> Result<Solution> {
        let s = self.system;
        if load.len() != s.n_vel() {
            return Err(Error::validation(format!(
                "load has length {}, expected {}",
                load.len(),
                s.n_vel()
            )));
        }
        let b = self.lift(load);
        let x = self.solve_raw(&b);
        if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::numerical("solution contains non-finite values"));
        }
        let nv = s.n_vel();
        let kx = self.apply(&x);
        let mom: Vec<C64> = (0..nv).map(|i| kx[i] - b[i]).collect();
        let div = &kx[nv..nv + s.n_pres()];
        let mut diag = SolveDiagnostics {
            momentum_residual: inf_norm(&mom) / inf_norm(&b[..nv]).max(f64::MIN_POSITIVE),
            divergence_residual: div.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            resolved: s.resolved(self.lambda),
            ..Default::default()
        };
        if !diag.resolved {
            diag.warnings.push(format!(
                "|lambda| = {:.3e} exceeds the resolved window 1/h^2 = {:.3e}",
                self.lambda.norm(),
                1.0 / (s.h() * s.h())
            ));
        }
        Ok(Solution {
            u: x[..nv].to_vec(),
            p: x[nv..nv + s.n_pres()].to_vec(),
            lambda: self.lambda,
            diagnostics: diag,
        })
    }

    /// Hager-Higham estimate of the 1-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.system.n_total;
        let sym = self.matrix.symbolic();
        let val = self.matrix.val();
        let norm_k = (0..n)
            .map(|j| (sym.col_ptr()[j]..sym.col_ptr()[j + 1]).map(|k| val[k].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_raw(&x);
            est = y.iter().map(|v| v.norm()).sum::<f64>();
            let xi: Vec<C64> = y
                .iter()
                .map(|v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(1.0, 0.0) })
                .collect();
            let z = self.solve_adjoint_raw(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![C64::new(0.0, 0.0); n];
            x[jmax] = C64::new(1.0, 0.0);
        }
        est * norm_k
    }

    /// Solve with a condition estimate and an ill-conditioning warning.
    pub fn solve_checked(&self, load: &[C64]) -> Result<Solution> {
        let mut sol = self.solve(load)?;
        let c = self.condition_estimate();
        if c > 1e14 {
            sol.diagnostics
                .warnings
                .push(format!("condition estimate {c:.3e} exceeds 1e14"));
        }
        sol.diagnostics.condition_estimate = Some(c);
        Ok(sol)
    }
}
