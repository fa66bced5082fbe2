//! Operator norms of solution maps `input -> output functional` at fixed lambda.
//!
//! With `T` the map and `G_in`, `G_out` the Gram matrices of input and output,
//! the squared norm is the top eigenvalue of `H = P G_in^{-1} T^H G_out T P`,
//! self-adjoint in the `G_in` inner product. Inputs enter the solver as the
//! load `G_in x`, so `G_in^{-1} T^H` is a single adjoint solve.

use super::dual::DualNorm;
use crate::error::{Error, Result};
use crate::helmholtz::{ConstraintProjector, SolenoidalBasis};
use crate::solver::Resolvent;
use crate::sparse::{Csr, RealCholesky};
use crate::C64;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFunctional {
    /// `|lambda| ||u||`.
    ScaledVelocity,
    /// `|lambda|^{1/2} ||grad u||`.
    ScaledGradient,
    /// `|lambda|^{1/2} ||phi||`.
    ScaledPressure,
    Velocity,
    Pressure,
    /// `||u||` in the `H^1_0` dual norm.
    VelocityHMinus1,
    /// The input itself (plumbing check).
    Identity,
}

impl OutputFunctional {
    pub fn scale(&self, lambda: C64) -> f64 {
        match self {
            OutputFunctional::ScaledVelocity => lambda.norm(),
            OutputFunctional::ScaledGradient | OutputFunctional::ScaledPressure => lambda.norm().sqrt(),
            _ => 1.0,
        }
    }

    fn is_pressure(&self) -> bool {
        matches!(self, OutputFunctional::ScaledPressure | OutputFunctional::Pressure)
    }
}

/// Admissible input fields.
pub enum Subspace<'a> {
    Full,
    Explicit(&'a SolenoidalBasis),
    Implicit(&'a ConstraintProjector),
}

/// How inputs are measured.
pub enum InputNorm<'a> {
    /// Volume force `f` measured in `L^2`.
    L2,
    /// Functional `F = K w` measured in the discrete `H^{-1}` norm `||w||_K`.
    Dual(&'a DualNorm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PowerIteration,
    Lanczos,
    DenseEig,
}

pub struct OperatorSpec<'a> {
    pub input: InputNorm<'a>,
    pub subspace: Subspace<'a>,
    pub output: OutputFunctional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    pub iterations: usize,
    /// Start vector of the final iterate, for reuse across nearby lambda.
    pub vector: Vec<C64>,
}

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 5_000;
/// Block size of the power iteration.
pub const POWER_BLOCK: usize = 8;
pub const SEED: u64 = 20_240_601;

/// Applies the normal operator of a spec at one factorized lambda.
pub struct NormalOperator<'r, 'a> {
    res: &'r Resolvent<'r>,
    spec: &'r OperatorSpec<'a>,
    mass: &'r Csr,
    laplace: &'r Csr,
    mass_pres: &'r Csr,
    out_dual: Option<&'r DualNorm>,
    mass_llt: Option<RealCholesky>,
    scale2: f64,
}

/// Extrapolated remaining increase of the (monotone) top Ritz values, from
/// the ratio of the last two increments over blocks of `RITZ_STRIDE` steps.
/// Covers clustered top spectra, where the residual decays too slowly.
fn ritz_tail(history: &[f64]) -> f64 {
    let n = history.len();
    if n <= 2 * RITZ_STRIDE {
        return f64::INFINITY;
    }
    let d1 = history[n - 1] - history[n - 1 - RITZ_STRIDE];
    let d0 = history[n - 1 - RITZ_STRIDE] - history[n - 1 - 2 * RITZ_STRIDE];
    // stagnation at rounding level
    if d1.abs() <= 1e-14 * history[n - 1].abs() {
        return 0.0;
    }
    if d1 < 0.0 || d0 <= 0.0 {
        return f64::INFINITY;
    }
    let q = d1 / d0;
    if q < 1.0 {
        d1 * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}

const RITZ_STRIDE: usize = 10;

impl<'r, 'a> NormalOperator<'r, 'a> {
    pub fn new(res: &'r Resolvent<'r>, spec: &'r OperatorSpec<'a>, out_dual: Option<&'r DualNorm>) -> Result<Self> {
        let ops = res.system().operators();
        if spec.output == OutputFunctional::VelocityHMinus1 && out_dual.is_none() {
            return Err(Error::validation("H^-1 velocity output needs a dual norm"));
        }
        let mass_llt = if spec.output == OutputFunctional::Identity {
            if !matches!(spec.input, InputNorm::L2) {
                return Err(Error::validation("identity output is defined for L2 inputs only"));
            }
            Some(RealCholesky::new(&ops.mass)?)
        } else {
            None
        };
        let s = spec.output.scale(res.lambda());
        Ok(NormalOperator {
            res,
            spec,
            mass: &ops.mass,
            laplace: &ops.laplace,
            mass_pres: &ops.mass_pres,
            out_dual,
            mass_llt,
            scale2: s * s,
        })
    }

    pub fn dim(&self) -> usize {
        self.res.system().n_vel()
    }

    pub fn gram_in(&self, x: &[C64]) -> Vec<C64> {
        match self.spec.input {
            InputNorm::L2 => self.mass.matvec_c(x),
            InputNorm::Dual(d) => d.gram().matvec_c(x),
        }
    }

    pub fn inner_in(&self, x: &[C64], y: &[C64]) -> C64 {
        let gy = self.gram_in(y);
        x.iter().zip(&gy).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn project(&self, x: &[C64]) -> Vec<C64> {
        let x = match self.spec.input {
            InputNorm::Dual(d) => d.restrict(x),
            InputNorm::L2 => x.to_vec(),
        };
        match &self.spec.subspace {
            Subspace::Full => x,
            Subspace::Explicit(b) => b.project(self.mass, &x),
            Subspace::Implicit(p) => p.project(&x),
        }
    }

    /// Output coefficients `T x` (velocity or pressure vector).
    pub fn forward(&self, x: &[C64]) -> Vec<C64> {
        if self.spec.output == OutputFunctional::Identity {
            return x.to_vec();
        }
        let load = self.gram_in(x);
        let (u, p) = self.res.solve_fields(&load);
        if self.spec.output.is_pressure() {
            p
        } else {
            u
        }
    }

    pub fn gram_out(&self, y: &[C64]) -> Vec<C64> {
        let g = match self.spec.output {
            OutputFunctional::ScaledVelocity | OutputFunctional::Velocity => self.mass.matvec_c(y),
            OutputFunctional::ScaledGradient => self.laplace.matvec_c(y),
            OutputFunctional::ScaledPressure | OutputFunctional::Pressure => self.mass_pres.matvec_c(y),
            OutputFunctional::VelocityHMinus1 => {
                let d = self.out_dual.expect("checked in new");
                let w = d.riesz(&self.mass.matvec_c(y));
                self.mass.matvec_c(&w)
            }
            OutputFunctional::Identity => self.gram_in(y),
        };
        g.into_iter().map(|v| v * self.scale2).collect()
    }

    /// `G_in^{-1} T^H z`.
    pub fn pullback(&self, z: &[C64]) -> Vec<C64> {
        if let Some(llt) = &self.mass_llt {
            return llt.solve_c(z);
        }
        let sys = self.res.system();
        let (nv, np) = (sys.n_vel(), sys.n_pres());
        let mut rhs = vec![C64::new(0.0, 0.0); sys.n_total()];
        if self.spec.output.is_pressure() {
            rhs[nv..nv + np].copy_from_slice(z);
        } else {
            rhs[..nv].copy_from_slice(z);
        }
        let y = self.res.solve_adjoint_raw(&rhs);
        y[..nv]
            .iter()
            .zip(sys.fixed())
            .map(|(v, &f)| if f { C64::new(0.0, 0.0) } else { *v })
            .collect()
    }

    /// Squared output norm of `T x`.
    pub fn output_norm2(&self, x: &[C64]) -> (f64, Vec<C64>) {
        let y = self.forward(x);
        let g = self.gram_out(&y);
        let v: f64 = y.iter().zip(&g).map(|(a, b)| (a.conj() * b).re).sum();
        (v.max(0.0), g)
    }

    /// `H x` together with `||T x||^2`.
    pub fn apply(&self, x: &[C64]) -> (Vec<C64>, f64) {
        let px = self.project(x);
        let (n2, g) = self.output_norm2(&px);
        (self.project(&self.pullback(&g)), n2)
    }

    fn start_vector(&self) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let x: Vec<C64> = (0..self.dim())
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        self.project(&x)
    }

    fn normalize(&self, x: &[C64]) -> Result<Vec<C64>> {
        let n = self.inner_in(x, x).re.max(0.0).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::numerical("input subspace is empty or iterate vanished"));
        }
        Ok(x.iter().map(|v| v / n).collect())
    }

    /// `G_in`-orthonormalizes the columns in place (two Gram-Schmidt passes),
    /// dropping columns that vanish.
    fn orthonormalize(&self, cols: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
        let mut out: Vec<Vec<C64>> = Vec::new();
        let mut gout: Vec<Vec<C64>> = Vec::new();
        for mut w in cols {
            let n0 = self.inner_in(&w, &w).re.max(0.0).sqrt();
            for _ in 0..2 {
                for (q, gq) in out.iter().zip(&gout) {
                    let c: C64 = gq.iter().zip(&w).map(|(g, v)| g.conj() * v).sum();
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= qi * c;
                    }
                }
            }
            let n = self.inner_in(&w, &w).re.max(0.0).sqrt();
            if n > 1e-12 * n0 && n > 0.0 {
                let q: Vec<C64> = w.iter().map(|v| v / n).collect();
                gout.push(self.gram_in(&q));
                out.push(q);
            }
        }
        out
    }

    /// Block power iteration with a Rayleigh-Ritz step on the block. The block
    /// keeps convergence at the rate of the first eigenvalue outside it, so
    /// nearly double top eigenvalues (mesh-broken symmetries) do not stall it.
    /// Stops when the top Ritz residual is below `tol` relative.
    pub fn power_iteration(&self, start: Option<&[C64]>, tol: f64, max_iter: usize) -> Result<OperatorNorm> {
        let first = match start {
            Some(s) => self.normalize(&self.project(s))?,
            None => self.normalize(&self.start_vector())?,
        };
        let b = POWER_BLOCK.min(self.dim());
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x9e37);
        let mut cols = vec![first];
        for _ in 1..b {
            let x: Vec<C64> = (0..self.dim())
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            cols.push(self.project(&x));
        }
        let mut x = self.orthonormalize(cols);
        if x.is_empty() {
            return Err(Error::numerical("input subspace is empty or iterate vanished"));
        }
        let mut last = (f64::NAN, f64::NAN);
        let mut history = Vec::new();
        for it in 1..=max_iter {
            let hx: Vec<Vec<C64>> = x.iter().map(|v| self.apply(v).0).collect();
            let k = x.len();
            let gx: Vec<Vec<C64>> = x.iter().map(|v| self.gram_in(v)).collect();
            let a = Mat::<C64>::from_fn(k, k, |i, j| gx[i].iter().zip(&hx[j]).map(|(g, v)| g.conj() * v).sum());
            let a = Mat::<C64>::from_fn(k, k, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
            let eig = a
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| Error::numerical(format!("Ritz eigensolve failed: {e:?}")))?;
            let (top, _) = (0..k).map(|i| (i, eig.S()[i].re)).fold((0, f64::NEG_INFINITY), |p, q| if q.1 > p.1 { q } else { p });
            let theta = eig.S()[top].re.max(0.0);
            let c: Vec<C64> = (0..k).map(|i| eig.U()[(i, top)]).collect();
            let mut ritz = vec![C64::new(0.0, 0.0); self.dim()];
            let mut hritz = vec![C64::new(0.0, 0.0); self.dim()];
            for j in 0..k {
                for i in 0..self.dim() {
                    ritz[i] += x[j][i] * c[j];
                    hritz[i] += hx[j][i] * c[j];
                }
            }
            let r: Vec<C64> = hritz.iter().zip(&ritz).map(|(h, v)| h - v * theta).collect();
            let rn = self.inner_in(&r, &r).re.max(0.0).sqrt();
            history.push(theta);
            if theta == 0.0 || rn <= tol * theta || ritz_tail(&history) <= 1e-2 * tol * theta {
                return Ok(OperatorNorm { value: theta.sqrt(), iterations: it, vector: ritz });
            }
            last = (last.1, theta);
            x = self.orthonormalize(hx);
            if x.is_empty() {
                return Ok(OperatorNorm { value: 0.0, iterations: it, vector: ritz });
            }
        }
        Err(Error::numerical(format!(
            "power iteration did not converge in {max_iter} iterations (last two estimates {:.12e}, {:.12e})",
            last.0.sqrt(),
            last.1.sqrt()
        )))
    }

    /// Lanczos with full reorthogonalization in the `G_in` inner product.
    pub fn lanczos(&self, start: Option<&[C64]>, tol: f64, max_steps: usize) -> Result<OperatorNorm> {
        let q0 = match start {
            Some(s) => self.normalize(&self.project(s))?,
            None => self.normalize(&self.start_vector())?,
        };
        let mut qs: Vec<Vec<C64>> = vec![q0];
        let mut gqs: Vec<Vec<C64>> = vec![self.gram_in(&qs[0])];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut prev = f64::NAN;
        let max_steps = max_steps.min(self.dim()).max(1);
        for k in 0..max_steps {
            let (mut w, _) = self.apply(&qs[k]);
            let a: f64 = gqs[k].iter().zip(&w).map(|(g, v)| (g.conj() * v).re).sum();
            alpha.push(a);
            // two passes of classical Gram-Schmidt against all previous vectors
            for _ in 0..2 {
                for (q, gq) in qs.iter().zip(&gqs) {
                    let c: C64 = gq.iter().zip(&w).map(|(g, v)| g.conj() * v).sum();
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= qi * c;
                    }
                }
            }
            let (theta, vec_t) = top_eigen_tridiagonal(&alpha, &beta);
            let b = self.inner_in(&w, &w).re.max(0.0).sqrt();
            let resid = b * vec_t.last().copied().unwrap_or(0.0).abs();
            let converged = theta == 0.0
                || resid <= tol * theta
                || ((theta - prev) / theta).abs() <= 1e-15
                || b <= 1e-14 * theta.max(f64::MIN_POSITIVE);
            if converged || k + 1 == max_steps {
                if !converged && resid > 1e3 * tol * theta {
                    return Err(Error::numerical(format!(
                        "Lanczos did not converge in {max_steps} steps (estimate {:.12e}, previous {:.12e})",
                        theta.sqrt(),
                        prev.sqrt()
                    )));
                }
                let mut v = vec![C64::new(0.0, 0.0); self.dim()];
                for (q, &c) in qs.iter().zip(&vec_t) {
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi += qi * c;
                    }
                }
                return Ok(OperatorNorm { value: theta.max(0.0).sqrt(), iterations: k + 1, vector: v });
            }
            prev = theta;
            beta.push(b);
            let q: Vec<C64> = w.iter().map(|v| v / b).collect();
            gqs.push(self.gram_in(&q));
            qs.push(q);
        }
        unreachable!()
    }

    /// Dense oracle: assembles `T` on a `G_in`-orthonormal basis of the input space.
    pub fn dense(&self) -> Result<OperatorNorm> {
        let basis = match &self.spec.subspace {
            Subspace::Explicit(b) => {
                if !matches!(self.spec.input, InputNorm::L2) {
                    return Err(Error::validation("explicit bases are mass-orthonormal; use an L2 input"));
                }
                b.z.clone()
            }
            Subspace::Full => self.full_basis()?,
            Subspace::Implicit(_) => {
                return Err(Error::validation("dense eigensolve needs an explicit input basis"))
            }
        };
        let (n, k) = (basis.nrows(), basis.ncols());
        if k == 0 {
            return Err(Error::numerical("input subspace is empty"));
        }
        let cols: Vec<Vec<C64>> = (0..k)
            .map(|j| self.forward(&(0..n).map(|i| C64::new(basis[(i, j)], 0.0)).collect::<Vec<_>>()))
            .collect();
        let gcols: Vec<Vec<C64>> = cols.iter().map(|c| self.gram_out(c)).collect();
        let a = Mat::<C64>::from_fn(k, k, |i, j| cols[i].iter().zip(&gcols[j]).map(|(x, y)| x.conj() * y).sum());
        let ev = a
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::numerical(format!("dense eigensolve failed: {e:?}")))?;
        let top = ev.iter().copied().fold(0.0, f64::max);
        Ok(OperatorNorm { value: top.sqrt(), iterations: 1, vector: Vec::new() })
    }

    fn full_basis(&self) -> Result<Mat<f64>> {
        let (gram, fixed): (&Csr, Vec<bool>) = match self.spec.input {
            InputNorm::L2 => (self.mass, vec![false; self.dim()]),
            InputNorm::Dual(d) => (d.gram(), d.fixed().to_vec()),
        };
        let free: Vec<usize> = (0..self.dim()).filter(|&i| !fixed[i]).collect();
        let k = free.len();
        let g = Mat::<f64>::from_fn(k, k, |a, b| gram.get(free[a], free[b]));
        let llt = g
            .llt(faer::Side::Lower)
            .map_err(|e| Error::numerical(format!("input Gram not positive definite: {e:?}")))?;
        // columns of L^{-T} are G-orthonormal
        let mut linv = Mat::<f64>::identity(k, k);
        faer::linalg::triangular_solve::solve_lower_triangular_in_place(llt.L(), linv.as_mut(), faer::Par::Seq);
        let z = linv.transpose().to_owned();
        Ok(Mat::from_fn(self.dim(), k, |i, j| match free.binary_search(&i) {
            Ok(r) => z[(r, j)],
            Err(_) => 0.0,
        }))
    }
}

/// Largest eigenpair of the symmetric tridiagonal matrix `(alpha, beta)`.
fn top_eigen_tridiagonal(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = t.self_adjoint_eigen(faer::Side::Lower).expect("tridiagonal eigensolve");
    let s = eig.S();
    let u = eig.U();
    let (imax, _) = (0..m).map(|i| (i, s[i])).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    (s[imax], (0..m).map(|i| u[(i, imax)]).collect())
}

/// Operator norm of `spec` at the factorized lambda of `res`.
pub fn operator_norm(
    spec: &OperatorSpec<'_>,
    res: &Resolvent<'_>,
    out_dual: Option<&DualNorm>,
    method: Method,
) -> Result<OperatorNorm> {
    let op = NormalOperator::new(res, spec, out_dual)?;
    match method {
        Method::PowerIteration => op.power_iteration(None, POWER_TOL, POWER_MAX_ITER),
        Method::Lanczos => op.lanczos(None, 1e-9, 150),
        Method::DenseEig => op.dense(),
    }
}
