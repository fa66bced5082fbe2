//! Discrete Helmholtz projections and solenoidal subspaces.
//!
//! `Q` is `Id + grad (-Lap_D)^{-1} div` and `P` is `Id + grad (-Lap_N)^{-1} div~`,
//! where the discrete gradient is the mass-matrix lift `grad_h chi = -M^{-1} C^T chi`
//! and the Laplacians are the compatible ones `C M^{-1} C^T`. Both are then
//! mass-orthogonal projections, evaluated through one saddle-point solve.
//! A variant using the P1 stiffness Laplacian is kept for comparison.

use crate::error::{Error, Result};
use crate::fem::{Operators, TaylorHood};
use crate::sparse::{BlockBuilder, Csr, RealCholesky, RealLu};
use crate::C64;
use faer::Mat;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Onto fields with `(f, grad q) = 0` for every discrete `q`: zero normal trace.
    P,
    /// Onto fields with `(f, grad q) = 0` for `q` vanishing on the boundary.
    Q,
}

pub struct HelmholtzProjector {
    kind: Projection,
    n_vel: usize,
    n_pres: usize,
    /// Interior vertex indices (for `Q`) or all vertices (for `P`).
    rows: Vec<usize>,
    /// Constraint operator `C` with `(C f)_q = -(f, grad q)`.
    c: Csr,
    mass: Csr,
    saddle: RealLu,
    mass_llt: RealCholesky,
    lap: Csr,
    stiff_lu: RealLu,
}

impl HelmholtzProjector {
    pub fn new(space: &TaylorHood, ops: &Operators, kind: Projection) -> Result<Self> {
        let n_vel = space.n_vel();
        let n_pres = space.n_pres();
        let bmask = space.boundary_pres_mask();
        let (rows, c) = match kind {
            Projection::Q => {
                let rows: Vec<usize> = (0..n_pres).filter(|&q| !bmask[q]).collect();
                let c = ops.div.select_rows(&rows);
                (rows, c)
            }
            Projection::P => ((0..n_pres).collect(), ops.div.add_scaled(&ops.flux, -1.0)),
        };
        if rows.is_empty() {
            return Err(Error::validation("mesh has no interior vertices"));
        }
        let nc = rows.len();
        let gauge = kind == Projection::P;
        let n = n_vel + nc + usize::from(gauge);
        let mut bb = BlockBuilder::new(n);
        bb.add(0, 0, &ops.mass, 1.0);
        bb.add(n_vel, 0, &c, 1.0);
        bb.add_transposed(0, n_vel, &c, 1.0);
        let lap_full = &ops.stiff_pres;
        let mut lb = BlockBuilder::new(nc + usize::from(gauge));
        let sel = lap_full.select_rows(&rows).transpose().select_rows(&rows);
        lb.add(0, 0, &sel, 1.0);
        if gauge {
            let m = ops.pressure_mean();
            for (q, &v) in m.iter().enumerate() {
                bb.push(n - 1, n_vel + q, v);
                bb.push(n_vel + q, n - 1, v);
                lb.push(nc, q, v);
                lb.push(q, nc, v);
            }
        }
        let lap = lb.build();
        Ok(HelmholtzProjector {
            kind,
            n_vel,
            n_pres,
            saddle: RealLu::new(&bb.build())?,
            mass_llt: RealCholesky::new(&ops.mass)?,
            stiff_lu: RealLu::new(&lap)?,
            rows,
            c,
            mass: ops.mass.clone(),
            lap,
        })
    }

    pub fn kind(&self) -> Projection {
        self.kind
    }

    /// Constraint rows `C`; the range of the projector is `ker C`.
    pub fn constraint(&self) -> &Csr {
        &self.c
    }

    fn scatter(&self, y: &[C64]) -> Vec<C64> {
        let mut chi = vec![C64::new(0.0, 0.0); self.n_pres];
        for (k, &q) in self.rows.iter().enumerate() {
            chi[q] = y[k];
        }
        chi
    }

    fn gather(&self, chi: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|&q| chi[q]).collect()
    }

    /// Splits `f = Pf + grad_h chi`; returns `(Pf, chi)` with `chi` on all vertices.
    pub fn decompose(&self, f: &[C64]) -> (Vec<C64>, Vec<C64>) {
        assert_eq!(f.len(), self.n_vel);
        let mut rhs = self.mass.matvec_c(f);
        rhs.resize(self.saddle_len(), C64::new(0.0, 0.0));
        let x = self.saddle.solve_c(&rhs);
        let y: Vec<C64> = x[self.n_vel..self.n_vel + self.rows.len()].iter().map(|v| -v).collect();
        (x[..self.n_vel].to_vec(), self.scatter(&y))
    }

    fn saddle_len(&self) -> usize {
        self.n_vel + self.rows.len() + usize::from(self.kind == Projection::P)
    }

    pub fn project(&self, f: &[C64]) -> Vec<C64> {
        self.decompose(f).0
    }

    /// Discrete gradient `-M^{-1} C^T chi` of a vertex scalar.
    pub fn gradient(&self, chi: &[C64]) -> Vec<C64> {
        let ct = self.c.tmatvec_c(&self.gather(chi));
        let neg: Vec<C64> = ct.iter().map(|v| -v).collect();
        self.mass_llt.solve_c(&neg)
    }

    /// Discrete divergence functional `C f`.
    pub fn divergence(&self, f: &[C64]) -> Vec<C64> {
        self.scatter(&self.c.matvec_c(f))
    }

    /// Same formula with the P1 stiffness matrix as Laplacian.
    pub fn project_stiffness(&self, f: &[C64]) -> Vec<C64> {
        let mut rhs = self.c.matvec_c(f);
        rhs.resize(self.lap.nrows, C64::new(0.0, 0.0));
        let chi = self.stiff_lu.solve_c(&rhs);
        let g = self.gradient(&self.scatter(&chi[..self.rows.len()]));
        f.iter().zip(&g).map(|(a, b)| a + b).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolenoidalFlavor {
    /// Discretely divergence-free with vanishing normal trace at boundary nodes.
    L2Sigma,
    /// Discretely divergence-free, no trace condition.
    CalL2Sigma,
}

/// Constraint matrix whose kernel is the solenoidal subspace.
///
/// `CalL2Sigma` uses all rows of `B`. `L2Sigma` stacks `B` without its last
/// row (the rows of `B` sum to a combination of normal-trace rows) and one
/// normal-trace row per boundary node and incident face, so corners get two.
pub fn solenoidal_constraints(space: &TaylorHood, ops: &Operators, flavor: SolenoidalFlavor) -> Csr {
    match flavor {
        SolenoidalFlavor::CalL2Sigma => ops.div.clone(),
        SolenoidalFlavor::L2Sigma => {
            let np = space.n_pres();
            let mut t: Vec<(usize, usize, f64)> =
                ops.div.triplets().filter(|&(q, _, _)| q + 1 < np).collect();
            let mut r = np - 1;
            for bn in space.boundary_nodes() {
                for (_, n) in &bn.faces {
                    t.push((r, space.vel_dof(0, bn.node), n.x));
                    t.push((r, space.vel_dof(1, bn.node), n.y));
                    r += 1;
                }
            }
            Csr::from_triplets(r, space.n_vel(), t)
        }
    }
}

/// Mass-orthogonal projector onto `ker C`, applied through a saddle solve.
pub struct ConstraintProjector {
    n_vel: usize,
    n: usize,
    mass: Csr,
    lu: RealLu,
}

impl ConstraintProjector {
    pub fn new(mass: &Csr, c: &Csr) -> Result<Self> {
        let n_vel = mass.nrows;
        let n = n_vel + c.nrows;
        let mut bb = BlockBuilder::new(n);
        bb.add(0, 0, mass, 1.0);
        bb.add(n_vel, 0, c, 1.0);
        bb.add_transposed(0, n_vel, c, 1.0);
        Ok(ConstraintProjector {
            n_vel,
            n,
            mass: mass.clone(),
            lu: RealLu::new(&bb.build())?,
        })
    }

    pub fn solenoidal(space: &TaylorHood, ops: &Operators, flavor: SolenoidalFlavor) -> Result<Self> {
        Self::new(&ops.mass, &solenoidal_constraints(space, ops, flavor))
    }

    /// Projector with respect to an arbitrary SPD Gram matrix.
    pub fn with_gram(gram: &Csr, c: &Csr) -> Result<Self> {
        Self::new(gram, c)
    }

    pub fn project(&self, f: &[C64]) -> Vec<C64> {
        let mut rhs = self.mass.matvec_c(f);
        rhs.resize(self.n, C64::new(0.0, 0.0));
        self.lu.solve_c(&rhs)[..self.n_vel].to_vec()
    }
}

/// Explicit mass-orthonormal basis of a solenoidal subspace.
#[derive(Clone, Debug)]
pub struct SolenoidalBasis {
    pub flavor: SolenoidalFlavor,
    /// Columns are velocity coefficient vectors.
    pub z: Mat<f64>,
}

/// Largest velocity space for which a dense basis is built.
pub const DENSE_LIMIT: usize = 3000;

impl SolenoidalBasis {
    pub fn new(space: &TaylorHood, ops: &Operators, flavor: SolenoidalFlavor) -> Result<Self> {
        let nv = space.n_vel();
        if nv > DENSE_LIMIT {
            return Err(Error::validation(format!(
                "dense solenoidal basis limited to {DENSE_LIMIT} velocity dofs, got {nv}"
            )));
        }
        let c = solenoidal_constraints(space, ops, flavor);
        let z = null_space(&c)?;
        if z.ncols() == 0 {
            return Err(Error::numerical("solenoidal subspace is empty"));
        }
        let z = mass_orthonormalize(&z, &ops.mass)?;
        Ok(SolenoidalBasis { flavor, z })
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.z.nrows()).map(|i| C64::new(self.z[(i, j)], 0.0)).collect()
    }

    /// `Z Z^T M f`.
    pub fn project(&self, mass: &Csr, f: &[C64]) -> Vec<C64> {
        let mf = mass.matvec_c(f);
        let (n, k) = (self.z.nrows(), self.z.ncols());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for j in 0..k {
            let c: C64 = (0..n).map(|i| mf[i] * self.z[(i, j)]).sum();
            for i in 0..n {
                out[i] += c * self.z[(i, j)];
            }
        }
        out
    }

    /// Basis rotated by an orthogonal matrix `u` (`Z -> Z U`).
    pub fn rotated(&self, u: &Mat<f64>) -> Self {
        SolenoidalBasis {
            flavor: self.flavor,
            z: &self.z * u,
        }
    }
}

/// Orthonormal basis of `ker C` from a full SVD.
pub fn null_space(c: &Csr) -> Result<Mat<f64>> {
    let (m, n) = (c.nrows, c.ncols);
    let mut a = Mat::<f64>::zeros(m, n);
    for (i, j, v) in c.triplets() {
        a[(i, j)] += v;
    }
    let svd = a.svd().map_err(|e| Error::numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S();
    let smax = (0..m.min(n)).map(|i| s[i]).fold(0.0, f64::max);
    let tol = smax * 1e-10 * (m.max(n) as f64);
    let rank = (0..m.min(n)).filter(|&i| s[i] > tol).count();
    let v = svd.V();
    let cols: Vec<usize> = (0..n)
        .filter(|&j| j >= m.min(n) || s[j] <= tol)
        .collect();
    debug_assert_eq!(cols.len(), n - rank);
    Ok(Mat::from_fn(n, cols.len(), |i, k| v[(i, cols[k])]))
}

/// Numerical rank of a sparse matrix.
pub fn rank(c: &Csr) -> Result<usize> {
    let (m, n) = (c.nrows, c.ncols);
    let mut a = Mat::<f64>::zeros(m, n);
    for (i, j, v) in c.triplets() {
        a[(i, j)] += v;
    }
    let s = a
        .singular_values()
        .map_err(|e| Error::numerical(format!("SVD failed: {e:?}")))?;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let tol = smax * 1e-10 * (m.max(n) as f64);
    Ok(s.iter().filter(|&&x| x > tol).count())
}

/// Makes the columns of `z` orthonormal in the `M` inner product.
pub fn mass_orthonormalize(z: &Mat<f64>, mass: &Csr) -> Result<Mat<f64>> {
    let (n, k) = (z.nrows(), z.ncols());
    let mut mz = Mat::<f64>::zeros(n, k);
    for j in 0..k {
        let col: Vec<f64> = (0..n).map(|i| z[(i, j)]).collect();
        let y = mass.matvec(&col);
        for i in 0..n {
            mz[(i, j)] = y[i];
        }
    }
    let g = z.transpose() * &mz;
    let llt = g
        .llt(faer::Side::Lower)
        .map_err(|e| Error::numerical(format!("Gram matrix not positive definite: {e:?}")))?;
    let l = llt.L();
    // Z L^{-T}: solve L Y^T = Z^T
    let mut yt = z.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, yt.as_mut(), faer::Par::Seq);
    Ok(yt.transpose().to_owned())
}
