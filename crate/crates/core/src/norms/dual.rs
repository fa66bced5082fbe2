use crate::error::{Error, Result};
use crate::fem::{Operators, TaylorHood};
use crate::sparse::{Csr, RealCholesky};
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualKind {
    /// Dual of `H^1_0`: test fields vanish on the boundary.
    H1ZeroDual,
    /// Dual of the full `H^1`.
    H1FullDual,
}

/// Discrete `H^{-1}` norm `(l^* K^{-1} l)^{1/2}`.
pub struct DualNorm {
    kind: DualKind,
    gram: Csr,
    fixed: Vec<bool>,
    llt: RealCholesky,
}

impl DualNorm {
    pub fn new(space: &TaylorHood, ops: &Operators, kind: DualKind) -> Result<Self> {
        let k1 = ops.h1_gram();
        let fixed = match kind {
            DualKind::H1ZeroDual => space.boundary_vel_mask(),
            DualKind::H1FullDual => vec![false; space.n_vel()],
        };
        let gram = k1.eliminate(&fixed);
        let llt = RealCholesky::new(&gram).map_err(|_| Error::Singular("H^1 Gram matrix is singular".into()))?;
        Ok(DualNorm { kind, gram, fixed, llt })
    }

    pub fn kind(&self) -> DualKind {
        self.kind
    }

    /// Gram matrix `K` (Dirichlet rows eliminated for the `H^1_0` flavor).
    pub fn gram(&self) -> &Csr {
        &self.gram
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    /// Restricts a functional to admissible test fields.
    pub fn restrict(&self, l: &[C64]) -> Vec<C64> {
        l.iter()
            .zip(&self.fixed)
            .map(|(v, &f)| if f { C64::new(0.0, 0.0) } else { *v })
            .collect()
    }

    /// Riesz representative `K^{-1} l`.
    pub fn riesz(&self, l: &[C64]) -> Vec<C64> {
        self.llt.solve_c(&self.restrict(l))
    }

    pub fn norm(&self, l: &[C64]) -> f64 {
        let r = self.restrict(l);
        let w = self.llt.solve_c(&r);
        r.iter()
            .zip(&w)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// `H^{-1}` norm of an `L^2` field through its mass functional.
    pub fn norm_of_field(&self, mass: &Csr, u: &[C64]) -> f64 {
        self.norm(&mass.matvec_c(u))
    }
}
