//! Minimal real CSR matrices for finite element operators.

use crate::C64;
use faer::sparse::{SparseColMat, Triplet};

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            debug_assert!(i < nrows && j < ncols);
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Csr { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Csr::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn matvec_c(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).fold(C64::new(0.0, 0.0), |s, (j, v)| s + x[j] * v))
            .collect()
    }

    /// `A^T x` for complex `x`.
    pub fn tmatvec_c(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![C64::new(0.0, 0.0); self.ncols];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                y[j] += x[i] * v;
            }
        }
        y
    }

    /// Hermitian form `x^H A x` (real part; exact for symmetric `A`).
    pub fn quad_form(&self, x: &[C64]) -> f64 {
        let ax = self.matvec_c(x);
        x.iter().zip(&ax).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `x^H A y`.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let ay = self.matvec_c(y);
        x.iter().zip(&ay).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn transpose(&self) -> Csr {
        Csr::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Csr, alpha: f64) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        Csr::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn scale(&self, alpha: f64) -> Csr {
        let mut c = self.clone();
        c.values.iter_mut().for_each(|v| *v *= alpha);
        c
    }

    /// Keeps rows in `rows` (in that order).
    pub fn select_rows(&self, rows: &[usize]) -> Csr {
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| self.row(i).map(move |(j, v)| (k, j, v)))
            .collect();
        Csr::from_triplets(rows.len(), self.ncols, t)
    }

    /// Symmetric Dirichlet elimination: rows and columns flagged in `fixed`
    /// are zeroed and a unit diagonal is placed on them.
    pub fn eliminate(&self, fixed: &[bool]) -> Csr {
        assert_eq!(self.nrows, self.ncols);
        let t = self
            .triplets()
            .filter(|&(i, j, _)| !fixed[i] && !fixed[j])
            .chain((0..self.nrows).filter(|&i| fixed[i]).map(|i| (i, i, 1.0)))
            .collect();
        Csr::from_triplets(self.nrows, self.ncols, t)
    }

    /// Zeroes the columns flagged in `fixed` (rectangular operators).
    pub fn drop_columns(&self, fixed: &[bool]) -> Csr {
        let t = self.triplets().filter(|&(_, j, _)| !fixed[j]).collect();
        Csr::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            d[i][j] += v;
        }
        d
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let t: Vec<Triplet<usize, usize, f64>> =
            self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t).expect("valid triplets")
    }

    pub fn max_abs_diff(&self, other: &Csr) -> f64 {
        self.add_scaled(other, -1.0)
            .values
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Block matrix builder: places sub-matrices at offsets into one triplet list.
#[derive(Default)]
pub struct BlockBuilder {
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl BlockBuilder {
    pub fn new(n: usize) -> Self {
        BlockBuilder { n, triplets: Vec::new() }
    }

    pub fn add(&mut self, row0: usize, col0: usize, m: &Csr, alpha: f64) {
        self.triplets
            .extend(m.triplets().map(|(i, j, v)| (row0 + i, col0 + j, alpha * v)));
    }

    pub fn add_transposed(&mut self, row0: usize, col0: usize, m: &Csr, alpha: f64) {
        self.triplets
            .extend(m.triplets().map(|(i, j, v)| (row0 + j, col0 + i, alpha * v)));
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        self.triplets.push((i, j, v));
    }

    pub fn build(self) -> Csr {
        Csr::from_triplets(self.n, self.n, self.triplets)
    }
}

pub fn dot_c(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_c(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_complex(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Sparse LU of a real matrix, applied to complex vectors.
pub struct RealLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl RealLu {
    pub fn new(a: &Csr) -> crate::Result<Self> {
        let lu = a
            .to_faer()
            .sp_lu()
            .map_err(|e| crate::Error::Singular(format!("real LU failed: {e:?}")))?;
        Ok(RealLu { n: a.nrows, lu })
    }

    pub fn solve_c(&self, b: &[C64]) -> Vec<C64> {
        use faer::linalg::solvers::SolveCore;
        assert_eq!(b.len(), self.n);
        let mut m = faer::Mat::<f64>::from_fn(self.n, 2, |i, j| if j == 0 { b[i].re } else { b[i].im });
        self.lu.solve_in_place_with_conj(faer::Conj::No, m.as_mut());
        (0..self.n).map(|i| C64::new(m[(i, 0)], m[(i, 1)])).collect()
    }
}

/// Sparse Cholesky of a real SPD matrix, applied to complex vectors.
pub struct RealCholesky {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl RealCholesky {
    pub fn new(a: &Csr) -> crate::Result<Self> {
        let llt = a
            .to_faer()
            .sp_cholesky(faer::Side::Lower)
            .map_err(|e| crate::Error::numerical(format!("Cholesky failed: {e:?}")))?;
        Ok(RealCholesky { n: a.nrows, llt })
    }

    pub fn solve_c(&self, b: &[C64]) -> Vec<C64> {
        use faer::linalg::solvers::SolveCore;
        assert_eq!(b.len(), self.n);
        let mut m = faer::Mat::<f64>::from_fn(self.n, 2, |i, j| if j == 0 { b[i].re } else { b[i].im });
        self.llt.solve_in_place_with_conj(faer::Conj::No, m.as_mut());
        (0..self.n).map(|i| C64::new(m[(i, 0)], m[(i, 1)])).collect()
    }
}
