//! Quadrature rules on the reference triangle and on intervals.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Rule on the reference triangle in barycentric coordinates.
/// Weights sum to one, so integrals are `area * sum(w_q f(x_q))`.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub bary: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Six-point symmetric rule, exact to degree 4.
    pub fn dunavant4() -> Self {
        let (a1, b1, w1) = (0.445_948_490_915_965, 0.108_103_018_168_070, 0.223_381_589_678_011);
        let (a2, b2, w2) = (0.091_576_213_509_771, 0.816_847_572_980_459, 0.109_951_743_655_322);
        let bary = vec![
            [a1, a1, b1],
            [a1, b1, a1],
            [b1, a1, a1],
            [a2, a2, b2],
            [a2, b2, a2],
            [b2, a2, a2],
        ];
        // renormalise so the weights sum to one to full precision
        let s = 3.0 * (w1 + w2);
        TriangleRule {
            bary,
            weights: vec![w1 / s, w1 / s, w1 / s, w2 / s, w2 / s, w2 / s],
            degree: 4,
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `n` points per direction,
    /// exact to degree `2n - 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut bary = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let xi = x[i];
                let eta = (1.0 - x[i]) * x[j];
                bary.push([1.0 - xi - eta, xi, eta]);
                weights.push(2.0 * w[i] * w[j] * (1.0 - x[i]));
            }
        }
        TriangleRule {
            bary,
            weights,
            degree: 2 * n - 2,
        }
    }

    /// Degree-8 rule used for norms and error integrals.
    pub fn high_order() -> Self {
        Self::collapsed_gauss(5)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Exact integral of `x^a y^b` over the triangle (0,0), (1,0), (0,1).
pub fn reference_monomial(a: u32, b: u32) -> f64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}
