//! Closed-form vector fields with exact Jacobians.

use crate::geometry::Point;
use crate::C64;
use rand::Rng;

/// Smooth vector field on the plane.
pub trait VectorField: Sync {
    fn value(&self, p: Point) -> [C64; 2];
    /// `J[i][j] = d_j v_i`.
    fn jacobian(&self, p: Point) -> [[C64; 2]; 2];
    /// Disk containing the support, for compactly supported fields.
    fn support_disk(&self) -> Option<(Point, f64)> {
        None
    }
}

/// Sum of monomials `c x^a y^b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(u32, u32, C64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(u32, u32, C64)>) -> Self {
        Polynomial { terms }
    }

    pub fn eval(&self, p: Point) -> C64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * (p.x.powi(a as i32) * p.y.powi(b as i32)))
            .sum()
    }

    pub fn dx(&self) -> Polynomial {
        Polynomial::new(
            self.terms
                .iter()
                .filter(|t| t.0 > 0)
                .map(|&(a, b, c)| (a - 1, b, c * a as f64))
                .collect(),
        )
    }

    pub fn dy(&self) -> Polynomial {
        Polynomial::new(
            self.terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(a, b, c)| (a, b - 1, c * b as f64))
                .collect(),
        )
    }
}

/// Vector field with polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialField {
    pub components: [Polynomial; 2],
}

impl PolynomialField {
    pub fn new(u: Polynomial, v: Polynomial) -> Self {
        PolynomialField { components: [u, v] }
    }

    /// Field with coefficients drawn uniformly from the unit complex square,
    /// all monomials of total degree at most `degree`.
    pub fn random<R: Rng>(rng: &mut R, degree: u32) -> Self {
        let mut comp = || {
            let mut terms = Vec::new();
            for a in 0..=degree {
                for b in 0..=degree - a {
                    let c = C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
                    terms.push((a, b, c));
                }
            }
            Polynomial::new(terms)
        };
        let u = comp();
        let v = comp();
        PolynomialField::new(u, v)
    }
}

impl VectorField for PolynomialField {
    fn value(&self, p: Point) -> [C64; 2] {
        [self.components[0].eval(p), self.components[1].eval(p)]
    }

    fn jacobian(&self, p: Point) -> [[C64; 2]; 2] {
        let row = |q: &Polynomial| [q.dx().eval(p), q.dy().eval(p)];
        [row(&self.components[0]), row(&self.components[1])]
    }
}

/// `(1 - |x - c|^2 / r^2)^k w(x)` inside the disk, zero outside, with `w`
/// a polynomial field.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpField {
    pub center: Point,
    pub radius: f64,
    pub power: i32,
    pub profile: PolynomialField,
}

impl BumpField {
    fn envelope(&self, p: Point) -> (f64, [f64; 2]) {
        let d = p - self.center;
        let s = 1.0 - d.dot(d) / (self.radius * self.radius);
        if s <= 0.0 {
            return (0.0, [0.0, 0.0]);
        }
        let k = self.power;
        let g = -2.0 * k as f64 * s.powi(k - 1) / (self.radius * self.radius);
        (s.powi(k), [g * d.x, g * d.y])
    }
}

impl VectorField for BumpField {
    fn value(&self, p: Point) -> [C64; 2] {
        let (e, _) = self.envelope(p);
        let w = self.profile.value(p);
        [w[0] * e, w[1] * e]
    }

    fn jacobian(&self, p: Point) -> [[C64; 2]; 2] {
        let (e, de) = self.envelope(p);
        let w = self.profile.value(p);
        let dw = self.profile.jacobian(p);
        let mut j = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                j[i][k] = dw[i][k] * e + w[i] * de[k];
            }
        }
        j
    }

    fn support_disk(&self) -> Option<(Point, f64)> {
        Some((self.center, self.radius))
    }
}
