use super::Point;
use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::PI;

/// One flat side of a convex polygon, oriented counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub index: usize,
    pub start: Point,
    pub end: Point,
    /// Outward unit normal.
    pub normal: Point,
    /// Unit tangent pointing from `start` to `end`.
    pub tangent: Point,
    pub length: f64,
}

impl Face {
    fn new(index: usize, start: Point, end: Point) -> Self {
        let d = end - start;
        let length = d.norm();
        let tangent = d * (1.0 / length);
        Face {
            index,
            start,
            end,
            normal: Point::new(tangent.y, -tangent.x),
            tangent,
            length,
        }
    }

    /// Point at arclength fraction `s` in [0, 1].
    pub fn at(&self, s: f64) -> Point {
        self.start + (self.end - self.start) * s
    }

    /// Tangential part `v - (v.n) n` of a complex vector.
    pub fn tangential_component(&self, v: [C64; 2]) -> [C64; 2] {
        let vn = v[0] * self.normal.x + v[1] * self.normal.y;
        [v[0] - vn * self.normal.x, v[1] - vn * self.normal.y]
    }

    /// Tangential gradient of a scalar whose full gradient is `grad`.
    pub fn tangential_gradient(&self, grad: [C64; 2]) -> [C64; 2] {
        let gt = grad[0] * self.tangent.x + grad[1] * self.tangent.y;
        [gt * self.tangent.x, gt * self.tangent.y]
    }

    /// Tangential divergence of a tangent field with Jacobian `jac[i][j] = d_j w_i`.
    /// On a flat face this is the arclength derivative of `w.t`.
    pub fn tangential_divergence(&self, jac: [[C64; 2]; 2]) -> C64 {
        let t = [self.tangent.x, self.tangent.y];
        let mut s = C64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                s += jac[i][j] * (t[i] * t[j]);
            }
        }
        s
    }
}

/// A convex polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
    faces: Vec<Face>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::validation(format!(
                "a polygon needs at least 3 vertices, got {n}"
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::validation("polygon vertex is not finite"));
        }
        let scale = vertices
            .iter()
            .flat_map(|a| vertices.iter().map(move |b| a.dist(*b)))
            .fold(0.0_f64, f64::max);
        if scale == 0.0 {
            return Err(Error::validation("polygon is degenerate"));
        }
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            if e1.norm() <= 1e-12 * scale {
                return Err(Error::validation(format!("repeated vertex at index {}", (i + 1) % n)));
            }
            let cr = e1.cross(e2);
            if cr.abs() <= 1e-12 * scale * scale {
                return Err(Error::validation(format!(
                    "collinear vertices around index {}",
                    (i + 1) % n
                )));
            }
            if cr < 0.0 {
                return Err(Error::validation(
                    "polygon is not convex or not counter-clockwise",
                ));
            }
            turning += cr.atan2(e1.dot(e2));
        }
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::validation("polygon winds more than once"));
        }
        let faces = (0..n)
            .map(|i| Face::new(i, vertices[i], vertices[(i + 1) % n]))
            .collect();
        Ok(ConvexPolygon { vertices, faces })
    }

    pub fn unit_square() -> Self {
        Self::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .expect("unit square is valid")
    }

    /// Regular n-gon centred at the origin with the given circumradius.
    pub fn regular_ngon(n: usize, radius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::validation(format!("n-gon needs n >= 3, got {n}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::validation(format!("n-gon radius must be positive, got {radius}")));
        }
        let verts = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                Point::new(radius * t.cos(), radius * t.sin())
            })
            .collect();
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a.cross(b);
            cx += (a.x + b.x) * w;
            cy += (a.y + b.y) * w;
        }
        let k = 1.0 / (6.0 * self.area());
        Point::new(cx * k, cy * k)
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d = 0.0_f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(v[i].dist(v[j]));
            }
        }
        d
    }

    /// Closed containment test with an absolute tolerance.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.faces
            .iter()
            .all(|f| (p - f.start).dot(f.normal) <= tol)
    }
}
