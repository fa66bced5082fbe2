use super::records::IdentityReport;
use crate::error::{Error, Result};
use crate::fields::VectorField;
use crate::geometry::{ConvexPolygon, Face};
use crate::quadrature::{gauss_legendre, TriangleRule};
use crate::C64;
use std::f64::consts::PI;

fn volume_integrand(v: &dyn VectorField, p: crate::geometry::Point) -> f64 {
    let j = v.jacobian(p);
    let div = j[0][0] + j[1][1];
    let mut cross = C64::new(0.0, 0.0);
    for i in 0..2 {
        for k in 0..2 {
            // d_k v_i * conj(d_i v_k)
            cross += j[i][k] * j[k][i].conj();
        }
    }
    div.norm_sqr() - cross.re
}

fn face_integrand(v: &dyn VectorField, f: &Face, p: crate::geometry::Point) -> f64 {
    let val = v.value(p);
    let jac = v.jacobian(p);
    let n = f.normal;
    let vn = val[0] * n.x + val[1] * n.y;
    // gradient of v.n: d_k (v.n) = sum_i n_i d_k v_i
    let grad_vn = [jac[0][0] * n.x + jac[1][0] * n.y, jac[0][1] * n.x + jac[1][1] * n.y];
    let vt = f.tangential_component(val);
    let vt_bar = [vt[0].conj(), vt[1].conj()];
    // Jacobian of w = (v.n) conj(v_T); d_k conj(v_T)_i = conj(d_k v_i - n_i d_k (v.n))
    let mut jw = [[C64::new(0.0, 0.0); 2]; 2];
    let nn = [n.x, n.y];
    for i in 0..2 {
        for k in 0..2 {
            let dvt = (jac[i][k] - grad_vn[k] * nn[i]).conj();
            jw[i][k] = grad_vn[k] * vt_bar[i] + vn * dvt;
        }
    }
    let div_t = f.tangential_divergence(jw);
    let gt = f.tangential_gradient(grad_vn);
    let dot = vt[0] * gt[0].conj() + vt[1] * gt[1].conj();
    (div_t - dot * 2.0).re
}

/// Volume term over the polygon, or over the support disk for compactly
/// supported fields (polar Gauss rule, exact for polynomial bumps).
fn volume_term(poly: &ConvexPolygon, v: &dyn VectorField, order: usize) -> f64 {
    if let Some((c, r)) = v.support_disk() {
        let inside = poly.faces().iter().all(|f| (f.start - c).dot(f.normal) >= r);
        if inside {
            let nr = order.max(16);
            let nt = 4 * nr;
            let (xs, ws) = gauss_legendre(nr);
            let mut s = 0.0;
            for (&x, &w) in xs.iter().zip(&ws) {
                let rho = r * x;
                for k in 0..nt {
                    let a = 2.0 * PI * k as f64 / nt as f64;
                    let p = c + crate::geometry::Point::new(a.cos(), a.sin()) * rho;
                    s += w * r * rho * (2.0 * PI / nt as f64) * volume_integrand(v, p);
                }
            }
            return s;
        }
    }
    let rule = TriangleRule::collapsed_gauss(order / 2 + 1);
    let vs = poly.vertices();
    let mut s = 0.0;
    for i in 1..vs.len() - 1 {
        let (a, b, cc) = (vs[0], vs[i], vs[i + 1]);
        let area = 0.5 * (b - a).cross(cc - a);
        for (l, &w) in rule.bary.iter().zip(&rule.weights) {
            let p = a * l[0] + b * l[1] + cc * l[2];
            s += w * area * volume_integrand(v, p);
        }
    }
    s
}

fn boundary_term(poly: &ConvexPolygon, v: &dyn VectorField, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order / 2 + 1);
    poly.faces()
        .iter()
        .map(|f| {
            xs.iter()
                .zip(&ws)
                .map(|(&s, &w)| w * f.length * face_integrand(v, f, f.at(s)))
                .sum::<f64>()
        })
        .sum()
}

/// Evaluates both sides of the flat-face Grisvard identity
/// `int |div v|^2 - int d_j v_i conj(d_i v_j) = sum_faces int div_T((v.n) conj(v_T)) - 2 Re(v_T . conj(grad_T (v.n)))`.
pub fn check_grisvard(
    poly: &ConvexPolygon,
    v: &dyn VectorField,
    order: usize,
    id: &str,
) -> Result<IdentityReport> {
    if order < 2 {
        return Err(Error::validation("quadrature order must be at least 2"));
    }
    let lhs = volume_term(poly, v, order);
    let rhs = boundary_term(poly, v, order);
    Ok(IdentityReport::new(id, lhs, rhs))
}
