use crate::fem::TaylorHood;
use crate::quadrature::TriangleRule;
use crate::C64;

/// Elements over which an integral is taken; `None` means the whole mesh.
pub type Region<'a> = Option<&'a [usize]>;

fn elements(space: &TaylorHood, region: Region<'_>) -> Vec<usize> {
    match region {
        Some(r) => r.to_vec(),
        None => (0..space.mesh().n_triangles()).collect(),
    }
}

/// `sum_T int_T g(t, l)` with the degree-8 rule, `l` barycentric.
pub fn integrate(space: &TaylorHood, region: Region<'_>, g: impl Fn(usize, [f64; 3]) -> f64) -> f64 {
    let rule = TriangleRule::high_order();
    elements(space, region)
        .into_iter()
        .map(|t| {
            let a = space.geom(t).area;
            rule.bary
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| w * a * g(t, *l))
                .sum::<f64>()
        })
        .sum()
}

fn check_p(p: f64) {
    assert!((1.0..=64.0).contains(&p), "p must lie in [1, 64], got {p}");
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `L^p` norm of a P2 velocity with the Euclidean pointwise modulus.
pub fn lp_norm(space: &TaylorHood, u: &[C64], p: f64, region: Region<'_>) -> f64 {
    check_p(p);
    integrate(space, region, |t, l| vnorm(&space.eval_velocity(u, t, l).0).powf(p)).powf(1.0 / p)
}

/// `L^p` norm of the velocity gradient with the Frobenius pointwise modulus.
pub fn lp_norm_gradient(space: &TaylorHood, u: &[C64], p: f64, region: Region<'_>) -> f64 {
    check_p(p);
    integrate(space, region, |t, l| {
        let j = space.eval_velocity(u, t, l).1;
        vnorm(&[j[0][0], j[0][1], j[1][0], j[1][1]]).powf(p)
    })
    .powf(1.0 / p)
}

/// `L^p` norm of a P1 pressure.
pub fn lp_norm_pressure(space: &TaylorHood, phi: &[C64], p: f64, region: Region<'_>) -> f64 {
    check_p(p);
    integrate(space, region, |t, l| space.eval_pressure(phi, t, l).0.norm().powf(p)).powf(1.0 / p)
}

/// `L^2` norm of the (elementwise constant) pressure gradient.
pub fn pressure_gradient_norm(space: &TaylorHood, phi: &[C64], region: Region<'_>) -> f64 {
    elements(space, region)
        .into_iter()
        .map(|t| {
            let g = space.eval_pressure(phi, t, [1.0 / 3.0; 3]).1;
            space.geom(t).area * (g[0].norm_sqr() + g[1].norm_sqr())
        })
        .sum::<f64>()
        .sqrt()
}

/// `(sum_T |T| |Hess u|_T|^2)^{1/2}`.
pub fn broken_h2_seminorm(space: &TaylorHood, u: &[C64], region: Region<'_>) -> f64 {
    elements(space, region)
        .into_iter()
        .map(|t| {
            let h = space.eval_velocity_hessian(u, t);
            let s: f64 = h.iter().flatten().flatten().map(|c| c.norm_sqr()).sum();
            space.geom(t).area * s
        })
        .sum::<f64>()
        .sqrt()
}

/// `L^p` norm of a pointwise magnitude given as a closure of the physical point.
pub fn lp_norm_callable(
    space: &TaylorHood,
    f: impl Fn(crate::geometry::Point) -> f64,
    p: f64,
    region: Region<'_>,
) -> f64 {
    check_p(p);
    integrate(space, region, |t, l| f(space.geom(t).point(l)).abs().powf(p)).powf(1.0 / p)
}
