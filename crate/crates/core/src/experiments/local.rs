use super::records::{LocalizedId, LocalizedReport};
use crate::error::{Error, Result};
use crate::fem::{load_vector, Load};
use crate::fields::VectorField;
use crate::geometry::{cube_polygon_cover, CoverOutcome, CubePatch};
use crate::norms::integrate;
use crate::quadrature::TriangleRule;
use crate::solver::{SectorSample, StokesSystem};
use crate::C64;

/// Elements where `f` is nonzero at some quadrature point of the load rule.
pub fn load_support(system: &StokesSystem, f: &dyn VectorField) -> Vec<usize> {
    let space = system.space();
    let rule = TriangleRule::high_order();
    (0..space.mesh().n_triangles())
        .filter(|&t| {
            let g = space.geom(t);
            rule.bary.iter().any(|l| {
                let v = f.value(g.point(*l));
                v[0].norm_sqr() + v[1].norm_sqr() > 0.0
            })
        })
        .collect()
}

fn cover(system: &StokesSystem, patch: &CubePatch) -> Vec<usize> {
    match cube_polygon_cover(system.space().mesh(), patch) {
        CoverOutcome::Covered(c) => c.elements,
        CoverOutcome::Empty => Vec::new(),
    }
}

/// Caccioppoli, local `H^2` and weak reverse Hoelder (`p = 4`) ratios on
/// `(Q, 2Q)` for a force supported away from `8Q`. Traction boundary only.
pub fn check_localized(
    system: &StokesSystem,
    samples: &[SectorSample],
    patch: &CubePatch,
    f: &dyn VectorField,
) -> Result<Vec<LocalizedReport>> {
    if system.bc().is_dirichlet() {
        return Err(Error::validation("localized checks use the traction boundary condition"));
    }
    let q1 = cover(system, patch);
    if q1.is_empty() {
        return Err(Error::validation("patch does not meet the domain"));
    }
    let q2 = cover(system, &patch.dilate(2.0));
    let q8 = cover(system, &patch.dilate(8.0));
    let support = load_support(system, f);
    if support.iter().any(|t| q8.binary_search(t).is_ok()) {
        return Err(Error::validation("force support meets the 8-dilated patch"));
    }
    let space = system.space();
    let fv = |p| f.value(p);
    let load = load_vector(space, Load::Volume(&fv), &system.bc())?;
    let scale = integrate(space, None, |t, l| {
        let v = f.value(space.geom(t).point(l));
        v[0].norm_sqr() + v[1].norm_sqr()
    });
    let r = patch.diameter;
    let mut out = Vec::new();
    for s in samples {
        let res = system.factor(s.lambda())?;
        let (u, phi) = res.solve_fields(&load);
        let l = s.modulus();
        let pointwise = |t: usize, b: [f64; 3]| {
            let (v, j) = space.eval_velocity(&u, t, b);
            let (p, gp) = space.eval_pressure(&phi, t, b);
            let u2 = v[0].norm_sqr() + v[1].norm_sqr();
            let g2: f64 = j.iter().flatten().map(C64::norm_sqr).sum();
            (u2, g2, p.norm_sqr(), gp[0].norm_sqr() + gp[1].norm_sqr())
        };
        let int = |region: &[usize], w: &dyn Fn((f64, f64, f64, f64)) -> f64| {
            integrate(space, Some(region), |t, b| w(pointwise(t, b)))
        };
        let cacc_l = int(&q1, &|(u2, g2, _, _)| l * u2 + g2);
        let cacc_r = int(&q2, &|(u2, _, p2, _)| p2 / l + u2) / (r * r);
        out.push(LocalizedReport::new(*patch, LocalizedId::Caccioppoli, l, cacc_l, cacc_r, scale / l));

        let hess2: f64 = q1
            .iter()
            .map(|&t| {
                let h = space.eval_velocity_hessian(&u, t);
                space.geom(t).area * h.iter().flatten().flatten().map(C64::norm_sqr).sum::<f64>()
            })
            .sum();
        let h2_l = l * int(&q1, &|(_, g2, _, _)| g2) + hess2 + int(&q1, &|(_, _, _, gp2)| gp2);
        let h2_r = l * l * int(&q2, &|(u2, _, _, _)| u2) + int(&q2, &|(_, g2, p2, _)| g2 + p2) / (r * r);
        out.push(LocalizedReport::new(*patch, LocalizedId::LocalH2, l, h2_l, h2_r, scale));

        let g = |(u2, g2, p2, _): (f64, f64, f64, f64)| l * u2.sqrt() + l.sqrt() * (g2.sqrt() + p2.sqrt());
        let rh_l = (int(&q1, &|x| g(x).powi(4)) / (r * r)).powf(0.25);
        let rh_r = (int(&q2, &|x| g(x).powi(2)) / (r * r)).sqrt();
        out.push(LocalizedReport::new(*patch, LocalizedId::ReverseHolder, l, rh_l, rh_r, scale.sqrt() * l));
    }
    Ok(out)
}
