use super::config::Domain;
use super::records::max_and_median;
use crate::error::{Error, Result};
use crate::fem::{load_vector, BoundaryCondition, Load};
use crate::geometry::Point;
use crate::norms::{broken_h2_seminorm, lp_norm, lp_norm_callable, lp_norm_gradient, pressure_gradient_norm};
use crate::par::map_collect;
use crate::solver::{SectorSample, StokesSystem};
use crate::C64;
use serde::Serialize;
use std::f64::consts::PI;

/// Upper end of the admissible `mu` range, `sqrt(2) - 1`.
pub const H2_MU_MAX: f64 = std::f64::consts::SQRT_2 - 1.0;

pub fn validate_h2_mu(mu: f64) -> Result<()> {
    if mu > -1.0 && mu < H2_MU_MAX {
        Ok(())
    } else {
        Err(Error::validation(format!("mu = {mu} outside (-1, sqrt(2) - 1) for the H^2 estimate")))
    }
}

/// Frequencies of the force family at `|lambda|`: 1..=4 plus the one matching the
/// boundary-layer scale, capped by mesh resolution.
pub fn force_frequencies(abs_lambda: f64, h: f64) -> Vec<u32> {
    let mut ks: Vec<u32> = (1..=4).collect();
    let cap = (0.25 / h).floor().max(1.0) as u32;
    let k = (abs_lambda.sqrt() / PI).round() as u32;
    for extra in [k, 2 * k] {
        if extra > 4 && extra <= cap && !ks.contains(&extra) {
            ks.push(extra);
        }
    }
    ks
}

/// Divergence-free `curl(cos(k pi x) cos(k pi y))`.
pub fn curl_force(k: u32) -> impl Fn(Point) -> [C64; 2] + Sync {
    let w = k as f64 * PI;
    move |p: Point| {
        let (cx, sx) = ((w * p.x).cos(), (w * p.x).sin());
        let (cy, sy) = ((w * p.y).cos(), (w * p.y).sin());
        [C64::new(-w * cx * sy, 0.0), C64::new(w * sx * cy, 0.0)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct H2Row {
    pub level: usize,
    pub h: f64,
    pub abs_lambda: f64,
    /// Largest ratio over the force family.
    pub ratio: f64,
    pub frequencies: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct H2Report {
    pub mu: f64,
    pub rows: Vec<H2Row>,
}

impl H2Report {
    pub fn level(&self, level: usize) -> Vec<&H2Row> {
        self.rows.iter().filter(|r| r.level == level).collect()
    }

    /// `(max, median)` of the ratios on one level.
    pub fn spread(&self, level: usize) -> Option<(f64, f64)> {
        let v: Vec<f64> = self.level(level).iter().map(|r| r.ratio).collect();
        (!v.is_empty()).then(|| max_and_median(&v))
    }

    /// Largest `|r_fine / r_coarse - 1|` over the lambdas both levels resolve.
    pub fn refinement_change(&self, coarse: usize, fine: usize) -> Option<f64> {
        let f = self.level(fine);
        let mut worst: Option<f64> = None;
        for c in self.level(coarse) {
            if let Some(r) = f.iter().find(|r| (r.abs_lambda - c.abs_lambda).abs() <= 1e-9 * c.abs_lambda) {
                let d = (r.ratio / c.ratio - 1.0).abs();
                worst = Some(worst.map_or(d, |w: f64| w.max(d)));
            }
        }
        worst
    }
}

/// `[|lambda| ||grad u||^2 + |u|_{H^2}^2 + ||grad phi||^2] / [||f||^2 + |lambda|^2 ||u||^2]`
/// per resolved lambda and level, traction boundary condition.
pub fn check_h2_estimate(
    domain: &Domain,
    levels: &[usize],
    mu: f64,
    samples: &[SectorSample],
    threads: usize,
) -> Result<H2Report> {
    validate_h2_mu(mu)?;
    let bc = BoundaryCondition::Neumann { mu };
    let mut rows = Vec::new();
    for &level in levels {
        let system = StokesSystem::new(domain.mesh(level)?, bc)?;
        let h = system.h();
        let todo: Vec<SectorSample> = samples.iter().copied().filter(|s| system.resolved(s.lambda())).collect();
        let level_rows = map_collect(&todo, threads, |s| {
            let res = system.factor(s.lambda())?;
            let space = system.space();
            let l = s.modulus();
            let ks = force_frequencies(l, h);
            let mut best: f64 = 0.0;
            for &k in &ks {
                let f = curl_force(k);
                let nf = lp_norm_callable(space, |p| {
                    let v = f(p);
                    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
                }, 2.0, None);
                if nf == 0.0 {
                    continue;
                }
                let b = load_vector(space, Load::Volume(&f), &bc)?;
                let (u, phi) = res.solve_fields(&b);
                let num = l * lp_norm_gradient(space, &u, 2.0, None).powi(2)
                    + broken_h2_seminorm(space, &u, None).powi(2)
                    + pressure_gradient_norm(space, &phi, None).powi(2);
                let den = nf * nf + l * l * lp_norm(space, &u, 2.0, None).powi(2);
                best = best.max(num / den);
            }
            Ok(H2Row { level, h, abs_lambda: l, ratio: best, frequencies: ks })
        })?;
        rows.extend(level_rows);
    }
    Ok(H2Report { mu, rows })
}
