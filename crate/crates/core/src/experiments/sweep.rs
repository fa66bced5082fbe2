use super::config::FitWindow;
use super::records::{SweepRecord, SweepSample};
use crate::error::{Error, Result};
use crate::fem::{load_vector, BoundaryCondition, Load};
use crate::geometry::Point;
use crate::helmholtz::{ConstraintProjector, SolenoidalBasis, SolenoidalFlavor, DENSE_LIMIT};
use crate::norms::{
    fit_decay_exponent, lp_norm, lp_norm_callable, lp_norm_gradient, lp_norm_pressure, operator_norm, DecayFit,
    DualKind, DualNorm, InputNorm, Method, OperatorSpec, OutputFunctional, Subspace,
};
use crate::par::map_collect;
use crate::solver::{Resolvent, SectorSample, StokesSystem};
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub method: Method,
    pub threads: usize,
    pub skip_unresolved: bool,
    pub window: FitWindow,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            method: Method::Lanczos,
            threads: 0,
            skip_unresolved: true,
            window: FitWindow::UpperDecades(2.0),
        }
    }
}

/// Solenoidal input space, explicit when small enough for a dense null space.
pub enum InputSpace {
    Explicit(SolenoidalBasis),
    Implicit(ConstraintProjector),
}

impl InputSpace {
    pub fn new(system: &StokesSystem, flavor: SolenoidalFlavor) -> Result<Self> {
        let (space, ops) = (system.space(), system.operators());
        if system.n_vel() <= DENSE_LIMIT {
            Ok(InputSpace::Explicit(SolenoidalBasis::new(space, ops, flavor)?))
        } else {
            Ok(InputSpace::Implicit(ConstraintProjector::solenoidal(space, ops, flavor)?))
        }
    }

    /// `L2Sigma` for no-slip, `CalL2Sigma` for the traction condition.
    pub fn default_flavor(bc: &BoundaryCondition) -> SolenoidalFlavor {
        if bc.is_dirichlet() {
            SolenoidalFlavor::L2Sigma
        } else {
            SolenoidalFlavor::CalL2Sigma
        }
    }

    pub fn subspace(&self) -> Subspace<'_> {
        match self {
            InputSpace::Explicit(b) => Subspace::Explicit(b),
            InputSpace::Implicit(p) => Subspace::Implicit(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub record: SweepRecord,
    pub fit: DecayFit,
}

/// Runs `measure` at every sample, in parallel if enabled. Order follows `samples`.
pub fn run_samples<F>(
    system: &StokesSystem,
    samples: &[SectorSample],
    opts: &SweepOptions,
    measure: F,
) -> Result<Vec<SweepSample>>
where
    F: Fn(&Resolvent<'_>, &mut SweepSample) -> Result<()> + Sync + Send,
{
    let h = system.h();
    let todo: Vec<SectorSample> = samples
        .iter()
        .copied()
        .filter(|s| !opts.skip_unresolved || system.resolved(s.lambda()))
        .collect();
    map_collect(&todo, opts.threads, |s| {
        let res = system.factor(s.lambda())?;
        let mut out = SweepSample::empty(s.modulus(), s.arg(), h, system.resolved(s.lambda()));
        measure(&res, &mut out)?;
        Ok(out)
    })
}

fn record(system: &StokesSystem, domain: &str, samples: Vec<SweepSample>) -> SweepRecord {
    let bc = system.bc();
    SweepRecord {
        domain: domain.to_string(),
        bc: if bc.is_dirichlet() { "dirichlet".into() } else { "neumann".into() },
        mu: bc.mu(),
        samples,
    }
}

/// Resolved samples of the first ray, restricted to the fit window.
pub fn fit_samples(record: &SweepRecord, window: FitWindow, col: impl Fn(&SweepSample) -> Option<f64>) -> Vec<(f64, f64)> {
    let Some(arg0) = record.samples.first().map(|s| s.arg_lambda) else {
        return Vec::new();
    };
    let ray: Vec<(f64, f64)> = record
        .samples
        .iter()
        .filter(|s| s.resolved && s.arg_lambda == arg0)
        .filter_map(|s| col(s).map(|v| (s.abs_lambda, v)))
        .collect();
    window.select(&ray)
}

/// Growth exponent: the fit of `N ~ |lambda|^{alpha}`, `alpha_hat` positive for growth.
pub fn fit_growth_exponent(samples: &[(f64, f64)]) -> Result<DecayFit> {
    let mut f = fit_decay_exponent(samples)?;
    f.alpha_hat = -f.alpha_hat;
    Ok(f)
}

/// `sup_f ||phi|| / ||f||` over the solenoidal inputs, and its decay exponent.
pub fn sweep_pressure_decay(
    system: &StokesSystem,
    domain: &str,
    samples: &[SectorSample],
    flavor: SolenoidalFlavor,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let input = InputSpace::new(system, flavor)?;
    let spec = OperatorSpec { input: InputNorm::L2, subspace: input.subspace(), output: OutputFunctional::Pressure };
    let rows = run_samples(system, samples, opts, |res, out| {
        out.c_pressure = Some(operator_norm(&spec, res, None, opts.method)?.value);
        Ok(())
    })?;
    let record = record(system, domain, rows);
    let fit = fit_decay_exponent(&fit_samples(&record, opts.window, |s| s.c_pressure))?;
    Ok(SweepResult { record, fit })
}

/// Input space of functionals in the dual sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualFlavor {
    /// Every functional of the dual space.
    Full,
    /// Functionals whose Riesz representative is discretely solenoidal.
    Solenoidal,
}

/// Dual norm and input constraint for the boundary condition of `system`.
pub struct DualInput {
    pub dual: DualNorm,
    pub projector: Option<ConstraintProjector>,
}

impl DualInput {
    pub fn new(system: &StokesSystem, flavor: DualFlavor) -> Result<Self> {
        let (space, ops) = (system.space(), system.operators());
        let kind = if system.bc().is_dirichlet() { DualKind::H1ZeroDual } else { DualKind::H1FullDual };
        let dual = DualNorm::new(space, ops, kind)?;
        let projector = match flavor {
            DualFlavor::Full => None,
            DualFlavor::Solenoidal => {
                let c = match kind {
                    DualKind::H1FullDual => ops.div.clone(),
                    // pressure rows sum to the flux, which vanishes on H^1_0
                    DualKind::H1ZeroDual => {
                        let np = space.n_pres();
                        let rows: Vec<usize> = (0..np - 1).collect();
                        ops.div.drop_columns(dual.fixed()).select_rows(&rows)
                    }
                };
                Some(ConstraintProjector::with_gram(dual.gram(), &c)?)
            }
        };
        Ok(DualInput { dual, projector })
    }

    pub fn spec(&self, output: OutputFunctional) -> OperatorSpec<'_> {
        OperatorSpec {
            input: InputNorm::Dual(&self.dual),
            subspace: match &self.projector {
                Some(p) => Subspace::Implicit(p),
                None => Subspace::Full,
            },
            output,
        }
    }
}

/// `sup_F ||phi|| / ||F||_{H^{-1}}` and its growth exponent.
pub fn sweep_pressure_dual(
    system: &StokesSystem,
    domain: &str,
    samples: &[SectorSample],
    flavor: DualFlavor,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let input = DualInput::new(system, flavor)?;
    let spec = input.spec(OutputFunctional::Pressure);
    let rows = run_samples(system, samples, opts, |res, out| {
        out.c_pressure = Some(operator_norm(&spec, res, None, opts.method)?.value);
        Ok(())
    })?;
    let record = record(system, domain, rows);
    let fit = fit_growth_exponent(&fit_samples(&record, opts.window, |s| s.c_pressure))?;
    Ok(SweepResult { record, fit })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// Growth exponent of the pressure bound.
    pub pressure: DecayFit,
    /// Decay exponent of `sup ||u||_{H^{-1}} / ||F||_{H^{-1}}`.
    pub velocity: DecayFit,
    /// `|alpha_p - (1 - alpha_u)|`.
    pub gap: f64,
    #[serde(skip)]
    pub record: Option<SweepRecord>,
}

/// Pairs the pressure growth fit with the velocity decay fit.
pub fn equivalence_gap(pressure: &[(f64, f64)], velocity: &[(f64, f64)]) -> Result<EquivalenceReport> {
    let p = fit_growth_exponent(pressure)?;
    let u = fit_decay_exponent(velocity)?;
    let gap = (p.alpha_hat - (1.0 - u.alpha_hat)).abs();
    Ok(EquivalenceReport { pressure: p, velocity: u, gap, record: None })
}

/// No-slip only. `C_velocity` of the record holds `sup ||u||_{H^{-1}} / ||F||_{H^{-1}}`.
pub fn check_lemma_equivalence(
    system: &StokesSystem,
    domain: &str,
    samples: &[SectorSample],
    flavor: DualFlavor,
    opts: &SweepOptions,
) -> Result<EquivalenceReport> {
    if !system.bc().is_dirichlet() {
        return Err(Error::validation("the equivalence check is defined for no-slip boundaries"));
    }
    let input = DualInput::new(system, flavor)?;
    let sp = input.spec(OutputFunctional::Pressure);
    let su = input.spec(OutputFunctional::VelocityHMinus1);
    let rows = run_samples(system, samples, opts, |res, out| {
        out.c_pressure = Some(operator_norm(&sp, res, None, opts.method)?.value);
        out.c_velocity = Some(operator_norm(&su, res, Some(&input.dual), opts.method)?.value);
        Ok(())
    })?;
    let record = record(system, domain, rows);
    let mut rep = equivalence_gap(
        &fit_samples(&record, opts.window, |s| s.c_pressure),
        &fit_samples(&record, opts.window, |s| s.c_velocity),
    )?;
    rep.record = Some(record);
    Ok(rep)
}

/// Smooth field projected onto the default solenoidal subspace of the boundary condition.
pub fn representative_solenoidal(system: &StokesSystem) -> Result<Vec<C64>> {
    let space = system.space();
    let f0 = space.interpolate(|p| {
        let (x, y) = (p.x, p.y);
        [
            C64::new(1.0 + (std::f64::consts::PI * y).sin(), 0.3 * x),
            C64::new(x * y - 0.5, 0.2 * (std::f64::consts::PI * x).cos()),
        ]
    });
    let flavor = InputSpace::default_flavor(&system.bc());
    let proj = ConstraintProjector::solenoidal(space, system.operators(), flavor)?;
    Ok(proj.project(&f0))
}

/// Fixed matrix field of the divergence-form check.
pub fn representative_matrix_field(p: Point) -> [[C64; 2]; 2] {
    let (x, y) = (p.x, p.y);
    let pi = std::f64::consts::PI;
    [
        [C64::new(x * y, 0.0), C64::new((pi * y).cos(), 0.5 * x)],
        [C64::new((pi * x).sin(), -0.25), C64::new(x - y, y * y)],
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformSample {
    pub abs_lambda: f64,
    pub p: f64,
    /// `|lambda| ||u||_p / ||f||_p`.
    pub velocity: f64,
    /// `|lambda|^{1/2} ||grad u||_p / ||f||_p`.
    pub gradient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceSample {
    pub abs_lambda: f64,
    pub p: f64,
    /// `(|lambda|^{1/2} ||u||_p + ||grad u||_p + ||phi||_p) / ||F||_p`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformReport {
    #[serde(skip)]
    pub record: SweepRecord,
    pub volume: Vec<UniformSample>,
    pub divergence: Vec<DivergenceSample>,
}

/// Resolvent and gradient ratios for one force `f` (velocity coefficients) and
/// one matrix field `F`. A vanishing datum leaves its part of the report empty.
#[allow(clippy::too_many_arguments)]
pub fn check_uniform_resolvent(
    system: &StokesSystem,
    domain: &str,
    samples: &[SectorSample],
    p_list: &[f64],
    f: &[C64],
    big_f: Option<&(dyn Fn(Point) -> [[C64; 2]; 2] + Sync)>,
    opts: &SweepOptions,
) -> Result<UniformReport> {
    let space = system.space();
    let ops = system.operators();
    let fnorms: Vec<f64> = p_list.iter().map(|&p| lp_norm(space, f, p, None)).collect();
    let use_f = fnorms.iter().all(|&n| n > 0.0);
    let frob = |m: [[C64; 2]; 2]| m.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let (big_load, big_norms) = match big_f {
        Some(g) => {
            let norms: Vec<f64> = p_list.iter().map(|&p| lp_norm_callable(space, |x| frob(g(x)), p, None)).collect();
            if norms.iter().all(|&n| n > 0.0) {
                (Some(load_vector(space, Load::Divergence(g), &system.bc())?), norms)
            } else {
                (None, norms)
            }
        }
        None => (None, Vec::new()),
    };
    if !use_f && big_load.is_none() {
        return Ok(UniformReport { record: record(system, domain, Vec::new()), volume: Vec::new(), divergence: Vec::new() });
    }
    let f_load = ops.mass.matvec_c(f);
    let h = system.h();
    let todo: Vec<SectorSample> =
        samples.iter().copied().filter(|s| !opts.skip_unresolved || system.resolved(s.lambda())).collect();
    type Row = (SweepSample, Vec<UniformSample>, Vec<DivergenceSample>);
    let rows: Vec<Row> = map_collect(&todo, opts.threads, |s| {
        let res = system.factor(s.lambda())?;
        let l = s.modulus();
        let mut out = SweepSample::empty(l, s.arg(), h, system.resolved(s.lambda()));
        let mut vol = Vec::new();
        let mut div = Vec::new();
        if use_f {
            let (u, _) = res.solve_fields(&f_load);
            for (&p, &nf) in p_list.iter().zip(&fnorms) {
                let v = l * lp_norm(space, &u, p, None) / nf;
                let g = l.sqrt() * lp_norm_gradient(space, &u, p, None) / nf;
                vol.push(UniformSample { abs_lambda: l, p, velocity: v, gradient: g });
                if p == 2.0 {
                    out.c_velocity = Some(v);
                    out.c_gradient = Some(g);
                } else if p == 3.0 {
                    out.cp_p3 = Some(v + g);
                } else if p == 4.0 {
                    out.cp_p4 = Some(v + g);
                }
            }
        }
        if let Some(b) = &big_load {
            let (u, phi) = res.solve_fields(b);
            for (&p, &nf) in p_list.iter().zip(&big_norms) {
                let num = l.sqrt() * lp_norm(space, &u, p, None)
                    + lp_norm_gradient(space, &u, p, None)
                    + lp_norm_pressure(space, &phi, p, None);
                div.push(DivergenceSample { abs_lambda: l, p, ratio: num / nf });
            }
        }
        Ok((out, vol, div))
    })?;
    let mut volume = Vec::new();
    let mut divergence = Vec::new();
    let mut samples_out = Vec::new();
    for (s, v, d) in rows {
        samples_out.push(s);
        volume.extend(v);
        divergence.extend(d);
    }
    Ok(UniformReport { record: record(system, domain, samples_out), volume, divergence })
}
