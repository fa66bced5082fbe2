use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use srl_core::experiments::*;
use srl_core::fem::BoundaryCondition;
use srl_core::fields::{Polynomial, PolynomialField, VectorField};
use srl_core::geometry::{write_tmesh, Point};
use srl_core::norms::{lp_norm, lp_norm_gradient, lp_norm_pressure, DecayFit};
use srl_core::solver::StokesSystem;
use srl_core::{Error, Result, C64};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Taylor-Hood Stokes resolvent lab.
#[derive(Parser, Debug)]
#[command(name = "srl", version, about)]
struct Cli {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` of the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for lambda points, 0 = auto. Overrides SRL_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Progress messages on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    /// `sup ||phi|| / ||f||` over solenoidal `f`.
    Pressure,
    /// `sup ||phi|| / ||F||_{H^-1}`.
    Dual,
    /// Uniform resolvent and gradient ratios for a fixed force.
    Uniform,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the mesh as tmesh2d.
    Mesh,
    /// Single solve at `lambda_point`; writes solution norms as JSON.
    Solve {
        /// Also write the system matrix in coordinate format.
        #[arg(long)]
        export_coo: Option<PathBuf>,
    },
    /// Manufactured-solution convergence table.
    Convergence,
    /// Lambda sweep with exponent fit.
    Sweep {
        #[arg(long, value_enum, default_value = "pressure")]
        kind: SweepKind,
    },
    /// Grisvard boundary identity on hand-picked and random polynomial fields.
    CheckGrisvard,
    /// H2 estimate ratios on `level` and `level + 1`.
    CheckH2,
    /// Caccioppoli, local H2 and reverse Hoelder ratios on the config patch.
    CheckLocal,
    /// Paired H^-1 pressure growth and velocity decay fits, no-slip only.
    CheckEquivalence,
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
    threads: usize,
    verbose: bool,
}

impl Ctx {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[srl] {}", msg.as_ref());
        }
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.out.join(format!("{}_{suffix}", self.cfg.id))
    }

    fn write(&self, suffix: &str, text: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let p = self.path(suffix);
        fs::write(&p, text)?;
        self.log(format!("wrote {}", p.display()));
        Ok(p)
    }

    /// JSON artifact carrying the config hash and tool version.
    fn write_json(&self, suffix: &str, mut body: Value) -> Result<PathBuf> {
        if let Value::Object(m) = &mut body {
            m.insert("config_hash".into(), json!(self.cfg.hash()));
            m.insert("version".into(), json!(srl_core::VERSION));
        }
        let text = serde_json::to_string_pretty(&body).expect("json serializes") + "\n";
        self.write(suffix, &text)
    }

    fn header(&self) -> String {
        self.cfg.header()
    }

    fn opts(&self) -> SweepOptions {
        SweepOptions {
            method: self.cfg.method,
            threads: self.threads,
            skip_unresolved: self.cfg.skip_unresolved,
            window: self.cfg.fit_window,
        }
    }

    fn system(&self) -> Result<StokesSystem> {
        let mesh = self.cfg.mesh()?;
        let sys = StokesSystem::new(mesh, self.cfg.boundary_condition()?)?;
        self.log(format!(
            "mesh level {}: {} velocity dofs, {} pressure dofs, h = {:.4e}",
            self.cfg.level,
            sys.n_vel(),
            sys.n_pres(),
            sys.h()
        ));
        Ok(sys)
    }
}

fn fit_json(f: &DecayFit) -> Value {
    json!({
        "alpha_hat": f.alpha_hat,
        "r2": f.r2,
        "window_min": f.window_min,
        "window_max": f.window_max,
        "n_samples": f.n_samples,
    })
}

fn thread_count(flag: Option<usize>, cfg: &ExperimentConfig) -> usize {
    match flag {
        Some(t) => t,
        None if std::env::var("SRL_THREADS").is_ok() => srl_core::par::resolve_threads(None),
        None => cfg.threads,
    }
}

fn cmd_mesh(ctx: &Ctx) -> Result<()> {
    let mesh = ctx.cfg.mesh()?;
    let text = format!("{}\n{}", ctx.header(), write_tmesh(&mesh));
    ctx.write("mesh.tmesh", &text)?;
    println!("nodes {} triangles {} h {:.6e} area {:.12}", mesh.n_nodes(), mesh.n_triangles(), mesh.h(), mesh.area());
    Ok(())
}

fn cmd_solve(ctx: &Ctx, export: Option<&Path>) -> Result<()> {
    let sys = ctx.system()?;
    let sample = ctx.cfg.lambda_sample()?;
    let load = ctx.cfg.force.load(&sys)?;
    let res = sys.factor(sample.lambda())?;
    if let Some(p) = export {
        fs::write(p, format!("{}\n{}", ctx.header(), sys.export_coo(sample.lambda())))?;
        ctx.log(format!("wrote {}", p.display()));
    }
    let sol = res.solve(&load)?;
    for w in &sol.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let space = sys.space();
    let body = json!({
        "lambda": [sample.lambda().re, sample.lambda().im],
        "h": sys.h(),
        "n_velocity_dofs": sys.n_vel(),
        "n_pressure_dofs": sys.n_pres(),
        "resolved": sol.diagnostics.resolved,
        "norms": {
            "velocity_l2": lp_norm(space, &sol.u, 2.0, None),
            "velocity_gradient_l2": lp_norm_gradient(space, &sol.u, 2.0, None),
            "pressure_l2": lp_norm_pressure(space, &sol.p, 2.0, None),
        },
        "momentum_residual": sol.diagnostics.momentum_residual,
        "divergence_residual": sol.diagnostics.divergence_residual,
        "warnings": sol.diagnostics.warnings,
    });
    let p = ctx.write_json("solve.json", body)?;
    println!("{}", p.display());
    Ok(())
}

fn cmd_convergence(ctx: &Ctx) -> Result<()> {
    let case = match ctx.cfg.boundary_condition()? {
        BoundaryCondition::Dirichlet => ManufacturedCase::DirichletBubble,
        BoundaryCondition::Neumann { mu } => ManufacturedCase::NeumannTrig { mu },
    };
    if ctx.cfg.domain != "unit_square" {
        return Err(Error::validation("manufactured solutions are defined on the unit square"));
    }
    let lambda = ctx.cfg.lambda_sample()?.lambda();
    let study = convergence_study(case, lambda, &ctx.cfg.levels)?;
    let table = study.to_table(&ctx.header());
    ctx.write("convergence.csv", &table)?;
    print!("{}", table.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, kind: SweepKind) -> Result<()> {
    let sys = ctx.system()?;
    let samples = ctx.cfg.lambda.samples(ctx.cfg.theta)?;
    let opts = ctx.opts();
    let domain = ctx.cfg.domain.as_str();
    let (record, summary) = match kind {
        SweepKind::Pressure => {
            ctx.cfg.validate_for_fit()?;
            let flavor = InputSpace::default_flavor(&sys.bc());
            let r = sweep_pressure_decay(&sys, domain, &samples, flavor, &opts)?;
            (r.record, fit_json(&r.fit))
        }
        SweepKind::Dual => {
            ctx.cfg.validate_for_fit()?;
            let r = sweep_pressure_dual(&sys, domain, &samples, ctx.cfg.dual_flavor, &opts)?;
            let mut v = fit_json(&r.fit);
            v["growth"] = json!(true);
            (r.record, v)
        }
        SweepKind::Uniform => {
            let f = match ctx.cfg.force {
                ForceSpec::Representative => representative_solenoidal(&sys)?,
                _ => {
                    let load = ctx.cfg.force.load(&sys)?;
                    let m = srl_core::sparse::RealCholesky::new(&sys.operators().mass)?;
                    m.solve_c(&load)
                }
            };
            let big: &(dyn Fn(Point) -> [[C64; 2]; 2] + Sync) = &representative_matrix_field;
            let big = (ctx.cfg.force != ForceSpec::Zero).then_some(big);
            let rep = check_uniform_resolvent(&sys, domain, &samples, &ctx.cfg.p_list, &f, big, &opts)?;
            let mut series = Vec::new();
            for &p in &ctx.cfg.p_list {
                let pick = |g: fn(&UniformSample) -> f64| -> Vec<f64> {
                    rep.volume.iter().filter(|s| s.p == p).map(g).collect()
                };
                let div: Vec<f64> = rep.divergence.iter().filter(|s| s.p == p).map(|s| s.ratio).collect();
                for (name, v) in [("velocity", pick(|s| s.velocity)), ("gradient", pick(|s| s.gradient)), ("divergence_form", div)] {
                    if v.is_empty() {
                        continue;
                    }
                    let (max, median) = max_and_median(&v);
                    series.push(json!({"p": p, "ratio": name, "max": max, "median": median, "bounded": max <= 10.0 * median}));
                }
            }
            (rep.record, json!({ "series": series }))
        }
    };
    let csv = record.to_csv(&ctx.header());
    ctx.write("sweep.csv", &csv)?;
    let p = ctx.write_json("fit.json", summary.clone())?;
    println!("{}", serde_json::to_string(&summary).expect("json serializes"));
    ctx.log(format!("summary in {}", p.display()));
    Ok(())
}

fn cmd_grisvard(ctx: &Ctx) -> Result<()> {
    let domain = ctx.cfg.domain()?;
    let poly = domain
        .polygon()
        .ok_or_else(|| Error::validation("the identity checker needs a polygon preset, not a mesh file"))?;
    let c = |v: f64| C64::new(v, 0.0);
    let mono = |a: u32, b: u32, k: f64| Polynomial::new(vec![(a, b, c(k))]);
    let mut fields: Vec<(String, Box<dyn VectorField>)> = vec![
        ("radial".into(), Box::new(PolynomialField::new(mono(1, 0, 2.0), mono(0, 1, 2.0)))),
        ("shear".into(), Box::new(PolynomialField::new(mono(0, 1, 1.0), Polynomial::new(vec![])))),
    ];
    let center = poly.centroid();
    let inradius = poly.faces().iter().map(|f| (f.start - center).dot(f.normal)).fold(f64::INFINITY, f64::min);
    let bump = ForceSpec::Bump { center: [center.x, center.y], radius: 0.6 * inradius }.bump().expect("bump");
    fields.push(("bump".into(), Box::new(bump)));
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    for k in 0..20 {
        fields.push((format!("random_cubic_{k}"), Box::new(PolynomialField::random(&mut rng, 3))));
    }
    let rows: Vec<IdentityReport> =
        fields.iter().map(|(id, f)| check_grisvard(poly, f.as_ref(), 8, id)).collect::<Result<_>>()?;
    ctx.write("grisvard.csv", &identity_csv(&ctx.header(), &rows))?;
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    println!("{} fields, largest residual {worst:.3e}", rows.len());
    Ok(())
}

fn cmd_h2(ctx: &Ctx) -> Result<()> {
    let bc = ctx.cfg.boundary_condition()?;
    if bc.is_dirichlet() {
        return Err(Error::validation("the H2 estimate is checked for the traction boundary condition"));
    }
    let samples = ctx.cfg.lambda.samples(ctx.cfg.theta)?;
    let levels = [ctx.cfg.level, ctx.cfg.level + 1];
    let rep = check_h2_estimate(&ctx.cfg.domain()?, &levels, bc.mu(), &samples, ctx.threads)?;
    let mut csv = format!("{}\nlevel,h,abs_lambda,ratio,frequencies\n", ctx.header());
    for r in &rep.rows {
        let ks: Vec<String> = r.frequencies.iter().map(u32::to_string).collect();
        csv.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{}\n", r.level, r.h, r.abs_lambda, r.ratio, ks.join(" ")));
    }
    ctx.write("h2.csv", &csv)?;
    let spread = |l: usize| rep.spread(l).map(|(m, med)| json!({"max": m, "median": med}));
    let body = json!({
        "mu": rep.mu,
        "coarse": spread(levels[0]),
        "fine": spread(levels[1]),
        "refinement_change": rep.refinement_change(levels[0], levels[1]),
    });
    println!("{}", serde_json::to_string(&body).expect("json serializes"));
    ctx.write_json("h2.json", body)?;
    Ok(())
}

fn cmd_local(ctx: &Ctx) -> Result<()> {
    let sys = ctx.system()?;
    let samples = ctx.cfg.lambda.samples(ctx.cfg.theta)?;
    let patch = ctx.cfg.patch()?;
    let reps = match ctx.cfg.force.bump() {
        Some(b) => check_localized(&sys, &samples, &patch, &b)?,
        None => match ctx.cfg.force {
            ForceSpec::Zero => check_localized(&sys, &samples, &patch, &ZeroField)?,
            _ => return Err(Error::validation("localized checks need a bump or zero force")),
        },
    };
    ctx.write("local.csv", &localized_csv(&ctx.header(), &reps))?;
    for r in &reps {
        println!("{} lambda={:e} ratio={:.6e}", r.id.name(), r.lambda, r.ratio);
    }
    Ok(())
}

struct ZeroField;

impl VectorField for ZeroField {
    fn value(&self, _: Point) -> [C64; 2] {
        [C64::new(0.0, 0.0); 2]
    }

    fn jacobian(&self, _: Point) -> [[C64; 2]; 2] {
        [[C64::new(0.0, 0.0); 2]; 2]
    }
}

fn cmd_equivalence(ctx: &Ctx) -> Result<()> {
    ctx.cfg.validate_for_fit()?;
    let sys = ctx.system()?;
    let samples = ctx.cfg.lambda.samples(ctx.cfg.theta)?;
    let rep = check_lemma_equivalence(&sys, &ctx.cfg.domain, &samples, ctx.cfg.dual_flavor, &ctx.opts())?;
    if let Some(rec) = &rep.record {
        ctx.write("equivalence.csv", &rec.to_csv(&ctx.header()))?;
    }
    let body = json!({
        "pressure_growth": fit_json(&rep.pressure),
        "velocity_decay": fit_json(&rep.velocity),
        "gap": rep.gap,
    });
    println!("{}", serde_json::to_string(&body).expect("json serializes"));
    ctx.write_json("equivalence.json", body)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let c = ExperimentConfig::default();
            c.validate()?;
            c
        }
    };
    let threads = thread_count(cli.threads, &cfg);
    let out = cli.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx { cfg, out, threads, verbose: cli.verbose };
    ctx.log(format!("config hash {}", ctx.cfg.hash()));
    match &cli.command {
        Command::Mesh => cmd_mesh(&ctx),
        Command::Solve { export_coo } => cmd_solve(&ctx, export_coo.as_deref()),
        Command::Convergence => cmd_convergence(&ctx),
        Command::Sweep { kind } => cmd_sweep(&ctx, *kind),
        Command::CheckGrisvard => cmd_grisvard(&ctx),
        Command::CheckH2 => cmd_h2(&ctx),
        Command::CheckLocal => cmd_local(&ctx),
        Command::CheckEquivalence => cmd_equivalence(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() || matches!(e, Error::Io(_)) { 2 } else { 3 })
        }
    }
}
