use super::sweep::{representative_solenoidal, DualFlavor};
use crate::error::{Error, Result};
use crate::fem::{load_vector, BoundaryCondition, Load};
use crate::fields::{BumpField, Polynomial, PolynomialField};
use crate::geometry::{load_tmesh, triangulate_level, ConvexPolygon, CubePatch, Point, TriMesh};
use crate::norms::Method;
use crate::solver::{SectorSample, StokesSystem};
use crate::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Which part of the resolved samples a decay fit uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// Every resolved sample.
    Resolved,
    /// Resolved samples within this many decades of the largest one.
    UpperDecades(f64),
}

impl FitWindow {
    pub fn select(&self, samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
        match *self {
            FitWindow::Resolved => samples.to_vec(),
            FitWindow::UpperDecades(d) => {
                let top = samples.iter().map(|s| s.0).fold(0.0, f64::max);
                let lo = top * 10f64.powf(-d) * (1.0 - 1e-9);
                samples.iter().copied().filter(|s| s.0 >= lo).collect()
            }
        }
    }
}

/// Log-spaced grid of `|lambda|` values, repeated on each ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaGrid {
    pub log10_min: f64,
    pub log10_max: f64,
    pub count: usize,
    /// Ray angles `arg lambda`.
    pub args: Vec<f64>,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid { log10_min: 0.0, log10_max: 4.0, count: 17, args: vec![0.0] }
    }
}

impl LambdaGrid {
    pub fn moduli(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![10f64.powf(self.log10_min)],
            n => (0..n)
                .map(|k| {
                    let t = k as f64 / (n - 1) as f64;
                    10f64.powf(self.log10_min + t * (self.log10_max - self.log10_min))
                })
                .collect(),
        }
    }

    /// Samples ordered by ray, then by modulus.
    pub fn samples(&self, theta: f64) -> Result<Vec<SectorSample>> {
        let mut out = Vec::new();
        for &a in &self.args {
            for m in self.moduli() {
                out.push(SectorSample::new(m, a, theta)?);
            }
        }
        Ok(out)
    }

    pub fn validate(&self, theta: f64) -> Result<()> {
        if !(self.log10_min.is_finite() && self.log10_max.is_finite()) || self.log10_max < self.log10_min {
            return Err(Error::validation("lambda grid bounds must be finite with min <= max"));
        }
        if self.args.is_empty() {
            return Err(Error::validation("lambda grid needs at least one ray angle"));
        }
        for &a in &self.args {
            if !(a.abs() < theta) {
                return Err(Error::validation(format!("ray angle {a} outside (-theta, theta)")));
            }
        }
        Ok(())
    }
}

/// Domain presets: `unit_square`, `ngon:<n>:<radius>`, or a mesh file path.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Polygon(ConvexPolygon),
    MeshFile(PathBuf),
}

impl Domain {
    pub fn parse(s: &str) -> Result<Domain> {
        let s = s.trim();
        if s == "unit_square" {
            return Ok(Domain::Polygon(ConvexPolygon::unit_square()));
        }
        if let Some(rest) = s.strip_prefix("ngon:") {
            let mut it = rest.split(':');
            let (n, r) = match (it.next(), it.next(), it.next()) {
                (Some(n), Some(r), None) => (n, r),
                _ => return Err(Error::validation(format!("bad ngon domain `{s}`, expected ngon:<n>:<radius>"))),
            };
            let n: usize = n.parse().map_err(|_| Error::validation(format!("bad ngon side count `{n}`")))?;
            let r: f64 = r.parse().map_err(|_| Error::validation(format!("bad ngon radius `{r}`")))?;
            return Ok(Domain::Polygon(ConvexPolygon::regular_ngon(n, r)?));
        }
        if s.is_empty() {
            return Err(Error::validation("empty domain"));
        }
        Ok(Domain::MeshFile(PathBuf::from(s)))
    }

    pub fn polygon(&self) -> Option<&ConvexPolygon> {
        match self {
            Domain::Polygon(p) => Some(p),
            Domain::MeshFile(_) => None,
        }
    }

    /// Mesh at a refinement level. Mesh files are refined `level` times.
    pub fn mesh(&self, level: usize) -> Result<TriMesh> {
        match self {
            Domain::Polygon(p) => Ok(triangulate_level(p, level)),
            Domain::MeshFile(path) => {
                let mut m = load_tmesh(path)?;
                for _ in 0..level {
                    m = m.refine_uniform();
                }
                Ok(m)
            }
        }
    }
}

/// Body force of single solves and localized checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceSpec {
    Zero,
    /// Smooth field projected onto the solenoidal subspace of the boundary condition.
    Representative,
    /// `curl(cos(k pi x) cos(k pi y))`.
    Curl { k: u32 },
    /// `(1 - |x - c|^2 / r^2)^3 (1, 1/2)` inside the disk `|x - c| < r`.
    Bump { center: [f64; 2], radius: f64 },
}

impl ForceSpec {
    pub fn bump(&self) -> Option<BumpField> {
        match *self {
            ForceSpec::Bump { center, radius } => {
                let c = |v: f64| Polynomial::new(vec![(0, 0, C64::new(v, 0.0))]);
                Some(BumpField {
                    center: Point::new(center[0], center[1]),
                    radius,
                    power: 3,
                    profile: PolynomialField::new(c(1.0), c(0.5)),
                })
            }
            _ => None,
        }
    }

    /// Velocity load vector on `system`.
    pub fn load(&self, system: &StokesSystem) -> Result<Vec<C64>> {
        let space = system.space();
        let bc = system.bc();
        match self {
            ForceSpec::Zero => Ok(vec![C64::new(0.0, 0.0); system.n_vel()]),
            ForceSpec::Representative => Ok(system.operators().mass.matvec_c(&representative_solenoidal(system)?)),
            ForceSpec::Curl { k } => {
                let f = super::h2::curl_force(*k);
                load_vector(space, Load::Volume(&f), &bc)
            }
            ForceSpec::Bump { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(Error::validation("bump radius must be positive"));
                }
                let b = self.bump().expect("bump spec");
                let f = |p| crate::fields::VectorField::value(&b, p);
                load_vector(space, Load::Volume(&f), &bc)
            }
        }
    }
}

/// Declarative description of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub domain: String,
    pub bc: BcKind,
    pub mu: f64,
    pub theta: f64,
    pub lambda: LambdaGrid,
    pub level: usize,
    pub seed: u64,
    pub method: Method,
    pub fit_window: FitWindow,
    /// Drop samples with `|lambda| > 1/h^2` from the sweep itself.
    pub skip_unresolved: bool,
    pub out_dir: Option<PathBuf>,
    pub threads: usize,
    pub p_list: Vec<f64>,
    /// Refinement levels of a convergence study.
    pub levels: Vec<usize>,
    /// `lambda` of single solves and convergence studies, as `[re, im]`.
    pub lambda_point: [f64; 2],
    pub force: ForceSpec,
    pub dual_flavor: DualFlavor,
    /// Localized checks: patch `[center_x, center_y, diameter]`.
    pub patch: [f64; 3],
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            id: "run".into(),
            domain: "unit_square".into(),
            bc: BcKind::Neumann,
            mu: 0.0,
            theta: 2.0 * std::f64::consts::FRAC_PI_3,
            lambda: LambdaGrid::default(),
            level: 3,
            seed: crate::norms::SEED,
            method: Method::Lanczos,
            fit_window: FitWindow::UpperDecades(2.0),
            skip_unresolved: true,
            out_dir: None,
            threads: 0,
            p_list: vec![2.0, 3.0, 4.0],
            levels: vec![2, 3, 4, 5],
            lambda_point: [1.0, 1.0],
            force: ForceSpec::Representative,
            dual_flavor: DualFlavor::Full,
            patch: [1.0, 1.0, 0.125],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < std::f64::consts::PI) {
            return Err(Error::validation(format!("theta = {} outside (0, pi)", self.theta)));
        }
        self.boundary_condition()?;
        self.lambda.validate(self.theta)?;
        for &p in &self.p_list {
            if !(1.0..=64.0).contains(&p) {
                return Err(Error::validation(format!("p = {p} outside [1, 64]")));
            }
        }
        Domain::parse(&self.domain)?;
        self.lambda_sample()?;
        self.patch()?;
        Ok(())
    }

    pub fn lambda_sample(&self) -> Result<SectorSample> {
        SectorSample::from_complex(C64::new(self.lambda_point[0], self.lambda_point[1]), self.theta)
    }

    pub fn patch(&self) -> Result<CubePatch> {
        CubePatch::new(Point::new(self.patch[0], self.patch[1]), self.patch[2])
    }

    /// Fit experiments need enough grid points.
    pub fn validate_for_fit(&self) -> Result<()> {
        self.validate()?;
        if self.lambda.count < crate::norms::MIN_SAMPLES {
            return Err(Error::validation(format!(
                "fit experiments need lambda.count >= {}, got {}",
                crate::norms::MIN_SAMPLES,
                self.lambda.count
            )));
        }
        Ok(())
    }

    pub fn boundary_condition(&self) -> Result<BoundaryCondition> {
        let bc = match self.bc {
            BcKind::Dirichlet => BoundaryCondition::Dirichlet,
            BcKind::Neumann => BoundaryCondition::Neumann { mu: self.mu },
        };
        bc.validate()?;
        Ok(bc)
    }

    pub fn domain(&self) -> Result<Domain> {
        Domain::parse(&self.domain)
    }

    pub fn mesh(&self) -> Result<TriMesh> {
        self.domain()?.mesh(self.level)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// First line of every artifact.
    pub fn header(&self) -> String {
        format!("# config_hash={} version={}", self.hash(), crate::VERSION)
    }
}
