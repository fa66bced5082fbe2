use crate::geometry::CubePatch;
use serde::Serialize;
use std::fmt::Write as _;

/// One lambda point of a sweep. Missing functionals are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSample {
    pub abs_lambda: f64,
    pub arg_lambda: f64,
    pub h: f64,
    pub c_pressure: Option<f64>,
    pub c_velocity: Option<f64>,
    pub c_gradient: Option<f64>,
    pub cp_p3: Option<f64>,
    pub cp_p4: Option<f64>,
    pub resolved: bool,
}

impl SweepSample {
    pub fn empty(abs_lambda: f64, arg_lambda: f64, h: f64, resolved: bool) -> Self {
        SweepSample {
            abs_lambda,
            arg_lambda,
            h,
            c_pressure: None,
            c_velocity: None,
            c_gradient: None,
            cp_p3: None,
            cp_p4: None,
            resolved,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub domain: String,
    pub bc: String,
    pub mu: f64,
    pub samples: Vec<SweepSample>,
}

impl SweepRecord {
    /// `(|lambda|, value)` pairs of resolved samples for a chosen column.
    pub fn resolved_series(&self, col: impl Fn(&SweepSample) -> Option<f64>) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|s| s.resolved)
            .filter_map(|s| col(s).map(|v| (s.abs_lambda, v)))
            .collect()
    }

    pub fn to_csv(&self, header: &str) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        let mut s = String::new();
        writeln!(s, "{header}").unwrap();
        writeln!(s, "abs_lambda,arg_lambda,h,C_pressure,C_velocity,C_gradient,Cp_p3,Cp_p4,resolved").unwrap();
        for r in &self.samples {
            writeln!(
                s,
                "{:.12e},{:.12e},{:.12e},{},{},{},{},{},{}",
                r.abs_lambda,
                r.arg_lambda,
                r.h,
                f(r.c_pressure),
                f(r.c_velocity),
                f(r.c_gradient),
                f(r.cp_p3),
                f(r.cp_p4),
                r.resolved
            )
            .unwrap();
        }
        s
    }
}

/// Both sides of an integral identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

impl IdentityReport {
    pub fn new(id: &str, lhs: f64, rhs: f64) -> Self {
        let residual = (lhs - rhs).abs();
        let scale = lhs.abs().max(rhs.abs());
        IdentityReport {
            id: id.to_string(),
            lhs,
            rhs,
            residual,
            relative_residual: if scale > 0.0 { residual / scale } else { 0.0 },
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        (self.rhs != 0.0).then(|| self.lhs / self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalizedId {
    Caccioppoli,
    LocalH2,
    ReverseHolder,
}

impl LocalizedId {
    pub fn name(&self) -> &'static str {
        match self {
            LocalizedId::Caccioppoli => "caccioppoli",
            LocalizedId::LocalH2 => "local_h2",
            LocalizedId::ReverseHolder => "reverse_holder",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizedReport {
    #[serde(skip)]
    pub patch: CubePatch,
    pub id: LocalizedId,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl LocalizedReport {
    /// Ratio `lhs / rhs`. A vanishing right side gives zero when the left side is
    /// negligible against `scale`, infinity otherwise.
    pub fn new(patch: CubePatch, id: LocalizedId, lambda: f64, lhs: f64, rhs: f64, scale: f64) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs <= 1e-10 * scale {
            0.0
        } else {
            f64::INFINITY
        };
        LocalizedReport { patch, id, lambda, lhs, rhs, ratio }
    }
}

pub fn identity_csv(header: &str, rows: &[IdentityReport]) -> String {
    let mut s = String::new();
    writeln!(s, "{header}").unwrap();
    writeln!(s, "id,lhs,rhs,ratio").unwrap();
    for r in rows {
        let ratio = r.ratio().map(|x| format!("{x:.12e}")).unwrap_or_default();
        writeln!(s, "{},{:.12e},{:.12e},{}", r.id, r.lhs, r.rhs, ratio).unwrap();
    }
    s
}

pub fn localized_csv(header: &str, rows: &[LocalizedReport]) -> String {
    let mut s = String::new();
    writeln!(s, "{header}").unwrap();
    writeln!(s, "id,lhs,rhs,ratio").unwrap();
    for r in rows {
        writeln!(s, "{}@lambda={:e},{:.12e},{:.12e},{:.12e}", r.id.name(), r.lambda, r.lhs, r.rhs, r.ratio).unwrap();
    }
    s
}

/// `max <= factor * median` over a list of positive values.
pub fn bounded_by_median(values: &[f64], factor: f64) -> bool {
    if values.is_empty() {
        return false;
    }
    let (max, med) = max_and_median(values);
    max <= factor * med
}

pub fn max_and_median(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    let med = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    (v[n - 1], med)
}
