use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Power-law fit `N ~ |lambda|^{-alpha}` in log10-log10 coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha_hat: f64,
    pub r2: f64,
    pub window_min: f64,
    pub window_max: f64,
    pub n_samples: usize,
}

pub const MIN_SAMPLES: usize = 5;
pub const MIN_DECADES: f64 = 2.0;

/// Least-squares decay exponent of `(|lambda|, N)` samples.
///
/// Requires at least five positive samples spanning two decades.
pub fn fit_decay_exponent(samples: &[(f64, f64)]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(l, n)| *l > 0.0 && *n > 0.0 && l.is_finite() && n.is_finite())
        .map(|&(l, n)| (l.log10(), n.log10()))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::validation(format!(
            "fit needs at least {MIN_SAMPLES} usable samples, got {}",
            pts.len()
        )));
    }
    let xmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if xmax - xmin < MIN_DECADES - 1e-9 {
        return Err(Error::validation(format!(
            "fit samples span {:.3} decades, need {MIN_DECADES}",
            xmax - xmin
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    // a flat series fits perfectly; guard against rounding noise in syy
    let r2 = if syy <= 1e-24 * n { 1.0 } else { 1.0 - sse / syy };
    Ok(DecayFit {
        alpha_hat: -slope,
        r2,
        window_min: 10f64.powf(xmin),
        window_max: 10f64.powf(xmax),
        n_samples: pts.len(),
    })
}
