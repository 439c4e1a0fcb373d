//! Power-law fits `K = C h^alpha` by least squares in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub c: f64,
    pub alpha: f64,
    pub r_squared: f64,
    /// Points used after dropping nonpositive values.
    pub used: usize,
    pub excluded: usize,
}

/// Fits `(h, K)` pairs. Points with nonpositive or non-finite `K` are
/// excluded and counted; at least three valid points with two distinct `h`
/// are required.
pub fn power_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.iter().any(|&(h, _)| !(h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument("h values must be positive".into()));
    }
    let valid: Vec<(f64, f64)> =
        points.iter().filter(|&&(_, k)| k > 0.0 && k.is_finite()).map(|&(h, k)| (h.ln(), k.ln())).collect();
    let excluded = points.len() - valid.len();
    if valid.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power fit needs at least 3 positive values ({} given, {excluded} excluded)",
            valid.len()
        )));
    }
    let n = valid.len() as f64;
    let mx = valid.iter().map(|p| p.0).sum::<f64>() / n;
    let my = valid.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = valid.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = valid.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = valid.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("power fit needs distinct h values".into()));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: f64 = valid.iter().map(|p| (p.1 - intercept - alpha * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(PowerFit { c: intercept.exp(), alpha, r_squared, used: valid.len(), excluded })
}

/// One h-point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<R> {
    pub h: f64,
    pub value: f64,
    pub record: R,
}

/// Per-h records with the fitted power law, ordered by decreasing `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport<R> {
    pub points: Vec<SweepPoint<R>>,
    pub fit: Option<PowerFit>,
    /// Why the fit was skipped, if it was.
    pub fit_note: Option<String>,
}

impl<R> SweepReport<R> {
    /// Builds a report from `(h, value, record)` triples in any order.
    pub fn new(mut points: Vec<SweepPoint<R>>) -> Self {
        points.sort_by(|a, b| b.h.total_cmp(&a.h));
        let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.h, p.value)).collect();
        let (fit, fit_note) = match power_fit(&pairs) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self { points, fit, fit_note }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Checks an h grid: at least three values, positive and strictly decreasing.
pub fn check_h_list(hs: &[f64]) -> Result<()> {
    if hs.len() < 3 {
        return Err(Error::InvalidArgument(format!("sweep needs at least 3 h values, got {}", hs.len())));
    }
    if hs.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidArgument("h values must be positive".into()));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("h values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Runs `f` at every `h` in parallel and assembles the report in `h` order.
pub fn sweep<R, F>(hs: &[f64], f: F) -> Result<SweepReport<R>>
where
    R: Send,
    F: Fn(f64) -> Result<(f64, R)> + Sync,
{
    use rayon::prelude::*;
    check_h_list(hs)?;
    let points = hs
        .par_iter()
        .map(|&h| f(h).map(|(value, record)| SweepPoint { h, value, record }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::new(points))
}
