use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log alpha, log r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log residuals.
    pub residual: f64,
    /// Points left out because `r <= 0` (remainder below the noise).
    pub excluded: Vec<(f64, f64)>,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let (used, excluded): (Vec<_>, Vec<_>) = points.iter().copied().partition(|&(a, r)| a > 0.0 && r > 0.0);
    if used.len() < 3 {
        return Err(Error::TooFewPoints(used.len()));
    }
    let xy: Vec<(f64, f64)> = used.iter().map(|&(a, r)| (a.ln(), r.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate fit needs distinct alpha values".into()));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
        excluded,
    })
}
