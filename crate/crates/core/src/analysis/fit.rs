//! Least-squares power-law fits on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;

/// Residuals of `ln y` below this are rounding, never outliers.
const ROUNDOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln y` about the line.
    pub rms: f64,
    pub points: usize,
    /// The point with the largest abscissa was dropped as pre-asymptotic.
    pub dropped_largest: bool,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    (slope, intercept, res)
}

fn rms(r: &[f64]) -> f64 {
    (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
}

/// Fits `y ~ A x^p` through the positive, finite points. The point with the
/// largest `x` is dropped and the fit redone when its residual exceeds three
/// times the RMS residual (and rounding level), provided enough points remain.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { got: pts.len(), need: MIN_FIT_POINTS });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let (slope, intercept, res) = ols(&lx, &ly);
    let spread = rms(&res);
    let imax = (0..lx.len()).max_by(|&i, &j| lx[i].total_cmp(&lx[j])).expect("nonempty");
    if pts.len() > MIN_FIT_POINTS && res[imax].abs() > (3.0 * spread).max(ROUNDOFF) {
        let keep: Vec<usize> = (0..lx.len()).filter(|&i| i != imax).collect();
        let kx: Vec<f64> = keep.iter().map(|&i| lx[i]).collect();
        let ky: Vec<f64> = keep.iter().map(|&i| ly[i]).collect();
        let (slope, intercept, res) = ols(&kx, &ky);
        return Ok(LogLogFit { slope, intercept, rms: rms(&res), points: kx.len(), dropped_largest: true });
    }
    Ok(LogLogFit { slope, intercept, rms: spread, points: lx.len(), dropped_largest: false })
}
