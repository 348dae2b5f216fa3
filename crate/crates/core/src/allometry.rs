//! Allometric power-law fitting.
//!
//! A power law `y1 = beta * y2^alpha` becomes linear after taking logs:
//! `ln y1 = ln beta + alpha * ln y2`. Fitting is ordinary least squares in
//! log-log space, which is exact on noiseless power-law data. Natural
//! logarithms throughout; `alpha` is base-invariant.

use crate::error::{Error, Result};

/// Fitted power law plus the goodness of the underlying log-space fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Scaling exponent (slope in log-log space).
    pub alpha: f64,
    /// Natural-log intercept.
    pub log_beta: f64,
    /// Scaling coefficient, `exp(log_beta)`.
    pub beta: f64,
    /// Coefficient of determination of the log-space fit.
    pub r_squared: f64,
}

/// Fits `y1 = beta * y2^alpha` to `(y2, y1)` pairs.
///
/// Requires at least 3 strictly positive pairs with non-constant `y2`.
pub fn fit_allometric(pairs: &[(f64, f64)]) -> Result<PowerLawFit> {
    if pairs.len() < 3 {
        return Err(Error::TooFewItems {
            what: "allometric pairs",
            need: 3,
            got: pairs.len(),
        });
    }
    for (index, &(y2, y1)) in pairs.iter().enumerate() {
        if !(y2 > 0.0 && y1 > 0.0 && y2.is_finite() && y1.is_finite()) {
            return Err(Error::NonPositivePair { index, y2, y1 });
        }
    }

    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(y2, y1)| (y2.ln(), y1.ln())).collect();
    let mean_x = logs.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|&(_, y)| y).sum::<f64>() / n;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &logs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate("all y2 values are identical".into()));
    }

    let alpha = sxy / sxx;
    let log_beta = mean_y - alpha * mean_x;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(x, y) in &logs {
        let fitted = log_beta + alpha * x;
        ss_res += (y - fitted) * (y - fitted);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };

    Ok(PowerLawFit {
        alpha,
        log_beta,
        beta: log_beta.exp(),
        r_squared,
    })
}

/// Evaluates the fitted law at `y2`.
pub fn predict_allometric(fit: &PowerLawFit, y2: f64) -> Result<f64> {
    if !(y2 > 0.0 && y2.is_finite()) {
        return Err(Error::NonPositive {
            name: "y2",
            value: y2,
        });
    }
    Ok(fit.beta * y2.powf(fit.alpha))
}
