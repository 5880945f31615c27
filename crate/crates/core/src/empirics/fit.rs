//! Power-of-log fits `response ≈ C·(log s)^γ`.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub s_grid: Vec<f64>,
    pub response: Vec<f64>,
    pub c: f64,
    pub gamma: f64,
    pub r_squared: f64,
}

/// Least squares of `log(response)` on `log(log s)`.
pub fn scaling_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(invalid(format!("scaling fit needs at least 4 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("s grid must be strictly increasing"));
    }
    if points.iter().any(|&(s, r)| !(s > 1.0) || !(r > 0.0) || !r.is_finite()) {
        return Err(invalid("scaling fit needs s > 1 and positive finite responses"));
    }
    let xs: Vec<f64> = points.iter().map(|&(s, _)| s.ln().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, r)| r.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let gamma = sxy / sxx;
    let intercept = my - gamma * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - gamma * x).powi(2)).sum();
    // a flat response is fitted perfectly
    let r_squared = if syy <= 1e-300 { 1.0 } else { 1.0 - sse / syy };
    Ok(ScalingFit {
        s_grid: points.iter().map(|p| p.0).collect(),
        response: points.iter().map(|p| p.1).collect(),
        c: intercept.exp(),
        gamma,
        r_squared,
    })
}
