//! Reference moments of the statistics by quadrature.

use crate::bounds::{mean_minimal, GaussLegendre, QuadratureSpec};
use crate::error::{Error, Result};
use crate::scores::{ball_volume, RggIsolated, RggWeight, ScoreModel};

/// `Var F_s` for minimal points in the unit square from the second factorial
/// moment: incomparable pairs are both minimal with probability
/// `exp(-s(|x| + |y| - |x∧y|))`.
///
/// In coordinates `u = -ln x` the pair integral reduces to
/// `2s² ∫_0^1 (-ln m) J(s(1-m)) dm` with `J(λ) = ∫_0^∞ t e^{-2t - λe^{-t}} dt`;
/// the outer variable is written as `1 - m = exp(-e^σ)`.
pub fn variance_mecke_minimal(s: f64, d: usize, quad: &QuadratureSpec) -> Result<f64> {
    if d != 2 {
        return Err(Error::Unsupported(format!("Mecke variance is implemented for d = 2, got {d}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(crate::error::invalid(format!("s must be positive, got {s}")));
    }
    quad.validate()?;
    let gl = GaussLegendre::<f64>::new(quad.nodes_per_axis.min(48))?;
    let j = |lambda: f64| {
        let mut knots = vec![0.0];
        if lambda > 1.0 {
            knots.push(lambda.ln());
        }
        knots.push(60.0 + lambda.max(1.0).ln());
        gl.integrate_knots(&knots, 2.0, |t| t * (-2.0 * t - lambda * (-t).exp()).exp())
    };
    let top = (s.max(1.0).ln() + 60.0).ln();
    let mut knots = vec![-40.0, 0.0, top];
    let turn = s.max(1.0).ln().max(1e-3).ln();
    if turn > -40.0 && turn < top {
        knots.push(turn);
    }
    knots.sort_by(|a, b| a.total_cmp(b));
    let pair = gl.integrate_knots(&knots, 1.0, |sigma| {
        let r = sigma.exp();
        let one_minus_m = (-r).exp();
        // -ln m with m = 1 - e^{-r}, times dm = r e^{-r} dσ
        let neg_ln_m = -(-(-r).exp_m1()).ln();
        2.0 * s * s * neg_ln_m * r * one_minus_m * j(s * one_minus_m)
    });
    let mean: f64 = mean_minimal(s, 2, quad)?;
    Ok(mean - mean * mean + pair)
}

/// `E H_s = e^{-k_d sρ^d} · s∫w_s(x)dx` for the isolated-vertex statistic,
/// valid when the sampling window covers the weight support padded by `ρ`.
pub fn mean_rgg(model: &RggIsolated) -> f64 {
    (-model.ball_mass()).exp() * weight_moment_rgg(model, 1)
}

/// `W_{i,s} = s∫|w_s(x)|^i dx` in closed form.
pub fn weight_moment_rgg(model: &RggIsolated, i: u32) -> f64 {
    let (s, d) = (model.s(), model.dim());
    let kd: f64 = ball_volume(d);
    match model.weight() {
        // ∫_{|x|<s} log^i(s/|x|) dx = k_d s^d i!/d^i
        RggWeight::Logarithmic => {
            let fact: f64 = (1..=i).map(f64::from).product();
            s * kd * s.powi(d as i32) * fact / (d as f64).powi(i as i32)
        }
        RggWeight::Indicator { radius, value } => s * kd * radius.powi(d as i32) * value.abs().powi(i as i32),
    }
}
