//! The dominance integral `c_{α,s}(y) = s ∫_{[0,1]^d} 1{x ⪰ y} e^{-αs|x|} dx`
//! and the expected number of minimal points.
//!
//! With `x_i = e^{-t_i}` the integrand depends on `t` only through
//! `v = t_1 + … + t_d`. The last coordinate is integrated in closed form and
//! the remaining `d - 1` collapse onto `v` with the density of a sum of
//! independent uniforms on `[0, -log y_i]`, which leaves a one-dimensional
//! Gauss–Legendre integral split at the kinks of that density.

use crate::bounds::quadrature::{GaussLegendre, McSpec, QuadratureSpec, PANEL_LENGTH};
use crate::error::{invalid, Result};
use crate::pointproc::StreamRng;
use crate::scalar::{mean_and_se, Estimate, Real};

/// `c_{α,s}(y)`; quadrature for `d ≤ quad.max_dim_tensor` (and at most 3),
/// Monte Carlo with a standard error above.
pub fn c_alpha_s<T: Real>(y: &[T], alpha: T, s: T, quad: &QuadratureSpec) -> Result<Estimate<T>> {
    validate(y, alpha, s)?;
    let d = y.len();
    if y.iter().any(|v| *v >= T::one()) {
        return Ok(Estimate::exact(T::zero()));
    }
    if d == 1 {
        return Ok(Estimate::exact(last_axis(y[0], alpha * s) / alpha));
    }
    if d <= quad.max_dim_tensor.min(3) {
        let gl = GaussLegendre::<T>::new(quad.nodes_per_axis)?;
        return Ok(Estimate::exact(c_sum_variable(&gl, y, alpha, s, quad)));
    }
    c_alpha_s_mc(y, alpha, s, &quad.mc)
}

/// Monte Carlo estimate of `c_{α,s}(y)` for any dimension.
///
/// Samples `w ~ Exp(1)`, `v = log(αs/w)` and a uniform split of `v` over the
/// coordinates; the weight `(log(αs/w))^{d-1}/(d-1)!` makes the estimator
/// unbiased.
pub fn c_alpha_s_mc<T: Real>(y: &[T], alpha: T, s: T, mc: &McSpec) -> Result<Estimate<T>> {
    validate(y, alpha, s)?;
    mc.validate()?;
    let d = y.len();
    let a = alpha.to_f64().unwrap_or(f64::NAN);
    let scale = a * s.to_f64().unwrap_or(f64::NAN);
    let limits: Vec<f64> = y.iter().map(|v| -v.to_f64().unwrap_or(0.0).ln()).collect();
    let fact: f64 = (1..d).map(|k| k as f64).product();
    let mut rng = StreamRng::from_seed(crate::pointproc::splitmix64(mc.base_seed ^ 0xC0FF_EE00));
    let mut split = vec![0.0; d];
    let samples: Vec<f64> = (0..mc.n_samples)
        .map(|_| {
            let w = rng.exponential(1.0);
            if w >= scale {
                return 0.0;
            }
            let v = (scale / w).ln();
            let mut total = 0.0;
            for e in split.iter_mut() {
                *e = rng.exponential(1.0);
                total += *e;
            }
            let inside = split.iter().zip(&limits).all(|(e, l)| v * e / total <= *l);
            if inside {
                v.powi(d as i32 - 1) / fact / a
            } else {
                0.0
            }
        })
        .collect();
    let est = mean_and_se(&samples);
    Ok(Estimate::new(T::lit(est.value), T::lit(est.se)))
}

/// `E F_s = s ∫_{[0,1]^d} e^{-s|x|} dx
///        = ∫_0^∞ s e^{-v - s e^{-v}} v^{d-1}/(d-1)! dv`.
pub fn mean_minimal<T: Real>(s: T, d: usize, quad: &QuadratureSpec) -> Result<T> {
    if !(s > T::zero() && s.is_finite()) {
        return Err(invalid("s must be positive"));
    }
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if d == 1 {
        return Ok(-(-s).exp_m1());
    }
    let gl = GaussLegendre::<T>::new(quad.nodes_per_axis)?;
    let s64 = s.to_f64().unwrap_or(1.0);
    let top = T::lit(quad.truncation_for(s64));
    let fact: T = (1..d).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k));
    let mut knots = vec![T::zero()];
    let peak = s.ln();
    if peak > T::zero() && peak < top {
        knots.push(peak);
    }
    knots.push(top);
    Ok(gl.integrate_knots(&knots, T::lit(PANEL_LENGTH), |v| {
        s * (-v - s * (-v).exp()).exp() * v.powi(d as i32 - 1) / fact
    }))
}

fn validate<T: Real>(y: &[T], alpha: T, s: T) -> Result<()> {
    if y.is_empty() {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(invalid("alpha must be positive"));
    }
    if !(s > T::zero() && s.is_finite()) {
        return Err(invalid("s must be positive"));
    }
    if y.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
        return Err(invalid("y must lie in the unit cube"));
    }
    Ok(())
}

/// `∫_{y}^{1} a e^{-a x} dx = e^{-a y} - e^{-a}`, written without
/// cancellation.
#[inline]
fn last_axis<T: Real>(y: T, a: T) -> T {
    -(-a * y).exp() * (-a * (T::one() - y)).exp_m1()
}

fn c_sum_variable<T: Real>(gl: &GaussLegendre<T>, y: &[T], alpha: T, s: T, quad: &QuadratureSpec) -> T {
    let d = y.len();
    let yd = y[d - 1];
    let limits: Vec<T> = y[..d - 1]
        .iter()
        .map(|v| if *v > T::zero() { -v.ln() } else { T::infinity() })
        .collect();
    let a = alpha * s;
    let total: T = limits.iter().fold(T::zero(), |acc, l| acc + *l);
    let top = T::lit(quad.truncation_for(a.to_f64().unwrap_or(1.0)));
    let end = if total < top { total } else { top };
    let density = |v: T| -> T {
        match limits.len() {
            1 => T::one(),
            _ => {
                let (l1, l2) = (limits[0], limits[1]);
                let m = v.min(l1).min(l2).min(l1 + l2 - v);
                m.max(T::zero())
            }
        }
    };
    let mut knots = vec![T::zero(), end];
    for l in &limits {
        if *l < end {
            knots.push(*l);
        }
    }
    let peak = a.ln();
    for k in [peak, peak - yd.ln()] {
        if k > T::zero() && k < end {
            knots.push(k);
        }
    }
    knots.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    // e^{-v} · s ∫_{y_d}^1 e^{-αs e^{-v} x} dx = (e^{-a_v y_d} - e^{-a_v}) / α
    gl.integrate_knots(&knots, T::lit(PANEL_LENGTH), |v| {
        let av = a * (-v).exp();
        density(v) * last_axis(yd, av) / alpha
    })
}
