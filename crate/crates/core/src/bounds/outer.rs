//! Outer integrals `s ℚ f_β²`, `s ℚ f_{2β}` and `s ℚ((κ_s + g_s)^{2β} G_s)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::cfun::c_alpha_s;
use crate::bounds::loggrid::minimal_outer_2d;
use crate::bounds::quadrature::{GaussLegendre, McSpec, QuadratureSpec};
use crate::bounds::terms::{big_g_s, f_alpha, g_s, kappa_s, lens_volume, BoundTerm, CubeSampler, TermKind};
use crate::error::Result;
use crate::pointproc::{BoxWindow, Point, StreamRng};
use crate::scalar::{exact_sum, mean_and_se, Estimate};
use crate::scores::{ball_volume, AnyModel, MinimalPoints, RggIsolated, ScoreModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterIntegrals {
    pub int_f_beta_sq: BoundTerm,
    pub int_f_2beta: BoundTerm,
    pub int_kg_g: BoundTerm,
}

/// Deterministic evaluation where available: log-grid quadrature for the
/// minimal model in `d = 2`, exact sums for the lattice model, radial
/// quadrature for the RGG model in `d = 2`. Everything else goes to
/// [`outer_integrals_mc`].
pub fn outer_integrals(model: &AnyModel, quad: &QuadratureSpec, mc: &McSpec) -> Result<OuterIntegrals> {
    quad.validate()?;
    match model {
        AnyModel::Minimal(m) if m.dim() == 2 && quad.max_dim_tensor >= 2 => {
            let top = quad.truncation_for(m.s());
            let [a, b, c] = minimal_outer_2d(m.s(), m.zeta(), m.beta(), top, quad.grid_per_unit)?;
            let term = |e: Estimate<f64>| BoundTerm { value: e.value, se: e.se, kind: TermKind::Value };
            Ok(OuterIntegrals { int_f_beta_sq: term(a), int_f_2beta: term(b), int_kg_g: term(c) })
        }
        AnyModel::Lattice(_) => lattice_outer(model, quad, mc),
        AnyModel::Rgg(m) if m.dim() == 2 => rgg_outer_2d(model, m, quad),
        _ => outer_integrals_mc(model, quad, mc),
    }
}

fn lattice_outer(model: &AnyModel, quad: &QuadratureSpec, mc: &McSpec) -> Result<OuterIntegrals> {
    let AnyModel::Lattice(m) = model else { unreachable!() };
    let beta = m.beta();
    let half = (m.weight().half_width + 2) as f64;
    let sites = BoxWindow::centered(m.dim(), half).lattice_sites();
    let s = m.s();
    let mut a = Vec::with_capacity(sites.len());
    let mut b = Vec::with_capacity(sites.len());
    let mut c = Vec::with_capacity(sites.len());
    for y in &sites {
        let fb = f_alpha(model, y, beta, quad, mc)?.total();
        let f2b = f_alpha(model, y, 2.0 * beta, quad, mc)?.total();
        a.push(s * fb * fb);
        b.push(s * f2b);
        let g = g_s(model, y, quad)?.value;
        let big = big_g_s(model, y, quad)?.value;
        c.push(s * (kappa_s(model, y).value + g).powf(2.0 * beta) * big);
    }
    Ok(OuterIntegrals {
        int_f_beta_sq: BoundTerm::value(exact_sum(a)),
        int_f_2beta: BoundTerm::value(exact_sum(b)),
        int_kg_g: BoundTerm::value(exact_sum(c)),
    })
}

fn rgg_outer_2d(model: &AnyModel, m: &RggIsolated, quad: &QuadratureSpec) -> Result<OuterIntegrals> {
    let beta = m.beta();
    let s = m.s();
    let scale = m.weight().support_radius(s);
    let rho = m.rho();
    let gl = GaussLegendre::<f64>::new(16)?;
    // r = scale · e^{-t}; ∫_{R^2} h(‖y‖) dy = 2π scale² ∫ h(scale e^{-t}) e^{-2t} dt
    let t_lo = -((scale + 2.0 * rho) / scale).ln();
    let mut knots = vec![t_lo, 0.0, 30.0];
    for r in [scale - 2.0 * rho, scale - rho, scale + rho, 2.0 * rho, rho] {
        if r > 0.0 && r < scale + 2.0 * rho {
            knots.push(-(r / scale).ln());
        }
    }
    knots.retain(|t| *t >= t_lo && *t <= 30.0);
    knots.sort_by(|a, b| a.total_cmp(b));
    knots.dedup();
    let radial = |h: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut err = None;
        let v = gl.integrate_knots(&knots, 0.5, |t| {
            let r = scale * (-t).exp();
            match h(r) {
                Ok(val) => 2.0 * std::f64::consts::PI * scale * scale * val * (-2.0 * t).exp(),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    let mc = quad.mc.clone();
    let a = radial(&|r| {
        let f = f_alpha(model, &Point::new([r, 0.0]), beta, quad, &mc)?.total();
        Ok(s * f * f)
    })?;
    let b = radial(&|r| Ok(s * f_alpha(model, &Point::new([r, 0.0]), 2.0 * beta, quad, &mc)?.total()))?;
    let kg = (kappa_s(model, &Point::new([0.0, 0.0])).value + g_s(model, &Point::new([0.0, 0.0]), quad)?.value)
        .powf(2.0 * beta);
    let c = radial(&|r| Ok(s * kg * big_g_s(model, &Point::new([r, 0.0]), quad)?.value))?;
    // κ enters through its upper bound, so the third term is itself a bound
    Ok(OuterIntegrals {
        int_f_beta_sq: BoundTerm::value(a),
        int_f_2beta: BoundTerm::value(b),
        int_kg_g: BoundTerm::bound(c),
    })
}

/// Monte Carlo estimates of the three outer integrals by joint sampling of
/// `(y, x, x')`:
/// `s∫f_β² = E[w_y w_x w_{x'} G(x)K_β(x,y) G(x')K_β(x',y)]`, where
/// `K_α(x, y) = e^{-α r(x,y)} + e^{-α r(y,x)} + q(x,y)^α`.
pub fn outer_integrals_mc(model: &AnyModel, quad: &QuadratureSpec, mc: &McSpec) -> Result<OuterIntegrals> {
    mc.validate()?;
    match model {
        AnyModel::Minimal(m) => minimal_outer_mc(m, quad, mc),
        AnyModel::Rgg(m) => rgg_outer_mc(m, quad, mc),
        AnyModel::Lattice(_) => lattice_outer(model, quad, mc),
    }
}

const MC_BATCH: usize = 256;

/// Runs `n` draws in fixed batches with their own streams, so the result
/// does not depend on the number of worker threads.
fn batched<F>(n: usize, seed: u64, draw: F) -> Result<Vec<[f64; 3]>>
where
    F: Fn(&mut StreamRng) -> Result<[f64; 3]> + Sync,
{
    let batches = n.div_ceil(MC_BATCH);
    let parts: Vec<Result<Vec<[f64; 3]>>> = (0..batches)
        .into_par_iter()
        .map(|k| {
            let mut rng = StreamRng::from_seed(crate::pointproc::splitmix64(seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let len = MC_BATCH.min(n - k * MC_BATCH);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn summarize(samples: &[[f64; 3]], kinds: [TermKind; 3]) -> OuterIntegrals {
    let col = |i: usize| {
        let v: Vec<f64> = samples.iter().map(|r| r[i]).collect();
        let e = mean_and_se(&v);
        BoundTerm { value: e.value, se: e.se, kind: kinds[i] }
    };
    OuterIntegrals { int_f_beta_sq: col(0), int_f_2beta: col(1), int_kg_g: col(2) }
}

fn minimal_outer_mc(m: &MinimalPoints, quad: &QuadratureSpec, mc: &McSpec) -> Result<OuterIntegrals> {
    let s = m.s();
    let (beta, zeta) = (m.beta(), m.zeta());
    let sampler = CubeSampler::new(s, m.dim(), beta);
    let c = |y: &Point, a: f64| -> Result<f64> { Ok(c_alpha_s(y.coords(), a, s, quad)?.value) };
    let kernel = |x: &Point, y: &Point, alpha: f64| -> Result<f64> {
        let mut k = 0.0;
        if x.dominates(y) {
            k += (-alpha * s * x.volume()).exp();
        }
        if y.dominates(x) {
            k += (-alpha * s * y.volume()).exp();
        }
        Ok(k + c(&x.join(y), 1.0)?.powf(alpha))
    };
    let samples = batched(mc.n_samples, mc.base_seed, |rng| {
        let (y, wy) = sampler.draw(rng);
        let (x, wx) = sampler.draw(rng);
        let (x2, wx2) = sampler.draw(rng);
        let gx = 1.0 + c(&x, zeta)?.powi(5);
        let gx2 = 1.0 + c(&x2, zeta)?.powi(5);
        let a = wy * wx * gx * kernel(&x, &y, beta)? * wx2 * gx2 * kernel(&x2, &y, beta)?;
        let b = wy * wx * gx * kernel(&x, &y, 2.0 * beta)?;
        let gy = c(&y, zeta)?;
        let kappa = (-s * y.volume()).exp();
        let cc = wy * (kappa + gy).powf(2.0 * beta) * (1.0 + gy.powi(5));
        Ok([a, b, cc])
    })?;
    Ok(summarize(&samples, [TermKind::Value; 3]))
}

fn rgg_outer_mc(m: &RggIsolated, quad: &QuadratureSpec, mc: &McSpec) -> Result<OuterIntegrals> {
    let _ = quad;
    let d = m.dim();
    let s = m.s();
    let rho = m.rho();
    let beta = m.beta();
    let k = m.ball_mass();
    let g = k * (-m.zeta() * k).exp();
    let support = m.weight().support_radius(s);
    let outer_r = support + 2.0 * rho;
    let kd = ball_volume::<f64>(d);
    let big_g = |x: &Point| {
        let w = m.weight().eval(s, x).abs();
        (w * w).max(w.powi(4)) * (1.0 + g.powi(5))
    };
    let q = |t: f64| -> Result<f64> {
        match lens_volume(d, rho, t) {
            Some(v) => Ok(s * (-k).exp() * v),
            None if t <= 2.0 * rho => Ok(k * (-k).exp()),
            None => Ok(0.0),
        }
    };
    let in_ball = |rng: &mut StreamRng, centre: &Point, r: f64| loop {
        let c: Vec<f64> = (0..d).map(|_| (2.0 * rng.uniform() - 1.0) * r).collect();
        if c.iter().map(|v| v * v).sum::<f64>() <= r * r {
            return Point::new(centre.coords().iter().zip(&c).map(|(a, b)| a + b));
        }
    };
    let origin = Point::new(vec![0.0; d]);
    let wy = s * kd * outer_r.powi(d as i32);
    let wx = s * kd * (2.0 * rho).powi(d as i32);
    let kernel = |x: &Point, y: &Point, alpha: f64| -> Result<f64> {
        let t = x.dist2(y).sqrt();
        let near = if t <= rho { 2.0 * (-alpha * k).exp() } else { 0.0 };
        Ok(near + q(t)?.powf(alpha))
    };
    let kg = ((-k).exp() + g).powf(2.0 * beta);
    let samples = batched(mc.n_samples, mc.base_seed, |rng| {
        let y = in_ball(rng, &origin, outer_r);
        let x = in_ball(rng, &y, 2.0 * rho);
        let x2 = in_ball(rng, &y, 2.0 * rho);
        let a = wy * wx * big_g(&x) * kernel(&x, &y, beta)? * wx * big_g(&x2) * kernel(&x2, &y, beta)?;
        let b = wy * wx * big_g(&x) * kernel(&x, &y, 2.0 * beta)?;
        let c = wy * kg * big_g(&y);
        Ok([a, b, c])
    })?;
    let kind = if d <= 3 { TermKind::Value } else { TermKind::Bound };
    Ok(summarize(&samples, [kind, kind, TermKind::Bound]))
}
