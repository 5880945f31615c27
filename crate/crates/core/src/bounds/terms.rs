//! Pointwise bound ingredients `κ_s`, `g_s`, `G_s`, `q_s` and `f_α` for the
//! three models.

use serde::Serialize;

use crate::bounds::cfun::c_alpha_s;
use crate::bounds::loggrid::minimal_f_at_2d;
use crate::bounds::quadrature::{GaussLegendre, McSpec, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::pointproc::{Point, StreamRng};
use crate::scalar::{mean_and_se, Estimate};
use crate::scores::{ball_volume, AnyModel, LatticeIsolated, MinimalPoints, RggIsolated, ScoreModel};

/// Whether a term is the exact quantity or an upper bound for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Value,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerm {
    pub value: f64,
    pub se: f64,
    pub kind: TermKind,
}

impl BoundTerm {
    pub fn value(value: f64) -> Self {
        Self { value, se: 0.0, kind: TermKind::Value }
    }

    pub fn bound(value: f64) -> Self {
        Self { value, se: 0.0, kind: TermKind::Bound }
    }

    fn estimate(e: Estimate<f64>, kind: TermKind) -> Self {
        Self { value: e.value, se: e.se, kind }
    }
}

/// `f_α = f_α^{(1)} + f_α^{(2)} + f_α^{(3)}` with its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FComponents {
    pub f1: BoundTerm,
    pub f2: BoundTerm,
    pub f3: BoundTerm,
}

impl FComponents {
    pub fn total(&self) -> f64 {
        self.f1.value + self.f2.value + self.f3.value
    }

    fn zero() -> Self {
        let z = BoundTerm::value(0.0);
        Self { f1: z, f2: z, f3: z }
    }
}

/// `κ_s(x) = P{ξ_s(x, P_s + δ_x) ≠ 0}`.
pub fn kappa_s(model: &AnyModel, x: &Point) -> BoundTerm {
    match model {
        AnyModel::Minimal(m) => BoundTerm::value((-m.s() * x.volume()).exp()),
        AnyModel::Lattice(m) => {
            if m.weight().eval(x) == 0.0 {
                BoundTerm::value(0.0)
            } else {
                BoundTerm::value((-2.0 * m.dim() as f64 * m.s()).exp())
            }
        }
        AnyModel::Rgg(m) => BoundTerm::bound((-m.ball_mass()).exp()),
    }
}

/// `g_s(y) = s ∫ e^{-ζ r_s(x, y)} ℚ(dx)`.
pub fn g_s(model: &AnyModel, y: &Point, quad: &QuadratureSpec) -> Result<BoundTerm> {
    match model {
        AnyModel::Minimal(m) => {
            let c = c_alpha_s(y.coords(), m.zeta(), m.s(), quad)?;
            Ok(BoundTerm::estimate(c, TermKind::Value))
        }
        AnyModel::Lattice(m) => Ok(BoundTerm::value(lattice_g(m))),
        AnyModel::Rgg(m) => Ok(BoundTerm::value(rgg_g(m))),
    }
}

fn lattice_g(m: &LatticeIsolated) -> f64 {
    let n = 2.0 * m.dim() as f64;
    m.s() * n * (-m.zeta() * n * m.s()).exp()
}

fn rgg_g(m: &RggIsolated) -> f64 {
    let k = m.ball_mass();
    k * (-m.zeta() * k).exp()
}

/// `G_s(y) = max{M², M⁴}(1 + g_s(y)⁵)`.
pub fn big_g_s(model: &AnyModel, y: &Point, quad: &QuadratureSpec) -> Result<BoundTerm> {
    let m = model.moment_bound(y);
    let mt = (m * m).max(m.powi(4));
    if mt == 0.0 {
        return Ok(BoundTerm::value(0.0));
    }
    let g = g_s(model, y, quad)?;
    Ok(BoundTerm { value: mt * (1.0 + g.value.powi(5)), se: mt * 5.0 * g.value.powi(4) * g.se, kind: g.kind })
}

/// `q_s(x1, x2) = s ∫ P{{x1, x2} ⊆ R_s(z, P_s + δ_z)} ℚ(dz)`.
pub fn q_s(model: &AnyModel, x1: &Point, x2: &Point, quad: &QuadratureSpec) -> Result<BoundTerm> {
    match model {
        AnyModel::Minimal(m) => {
            let c = c_alpha_s(x1.join(x2).coords(), 1.0, m.s(), quad)?;
            Ok(BoundTerm::estimate(c, TermKind::Value))
        }
        AnyModel::Lattice(m) => Ok(BoundTerm::value(lattice_q(m, x1, x2))),
        AnyModel::Rgg(m) => Ok(rgg_q(m, x1.dist2(x2).sqrt())),
    }
}

/// Number of `z` with `x1, x2 ∈ z + B`.
pub(crate) fn lattice_common_centres(x1: &Point, x2: &Point) -> u32 {
    let diff: Vec<i64> = x1.coords().iter().zip(x2.coords()).map(|(a, b)| (a - b) as i64).collect();
    let l1: i64 = diff.iter().map(|v| v.abs()).sum();
    let nonzero = diff.iter().filter(|v| **v != 0).count();
    match (l1, nonzero) {
        (0, _) => 2 * x1.dim() as u32,
        (2, 2) => 2,
        (2, 1) => 1,
        _ => 0,
    }
}

fn lattice_q(m: &LatticeIsolated, x1: &Point, x2: &Point) -> f64 {
    let k = lattice_common_centres(x1, x2) as f64;
    m.s() * k * (-2.0 * m.dim() as f64 * m.s()).exp()
}

/// Volume of the intersection of two balls of radius `r` at distance `t`.
pub fn lens_volume(d: usize, r: f64, t: f64) -> Option<f64> {
    if t >= 2.0 * r {
        return Some(0.0);
    }
    match d {
        1 => Some(2.0 * r - t),
        2 => Some(2.0 * r * r * (t / (2.0 * r)).acos() - 0.5 * t * (4.0 * r * r - t * t).sqrt()),
        3 => Some(std::f64::consts::PI / 12.0 * (4.0 * r + t) * (2.0 * r - t).powi(2)),
        _ => None,
    }
}

fn rgg_q(m: &RggIsolated, t: f64) -> BoundTerm {
    let k = m.ball_mass();
    match lens_volume(m.dim(), m.rho(), t) {
        Some(v) => BoundTerm::value(m.s() * (-k).exp() * v),
        None if t <= 2.0 * m.rho() => BoundTerm::bound(k * (-k).exp()),
        None => BoundTerm::value(0.0),
    }
}

/// `f_α(y)` and its three components.
pub fn f_alpha(model: &AnyModel, y: &Point, alpha: f64, quad: &QuadratureSpec, mc: &McSpec) -> Result<FComponents> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha must be positive"));
    }
    match model {
        AnyModel::Minimal(m) => minimal_f(m, y, alpha, quad, mc),
        AnyModel::Lattice(m) => Ok(lattice_f(m, y, alpha)),
        AnyModel::Rgg(m) => rgg_f(m, y, alpha, quad),
    }
}

fn minimal_f(m: &MinimalPoints, y: &Point, alpha: f64, quad: &QuadratureSpec, mc: &McSpec) -> Result<FComponents> {
    if m.dim() == 2 && m.dim() <= quad.max_dim_tensor {
        let c = y.coords();
        if c.iter().any(|v| *v <= 0.0) {
            return Err(Error::Unsupported("log-grid evaluation needs y with positive coordinates".into()));
        }
        let top = quad.truncation_for(m.s());
        let [f1, f2, f3] = minimal_f_at_2d(m.s(), m.zeta(), alpha, [c[0], c[1]], top, quad.grid_per_unit);
        return Ok(FComponents {
            f1: BoundTerm::estimate(f1, TermKind::Value),
            f2: BoundTerm::estimate(f2, TermKind::Value),
            f3: BoundTerm::estimate(f3, TermKind::Value),
        });
    }
    minimal_f_mc(m, y, alpha, quad, mc)
}

/// Importance sampler for `s ∫_{[0,1]^d} φ(x) dx` concentrated near the
/// coordinate hyperplanes: `w = s|x|` is drawn from an equal mixture of
/// `Exp(1)`, `Exp(rate)` and `Uniform(0, s)`, and `-log x` is `log(s/w)`
/// split uniformly over the coordinates.
pub(crate) struct CubeSampler {
    s: f64,
    d: usize,
    rate: f64,
    fact: f64,
}

impl CubeSampler {
    pub fn new(s: f64, d: usize, rate: f64) -> Self {
        let fact = (1..d).map(|k| k as f64).product();
        Self { s, d, rate, fact }
    }

    fn density(&self, w: f64) -> f64 {
        let s = self.s;
        let e1 = (-w).exp() / -(-s).exp_m1();
        let er = self.rate * (-self.rate * w).exp() / -(-self.rate * s).exp_m1();
        (e1 + er + 1.0 / s) / 3.0
    }

    fn truncated_exp(rng: &mut StreamRng, rate: f64, s: f64) -> f64 {
        // inverse CDF of Exp(rate) conditioned on [0, s)
        let u = rng.uniform();
        -(u * (-rate * s).exp_m1()).ln_1p() / rate
    }

    /// A point and its importance weight.
    pub fn draw(&self, rng: &mut StreamRng) -> (Point, f64) {
        let w = match rng.below(3) {
            0 => Self::truncated_exp(rng, 1.0, self.s),
            1 => Self::truncated_exp(rng, self.rate, self.s),
            _ => rng.uniform() * self.s,
        };
        let w = w.clamp(f64::MIN_POSITIVE, self.s);
        let v = (self.s / w).ln();
        let mut e: Vec<f64> = (0..self.d).map(|_| rng.exponential(1.0)).collect();
        let total: f64 = e.iter().sum();
        for c in e.iter_mut() {
            *c = (-v * *c / total).exp();
        }
        let weight = v.powi(self.d as i32 - 1) / self.fact / self.density(w);
        (Point::new(e), weight)
    }
}

pub(crate) fn minimal_f_mc(m: &MinimalPoints, y: &Point, alpha: f64, quad: &QuadratureSpec, mc: &McSpec) -> Result<FComponents> {
    mc.validate()?;
    let s = m.s();
    let sampler = CubeSampler::new(s, m.dim(), alpha.min(1.0));
    let mut rng = StreamRng::from_seed(crate::pointproc::splitmix64(mc.base_seed ^ 0xF00D));
    let cy = c_alpha_s(y.coords(), 1.0, s, quad)?.value;
    let n = mc.n_samples;
    let (mut s1, mut s2, mut s3) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (x, wt) = sampler.draw(&mut rng);
        let g = 1.0 + c_alpha_s(x.coords(), m.zeta(), s, quad)?.value.powi(5);
        s1.push(if x.dominates(y) { wt * g * (-alpha * s * x.volume()).exp() } else { 0.0 });
        s2.push(if y.dominates(&x) { wt * g * (-alpha * s * y.volume()).exp() } else { 0.0 });
        let cj = if y.dominates(&x) { cy } else { c_alpha_s(x.join(y).coords(), 1.0, s, quad)?.value };
        s3.push(wt * g * cj.powf(alpha));
    }
    let to_term = |v: &[f64]| BoundTerm::estimate(mean_and_se(v), TermKind::Value);
    Ok(FComponents { f1: to_term(&s1), f2: to_term(&s2), f3: to_term(&s3) })
}

fn lattice_big_g(m: &LatticeIsolated, x: &Point) -> f64 {
    let w = m.weight().eval(x).abs();
    let mt = (w * w).max(w.powi(4));
    mt * (1.0 + lattice_g(m).powi(5))
}

/// Sites `x` with `x - y ∈ B + B` (including `x = y`).
pub(crate) fn lattice_second_neighbours(y: &Point) -> Vec<Point> {
    let d = y.dim();
    let mut out = Vec::new();
    let base: Vec<i64> = y.coords().iter().map(|c| *c as i64).collect();
    let mut push = |off: Vec<i64>| {
        out.push(Point::lattice(&base.iter().zip(&off).map(|(b, o)| b + o).collect::<Vec<_>>()));
    };
    push(vec![0; d]);
    for i in 0..d {
        for si in [-2, 2] {
            let mut o = vec![0; d];
            o[i] = si;
            push(o);
        }
        for j in (i + 1)..d {
            for si in [-1, 1] {
                for sj in [-1, 1] {
                    let mut o = vec![0; d];
                    o[i] = si;
                    o[j] = sj;
                    push(o);
                }
            }
        }
    }
    out
}

fn lattice_f(m: &LatticeIsolated, y: &Point, alpha: f64) -> FComponents {
    let s = m.s();
    let r = 2.0 * m.dim() as f64 * s;
    let near: f64 = crate::scores::lattice_neighbors(y).iter().map(|x| lattice_big_g(m, x)).sum();
    let f12 = s * near * (-alpha * r).exp();
    let f3: f64 = lattice_second_neighbours(y)
        .iter()
        .map(|x| s * lattice_big_g(m, x) * lattice_q(m, x, y).powf(alpha))
        .sum();
    FComponents { f1: BoundTerm::value(f12), f2: BoundTerm::value(f12), f3: BoundTerm::value(f3) }
}

fn rgg_big_g(m: &RggIsolated, x: &Point) -> f64 {
    let w = m.weight().eval(m.s(), x).abs();
    let mt = (w * w).max(w.powi(4));
    mt * (1.0 + rgg_g(m).powi(5))
}

/// `∫_{B(y, r)} h(x) dx` in `d = 2` by polar Gauss–Legendre around `y`.
pub(crate) fn disc_integral<F: Fn(&Point, f64) -> f64>(gl: &GaussLegendre<f64>, y: &Point, r: f64, h: F) -> f64 {
    let (y1, y2) = (y.coords()[0], y.coords()[1]);
    gl.integrate_composite(0.0, r, 2, |t| {
        t * gl.integrate_composite(0.0, 2.0 * std::f64::consts::PI, 4, |th| {
            h(&Point::new([y1 + t * th.cos(), y2 + t * th.sin()]), t)
        })
    })
}

fn rgg_f(m: &RggIsolated, y: &Point, alpha: f64, quad: &QuadratureSpec) -> Result<FComponents> {
    if m.dim() != 2 {
        return rgg_f_mc(m, y, alpha, &quad.mc);
    }
    let gl = GaussLegendre::<f64>::new(quad.nodes_per_axis.min(32))?;
    let s = m.s();
    let k = m.ball_mass();
    let ball = disc_integral(&gl, y, m.rho(), |x, _| rgg_big_g(m, x));
    let f12 = s * (-alpha * k).exp() * ball;
    let f3 = s * disc_integral(&gl, y, 2.0 * m.rho(), |x, t| rgg_big_g(m, x) * rgg_q(m, t).value.powf(alpha));
    Ok(FComponents { f1: BoundTerm::value(f12), f2: BoundTerm::value(f12), f3: BoundTerm::value(f3) })
}

fn rgg_f_mc(m: &RggIsolated, y: &Point, alpha: f64, mc: &McSpec) -> Result<FComponents> {
    mc.validate()?;
    let d = m.dim();
    let s = m.s();
    let k = m.ball_mass();
    let reach = 2.0 * m.rho();
    let vol = ball_volume::<f64>(d) * reach.powi(d as i32);
    let mut rng = StreamRng::from_seed(crate::pointproc::splitmix64(mc.base_seed ^ 0xBA11));
    let mut s12 = Vec::with_capacity(mc.n_samples);
    let mut s3 = Vec::with_capacity(mc.n_samples);
    for _ in 0..mc.n_samples {
        // uniform point in B(y, 2ρ) by rejection from the cube
        let x = loop {
            let c: Vec<f64> = (0..d).map(|_| (2.0 * rng.uniform() - 1.0) * reach).collect();
            if c.iter().map(|v| v * v).sum::<f64>() <= reach * reach {
                break Point::new(y.coords().iter().zip(&c).map(|(a, b)| a + b));
            }
        };
        let g = rgg_big_g(m, &x);
        let t = x.dist2(y).sqrt();
        s12.push(if t <= m.rho() { s * vol * g * (-alpha * k).exp() } else { 0.0 });
        s3.push(s * vol * g * rgg_q(m, t).value.powf(alpha));
    }
    let f12 = BoundTerm::estimate(mean_and_se(&s12), TermKind::Value);
    let kind = if d <= 3 { TermKind::Value } else { TermKind::Bound };
    Ok(FComponents { f1: f12, f2: f12, f3: BoundTerm::estimate(mean_and_se(&s3), kind) })
}

/// Shortcut used by callers that already know `G ≡ 0`.
pub fn zero_f() -> FComponents {
    FComponents::zero()
}
