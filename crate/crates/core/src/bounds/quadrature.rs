use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// `n`-point rule. Nodes come from Newton iteration on `P_n` in `f64`
    /// and are then rounded to `T`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(invalid("Gauss-Legendre order must be at least 1"));
        }
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + *w * f(mid + half * *x);
        }
        acc * half
    }

    /// `∫_a^b f` over `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(T) -> T>(&self, a: T, b: T, panels: usize, mut f: F) -> T {
        let panels = panels.max(1);
        let h = (b - a) / T::from_usize_lossy(panels);
        let mut acc = T::zero();
        for k in 0..panels {
            let lo = a + h * T::from_usize_lossy(k);
            acc = acc + self.integrate(lo, lo + h, &mut f);
        }
        acc
    }

    /// `∫ f` over consecutive knots, each gap split into panels no longer
    /// than `max_len`.
    pub fn integrate_knots<F: FnMut(T) -> T>(&self, knots: &[T], max_len: T, mut f: F) -> T {
        let mut acc = T::zero();
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let panels = ((b - a) / max_len).ceil().to_usize().unwrap_or(1).max(1);
            acc = acc + self.integrate_composite(a, b, panels, &mut f);
        }
        acc
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Longest panel, in units of `t = -log x`, used by the log-coordinate
/// integrators.
pub const PANEL_LENGTH: f64 = 4.0;

/// Controls for the deterministic integrators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order on each panel of a log coordinate; panels are
    /// at most [`PANEL_LENGTH`] units long.
    pub nodes_per_axis: usize,
    /// Upper limit of the log-coordinate `t = -log x`; `None` picks
    /// `log⁺(s) + 60`, beyond which every integrand used here is below
    /// `1e-20` relative to its bulk.
    pub truncation: Option<f64>,
    /// Dimensions above this use Monte Carlo.
    pub max_dim_tensor: usize,
    /// Grid cells per unit of log-coordinate for the two-dimensional
    /// outer integrals.
    pub grid_per_unit: usize,
    /// Fallback Monte Carlo controls.
    pub mc: McSpec,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_axis: 64, truncation: None, max_dim_tensor: 3, grid_per_unit: 8, mc: McSpec::default() }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(invalid("nodes_per_axis must be at least 2"));
        }
        if let Some(t) = self.truncation {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("truncation must be positive"));
            }
        }
        if self.grid_per_unit < 1 {
            return Err(invalid("grid_per_unit must be at least 1"));
        }
        self.mc.validate()
    }

    pub fn truncation_for(&self, scale: f64) -> f64 {
        self.truncation.unwrap_or_else(|| scale.ln().max(0.0) + 60.0)
    }
}

/// Controls for Monte Carlo estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_samples: usize,
    pub base_seed: u64,
    /// Jitter grid representatives inside their cells instead of using the
    /// cell centres.
    pub stratification: bool,
    /// Grid cells per axis for the difference-operator probabilities.
    pub grid_per_axis: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        Self { n_samples: 1_000_000, base_seed: 0, stratification: false, grid_per_axis: 32 }
    }
}

impl McSpec {
    pub fn new(n_samples: usize, base_seed: u64) -> Self {
        Self { n_samples, base_seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(invalid(format!("n_samples must be at least 1000, got {}", self.n_samples)));
        }
        if self.grid_per_axis < 1 {
            return Err(invalid("grid_per_axis must be at least 1"));
        }
        Ok(())
    }
}
