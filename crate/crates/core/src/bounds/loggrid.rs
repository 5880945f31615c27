//! Two-dimensional log-coordinate grid for the minimal-points bound terms.
//!
//! Nodes live in `u = -log x ∈ [0, U]^2`. Dominance `x ⪰ y` becomes
//! `u_x ≤ u_y`, so every inner integral over a dominance orthant is a
//! cumulative trapezoid sum (prefix or suffix) over the grid, and all tables
//! cost `O(N²)`. Results from step `h` and `2h` are combined by Richardson
//! extrapolation.

use crate::error::{invalid, Result};
use crate::scalar::Estimate;

/// Grid axes (strictly increasing node positions).
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

/// Row-major table over the grid, `t[a * n2 + b]`.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    n1: usize,
    n2: usize,
    data: Vec<f64>,
}

impl Table {
    fn from_fn<F: FnMut(usize, usize) -> f64>(n1: usize, n2: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n1 * n2);
        for a in 0..n1 {
            for b in 0..n2 {
                data.push(f(a, b));
            }
        }
        Self { n1, n2, data }
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.n2 + b]
    }

    fn zip<F: Fn(f64, f64) -> f64>(&self, other: &Table, f: F) -> Table {
        Table {
            n1: self.n1,
            n2: self.n2,
            data: self.data.iter().zip(&other.data).map(|(x, y)| f(*x, *y)).collect(),
        }
    }

    fn map<F: Fn(f64) -> f64>(&self, f: F) -> Table {
        Table { n1: self.n1, n2: self.n2, data: self.data.iter().map(|x| f(*x)).collect() }
    }
}

impl Grid {
    /// `n` equal steps on `[0, top]` along both axes.
    pub fn uniform(top: f64, n: usize) -> Self {
        let axis: Vec<f64> = (0..=n).map(|k| top * k as f64 / n as f64).collect();
        Self { u1: axis.clone(), u2: axis }
    }

    /// Axes with a node exactly at `(b1, b2)`: `[0, b_i]` and `[b_i, top]`
    /// are each split into equal steps of length at most `step`, with an
    /// even count on every piece so the grid can be halved.
    pub fn with_breakpoint(top: f64, b1: f64, b2: f64, step: f64) -> Self {
        Self { u1: split_axis(top, b1, step), u2: split_axis(top, b2, step) }
    }

    /// Every other node (valid when each piece has an even step count).
    pub fn coarsen(&self) -> Self {
        Self { u1: self.u1.iter().step_by(2).copied().collect(), u2: self.u2.iter().step_by(2).copied().collect() }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.u1.len(), self.u2.len())
    }

    pub fn table<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> Table {
        let (n1, n2) = self.dims();
        Table::from_fn(n1, n2, |a, b| f(self.u1[a], self.u2[b]))
    }

    fn prefix_axis1(&self, t: &Table) -> Table {
        let (n1, n2) = self.dims();
        let mut out = vec![0.0; n1 * n2];
        for a in 1..n1 {
            let h = self.u1[a] - self.u1[a - 1];
            for b in 0..n2 {
                out[a * n2 + b] = out[(a - 1) * n2 + b] + 0.5 * h * (t.at(a - 1, b) + t.at(a, b));
            }
        }
        Table { n1, n2, data: out }
    }

    fn prefix_axis2(&self, t: &Table) -> Table {
        let (n1, n2) = self.dims();
        let mut out = vec![0.0; n1 * n2];
        for a in 0..n1 {
            for b in 1..n2 {
                let h = self.u2[b] - self.u2[b - 1];
                out[a * n2 + b] = out[a * n2 + b - 1] + 0.5 * h * (t.at(a, b - 1) + t.at(a, b));
            }
        }
        Table { n1, n2, data: out }
    }

    fn suffix_axis1(&self, t: &Table) -> Table {
        let (n1, n2) = self.dims();
        let mut out = vec![0.0; n1 * n2];
        for a in (0..n1 - 1).rev() {
            let h = self.u1[a + 1] - self.u1[a];
            for b in 0..n2 {
                out[a * n2 + b] = out[(a + 1) * n2 + b] + 0.5 * h * (t.at(a + 1, b) + t.at(a, b));
            }
        }
        Table { n1, n2, data: out }
    }

    fn suffix_axis2(&self, t: &Table) -> Table {
        let (n1, n2) = self.dims();
        let mut out = vec![0.0; n1 * n2];
        for a in 0..n1 {
            for b in (0..n2 - 1).rev() {
                let h = self.u2[b + 1] - self.u2[b];
                out[a * n2 + b] = out[a * n2 + b + 1] + 0.5 * h * (t.at(a, b + 1) + t.at(a, b));
            }
        }
        Table { n1, n2, data: out }
    }

    /// `∫_0^{u1_a} ∫_0^{u2_b} t`.
    pub fn prefix2(&self, t: &Table) -> Table {
        self.prefix_axis1(&self.prefix_axis2(t))
    }

    /// `∫_{u1_a}^{U} ∫_{u2_b}^{U} t`.
    pub fn suffix2(&self, t: &Table) -> Table {
        self.suffix_axis1(&self.suffix_axis2(t))
    }

    pub fn total(&self, t: &Table) -> f64 {
        let p = self.prefix2(t);
        p.at(p.n1 - 1, p.n2 - 1)
    }
}

fn split_axis(top: f64, b: f64, step: f64) -> Vec<f64> {
    let piece = |lo: f64, hi: f64, out: &mut Vec<f64>| {
        let len = hi - lo;
        if len <= 0.0 {
            return;
        }
        let mut n = (len / step).ceil() as usize;
        n = n.max(2);
        n += n % 2;
        for k in 1..=n {
            out.push(lo + len * k as f64 / n as f64);
        }
    };
    let mut axis = vec![0.0];
    piece(0.0, b, &mut axis);
    piece(b, top, &mut axis);
    axis
}

/// Tables of the minimal-points model on one grid: `c_{ζ,s}`, `c_{1,s}`,
/// `G_s`, and the `s dx` density `J = s e^{-v}`.
pub(crate) struct MinimalTables<'g> {
    grid: &'g Grid,
    s: f64,
    c_zeta: Table,
    c_one: Table,
    big_g: Table,
    jac: Table,
    /// `∫_{x ⪯ y} G(x) s dx` on every node.
    g_below: Table,
}

/// Values of `f_α^{(1)}, f_α^{(2)}, f_α^{(3)}` on every node.
pub(crate) struct FTables {
    pub f1: Table,
    pub f2: Table,
    pub f3: Table,
}

impl FTables {
    pub fn sum(&self) -> Table {
        self.f1.zip(&self.f2, |a, b| a + b).zip(&self.f3, |a, b| a + b)
    }
}

impl<'g> MinimalTables<'g> {
    pub fn new(grid: &'g Grid, s: f64, zeta: f64) -> Self {
        let phi = |alpha: f64| grid.table(|u1, u2| {
            let v = u1 + u2;
            s * (-alpha * s * (-v).exp() - v).exp()
        });
        let c_zeta = grid.prefix2(&phi(zeta));
        let c_one = grid.prefix2(&phi(1.0));
        let big_g = c_zeta.map(|c| 1.0 + c.powi(5));
        let jac = grid.table(|u1, u2| s * (-(u1 + u2)).exp());
        let g_below = grid.suffix2(&big_g.zip(&jac, |g, j| g * j));
        Self { grid, s, c_zeta, c_one, big_g, jac, g_below }
    }

    pub fn f_tables(&self, alpha: f64) -> FTables {
        let grid = self.grid;
        let s = self.s;
        let (n1, n2) = grid.dims();
        let decay = grid.table(|u1, u2| (-alpha * s * (-(u1 + u2)).exp()).exp());
        // f1: x ⪰ y, weight e^{-αs|x|}
        let f1 = grid.prefix2(&self.big_g.zip(&self.jac, |g, j| g * j).zip(&decay, |gj, e| gj * e));
        // f2: x ⪯ y, weight e^{-αs|y|}
        let f2 = decay.zip(&self.g_below, |e, b| e * b);
        // f3 over the four orthants of x relative to y
        let c_pow = self.c_one.map(|c| c.powf(alpha));
        let gj = self.big_g.zip(&self.jac, |g, j| g * j);
        let above = grid.prefix2(&gj.zip(&c_pow, |a, c| a * c));
        let below = c_pow.zip(&self.g_below, |c, b| c * b);
        let tail2 = grid.suffix_axis2(&gj);
        let mixed12 = grid.prefix_axis1(&c_pow.zip(&tail2, |c, t| c * t));
        let tail1 = grid.suffix_axis1(&gj);
        let mixed21 = grid.prefix_axis2(&c_pow.zip(&tail1, |c, t| c * t));
        let f3 = Table::from_fn(n1, n2, |a, b| {
            above.at(a, b) + below.at(a, b) + mixed12.at(a, b) + mixed21.at(a, b)
        });
        FTables { f1, f2, f3 }
    }

    /// `(s∫f_β², s∫f_{2β}, s∫(κ+g)^{2β} G)` truncated to the grid.
    pub fn outer(&self, beta: f64) -> [f64; 3] {
        let grid = self.grid;
        let s = self.s;
        let fb = self.f_tables(beta).sum();
        let f2b = self.f_tables(2.0 * beta).sum();
        let a = grid.total(&fb.zip(&self.jac, |f, j| f * f * j));
        let b = grid.total(&f2b.zip(&self.jac, |f, j| f * j));
        let kappa = grid.table(|u1, u2| (-s * (-(u1 + u2)).exp()).exp());
        let kg = kappa.zip(&self.c_zeta, |k, g| (k + g).powf(2.0 * beta));
        let c = grid.total(&kg.zip(&self.big_g, |k, g| k * g).zip(&self.jac, |x, j| x * j));
        [a, b, c]
    }
}

/// Richardson combination `(4 T_h − T_{2h}) / 3` with `|T_h − T_{2h}| / 3`
/// as the error estimate.
pub(crate) fn richardson(fine: f64, coarse: f64) -> Estimate<f64> {
    Estimate::new((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}

/// The three outer integrals of the minimal-points model in `d = 2`.
pub(crate) fn minimal_outer_2d(s: f64, zeta: f64, beta: f64, top: f64, per_unit: usize) -> Result<[Estimate<f64>; 3]> {
    if per_unit == 0 {
        return Err(invalid("grid resolution must be positive"));
    }
    let mut n = (top * per_unit as f64).ceil() as usize;
    n += n % 2;
    let fine = Grid::uniform(top, n);
    let coarse = fine.coarsen();
    let tf = MinimalTables::new(&fine, s, zeta).outer(beta);
    let tc = MinimalTables::new(&coarse, s, zeta).outer(beta);
    Ok([richardson(tf[0], tc[0]), richardson(tf[1], tc[1]), richardson(tf[2], tc[2])])
}

/// `(f_α^{(1)}, f_α^{(2)}, f_α^{(3)})(y)` of the minimal-points model in `d = 2`.
pub(crate) fn minimal_f_at_2d(s: f64, zeta: f64, alpha: f64, y: [f64; 2], top: f64, per_unit: usize) -> [Estimate<f64>; 3] {
    let b1 = -y[0].ln();
    let b2 = -y[1].ln();
    let top = top.max(b1.max(b2) + 1.0);
    let fine = Grid::with_breakpoint(top, b1, b2, 1.0 / per_unit as f64);
    let coarse = fine.coarsen();
    let locate = |g: &Grid| {
        let a = g.u1.iter().position(|u| *u == b1).expect("breakpoint on axis 1");
        let b = g.u2.iter().position(|u| *u == b2).expect("breakpoint on axis 2");
        (a, b)
    };
    let eval = |g: &Grid| {
        let t = MinimalTables::new(g, s, zeta).f_tables(alpha);
        let (a, b) = locate(g);
        [t.f1.at(a, b), t.f2.at(a, b), t.f3.at(a, b)]
    };
    let vf = eval(&fine);
    let vc = eval(&coarse);
    [richardson(vf[0], vc[0]), richardson(vf[1], vc[1]), richardson(vf[2], vc[2])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::cfun::c_alpha_s;
    use crate::bounds::quadrature::QuadratureSpec;

    #[test]
    fn prefix_sums_reproduce_c() {
        let s: f64 = 200.0;
        let grid = Grid::uniform(s.ln() + 40.0, 800);
        let t = MinimalTables::new(&grid, s, 0.02);
        let q = QuadratureSpec::default();
        for &(a, b) in &[(8usize, 16usize), (100, 40), (200, 200)] {
            let y = [(-grid.u1[a]).exp(), (-grid.u2[b]).exp()];
            let want = c_alpha_s(&y, 1.0, s, &q).unwrap().value;
            let got = t.c_one.at(a, b);
            assert!((got - want).abs() < 2e-3 * want + 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn breakpoint_axes_are_halvable() {
        let g = Grid::with_breakpoint(10.0, 2.3, 0.0, 0.25);
        assert_eq!(g.u2[0], 0.0);
        assert!(g.u1.contains(&2.3));
        let c = g.coarsen();
        assert!(c.u1.contains(&2.3));
        assert_eq!(*c.u1.last().unwrap(), 10.0);
    }
}
