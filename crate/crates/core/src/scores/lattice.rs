use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pointproc::{BoxWindow, IntensitySpec, Point, PointConfiguration, SpaceTag};
use crate::scores::{lattice_neighbors, validate_common, ModelKind, RegionDescriptor, ScoreModel};

/// Weight `w(x) = value · 1{x ∈ [-n, n]^d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeWeight {
    pub half_width: i64,
    pub value: f64,
}

impl LatticeWeight {
    pub fn indicator(half_width: i64) -> Self {
        Self { half_width, value: 1.0 }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let n = self.half_width as f64;
        if x.coords().iter().all(|c| c.abs() <= n) {
            self.value
        } else {
            0.0
        }
    }
}

/// Weighted count of isolated sites of a Poisson process on `Z^d` with mean
/// `s` per site: `ξ(x, μ) = w(x)·1{μ(x + B) = 0}`, `B = {±e_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeIsolated {
    s: f64,
    d: usize,
    p: f64,
    weight: LatticeWeight,
    /// Extra lattice layers simulated around the weight support.
    pad: i64,
}

impl LatticeIsolated {
    pub fn new(s: f64, d: usize, p: f64, weight: LatticeWeight) -> Result<Self> {
        validate_common(s, d, p)?;
        if weight.half_width < 0 || !weight.value.is_finite() {
            return Err(invalid("lattice weight needs a non-negative half width and a finite value"));
        }
        Ok(Self { s, d, p, weight, pad: 2 })
    }

    /// Sets the number of layers sampled outside `[-n, n]^d` (at least 1 is
    /// needed for isolation near the boundary to be decided correctly).
    pub fn with_pad(mut self, pad: i64) -> Result<Self> {
        if pad < 1 {
            return Err(invalid("lattice pad must be at least 1"));
        }
        self.pad = pad;
        Ok(self)
    }

    pub fn weight(&self) -> LatticeWeight {
        self.weight
    }

    pub fn pad(&self) -> i64 {
        self.pad
    }

    /// `Σ_x |w(x)|^i` over the lattice.
    pub fn weight_moment(&self, i: i32) -> f64 {
        let sites = (2 * self.weight.half_width + 1) as f64;
        sites.powi(self.d as i32) * self.weight.value.abs().powi(i)
    }

    fn isolated(&self, x: &Point, config: &PointConfiguration) -> bool {
        lattice_neighbors(x).iter().all(|q| !config.contains(q))
    }
}

impl ScoreModel for LatticeIsolated {
    fn kind(&self) -> ModelKind {
        ModelKind::Lattice
    }

    fn space(&self) -> SpaceTag {
        SpaceTag::Lattice
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn s(&self) -> f64 {
        self.s
    }

    fn p(&self) -> f64 {
        self.p
    }

    fn score_at(&self, x: &Point, config: &PointConfiguration) -> f64 {
        if self.isolated(x, config) {
            self.weight.eval(x)
        } else {
            0.0
        }
    }

    fn region_at(&self, x: &Point, config: &PointConfiguration) -> RegionDescriptor {
        if self.isolated(x, config) {
            RegionDescriptor::NeighborSet(x.clone())
        } else {
            RegionDescriptor::Empty
        }
    }

    fn rate(&self, x: &Point, y: &Point) -> f64 {
        if x.l1_dist(y) == 1.0 {
            2.0 * self.d as f64 * self.s
        } else {
            f64::INFINITY
        }
    }

    fn moment_bound(&self, x: &Point) -> f64 {
        self.weight.eval(x).abs()
    }

    fn default_intensity(&self) -> IntensitySpec {
        let half = (self.weight.half_width + self.pad) as f64;
        IntensitySpec::lattice(self.s, BoxWindow::centered(self.d, half))
    }

    fn difference_core(&self, config: &PointConfiguration, added: &[Point]) -> PointConfiguration {
        let entries = config
            .entries()
            .iter()
            .filter(|(q, _)| added.iter().any(|a| a.l1_dist(q) <= 2.0))
            .cloned()
            .collect();
        PointConfiguration::from_canonical(config.space(), config.dim(), entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[[i64; 2]]) -> PointConfiguration {
        PointConfiguration::from_points(SpaceTag::Lattice, 2, points.iter().map(|p| Point::lattice(p))).unwrap()
    }

    #[test]
    fn isolation() {
        let m = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight::indicator(5)).unwrap();
        let c = cfg(&[[0, 0], [0, 0], [1, 1], [3, 3], [3, 4]]);
        assert_eq!(m.score(&Point::lattice(&[0, 0]), &c).unwrap(), 1.0);
        assert_eq!(m.score(&Point::lattice(&[1, 1]), &c).unwrap(), 1.0);
        assert_eq!(m.score(&Point::lattice(&[3, 3]), &c).unwrap(), 0.0);
        // two copies at the origin, each isolated
        assert_eq!(m.statistic(&c).value, 3.0);
        assert_eq!(
            m.region(&Point::lattice(&[0, 0]), &c).unwrap(),
            RegionDescriptor::NeighborSet(Point::lattice(&[0, 0]))
        );
        assert_eq!(m.region(&Point::lattice(&[3, 4]), &c).unwrap(), RegionDescriptor::Empty);
    }

    #[test]
    fn weight_support() {
        let m = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight::indicator(1)).unwrap();
        let c = cfg(&[[2, 0]]);
        assert_eq!(m.statistic(&c).value, 0.0);
        assert_eq!(m.weight_moment(2), 9.0);
        let w = m.default_intensity().window.unwrap();
        assert_eq!(w.lo, vec![-3.0, -3.0]);
    }

    #[test]
    fn rates() {
        let m = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight::indicator(1)).unwrap();
        let x = Point::lattice(&[0, 0]);
        assert_eq!(m.rate(&x, &Point::lattice(&[0, 1])), 4.0);
        assert_eq!(m.rate(&x, &x), f64::INFINITY);
        assert_eq!(m.rate(&x, &Point::lattice(&[1, 1])), f64::INFINITY);
    }
}
