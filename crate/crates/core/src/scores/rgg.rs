use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pointproc::{BoxWindow, IntensitySpec, Point, PointConfiguration, SpaceTag};
use crate::scalar::{exact_sum, Real};
use crate::scores::{others_satisfy, validate_common, ModelKind, RegionDescriptor, ScoreModel, StatisticValue};

/// Volume `k_d` of the unit ball in `R^d`.
pub fn ball_volume<T: Real>(d: usize) -> T {
    // k_0 = 1, k_1 = 2, k_d = k_{d-2} · 2π / d
    let two_pi = T::lit(2.0) * T::PI();
    let mut k = if d.is_multiple_of(2) { T::one() } else { T::lit(2.0) };
    let mut j = if d.is_multiple_of(2) { 2 } else { 3 };
    while j <= d {
        k = k * two_pi / T::from_usize_lossy(j);
        j += 2;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RggWeight {
    /// `w_s(x) = log(s / ‖x‖) · 1{‖x‖ < s}`.
    Logarithmic,
    /// `w_s(x) = value · 1{‖x‖ < radius}`.
    Indicator { radius: f64, value: f64 },
}

impl RggWeight {
    pub fn eval(&self, s: f64, x: &Point) -> f64 {
        let r = x.norm();
        match *self {
            RggWeight::Logarithmic => {
                if r < s {
                    (s / r).ln()
                } else {
                    0.0
                }
            }
            RggWeight::Indicator { radius, value } => {
                if r < radius {
                    value
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support_radius(&self, s: f64) -> f64 {
        match *self {
            RggWeight::Logarithmic => s,
            RggWeight::Indicator { radius, .. } => radius,
        }
    }
}

/// Weighted count of isolated vertices of the random geometric graph with
/// connection radius `ρ` on a Poisson process of intensity `s` in `R^d`:
/// `ξ(x, μ) = w_s(x)·1{(μ - δ_x)(B(x, ρ)) = 0}` with the closed ball `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct RggIsolated {
    s: f64,
    d: usize,
    p: f64,
    rho: f64,
    weight: RggWeight,
}

impl RggIsolated {
    pub fn new(s: f64, d: usize, p: f64, rho: f64, weight: RggWeight) -> Result<Self> {
        validate_common(s, d, p)?;
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid(format!("rho must be positive, got {rho}")));
        }
        if let RggWeight::Indicator { radius, value } = weight {
            if !(radius.is_finite() && radius > 0.0 && value.is_finite()) {
                return Err(invalid("indicator weight needs a positive radius and a finite value"));
            }
        }
        Ok(Self { s, d, p, rho, weight })
    }

    /// The radius with `k_d s ρ^d = log s`, the regime where the expected
    /// number of isolated vertices per unit weight stays of order one.
    pub fn critical_radius(s: f64, d: usize) -> f64 {
        (s.ln() / (ball_volume::<f64>(d) * s)).powf(1.0 / d as f64)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn weight(&self) -> RggWeight {
        self.weight
    }

    /// `s k_d ρ^d`, the mean number of other points in a connection ball.
    pub fn ball_mass(&self) -> f64 {
        self.s * ball_volume::<f64>(self.d) * self.rho.powi(self.d as i32)
    }

    fn cell_of(&self, p: &Point) -> Vec<i64> {
        p.coords().iter().map(|c| (c / self.rho).floor() as i64).collect()
    }
}

impl ScoreModel for RggIsolated {
    fn kind(&self) -> ModelKind {
        ModelKind::Rgg
    }

    fn space(&self) -> SpaceTag {
        SpaceTag::EuclideanWindow
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
        let r2 = self.rho * self.rho;
        if others_satisfy(x, config, |q| x.dist2(q) <= r2) {
            0.0
        } else {
            self.weight.eval(self.s, x)
        }
    }

    fn region_at(&self, x: &Point, config: &PointConfiguration) -> RegionDescriptor {
        let r2 = self.rho * self.rho;
        if others_satisfy(x, config, |q| x.dist2(q) <= r2) {
            RegionDescriptor::Empty
        } else {
            RegionDescriptor::Ball { center: x.clone(), radius: self.rho }
        }
    }

    fn rate(&self, x: &Point, y: &Point) -> f64 {
        if x.dist2(y) <= self.rho * self.rho {
            self.ball_mass()
        } else {
            f64::INFINITY
        }
    }

    fn moment_bound(&self, x: &Point) -> f64 {
        self.weight.eval(self.s, x).abs()
    }

    fn default_intensity(&self) -> IntensitySpec {
        let half = self.weight.support_radius(self.s);
        IntensitySpec::euclidean(self.s, BoxWindow::centered(self.d, half), self.rho)
    }

    fn score_terms(&self, config: &PointConfiguration) -> Vec<f64> {
        let entries = config.entries();
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, (p, _)) in entries.iter().enumerate() {
            cells.entry(self.cell_of(p)).or_default().push(i);
        }
        let r2 = self.rho * self.rho;
        let mut out = Vec::with_capacity(config.total_mass() as usize);
        let mut offset = vec![-1i64; self.d];
        for (i, (p, m)) in entries.iter().enumerate() {
            let isolated = *m == 1 && {
                let base = self.cell_of(p);
                let mut found = false;
                offset.iter_mut().for_each(|o| *o = -1);
                'cells: loop {
                    let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
                    if let Some(list) = cells.get(&key) {
                        if list.iter().any(|&j| j != i && p.dist2(&entries[j].0) <= r2) {
                            found = true;
                            break 'cells;
                        }
                    }
                    // odometer over {-1, 0, 1}^d
                    let mut axis = 0;
                    loop {
                        if axis == self.d {
                            break 'cells;
                        }
                        offset[axis] += 1;
                        if offset[axis] <= 1 {
                            break;
                        }
                        offset[axis] = -1;
                        axis += 1;
                    }
                }
                !found
            };
            let v = if isolated { self.weight.eval(self.s, p) } else { 0.0 };
            out.extend(std::iter::repeat_n(v, *m as usize));
        }
        out
    }

    fn statistic(&self, config: &PointConfiguration) -> StatisticValue {
        let terms = self.score_terms(config);
        StatisticValue {
            value: exact_sum(terms.iter().copied()),
            point_count: config.total_mass(),
            scored_count: terms.iter().filter(|v| **v != 0.0).count() as u64,
        }
    }

    fn difference_core(&self, config: &PointConfiguration, added: &[Point]) -> PointConfiguration {
        let reach = 4.0 * self.rho * self.rho;
        let entries = config
            .entries()
            .iter()
            .filter(|(q, _)| added.iter().any(|a| a.dist2(q) <= reach))
            .cloned()
            .collect();
        PointConfiguration::from_canonical(config.space(), config.dim(), entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_poisson, SeedSpec};

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(ball_volume::<f64>(1), 2.0);
        assert!((ball_volume::<f64>(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((ball_volume::<f64>(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((ball_volume::<f64>(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
        assert!((ball_volume::<f32>(2) - std::f32::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn closed_ball_and_weights() {
        let m = RggIsolated::new(10.0, 2, 1.0, 1.0, RggWeight::Logarithmic).unwrap();
        let c = PointConfiguration::from_points(
            SpaceTag::EuclideanWindow,
            2,
            [Point::from([1.0, 0.0]), Point::from([2.0, 0.0]), Point::from([5.0, 5.0])],
        )
        .unwrap();
        assert_eq!(m.score(&Point::from([1.0, 0.0]), &c).unwrap(), 0.0);
        let far = Point::from([5.0, 5.0]);
        let want = (10.0 / far.norm()).ln();
        assert_eq!(m.score(&far, &c).unwrap(), want);
        assert_eq!(m.statistic(&c).value, want);
        assert_eq!(RggWeight::Logarithmic.eval(10.0, &Point::from([10.0, 0.0])), 0.0);
    }

    #[test]
    fn grid_statistic_matches_scores() {
        for d in 1..=3 {
            let m = RggIsolated::new(3.0, d, 1.0, 0.4, RggWeight::Indicator { radius: 2.0, value: 1.5 }).unwrap();
            for rep in 0..10 {
                let c = sample_poisson(&m.default_intensity(), SeedSpec::new(9, rep)).unwrap();
                let slow: Vec<f64> = c
                    .entries()
                    .iter()
                    .flat_map(|(x, k)| std::iter::repeat_n(m.score_at(x, &c), *k as usize))
                    .collect();
                assert_eq!(m.score_terms(&c), slow);
            }
        }
    }

    #[test]
    fn critical_radius_regime() {
        let rho = RggIsolated::critical_radius(100.0, 2);
        let m = RggIsolated::new(100.0, 2, 1.0, rho, RggWeight::Logarithmic).unwrap();
        assert!((m.ball_mass() - 100f64.ln()).abs() < 1e-12);
    }
}
