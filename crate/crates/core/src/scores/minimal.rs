use crate::error::Result;
use crate::pointproc::{IntensitySpec, Point, PointConfiguration, SpaceTag};
use crate::scores::skyline::{count_minimal_fast, poset_minimal_entries};
use crate::scores::{others_satisfy, validate_common, ModelKind, RegionDescriptor, ScoreModel, StatisticValue};

/// Number of minimal (Pareto) points of a Poisson process of intensity `s` on
/// `[0,1]^d`.
///
/// `ξ(x, μ) = 1` iff `x` dominates no other point of `μ` (coincident copies
/// dominate each other). The region is `[0, x]` when no other location of `μ`
/// lies in `[0, x]`, and empty otherwise; `r_s(x, y) = s·|x|` for `y ⪯ x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalPoints {
    s: f64,
    d: usize,
    p: f64,
    strict: bool,
}

impl MinimalPoints {
    pub fn new(s: f64, d: usize, p: f64) -> Result<Self> {
        validate_common(s, d, p)?;
        Ok(Self { s, d, p, strict: false })
    }

    /// Deliberately broken variant: the score uses strict dominance while the
    /// region keeps the non-strict test. Used to check that the property
    /// suite notices a score/region mismatch.
    #[doc(hidden)]
    pub fn with_strict_dominance_fault(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn is_faulty(&self) -> bool {
        self.strict
    }
}

impl ScoreModel for MinimalPoints {
    fn kind(&self) -> ModelKind {
        ModelKind::Minimal
    }

    fn space(&self) -> SpaceTag {
        SpaceTag::Cube
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
        let dominated = if self.strict {
            others_satisfy(x, config, |q| {
                x.coords().iter().zip(q.coords()).all(|(a, b)| a > b)
            })
        } else {
            others_satisfy(x, config, |q| x.dominates(q))
        };
        if dominated {
            0.0
        } else {
            1.0
        }
    }

    fn region_at(&self, x: &Point, config: &PointConfiguration) -> RegionDescriptor {
        let blocked = config.entries().iter().any(|(q, _)| q != x && x.dominates(q));
        if blocked {
            RegionDescriptor::Empty
        } else {
            RegionDescriptor::BoxToOrigin(x.clone())
        }
    }

    fn rate(&self, x: &Point, y: &Point) -> f64 {
        if x.dominates(y) {
            self.s * x.volume()
        } else {
            f64::INFINITY
        }
    }

    fn moment_bound(&self, _x: &Point) -> f64 {
        1.0
    }

    fn default_intensity(&self) -> IntensitySpec {
        IntensitySpec::cube(self.s, self.d)
    }

    fn statistic(&self, config: &PointConfiguration) -> StatisticValue {
        if self.strict {
            let terms = self.score_terms(config);
            let value = terms.iter().sum::<f64>();
            return StatisticValue { value, point_count: config.total_mass(), scored_count: value as u64 };
        }
        let points: Vec<Point> = config.expanded().cloned().collect();
        let count = count_minimal_fast(&points, self.d);
        StatisticValue { value: count as f64, point_count: config.total_mass(), scored_count: count as u64 }
    }

    fn difference_core(&self, config: &PointConfiguration, _added: &[Point]) -> PointConfiguration {
        if self.strict {
            return config.clone();
        }
        PointConfiguration::from_canonical(config.space(), config.dim(), poset_minimal_entries(config.entries()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::{sample_poisson, SeedSpec};

    fn cfg(points: &[[f64; 2]]) -> PointConfiguration {
        PointConfiguration::from_points(SpaceTag::Cube, 2, points.iter().map(|p| Point::from(*p))).unwrap()
    }

    #[test]
    fn worked_example() {
        let m = MinimalPoints::new(10.0, 2, 1.0).unwrap();
        let c = cfg(&[[0.2, 0.3], [0.5, 0.5]]);
        assert_eq!(m.score(&Point::from([0.2, 0.3]), &c).unwrap(), 1.0);
        assert_eq!(m.score(&Point::from([0.5, 0.5]), &c).unwrap(), 0.0);
        assert_eq!(m.statistic(&c).value, 1.0);
        assert_eq!(
            m.region(&Point::from([0.2, 0.3]), &c).unwrap(),
            RegionDescriptor::BoxToOrigin(Point::from([0.2, 0.3]))
        );
        assert_eq!(m.region(&Point::from([0.5, 0.5]), &c).unwrap(), RegionDescriptor::Empty);
    }

    #[test]
    fn duplicates_are_not_minimal() {
        let m = MinimalPoints::new(10.0, 2, 1.0).unwrap();
        let c = cfg(&[[0.4, 0.4], [0.4, 0.4]]);
        assert_eq!(m.score(&Point::from([0.4, 0.4]), &c).unwrap(), 0.0);
        assert_eq!(m.statistic(&c).value, 0.0);
        // the other copy sits at x itself, outside [0, x] \ {x}
        assert!(!m.region(&Point::from([0.4, 0.4]), &c).unwrap().is_empty());
    }

    #[test]
    fn rate_values() {
        let m = MinimalPoints::new(4.0, 2, 1.0).unwrap();
        let x = Point::from([0.5, 0.5]);
        assert_eq!(m.rate(&x, &Point::from([0.1, 0.2])), 1.0);
        assert_eq!(m.rate(&x, &Point::from([0.6, 0.2])), f64::INFINITY);
    }

    #[test]
    fn fast_statistic_matches_scores() {
        let m = MinimalPoints::new(200.0, 3, 1.0).unwrap();
        for rep in 0..20 {
            let c = sample_poisson(&m.default_intensity(), SeedSpec::new(3, rep)).unwrap();
            let slow: f64 = m.score_terms(&c).iter().sum();
            assert_eq!(m.statistic(&c).value, slow);
        }
    }

    #[test]
    fn fault_differs_on_ties() {
        let m = MinimalPoints::new(10.0, 2, 1.0).unwrap().with_strict_dominance_fault();
        let c = cfg(&[[0.5, 0.2], [0.5, 0.7]]);
        assert_eq!(m.score_at(&Point::from([0.5, 0.7]), &c), 1.0);
        assert_eq!(m.region_at(&Point::from([0.5, 0.7]), &c), RegionDescriptor::Empty);
    }

    #[test]
    fn rejects_small_s() {
        assert!(MinimalPoints::new(0.5, 2, 1.0).is_err());
        assert!(MinimalPoints::new(10.0, 0, 1.0).is_err());
    }
}
