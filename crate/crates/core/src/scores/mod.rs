//! Score functions `ξ_s(x, μ)`, their stabilization regions and the
//! statistics `H_s = Σ_{x∈P} ξ_s(x, P)`.

mod lattice;
mod minimal;
mod region;
mod rgg;
pub mod skyline;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pointproc::{IntensitySpec, Point, PointConfiguration, SpaceTag};
use crate::scalar::{exact_sum, Real};

pub use lattice::{LatticeIsolated, LatticeWeight};
pub use minimal::MinimalPoints;
pub use region::{lattice_neighbors, RegionDescriptor};
pub use rgg::{ball_volume, RggIsolated, RggWeight};

/// `ζ = p / (40 + 10p)`.
pub fn zeta<T: Real>(p: T) -> T {
    p / (T::lit(40.0) + T::lit(10.0) * p)
}

/// `β = p / (32 + 4p)`.
pub fn beta<T: Real>(p: T) -> T {
    p / (T::lit(32.0) + T::lit(4.0) * p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatisticValue {
    pub value: f64,
    /// Total mass of the configuration.
    pub point_count: u64,
    /// Points with a non-zero score.
    pub scored_count: u64,
}

/// A score function together with its stabilization data.
///
/// `score_at` and `region_at` evaluate the defining formulas for any pair
/// `(x, μ)`: if `x` carries mass in `μ`, one copy of it is the scored point,
/// otherwise `μ` is used as it is. The checked variants [`ScoreModel::score`]
/// and [`ScoreModel::region`] require `x ∈ μ`.
pub trait ScoreModel: Send + Sync {
    fn kind(&self) -> ModelKind;
    fn space(&self) -> SpaceTag;
    fn dim(&self) -> usize;
    fn s(&self) -> f64;
    fn p(&self) -> f64;

    fn zeta(&self) -> f64 {
        zeta(self.p())
    }

    fn beta(&self) -> f64 {
        beta(self.p())
    }

    fn score_at(&self, x: &Point, config: &PointConfiguration) -> f64;

    fn region_at(&self, x: &Point, config: &PointConfiguration) -> RegionDescriptor;

    /// Exponential rate `r_s(x, y)`; `f64::INFINITY` where `y` can never lie
    /// in the region of `x`.
    fn rate(&self, x: &Point, y: &Point) -> f64;

    /// `M_{s,p}(x)`, a bound on `‖ξ_s(x, P + δ_x + μ)‖_{4+p}` uniform in `μ`.
    fn moment_bound(&self, x: &Point) -> f64;

    /// Poisson intensity the statistic is simulated under.
    fn default_intensity(&self) -> IntensitySpec;

    fn score(&self, x: &Point, config: &PointConfiguration) -> Result<f64> {
        self.check(config)?;
        if !config.contains(x) {
            return Err(Error::PointNotInConfiguration);
        }
        Ok(self.score_at(x, config))
    }

    fn region(&self, x: &Point, config: &PointConfiguration) -> Result<RegionDescriptor> {
        self.check(config)?;
        if !config.contains(x) {
            return Err(Error::PointNotInConfiguration);
        }
        Ok(self.region_at(x, config))
    }

    /// `ξ(x, μ)` for every point of `μ`, one entry per unit of mass.
    fn score_terms(&self, config: &PointConfiguration) -> Vec<f64> {
        let mut out = Vec::with_capacity(config.total_mass() as usize);
        for (x, m) in config.entries() {
            let v = self.score_at(x, config);
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

    /// A sub-configuration `core ≤ μ` with
    /// `H(μ + A) - H(μ) = H(core + A) - H(core)` for every `A ≤ Σ added`.
    fn difference_core(&self, config: &PointConfiguration, _added: &[Point]) -> PointConfiguration {
        config.clone()
    }

    fn check(&self, config: &PointConfiguration) -> Result<()> {
        if config.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: config.dim() });
        }
        if config.space() != self.space() {
            return Err(invalid(format!(
                "configuration lives on {}, model expects {}",
                config.space(),
                self.space()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Minimal,
    Lattice,
    Rgg,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Minimal => "minimal",
            ModelKind::Lattice => "lattice",
            ModelKind::Rgg => "rgg",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimal" => Ok(ModelKind::Minimal),
            "lattice" => Ok(ModelKind::Lattice),
            "rgg" => Ok(ModelKind::Rgg),
            other => Err(invalid(format!("unknown model '{other}'"))),
        }
    }
}

pub(crate) fn validate_common(s: f64, d: usize, p: f64) -> Result<()> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(invalid(format!("s must be finite and at least 1, got {s}")));
    }
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(invalid(format!("p must be positive, got {p}")));
    }
    Ok(())
}

/// One of the three concrete models, for callers that pick the model at run
/// time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Minimal(MinimalPoints),
    Lattice(LatticeIsolated),
    Rgg(RggIsolated),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyModel::Minimal($m) => $e,
            AnyModel::Lattice($m) => $e,
            AnyModel::Rgg($m) => $e,
        }
    };
}

impl ScoreModel for AnyModel {
    fn kind(&self) -> ModelKind {
        delegate!(self, m => m.kind())
    }
    fn space(&self) -> SpaceTag {
        delegate!(self, m => m.space())
    }
    fn dim(&self) -> usize {
        delegate!(self, m => m.dim())
    }
    fn s(&self) -> f64 {
        delegate!(self, m => m.s())
    }
    fn p(&self) -> f64 {
        delegate!(self, m => m.p())
    }
    fn score_at(&self, x: &Point, config: &PointConfiguration) -> f64 {
        delegate!(self, m => m.score_at(x, config))
    }
    fn region_at(&self, x: &Point, config: &PointConfiguration) -> RegionDescriptor {
        delegate!(self, m => m.region_at(x, config))
    }
    fn rate(&self, x: &Point, y: &Point) -> f64 {
        delegate!(self, m => m.rate(x, y))
    }
    fn moment_bound(&self, x: &Point) -> f64 {
        delegate!(self, m => m.moment_bound(x))
    }
    fn default_intensity(&self) -> IntensitySpec {
        delegate!(self, m => m.default_intensity())
    }
    fn score_terms(&self, config: &PointConfiguration) -> Vec<f64> {
        delegate!(self, m => m.score_terms(config))
    }
    fn statistic(&self, config: &PointConfiguration) -> StatisticValue {
        delegate!(self, m => m.statistic(config))
    }
    fn difference_core(&self, config: &PointConfiguration, added: &[Point]) -> PointConfiguration {
        delegate!(self, m => m.difference_core(config, added))
    }
}

impl From<MinimalPoints> for AnyModel {
    fn from(m: MinimalPoints) -> Self {
        AnyModel::Minimal(m)
    }
}

impl From<LatticeIsolated> for AnyModel {
    fn from(m: LatticeIsolated) -> Self {
        AnyModel::Lattice(m)
    }
}

impl From<RggIsolated> for AnyModel {
    fn from(m: RggIsolated) -> Self {
        AnyModel::Rgg(m)
    }
}

/// Mass of `config` after removing one copy of `x`, restricted to `pred`.
pub(crate) fn others_satisfy<F>(x: &Point, config: &PointConfiguration, mut pred: F) -> bool
where
    F: FnMut(&Point) -> bool,
{
    config.entries().iter().any(|(q, m)| {
        let mass = if q == x { m - 1 } else { *m };
        mass > 0 && pred(q)
    })
}
