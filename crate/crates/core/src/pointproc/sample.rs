use serde::{Deserialize, Serialize};

use super::rng::{replicate_seed, StreamRng};
use super::{Point, PointConfiguration, SpaceTag};
use crate::error::{invalid, Error, Result};

/// Axis-aligned box `[lo, hi]`. For the lattice the bounds are inclusive
/// integer site ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxWindow {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxWindow {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    /// `[-half, half]^d`.
    pub fn centered(d: usize, half: f64) -> Self {
        Self { lo: vec![-half; d], hi: vec![half; d] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn expanded(&self, pad: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|v| v - pad).collect(),
            hi: self.hi.iter().map(|v| v + pad).collect(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (l, h))| *l <= *c && *c <= *h)
    }

    /// Integer sites of the box in lexicographic order.
    pub fn lattice_sites(&self) -> Vec<Point> {
        let lo: Vec<i64> = self.lo.iter().map(|v| v.ceil() as i64).collect();
        let hi: Vec<i64> = self.hi.iter().map(|v| v.floor() as i64).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            out.push(Point::lattice(&cur));
            // odometer increment, last axis fastest
            let mut axis = cur.len();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    for (k, c) in cur.iter_mut().enumerate().skip(axis + 1) {
                        *c = lo[k];
                    }
                    break;
                }
            }
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.lo.len() != d || self.hi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.lo.len() });
        }
        if self
            .lo
            .iter()
            .zip(&self.hi)
            .any(|(l, h)| !l.is_finite() || !h.is_finite() || l > h)
        {
            return Err(Error::EmptyWindow);
        }
        Ok(())
    }
}

/// Intensity `s·ℚ` on one of the carrier spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensitySpec {
    pub space: SpaceTag,
    pub s: f64,
    pub d: usize,
    /// Required for the lattice and Euclidean spaces, ignored for the cube.
    pub window: Option<BoxWindow>,
    /// Euclidean margin added on every side of the window.
    pub pad: f64,
}

impl IntensitySpec {
    pub fn cube(s: f64, d: usize) -> Self {
        Self { space: SpaceTag::Cube, s, d, window: None, pad: 0.0 }
    }

    pub fn lattice(s: f64, window: BoxWindow) -> Self {
        let d = window.dim();
        Self { space: SpaceTag::Lattice, s, d, window: Some(window), pad: 0.0 }
    }

    pub fn euclidean(s: f64, window: BoxWindow, pad: f64) -> Self {
        let d = window.dim();
        Self { space: SpaceTag::EuclideanWindow, s, d, window: Some(window), pad }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() || self.s < 0.0 {
            return Err(invalid(format!("intensity scale must be finite and non-negative, got {}", self.s)));
        }
        if self.d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(self.pad >= 0.0 && self.pad.is_finite()) {
            return Err(invalid("pad must be finite and non-negative"));
        }
        match self.space {
            SpaceTag::Cube => Ok(()),
            SpaceTag::Lattice => {
                let w = self.window.as_ref().ok_or(Error::EmptyWindow)?;
                w.validate(self.d)?;
                if w.lattice_sites().is_empty() {
                    return Err(Error::EmptyWindow);
                }
                Ok(())
            }
            SpaceTag::EuclideanWindow => {
                let w = self.window.as_ref().ok_or(Error::EmptyWindow)?;
                w.validate(self.d)?;
                if w.expanded(self.pad).volume() <= 0.0 {
                    return Err(Error::EmptyWindow);
                }
                Ok(())
            }
        }
    }

    /// Region actually sampled (window plus padding for the Euclidean space).
    pub fn sampling_window(&self) -> Option<BoxWindow> {
        match self.space {
            SpaceTag::Cube => Some(BoxWindow::new(vec![0.0; self.d], vec![1.0; self.d])),
            SpaceTag::Lattice => self.window.clone(),
            SpaceTag::EuclideanWindow => self.window.as_ref().map(|w| w.expanded(self.pad)),
        }
    }

    /// `s·ℚ(sampling window)`: the expected total mass.
    pub fn expected_mass(&self) -> f64 {
        match self.space {
            SpaceTag::Cube => self.s,
            SpaceTag::Lattice => {
                self.s * self.window.as_ref().map_or(0, |w| w.lattice_sites().len()) as f64
            }
            SpaceTag::EuclideanWindow => {
                self.s * self.window.as_ref().map_or(0.0, |w| w.expanded(self.pad).volume())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub replicate_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, replicate_index: u64) -> Self {
        Self { base_seed, replicate_index }
    }

    /// The 64-bit key of this replicate's stream.
    pub fn stream_seed(&self) -> u64 {
        replicate_seed(self.base_seed, self.replicate_index)
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::from_seed(self.stream_seed())
    }
}

/// Draws one realisation of the Poisson process with intensity `spec`.
pub fn sample_poisson(spec: &IntensitySpec, seed: SeedSpec) -> Result<PointConfiguration> {
    spec.validate()?;
    let mut rng = seed.rng();
    sample_with(spec, &mut rng)
}

pub(crate) fn sample_with(spec: &IntensitySpec, rng: &mut StreamRng) -> Result<PointConfiguration> {
    let d = spec.d;
    match spec.space {
        SpaceTag::Cube => {
            let n = rng.poisson(spec.s);
            let points = (0..n).map(|_| Point::new((0..d).map(|_| rng.uniform())));
            Ok(canonical_from_points(spec.space, d, points))
        }
        SpaceTag::Lattice => {
            let window = spec.window.as_ref().ok_or(Error::EmptyWindow)?;
            let mut entries = Vec::new();
            for site in window.lattice_sites() {
                let k = rng.poisson(spec.s);
                if k > 0 {
                    entries.push((site, k as u32));
                }
            }
            Ok(PointConfiguration::from_canonical(spec.space, d, entries))
        }
        SpaceTag::EuclideanWindow => {
            let w = spec.sampling_window().ok_or(Error::EmptyWindow)?;
            let n = rng.poisson(spec.s * w.volume());
            let points = (0..n).map(|_| {
                Point::new((0..d).map(|i| w.lo[i] + (w.hi[i] - w.lo[i]) * rng.uniform()))
            });
            Ok(canonical_from_points(spec.space, d, points))
        }
    }
}

fn canonical_from_points<I: Iterator<Item = Point>>(space: SpaceTag, d: usize, points: I) -> PointConfiguration {
    let mut raw: Vec<Point> = points.collect();
    raw.sort_unstable();
    let mut entries: Vec<(Point, u32)> = Vec::with_capacity(raw.len());
    for p in raw {
        match entries.last_mut() {
            Some((q, k)) if *q == p => *k += 1,
            _ => entries.push((p, 1)),
        }
    }
    PointConfiguration::from_canonical(space, d, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_is_empty() {
        let specs = [
            IntensitySpec::cube(0.0, 2),
            IntensitySpec::lattice(0.0, BoxWindow::centered(2, 3.0)),
            IntensitySpec::euclidean(0.0, BoxWindow::centered(2, 3.0), 1.0),
        ];
        for spec in &specs {
            let c = sample_poisson(spec, SeedSpec::new(1, 0)).unwrap();
            assert!(c.is_empty(), "{spec:?}");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(sample_poisson(&IntensitySpec::cube(f64::NAN, 2), SeedSpec::new(0, 0)).is_err());
        assert!(sample_poisson(&IntensitySpec::cube(-1.0, 2), SeedSpec::new(0, 0)).is_err());
        let empty = BoxWindow::new(vec![0.0, 1.0], vec![1.0, 0.0]);
        assert!(matches!(
            sample_poisson(&IntensitySpec::lattice(1.0, empty.clone()), SeedSpec::new(0, 0)),
            Err(Error::EmptyWindow)
        ));
        assert!(sample_poisson(&IntensitySpec::euclidean(1.0, empty, 0.0), SeedSpec::new(0, 0)).is_err());
        let degenerate = BoxWindow::new(vec![0.0, 0.0], vec![0.0, 1.0]);
        assert!(sample_poisson(&IntensitySpec::euclidean(1.0, degenerate, 0.0), SeedSpec::new(0, 0)).is_err());
        let mut no_window = IntensitySpec::lattice(1.0, BoxWindow::centered(2, 1.0));
        no_window.window = None;
        assert!(sample_poisson(&no_window, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn lattice_sites_lexicographic() {
        let w = BoxWindow::new(vec![-1.0, 0.0], vec![0.0, 1.0]);
        let sites = w.lattice_sites();
        let expect: Vec<Point> = [[-1, 0], [-1, 1], [0, 0], [0, 1]].iter().map(|c| Point::lattice(c)).collect();
        assert_eq!(sites, expect);
        assert_eq!(BoxWindow::centered(2, 5.0).lattice_sites().len(), 121);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = IntensitySpec::cube(50.0, 3);
        let a = sample_poisson(&spec, SeedSpec::new(9, 4)).unwrap();
        let b = sample_poisson(&spec, SeedSpec::new(9, 4)).unwrap();
        let c = sample_poisson(&spec, SeedSpec::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn euclidean_points_fill_padded_window() {
        let spec = IntensitySpec::euclidean(5.0, BoxWindow::centered(2, 1.0), 0.5);
        let w = spec.sampling_window().unwrap();
        let mut outside_core = 0;
        for i in 0..50 {
            let c = sample_poisson(&spec, SeedSpec::new(3, i)).unwrap();
            for (p, _) in c.entries() {
                assert!(w.contains(p));
                if !spec.window.as_ref().unwrap().contains(p) {
                    outside_core += 1;
                }
            }
        }
        assert!(outside_core > 0);
    }

    #[test]
    fn lattice_single_site_pmf_matches_poisson() {
        // chi-square style per-bin check against the Poisson(1) pmf
        let spec = IntensitySpec::lattice(1.0, BoxWindow::new(vec![0.0, 0.0], vec![0.0, 0.0]));
        let n = 100_000u64;
        let mut counts = [0u64; 8];
        for i in 0..n {
            let c = sample_poisson(&spec, SeedSpec::new(2024, i)).unwrap();
            let k = c.total_mass() as usize;
            counts[k.min(7)] += 1;
        }
        let mut pmf = [0.0f64; 8];
        let mut p = (-1.0f64).exp();
        for (k, slot) in pmf.iter_mut().enumerate().take(7) {
            *slot = p;
            p /= (k + 1) as f64;
        }
        pmf[7] = 1.0 - pmf[..7].iter().sum::<f64>();
        for k in 0..8 {
            let expected = pmf[k] * n as f64;
            let se = (n as f64 * pmf[k] * (1.0 - pmf[k])).sqrt();
            assert!(
                (counts[k] as f64 - expected).abs() <= 4.0 * se.max(1.0),
                "bin {k}: {} vs {expected}",
                counts[k]
            );
        }
    }

    #[test]
    fn cube_mean_count() {
        let spec = IntensitySpec::cube(100.0, 2);
        let n = 10_000u64;
        let total: u64 = (0..n)
            .map(|i| sample_poisson(&spec, SeedSpec::new(77, i)).unwrap().total_mass())
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 100.0).abs() <= 3.0 * (100.0f64).sqrt() / (n as f64).sqrt(), "{mean}");
    }
}
