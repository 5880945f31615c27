//! Finite counting measures on the three carrier spaces and their Poisson
//! samplers.
//!
//! A [`PointConfiguration`] is a multiset of points kept in canonical form:
//! entries sorted lexicographically, coincident points merged into a single
//! entry carrying the multiplicity.

mod rng;
mod sample;

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::scores::RegionDescriptor;

pub use rng::{poisson_count, splitmix64, StreamRng};
pub use sample::{sample_poisson, BoxWindow, IntensitySpec, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceTag {
    /// `[0,1]^d` with Lebesgue intensity.
    Cube,
    /// `Z^d` with counting-measure intensity.
    Lattice,
    /// A box in `R^d`, sampled with a padding margin.
    EuclideanWindow,
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SpaceTag::Cube => "cube",
            SpaceTag::Lattice => "lattice",
            SpaceTag::EuclideanWindow => "euclidean_window",
        };
        f.write_str(name)
    }
}

/// A point of `R^d` (or `Z^d`, stored as integral `f64` values).
#[derive(Clone, Default)]
pub struct Point(SmallVec<[f64; 4]>);

impl Point {
    pub fn new<I: IntoIterator<Item = f64>>(coords: I) -> Self {
        // -0.0 and 0.0 must compare equal under the total order used for
        // canonical sorting.
        Point(coords.into_iter().map(|c| if c == 0.0 { 0.0 } else { c }).collect())
    }

    pub fn lattice(coords: &[i64]) -> Self {
        Point::new(coords.iter().map(|&c| c as f64))
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Product of the coordinates, i.e. the volume of `[0, x]`.
    pub fn volume(&self) -> f64 {
        self.0.iter().product()
    }

    /// Coordinatewise non-strict dominance `self - other ∈ R_+^d`.
    #[inline]
    pub fn dominates(&self, other: &Point) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a >= b)
    }

    pub fn join(&self, other: &Point) -> Point {
        Point::new(self.0.iter().zip(other.0.iter()).map(|(a, b)| a.max(*b)))
    }

    pub fn meet(&self, other: &Point) -> Point {
        Point::new(self.0.iter().zip(other.0.iter()).map(|(a, b)| a.min(*b)))
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn l1_dist(&self, other: &Point) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    fn is_integral(&self) -> bool {
        self.0.iter().all(|c| c.fract() == 0.0)
    }
}

impl serde::Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::new(v)
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Point::new(v)
    }
}

/// A finite counting measure: distinct locations with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointConfiguration {
    space: SpaceTag,
    dim: usize,
    entries: Vec<(Point, u32)>,
}

impl PointConfiguration {
    pub fn empty(space: SpaceTag, dim: usize) -> Self {
        Self { space, dim, entries: Vec::new() }
    }

    /// Builds a configuration from raw points; coincident points are merged.
    pub fn from_points<I>(space: SpaceTag, dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Point>,
    {
        Self::from_entries(space, dim, points.into_iter().map(|p| (p, 1)))
    }

    pub fn from_entries<I>(space: SpaceTag, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, u32)>,
    {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        let mut raw: Vec<(Point, u32)> = Vec::new();
        for (p, m) in entries {
            validate_point(space, dim, &p)?;
            if m == 0 {
                return Err(invalid("multiplicity must be at least 1"));
            }
            raw.push((p, m));
        }
        raw.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Point, u32)> = Vec::with_capacity(raw.len());
        for (p, m) in raw {
            match merged.last_mut() {
                Some((q, k)) if *q == p => *k += m,
                _ => merged.push((p, m)),
            }
        }
        Ok(Self { space, dim, entries: merged })
    }

    /// Wraps entries that are already sorted, distinct and validated.
    pub(crate) fn from_canonical(space: SpaceTag, dim: usize, entries: Vec<(Point, u32)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { space, dim, entries }
    }

    #[inline]
    pub fn space(&self) -> SpaceTag {
        self.space
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[(Point, u32)] {
        &self.entries
    }

    /// Number of distinct locations.
    pub fn distinct_len(&self) -> usize {
        self.entries.len()
    }

    /// Total mass `μ(X)`.
    pub fn total_mass(&self) -> u64 {
        self.entries.iter().map(|(_, m)| u64::from(*m)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn position(&self, p: &Point) -> std::result::Result<usize, usize> {
        self.entries.binary_search_by(|(q, _)| q.cmp(p))
    }

    pub fn multiplicity(&self, p: &Point) -> u32 {
        self.position(p).map(|i| self.entries[i].1).unwrap_or(0)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.position(p).is_ok()
    }

    /// Every point repeated according to its multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = &Point> + '_ {
        self.entries
            .iter()
            .flat_map(|(p, m)| std::iter::repeat_n(p, *m as usize))
    }

    /// `config + multiplicity·δ_point`.
    pub fn add(&self, point: &Point, multiplicity: u32) -> Result<Self> {
        let mut out = self.clone();
        out.insert(point.clone(), multiplicity)?;
        Ok(out)
    }

    pub fn insert(&mut self, point: Point, multiplicity: u32) -> Result<()> {
        if point.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.dim() });
        }
        if multiplicity == 0 {
            return Err(invalid("multiplicity must be at least 1"));
        }
        validate_point(self.space, self.dim, &point)?;
        match self.position(&point) {
            Ok(i) => self.entries[i].1 += multiplicity,
            Err(i) => self.entries.insert(i, (point, multiplicity)),
        }
        Ok(())
    }

    /// Removes one copy of `point`; returns false if it was absent.
    pub fn remove_one(&mut self, point: &Point) -> bool {
        match self.position(point) {
            Ok(i) => {
                if self.entries[i].1 > 1 {
                    self.entries[i].1 -= 1;
                } else {
                    self.entries.remove(i);
                }
                true
            }
            Err(_) => false,
        }
    }

    /// `μ_A`: the entries lying in `region`, multiplicities preserved.
    pub fn restrict(&self, region: &RegionDescriptor) -> Self {
        let entries = match region {
            RegionDescriptor::Empty => Vec::new(),
            RegionDescriptor::WholeSpace => self.entries.clone(),
            _ => self
                .entries
                .iter()
                .filter(|(p, _)| region.contains(p))
                .cloned()
                .collect(),
        };
        Self { space: self.space, dim: self.dim, entries }
    }

    /// `self ≤ other` in the order of counting measures.
    pub fn leq(&self, other: &Self) -> bool {
        if self.space != other.space || self.dim != other.dim {
            return false;
        }
        let mut j = 0;
        for (p, m) in &self.entries {
            while j < other.entries.len() && other.entries[j].0 < *p {
                j += 1;
            }
            if j == other.entries.len() || other.entries[j].0 != *p || other.entries[j].1 < *m {
                return false;
            }
        }
        true
    }

    /// Sum of two counting measures.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Self::from_entries(
            self.space,
            self.dim,
            self.entries.iter().chain(other.entries.iter()).cloned(),
        )
    }

    /// `other - self`, defined when `self ≤ other`.
    pub fn difference_from(&self, other: &Self) -> Option<Self> {
        if !self.leq(other) {
            return None;
        }
        let entries = other
            .entries
            .iter()
            .filter_map(|(p, m)| {
                let k = m - self.multiplicity(p);
                (k > 0).then(|| (p.clone(), k))
            })
            .collect();
        Some(Self { space: self.space, dim: self.dim, entries })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.space != other.space {
            return Err(invalid(format!("space mismatch: {} vs {}", self.space, other.space)));
        }
        Ok(())
    }

    /// Canonical CSV: header `coord_1,…,coord_d,multiplicity`, one row per entry.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("coord_{i}")).collect();
        header.push("multiplicity".into());
        w.write_record(&header)?;
        for (p, m) in &self.entries {
            let mut row: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
            row.push(m.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(space: SpaceTag, reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let dim = headers.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| {
            Error::Parse("expected at least one coordinate column and a multiplicity column".into())
        })?;
        for (i, h) in headers.iter().take(dim).enumerate() {
            if h != format!("coord_{}", i + 1) {
                return Err(Error::Parse(format!("unexpected column header {h:?}")));
            }
        }
        if &headers[dim] != "multiplicity" {
            return Err(Error::Parse("last column must be `multiplicity`".into()));
        }
        let mut entries = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let coords = rec
                .iter()
                .take(dim)
                .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let m = rec[dim].trim().parse::<u32>().map_err(|e| Error::Parse(e.to_string()))?;
            entries.push((Point::new(coords), m));
        }
        Self::from_entries(space, dim, entries)
    }
}

fn validate_point(space: SpaceTag, dim: usize, p: &Point) -> Result<()> {
    if p.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
    }
    if p.coords().iter().any(|c| !c.is_finite()) {
        return Err(invalid("coordinates must be finite"));
    }
    match space {
        SpaceTag::Cube if p.coords().iter().any(|c| !(0.0..=1.0).contains(c)) => {
            Err(invalid(format!("cube point {p:?} outside [0,1]^d")))
        }
        SpaceTag::Lattice if !p.is_integral() => Err(invalid(format!("lattice point {p:?} is not integral"))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(points: &[(&[f64], u32)]) -> PointConfiguration {
        PointConfiguration::from_entries(
            SpaceTag::Cube,
            2,
            points.iter().map(|(c, m)| (Point::new(c.iter().copied()), *m)),
        )
        .unwrap()
    }

    #[test]
    fn add_merges_multiplicity() {
        let x = Point::from([0.2, 0.3]);
        let y = Point::from([0.6, 0.1]);
        let empty = PointConfiguration::empty(SpaceTag::Cube, 2);
        let one = empty.add(&x, 1).unwrap();
        assert_eq!(one.entries(), &[(x.clone(), 1)]);
        let two = one.add(&x, 1).unwrap();
        assert_eq!(two.entries(), &[(x.clone(), 2)]);
        let mixed = one.add(&y, 2).unwrap();
        assert_eq!(mixed.multiplicity(&x), 1);
        assert_eq!(mixed.multiplicity(&y), 2);
        assert_eq!(mixed.total_mass(), 3);
    }

    #[test]
    fn add_rejects_dimension_mismatch() {
        let empty = PointConfiguration::empty(SpaceTag::Cube, 2);
        let err = empty.add(&Point::from([0.1, 0.2, 0.3]), 1).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
        assert!(empty.add(&Point::from([0.1, 0.2]), 0).is_err());
    }

    #[test]
    fn restrict_examples() {
        let m = cube(&[(&[0.2, 0.3], 1), (&[0.7, 0.8], 1)]);
        assert_eq!(m.restrict(&RegionDescriptor::WholeSpace), m);
        assert!(m.restrict(&RegionDescriptor::Empty).is_empty());
        let boxed = m.restrict(&RegionDescriptor::BoxToOrigin(Point::from([0.5, 0.5])));
        assert_eq!(boxed, cube(&[(&[0.2, 0.3], 1)]));
    }

    #[test]
    fn leq_examples() {
        let x: &[f64] = &[0.1, 0.1];
        let y: &[f64] = &[0.4, 0.9];
        let empty = PointConfiguration::empty(SpaceTag::Cube, 2);
        assert!(empty.leq(&cube(&[(x, 1)])));
        assert!(!cube(&[(x, 2)]).leq(&cube(&[(x, 1)])));
        assert!(cube(&[(x, 1)]).leq(&cube(&[(x, 1), (y, 1)])));
    }

    #[test]
    fn lattice_rejects_fractional_points() {
        let r = PointConfiguration::from_points(SpaceTag::Lattice, 2, [Point::from([0.5, 1.0])]);
        assert!(r.is_err());
        let r = PointConfiguration::from_points(SpaceTag::Cube, 2, [Point::from([1.5, 0.0])]);
        assert!(r.is_err());
    }

    #[test]
    fn csv_layout() {
        let m = PointConfiguration::from_entries(
            SpaceTag::Lattice,
            2,
            [(Point::lattice(&[-1, 2]), 2), (Point::lattice(&[0, 0]), 1)],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "coord_1,coord_2,multiplicity\n-1,2,2\n0,0,1\n");
        let back = PointConfiguration::read_csv(SpaceTag::Lattice, buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    fn small_config() -> impl Strategy<Value = PointConfiguration> {
        // coordinates on a coarse grid so coincidences and ties are common
        proptest::collection::vec(((0u8..5, 0u8..5), 1u32..3), 0..8).prop_map(|v| {
            PointConfiguration::from_entries(
                SpaceTag::Cube,
                2,
                v.into_iter()
                    .map(|((a, b), m)| (Point::from([a as f64 / 4.0, b as f64 / 4.0]), m)),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn leq_is_partial_order(a in small_config(), b in small_config(), c in small_config()) {
            prop_assert!(a.leq(&a));
            if a.leq(&b) && b.leq(&a) {
                prop_assert_eq!(&a, &b);
            }
            if a.leq(&b) && b.leq(&c) {
                prop_assert!(a.leq(&c));
            }
            let ab = a.plus(&b).unwrap();
            prop_assert!(a.leq(&ab));
            prop_assert_eq!(a.difference_from(&ab).unwrap(), b);
        }

        #[test]
        fn restrict_idempotent(m in small_config(), (cx, cy) in (0u8..5, 0u8..5)) {
            let region = RegionDescriptor::BoxToOrigin(Point::from([cx as f64 / 4.0, cy as f64 / 4.0]));
            let once = m.restrict(&region);
            prop_assert_eq!(once.restrict(&region), once.clone());
            prop_assert!(once.leq(&m));
        }

        #[test]
        fn csv_roundtrip(m in small_config()) {
            let mut buf = Vec::new();
            m.write_csv(&mut buf).unwrap();
            prop_assert_eq!(PointConfiguration::read_csv(SpaceTag::Cube, buf.as_slice()).unwrap(), m);
        }
    }
}
