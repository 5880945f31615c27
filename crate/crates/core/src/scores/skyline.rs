//! Minimal-point (skyline) counting.
//!
//! Dominance is non-strict: `x ≻ y` iff `x - y ∈ R_+^d`. Coincident copies of a
//! location dominate each other, so a location carrying two or more points
//! contributes no minimal point.

use std::collections::BTreeMap;

use crate::pointproc::Point;

/// O(n²) reference count.
pub fn count_minimal_brute(points: &[Point]) -> usize {
    (0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, q)| j != i && points[i].dominates(q))
        })
        .count()
}

/// Number of minimal points of a simple list (multiplicities expanded).
///
/// `d = 1`: linear scan. `d = 2`: lexicographic sort and a running minimum.
/// `d = 3`: sweep over the first coordinate with a staircase of the other two.
/// `d ≥ 4`: sweep over the first coordinate keeping the skyline of the
/// projections onto the remaining coordinates.
pub fn count_minimal_fast(points: &[Point], d: usize) -> usize {
    if points.is_empty() {
        return 0;
    }
    let mut refs: Vec<&Point> = points.iter().collect();
    refs.sort_unstable();
    let groups = group_sorted(&refs);
    match d {
        1 => usize::from(groups[0].1 == 1),
        2 => sweep_2d(&groups),
        3 => sweep_3d(&groups),
        _ => sweep_general(&groups),
    }
}

/// Distinct locations (sorted) with their counts.
fn group_sorted<'a>(sorted: &[&'a Point]) -> Vec<(&'a Point, usize)> {
    let mut groups: Vec<(&Point, usize)> = Vec::with_capacity(sorted.len());
    for p in sorted {
        match groups.last_mut() {
            Some((q, k)) if *q == *p => *k += 1,
            _ => groups.push((p, 1)),
        }
    }
    groups
}

fn sweep_2d(groups: &[(&Point, usize)]) -> usize {
    // Every distinct dominator of p precedes p in lexicographic order.
    let mut best = f64::INFINITY;
    let mut count = 0;
    for (p, k) in groups {
        let y = p.coords()[1];
        if *k == 1 && best > y {
            count += 1;
        }
        best = best.min(y);
    }
    count
}

fn sweep_3d(groups: &[(&Point, usize)]) -> usize {
    // Staircase of the (x2, x3) projections seen so far: keys increasing in
    // x2, values strictly decreasing in x3.
    let mut stair: BTreeMap<OrdF64, f64> = BTreeMap::new();
    let mut count = 0;
    for (p, k) in groups {
        let (y, z) = (p.coords()[1], p.coords()[2]);
        let dominated = stair
            .range(..=OrdF64(y))
            .next_back()
            .is_some_and(|(_, &best_z)| best_z <= z);
        if dominated {
            continue;
        }
        if *k == 1 {
            count += 1;
        }
        // remove entries now dominated by (y, z)
        let stale: Vec<OrdF64> = stair
            .range(OrdF64(y)..)
            .take_while(|(_, &vz)| vz >= z)
            .map(|(key, _)| *key)
            .collect();
        for key in stale {
            stair.remove(&key);
        }
        stair.insert(OrdF64(y), z);
    }
    count
}

fn sweep_general(groups: &[(&Point, usize)]) -> usize {
    let mut sky: Vec<&[f64]> = Vec::new();
    let mut count = 0;
    for (p, k) in groups {
        let tail = &p.coords()[1..];
        let dominated = sky
            .iter()
            .any(|q| q.iter().zip(tail).all(|(a, b)| a <= b));
        if dominated {
            continue;
        }
        if *k == 1 {
            count += 1;
        }
        sky.retain(|q| !q.iter().zip(tail).all(|(a, b)| b <= a));
        sky.push(tail);
    }
    count
}

/// Entries whose location dominates no other distinct location. The minimal
/// points of `P + A` equal those of `core + A` for every finite `A`.
pub fn poset_minimal_entries(entries: &[(Point, u32)]) -> Vec<(Point, u32)> {
    // entries are sorted lexicographically and distinct
    let mut kept: Vec<(Point, u32)> = Vec::new();
    for (p, m) in entries {
        if kept.iter().any(|(q, _)| p.dominates(q)) {
            continue;
        }
        kept.push((p.clone(), *m));
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::StreamRng;

    fn random_points(rng: &mut StreamRng, n: usize, d: usize, grid: Option<u64>) -> Vec<Point> {
        (0..n)
            .map(|_| {
                Point::new((0..d).map(|_| match grid {
                    Some(g) => rng.below(g) as f64 / g as f64,
                    None => rng.uniform(),
                }))
            })
            .collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(count_minimal_fast(&[], 2), 0);
        assert_eq!(count_minimal_fast(&[Point::from([0.4, 0.4])], 2), 1);
        let copies = vec![Point::from([0.3, 0.3, 0.3]); 5];
        assert_eq!(count_minimal_fast(&copies, 3), 0);
        assert_eq!(count_minimal_fast(&copies[..2], 3), 0);
        let anti = [Point::from([0.1, 0.9]), Point::from([0.5, 0.5]), Point::from([0.9, 0.1])];
        assert_eq!(count_minimal_fast(&anti, 2), 3);
        let chain = [Point::from([0.1, 0.1]), Point::from([0.2, 0.2]), Point::from([0.3, 0.3])];
        assert_eq!(count_minimal_fast(&chain, 2), 1);
    }

    #[test]
    fn ties_on_one_axis_dominate() {
        let pts = [Point::from([0.5, 0.2]), Point::from([0.5, 0.7])];
        assert_eq!(count_minimal_fast(&pts, 2), 1);
        assert_eq!(count_minimal_brute(&pts), 1);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = StreamRng::from_seed(5);
        for trial in 0..300 {
            let d = 2 + trial % 4;
            let n = rng.below(200) as usize;
            let grid = if trial % 3 == 0 { Some(4) } else { None };
            let pts = random_points(&mut rng, n, d, grid);
            assert_eq!(count_minimal_fast(&pts, d), count_minimal_brute(&pts), "trial {trial} d={d}");
        }
    }

    #[test]
    fn poset_core_preserves_counts() {
        let mut rng = StreamRng::from_seed(8);
        for _ in 0..200 {
            let pts = random_points(&mut rng, 30, 2, Some(5));
            let cfg = crate::pointproc::PointConfiguration::from_points(
                crate::pointproc::SpaceTag::Cube,
                2,
                pts.clone(),
            )
            .unwrap();
            let core = poset_minimal_entries(cfg.entries());
            let extra = random_points(&mut rng, 2, 2, Some(5));
            let mut full: Vec<Point> = pts.clone();
            full.extend(extra.iter().cloned());
            let mut reduced: Vec<Point> = core
                .iter()
                .flat_map(|(p, m)| std::iter::repeat_n(p.clone(), *m as usize))
                .collect();
            reduced.extend(extra.iter().cloned());
            assert_eq!(count_minimal_brute(&full), count_minimal_brute(&reduced));
        }
    }
}
