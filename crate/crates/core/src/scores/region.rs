use crate::pointproc::Point;

/// Stabilization region `R_s(x, μ)` for the three models.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionDescriptor {
    Empty,
    /// `[0, x] = [0, x₁] × … × [0, x_d]`.
    BoxToOrigin(Point),
    /// Closed Euclidean ball.
    Ball { center: Point, radius: f64 },
    /// The `2d` nearest lattice neighbours `x + B` (the centre is excluded).
    NeighborSet(Point),
    WholeSpace,
}

impl RegionDescriptor {
    pub fn is_empty(&self) -> bool {
        matches!(self, RegionDescriptor::Empty)
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            RegionDescriptor::Empty => false,
            RegionDescriptor::WholeSpace => true,
            RegionDescriptor::BoxToOrigin(x) => x
                .coords()
                .iter()
                .zip(p.coords())
                .all(|(xi, pi)| 0.0 <= *pi && pi <= xi),
            RegionDescriptor::Ball { center, radius } => center.dist2(p) <= radius * radius,
            RegionDescriptor::NeighborSet(x) => {
                p.coords().iter().all(|c| c.fract() == 0.0) && x.l1_dist(p) == 1.0
            }
        }
    }

    /// Exact set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &RegionDescriptor) -> bool {
        use RegionDescriptor::*;
        match (self, other) {
            (Empty, _) | (_, WholeSpace) => true,
            (WholeSpace, _) => false,
            (_, Empty) => false,
            (BoxToOrigin(a), BoxToOrigin(b)) => a.coords().iter().zip(b.coords()).all(|(x, y)| x <= y),
            (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
                c1.dist2(c2).sqrt() + r1 <= *r2
            }
            (NeighborSet(a), NeighborSet(b)) => a == b,
            (NeighborSet(a), other) => lattice_neighbors(a).iter().all(|q| other.contains(q)),
            _ => false,
        }
    }
}

/// `x + B` with `B = {±e_i}`.
pub fn lattice_neighbors(x: &Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(2 * x.dim());
    for axis in 0..x.dim() {
        for delta in [-1.0, 1.0] {
            let mut c = x.coords().to_vec();
            c[axis] += delta;
            out.push(Point::new(c));
        }
    }
    out
}
