//! First and second order difference operators of the statistic and Monte
//! Carlo estimates of the quantities in the general normal approximation
//! bound.
//!
//! Differences are computed by re-evaluating the statistic; every value is a
//! correctly rounded sum of the signed score terms, so the direct and the
//! decomposed routes agree bit for bit.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{g_s, McSpec, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::pointproc::{sample_poisson, BoxWindow, Point, PointConfiguration, SeedSpec, SpaceTag, StreamRng};
use crate::scalar::exact_sum;
use crate::scores::{AnyModel, ScoreModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceValue {
    pub value: f64,
    pub order: u8,
    pub at_points: Vec<Point>,
}

fn check_point(model: &AnyModel, y: &Point) -> Result<()> {
    if y.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: y.dim() });
    }
    if y.coords().iter().any(|c| !c.is_finite()) {
        return Err(invalid("point coordinates must be finite"));
    }
    Ok(())
}

fn negated(terms: Vec<f64>) -> impl Iterator<Item = f64> {
    terms.into_iter().map(|t| -t)
}

/// `D_y H(μ) = H(μ + δ_y) − H(μ)`.
pub fn diff1(model: &AnyModel, config: &PointConfiguration, y: &Point) -> Result<DifferenceValue> {
    model.check(config)?;
    check_point(model, y)?;
    let plus = config.add(y, 1)?;
    let value = exact_sum(model.score_terms(&plus).into_iter().chain(negated(model.score_terms(config))));
    Ok(DifferenceValue { value, order: 1, at_points: vec![y.clone()] })
}

/// `D²_{y1,y2} H(μ) = H(μ+δ₁+δ₂) − H(μ+δ₁) − H(μ+δ₂) + H(μ)`.
pub fn diff2(model: &AnyModel, config: &PointConfiguration, y1: &Point, y2: &Point) -> Result<DifferenceValue> {
    model.check(config)?;
    check_point(model, y1)?;
    check_point(model, y2)?;
    let p1 = config.add(y1, 1)?;
    let p2 = config.add(y2, 1)?;
    let p12 = p1.add(y2, 1)?;
    let value = exact_sum(
        model
            .score_terms(&p12)
            .into_iter()
            .chain(negated(model.score_terms(&p1)))
            .chain(negated(model.score_terms(&p2)))
            .chain(model.score_terms(config)),
    );
    Ok(DifferenceValue { value, order: 2, at_points: vec![y1.clone(), y2.clone()] })
}

/// Right side of the first-order decomposition
/// `ξ(y, μ+δ_y) + Σ_{x∈μ} D_y ξ(x, μ)`, term by term.
pub fn diff1_decomposed(model: &AnyModel, config: &PointConfiguration, y: &Point) -> Result<f64> {
    model.check(config)?;
    check_point(model, y)?;
    let plus = config.add(y, 1)?;
    let mut terms = vec![model.score_at(y, &plus)];
    for (x, m) in config.entries() {
        let d = [model.score_at(x, &plus), -model.score_at(x, config)];
        for _ in 0..*m {
            terms.extend_from_slice(&d);
        }
    }
    Ok(exact_sum(terms))
}

/// Right side of the second-order decomposition
/// `D_{y1}ξ(y2, μ+δ_{y2}) + D_{y2}ξ(y1, μ+δ_{y1}) + Σ_{x∈μ} D²_{y1,y2}ξ(x, μ)`.
pub fn diff2_decomposed(model: &AnyModel, config: &PointConfiguration, y1: &Point, y2: &Point) -> Result<f64> {
    model.check(config)?;
    check_point(model, y1)?;
    check_point(model, y2)?;
    let p1 = config.add(y1, 1)?;
    let p2 = config.add(y2, 1)?;
    let p12 = p1.add(y2, 1)?;
    let mut terms = vec![
        model.score_at(y2, &p12),
        -model.score_at(y2, &p2),
        model.score_at(y1, &p12),
        -model.score_at(y1, &p1),
    ];
    for (x, m) in config.entries() {
        let d = [
            model.score_at(x, &p12),
            -model.score_at(x, &p1),
            -model.score_at(x, &p2),
            model.score_at(x, config),
        ];
        for _ in 0..*m {
            terms.extend_from_slice(&d);
        }
    }
    Ok(exact_sum(terms))
}

/// Checks that adding points outside the stabilization region of `x` leaves
/// its score unchanged: `D_y ξ(x, ν) = 0` for `y ∉ R(x, ν)` and
/// `D²_{y1,y2} ξ(x, ν) = 0` unless both `y1, y2 ∈ R(x, ν)`, with
/// `ν = μ + δ_x` (or `μ` itself when it already holds `x`).
pub fn verify_dnull(
    model: &AnyModel,
    config: &PointConfiguration,
    x: &Point,
    y: &Point,
    y1: &Point,
    y2: &Point,
) -> Result<bool> {
    model.check(config)?;
    for p in [x, y, y1, y2] {
        check_point(model, p)?;
    }
    let nu = if config.contains(x) { config.clone() } else { config.add(x, 1)? };
    let region = model.region_at(x, &nu);
    let base = model.score_at(x, &nu);
    if !region.contains(y) && model.score_at(x, &nu.add(y, 1)?) != base {
        return Ok(false);
    }
    if !(region.contains(y1) && region.contains(y2)) {
        let n1 = nu.add(y1, 1)?;
        let n2 = nu.add(y2, 1)?;
        let n12 = n1.add(y2, 1)?;
        let d2 = exact_sum([model.score_at(x, &n12), -model.score_at(x, &n1), -model.score_at(x, &n2), base]);
        if d2 != 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `D_y H(μ) ≠ 0`, evaluated on the part of `μ` that can react to `y`.
fn diff1_nonzero(model: &AnyModel, config: &PointConfiguration, y: &Point) -> Result<bool> {
    let core = model.difference_core(config, std::slice::from_ref(y));
    Ok(diff1(model, &core, y)?.value != 0.0)
}

fn diff2_nonzero(model: &AnyModel, config: &PointConfiguration, y1: &Point, y2: &Point) -> Result<bool> {
    let core = model.difference_core(config, &[y1.clone(), y2.clone()]);
    Ok(diff2(model, &core, y1, y2)?.value != 0.0)
}

/// Whether `D²_{y1,y2}H` can be non-zero at all. Pairs beyond the reach of
/// every stabilization region never interact, so their probability is zero
/// without sampling.
fn may_interact(model: &AnyModel, y1: &Point, y2: &Point) -> bool {
    match model {
        AnyModel::Minimal(_) => true,
        AnyModel::Lattice(_) => y1.l1_dist(y2) <= 2.0,
        AnyModel::Rgg(m) => y1.dist2(y2) <= 4.0 * m.rho() * m.rho(),
    }
}

/// A stratified design over the part of space where the differences live:
/// each cell carries its intensity mass and draws one point per replicate.
#[derive(Debug, Clone)]
struct Design {
    cells: Vec<BoxWindow>,
    mass: Vec<f64>,
    lattice: bool,
}

impl Design {
    fn new(model: &AnyModel, per_axis: usize) -> Result<Self> {
        let intensity = model.default_intensity();
        let window = intensity.sampling_window().ok_or(Error::EmptyWindow)?;
        let s = model.s();
        if model.space() == SpaceTag::Lattice {
            let cells: Vec<BoxWindow> =
                window.lattice_sites().into_iter().map(|p| BoxWindow::new(p.coords().to_vec(), p.coords().to_vec())).collect();
            let mass = vec![s; cells.len()];
            return Ok(Self { cells, mass, lattice: true });
        }
        let d = model.dim();
        let n = per_axis.pow(d as u32);
        let mut cells = Vec::with_capacity(n);
        for k in 0..n {
            let mut idx = k;
            let mut lo = Vec::with_capacity(d);
            let mut hi = Vec::with_capacity(d);
            for i in 0..d {
                let j = idx % per_axis;
                idx /= per_axis;
                let h = (window.hi[i] - window.lo[i]) / per_axis as f64;
                lo.push(window.lo[i] + j as f64 * h);
                hi.push(window.lo[i] + (j + 1) as f64 * h);
            }
            cells.push(BoxWindow::new(lo, hi));
        }
        let mass = cells.iter().map(|c| s * c.volume()).collect();
        Ok(Self { cells, mass, lattice: false })
    }

    fn draw(&self, rng: &mut StreamRng) -> Vec<Point> {
        self.cells
            .iter()
            .map(|c| {
                if self.lattice {
                    Point::new(c.lo.iter().copied())
                } else {
                    Point::new(c.lo.iter().zip(&c.hi).map(|(a, b)| a + (b - a) * rng.uniform()))
                }
            })
            .collect()
    }

    fn centres(&self) -> Vec<Point> {
        self.cells.iter().map(|c| Point::new(c.lo.iter().zip(&c.hi).map(|(a, b)| 0.5 * (a + b)))).collect()
    }
}

/// `c_x = M(x)^{4+q}(1 + g_s(x)⁵)` with `q = p/2` and unit constant.
fn moment_c(model: &AnyModel, x: &Point, quad: &QuadratureSpec) -> Result<f64> {
    let q = model.p() / 2.0;
    let g = g_s(model, x, quad)?.value;
    Ok(model.moment_bound(x).powf(4.0 + q) * (1.0 + g.powi(5)))
}

/// Estimated ingredients of the general bound, with jackknife standard
/// errors over replicates. Probabilities are pooled per design cell (and per
/// pair of cells); `c_x` and the probabilities are treated as constant
/// inside a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceBoundTerms {
    /// `c_x` at the cell centres.
    pub c_x: Vec<(Point, f64)>,
    pub gamma_f: f64,
    pub bracket_w: f64,
    pub bracket_k: f64,
    pub q_exponent: f64,
    pub var_f: f64,
    pub se_gamma_f: f64,
    pub se_bracket_w: f64,
    pub se_bracket_k: f64,
    pub replicates: usize,
    pub cells: usize,
    pub dw_bound: f64,
    pub dk_bound: f64,
    pub vacuous_w: bool,
    pub vacuous_k: bool,
    /// `P{D_x H ≠ 0}` per cell.
    #[serde(skip)]
    pub p_first: Vec<f64>,
    /// `(i, j, P{D²H ≠ 0})` for the interacting cell pairs, `i ≤ j`.
    #[serde(skip)]
    pub p_second: Vec<(usize, usize, f64)>,
}

/// Per-replicate indicators: one flag per cell and per interacting pair.
struct Hits {
    first: Vec<bool>,
    second: Vec<bool>,
    ca: Vec<f64>,
    cb: Vec<f64>,
    cmax: Vec<f64>,
}

/// Estimates `Γ_F` and the two bracketed integrals for `F = H_s`.
/// Each replicate draws an independent Poisson configuration and one point
/// per cell; the number of replicates is `mc.n_samples` divided by the
/// number of cell pairs, and at least two.
pub fn estimate_main_terms(
    model: &AnyModel,
    var_f: f64,
    quad: &QuadratureSpec,
    mc: &McSpec,
) -> Result<DifferenceBoundTerms> {
    if !(model.s() >= 1.0) {
        return Err(invalid(format!("s must be at least 1, got {}", model.s())));
    }
    if mc.n_samples == 0 {
        return Err(invalid("n_samples must be positive"));
    }
    if mc.grid_per_axis == 0 {
        return Err(invalid("grid_per_axis must be positive"));
    }
    if !(var_f > 0.0) {
        return Err(invalid(format!("variance must be positive, got {var_f}")));
    }
    let design = Design::new(model, mc.grid_per_axis)?;
    let n = design.cells.len();
    let centres = design.centres();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            // cells interact if some pair of their points could
            let (a, b) = (&design.cells[i], &design.cells[j]);
            match model {
                AnyModel::Rgg(m) => box_gap(a, b) <= 2.0 * m.rho(),
                _ => may_interact(model, &centres[i], &centres[j]),
            }
        })
        .collect();
    let replicates = mc.n_samples.div_ceil(pairs.len().max(n)).max(2);
    let intensity = model.default_intensity();
    let q = model.p() / 2.0;
    let hits: Vec<Hits> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<Hits> {
            let config = sample_poisson(&intensity, SeedSpec::new(mc.base_seed, r))?;
            let mut rng = SeedSpec::new(mc.base_seed ^ 0xD1FF_E4E4_CE11_5EED, r).rng();
            let pts = design.draw(&mut rng);
            let mut first = Vec::with_capacity(n);
            let (mut ca, mut cb, mut cmax) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for x in &pts {
                first.push(diff1_nonzero(model, &config, x)?);
                let c = moment_c(model, x, quad)?;
                let (a, b) = (c.powf(2.0 / (4.0 + q)), c.powf(4.0 / (4.0 + q)));
                ca.push(a);
                cb.push(b);
                cmax.push(a.max(b));
            }
            let mut second = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                let hit = may_interact(model, &pts[i], &pts[j]) && diff2_nonzero(model, &config, &pts[i], &pts[j])?;
                second.push(hit);
            }
            Ok(Hits { first, second, ca, cb, cmax })
        })
        .collect::<Result<Vec<_>>>()?;

    let assemble = |keep: &dyn Fn(usize) -> bool| -> [f64; 3] {
        let used: Vec<&Hits> = hits.iter().enumerate().filter(|(k, _)| keep(*k)).map(|(_, h)| h).collect();
        let m = used.len() as f64;
        let avg = |f: &dyn Fn(&Hits) -> f64| used.iter().map(|h| f(h)).sum::<f64>() / m;
        let e1 = q / (8.0 + 2.0 * q);
        let e2 = q / (16.0 + 4.0 * q);
        let gamma = exact_sum((0..n).map(|i| {
            let p = avg(&|h| h.first[i] as u8 as f64);
            design.mass[i] * avg(&|h| h.cmax[i]) * p.powf(e1)
        }));
        let ca: Vec<f64> = (0..n).map(|i| avg(&|h| h.ca[i])).collect();
        let cb: Vec<f64> = (0..n).map(|i| avg(&|h| h.cb[i])).collect();
        let mut inner = vec![0.0; n];
        let mut k_terms = Vec::with_capacity(2 * pairs.len());
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let p = avg(&|h| h.second[k] as u8 as f64);
            if p == 0.0 {
                continue;
            }
            // the probability is symmetric in the pair; both orders contribute
            inner[j] += design.mass[i] * ca[i] * p.powf(e2);
            k_terms.push(design.mass[i] * design.mass[j] * cb[i] * p.powf(e1));
            if i != j {
                inner[i] += design.mass[j] * ca[j] * p.powf(e2);
                k_terms.push(design.mass[i] * design.mass[j] * cb[j] * p.powf(e1));
            }
        }
        let bw = exact_sum((0..n).map(|j| design.mass[j] * inner[j] * inner[j])).sqrt();
        let bk = exact_sum(k_terms).sqrt();
        [gamma, bw, bk]
    };
    let full = assemble(&|_| true);
    let mut se = [0.0; 3];
    if replicates >= 2 {
        let loo: Vec<[f64; 3]> = (0..replicates).into_par_iter().map(|k| assemble(&|j| j != k)).collect();
        let rf = replicates as f64;
        for t in 0..3 {
            let mean = loo.iter().map(|v| v[t]).sum::<f64>() / rf;
            se[t] = ((rf - 1.0) / rf * loo.iter().map(|v| (v[t] - mean).powi(2)).sum::<f64>()).sqrt();
        }
    }
    let [gamma, bw, bk] = full;
    let v = var_f;
    let dw = 12.0 * bw / v + 2.0 * gamma / v.powf(1.5);
    let dk = 12.0 * bw / v
        + gamma.sqrt() / v
        + 2.0 * gamma / v.powf(1.5)
        + (gamma.powf(1.25) + 2.0 * gamma.powf(1.5)) / (v * v)
        + 12.0 * bk / v;
    let rf = replicates as f64;
    let p_first = (0..n).map(|i| hits.iter().filter(|h| h.first[i]).count() as f64 / rf).collect();
    let p_second = pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| (i, j, hits.iter().filter(|h| h.second[k]).count() as f64 / rf))
        .collect();
    let c_x = centres.iter().map(|x| Ok((x.clone(), moment_c(model, x, quad)?))).collect::<Result<Vec<_>>>()?;
    Ok(DifferenceBoundTerms {
        c_x,
        gamma_f: gamma,
        bracket_w: bw,
        bracket_k: bk,
        q_exponent: q,
        var_f,
        se_gamma_f: se[0],
        se_bracket_w: se[1],
        se_bracket_k: se[2],
        replicates,
        cells: n,
        dw_bound: dw,
        dk_bound: dk,
        vacuous_w: dw > 1.0,
        vacuous_k: dk > 1.0,
        p_first,
        p_second,
    })
}

/// Euclidean distance between two boxes.
fn box_gap(a: &BoxWindow, b: &BoxWindow) -> f64 {
    a.lo.iter()
        .zip(&a.hi)
        .zip(b.lo.iter().zip(&b.hi))
        .map(|((alo, ahi), (blo, bhi))| (blo - ahi).max(alo - bhi).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::{LatticeIsolated, LatticeWeight, MinimalPoints};

    fn minimal() -> AnyModel {
        MinimalPoints::new(10.0, 2, 1.0).unwrap().into()
    }

    fn cfg(points: &[[f64; 2]]) -> PointConfiguration {
        PointConfiguration::from_points(SpaceTag::Cube, 2, points.iter().map(|p| Point::from(*p))).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let m = minimal();
        assert_eq!(diff1(&m, &cfg(&[]), &Point::from([0.4, 0.4])).unwrap().value, 1.0);
        let one = cfg(&[[0.5, 0.5]]);
        assert_eq!(diff1(&m, &one, &Point::from([0.2, 0.2])).unwrap().value, 0.0);
        assert_eq!(diff1(&m, &one, &Point::from([0.2, 0.9])).unwrap().value, 1.0);
    }

    #[test]
    fn second_order_examples() {
        let m = minimal();
        let e = cfg(&[]);
        let d = diff2(&m, &e, &Point::from([0.3, 0.3]), &Point::from([0.6, 0.6])).unwrap();
        assert_eq!((d.value, d.order), (-1.0, 2));
        assert_eq!(diff2(&m, &e, &Point::from([0.3, 0.7]), &Point::from([0.7, 0.3])).unwrap().value, 0.0);
    }

    #[test]
    fn dnull_examples() {
        let m = minimal();
        let c = cfg(&[[0.2, 0.7]]);
        let x = Point::from([0.5, 0.5]);
        let far = Point::from([0.9, 0.9]);
        assert!(verify_dnull(&m, &c, &x, &far, &far, &Point::from([0.1, 0.1])).unwrap());
        let l: AnyModel = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight::indicator(4)).unwrap().into();
        let lc = PointConfiguration::from_points(SpaceTag::Lattice, 2, [Point::lattice(&[1, 1])]).unwrap();
        let o = Point::lattice(&[0, 0]);
        let y = Point::lattice(&[3, 3]);
        assert!(verify_dnull(&l, &lc, &o, &y, &y, &Point::lattice(&[0, 1])).unwrap());
    }

    #[test]
    fn zero_weight_gives_zero_terms() {
        let l: AnyModel = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight { half_width: 1, value: 0.0 }).unwrap().into();
        let t = estimate_main_terms(&l, 1.0, &QuadratureSpec::default(), &McSpec::new(1000, 1)).unwrap();
        assert_eq!((t.gamma_f, t.bracket_w, t.bracket_k), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_out_of_scope() {
        let m = minimal();
        let q = QuadratureSpec::default();
        assert!(estimate_main_terms(&m, 1.0, &q, &McSpec::new(0, 1)).is_err());
        assert!(estimate_main_terms(&m, 0.0, &q, &McSpec::new(1000, 1)).is_err());
    }

    #[test]
    fn minimal_terms_finite_and_positive() {
        let m: AnyModel = MinimalPoints::new(1000.0, 2, 1.0).unwrap().into();
        let mut mc = McSpec::new(20_000, 3);
        mc.grid_per_axis = 8;
        let t = estimate_main_terms(&m, 5.0, &QuadratureSpec::default(), &mc).unwrap();
        for v in [t.gamma_f, t.bracket_w, t.bracket_k, t.se_gamma_f] {
            assert!(v.is_finite() && v > 0.0, "{t:?}");
        }
        assert!(t.vacuous_k);
    }

    /// Exact probabilities by enumerating the occupancy of every site the
    /// difference depends on; multiplicities beyond one do not change whether
    /// a difference vanishes for a non-negative weight.
    fn exact_prob(model: &AnyModel, added: &[Point], s: f64) -> f64 {
        let nbrs = |p: &Point| crate::scores::lattice_neighbors(p);
        let mut sites: Vec<Point> = Vec::new();
        let mut push = |p: Point| {
            if !sites.contains(&p) {
                sites.push(p);
            }
        };
        match added {
            // y + B and the neighbourhoods of those sites
            [y] => {
                for z in nbrs(y) {
                    for w in nbrs(&z) {
                        push(w);
                    }
                    push(z);
                }
            }
            // both neighbourhoods, the common centres and their neighbourhoods
            [y1, y2] => {
                for z in nbrs(y1).into_iter().chain(nbrs(y2)) {
                    push(z);
                }
                for z in nbrs(y1).into_iter().filter(|z| nbrs(z).contains(y2)) {
                    for w in nbrs(&z) {
                        push(w);
                    }
                    push(z);
                }
            }
            _ => unreachable!(),
        }
        let occ = 1.0 - (-s).exp();
        let mut total = 0.0;
        for mask in 0u32..(1 << sites.len()) {
            let pts: Vec<Point> = sites.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, p)| p.clone()).collect();
            let k = pts.len() as i32;
            let config = PointConfiguration::from_points(SpaceTag::Lattice, 2, pts).unwrap();
            let d = match added {
                [y] => diff1(model, &config, y).unwrap().value,
                [y1, y2] => diff2(model, &config, y1, y2).unwrap().value,
                _ => unreachable!(),
            };
            if d != 0.0 {
                total += occ.powi(k) * (1.0 - occ).powi(sites.len() as i32 - k);
            }
        }
        total
    }

    #[test]
    fn lattice_probabilities_match_enumeration() {
        let lm = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight::indicator(1)).unwrap();
        let model: AnyModel = lm.into();
        let mc = McSpec::new(200_000, 8);
        let t = estimate_main_terms(&model, 1.0, &QuadratureSpec::default(), &mc).unwrap();
        let design = Design::new(&model, 1).unwrap();
        let centres = design.centres();
        let r = t.replicates as f64;
        let within = |p_hat: f64, p: f64| (p_hat - p).abs() <= 4.0 * (p * (1.0 - p) / r).sqrt() + 1e-12;
        for (i, x) in centres.iter().enumerate() {
            let p = exact_prob(&model, std::slice::from_ref(x), 1.0);
            assert!(within(t.p_first[i], p), "{x:?}: {} vs {p}", t.p_first[i]);
        }
        // two pairs of each kind: coincident, adjacent, diagonal, straight at distance two
        let mut picked: Vec<(usize, usize, f64)> = Vec::new();
        for kind in 0..4 {
            let of_kind = t.p_second.iter().filter(|&&(i, j, _)| {
                let (a, b) = (&centres[i], &centres[j]);
                let diagonal = a.coords().iter().zip(b.coords()).filter(|(u, v)| u != v).count() == 2;
                match kind {
                    0 => i == j,
                    1 => a.l1_dist(b) == 1.0,
                    2 => a.l1_dist(b) == 2.0 && diagonal,
                    _ => a.l1_dist(b) == 2.0 && !diagonal,
                }
            });
            picked.extend(of_kind.filter(|&&(i, _, _)| centres[i].norm() <= 1.5).take(2));
        }
        assert_eq!(picked.len(), 8);
        for &(i, j, p_hat) in &picked {
            let p = exact_prob(&model, &[centres[i].clone(), centres[j].clone()], 1.0);
            assert!(within(p_hat, p), "{:?} {:?}: {p_hat} vs {p}", centres[i], centres[j]);
        }
    }
}
