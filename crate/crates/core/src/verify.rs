//! Property suites behind the `verify` command.
//!
//! Every check is deterministic given the suite seed. Exact properties are
//! compared bit for bit; Monte Carlo oracles use a 4 SE band.

use std::fmt::Write as _;

use crate::bounds::{
    c_alpha_s, c_alpha_s_mc, f_alpha, g_s, mean_minimal, outer_integrals, outer_integrals_mc, q_s, GaussLegendre,
    McSpec, QuadratureSpec,
};
use crate::empirics::{ks_distance, mean_rgg, run_ensemble, wasserstein1};
use crate::error::Result;
use crate::malliavin::{diff1, diff1_decomposed, diff2, diff2_decomposed, verify_dnull};
use crate::pointproc::{sample_poisson, BoxWindow, IntensitySpec, Point, PointConfiguration, SeedSpec, SpaceTag, StreamRng};
use crate::scalar::{mean_and_se, Estimate};
use crate::scores::skyline::{count_minimal_brute, count_minimal_fast};
use crate::scores::{AnyModel, LatticeIsolated, LatticeWeight, MinimalPoints, RggIsolated, RggWeight, ScoreModel};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Only checks whose id contains this string run.
    pub filter: Option<String>,
    /// Random cases per model and property for the exact suites.
    pub cases: usize,
    pub seed: u64,
    /// Minimal model with strict dominance in the score, for mutation testing.
    pub inject_fault: bool,
    pub quad: QuadratureSpec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { filter: None, cases: 1000, seed: 0x5EED, inject_fault: false, quad: QuadratureSpec::default() }
    }
}

type Outcome = Result<(bool, String)>;

struct Check {
    id: &'static str,
    description: &'static str,
    run: fn(&VerifyOptions) -> Outcome,
}

const CHECKS: &[Check] = &[
    Check { id: "pointproc/determinism", description: "same seed gives the same configuration under 1 and 4 threads", run: pp_determinism },
    Check { id: "pointproc/restrict", description: "restriction is idempotent and below the configuration", run: pp_restrict },
    Check { id: "pointproc/counts", description: "mean total mass within 4 SE of s times the window measure", run: pp_counts },
    Check { id: "pointproc/leq", description: "leq is reflexive, antisymmetric and transitive", run: pp_leq },
    Check { id: "scores/restriction", description: "score unchanged by restricting to the region", run: sc_restriction },
    Check { id: "scores/monotone", description: "smaller configuration gives a larger region", run: sc_monotone },
    Check { id: "scores/sandwich", description: "equal scores at two nested configurations persist in between", run: sc_sandwich },
    Check { id: "scores/ordering", description: "statistic independent of entry order and splitting", run: sc_ordering },
    Check { id: "scores/region-rate", description: "minimal model: P{y in region} equals exp(-r(x,y))", run: sc_region_rate },
    Check { id: "skyline/oracle", description: "fast minimal count equals brute force, d in 2..4", run: sk_oracle },
    Check { id: "malliavin/first-order", description: "first difference equals its score decomposition", run: ml_first },
    Check { id: "malliavin/second-order", description: "second difference equals its score decomposition", run: ml_second },
    Check { id: "malliavin/symmetry", description: "second difference symmetric in the added points", run: ml_symmetry },
    Check { id: "malliavin/dnull", description: "points outside the region do not change the score", run: ml_dnull },
    Check { id: "malliavin/moments", description: "indicator scores: add-one cost bounded by the weight", run: ml_moments },
    Check { id: "scaling/c-alpha", description: "c_{a,s}(y) = c_{1,as}(y)/a on a 1000-point grid", run: bd_scaling },
    Check { id: "inequality/meet", description: "|a^y||b^y| <= |a^b^y||y| on 1e5 random triples", run: bd_meet },
    Check { id: "inequality/power", description: "c_{1,s}^a <= exp(-a s|x|) + c_{a,s} for a in (0,1)", run: bd_power },
    Check { id: "inequality/c-bound", description: "c_{a,s} over its envelope stays bounded as s grows, d = 2, 3", run: bd_cbound },
    Check { id: "quadrature/representation", description: "s int c^i matches the multiple integral of the meet, i = 1, 2", run: bd_representation },
    Check { id: "quadrature/c-alpha-mc", description: "c_{a,s} quadrature within 4 SE of Monte Carlo, d = 2, 3", run: bd_c_mc },
    Check { id: "quadrature/mean-mc", description: "mean of the minimal count within 4 SE of Monte Carlo", run: bd_mean_mc },
    Check { id: "quadrature/g-q-mc", description: "g_s and q_s within 4 SE of Monte Carlo, minimal d = 2", run: bd_gq_mc },
    Check { id: "quadrature/f-mc", description: "f_a components within 4 SE of Monte Carlo, minimal d = 2", run: bd_f_mc },
    Check { id: "quadrature/outer-mc", description: "outer integrals within 4 SE of Monte Carlo, minimal d = 2", run: bd_outer_mc },
    Check { id: "empirics/grid", description: "dK and dW match a fine trapezoid evaluation", run: em_grid },
    Check { id: "empirics/merged", description: "dK of a doubled sample equals dK of the sample", run: em_merged },
    Check { id: "empirics/ensemble-threads", description: "ensemble samples identical under 1 and 8 threads", run: em_threads },
    Check { id: "empirics/rgg-mean", description: "RGG mean within 4 SE of the closed-form integral", run: em_rgg_mean },
    Check { id: "empirics/lattice-mean", description: "lattice mean within 4 SE of exp(-4) W1", run: em_lattice_mean },
];

/// Ids of every check, in run order.
pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// Runs the selected checks. A check that errors counts as failed.
pub fn run_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .filter(|c| opts.filter.as_deref().is_none_or(|f| c.id.contains(f)))
        .map(|c| {
            let (passed, detail) = match (c.run)(opts) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult { id: c.id.to_string(), description: c.description.to_string(), passed, detail }
        })
        .collect()
}

/// TAP rendering: a plan line, then `ok N - id: description` per check.
pub fn format_tap(results: &[CheckResult]) -> String {
    let mut out = format!("1..{}\n", results.len());
    for (i, r) in results.iter().enumerate() {
        let status = if r.passed { "ok" } else { "not ok" };
        let _ = writeln!(out, "{status} {} - {}: {}", i + 1, r.id, r.description);
        if !r.passed && !r.detail.is_empty() {
            let _ = writeln!(out, "# {}", r.detail);
        }
    }
    out
}

fn verdict(failures: usize, total: usize) -> (bool, String) {
    (failures == 0, format!("{failures} of {total} cases failed"))
}

fn within(e: Estimate<f64>, target: f64) -> bool {
    (e.value - target).abs() <= 4.0 * e.se
}

fn rng(opts: &VerifyOptions, salt: u64) -> StreamRng {
    StreamRng::from_seed(crate::pointproc::splitmix64(opts.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// The three models the exact suites run on. Coordinates are drawn on a
/// coarse dyadic grid often enough to hit ties, boundaries and duplicates.
fn suite_models(opts: &VerifyOptions) -> Vec<AnyModel> {
    let minimal = MinimalPoints::new(10.0, 2, 1.0).expect("valid model");
    let minimal = if opts.inject_fault { minimal.with_strict_dominance_fault() } else { minimal };
    vec![
        minimal.into(),
        LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight { half_width: 3, value: 2.0 }).expect("valid model").into(),
        RggIsolated::new(2.0, 2, 1.0, 0.25, RggWeight::Indicator { radius: 0.75, value: 1.5 }).expect("valid model").into(),
    ]
}

fn random_point(model: &AnyModel, rng: &mut StreamRng) -> Point {
    let d = model.dim();
    match model.space() {
        SpaceTag::Cube => Point::new((0..d).map(|_| if rng.below(2) == 0 { rng.below(9) as f64 / 8.0 } else { rng.uniform() })),
        SpaceTag::Lattice => Point::new((0..d).map(|_| rng.below(9) as f64 - 4.0)),
        SpaceTag::EuclideanWindow => {
            Point::new((0..d).map(|_| if rng.below(2) == 0 { rng.below(17) as f64 / 8.0 - 1.0 } else { 2.0 * rng.uniform() - 1.0 }))
        }
    }
}

fn random_config(model: &AnyModel, rng: &mut StreamRng, max_points: u64) -> PointConfiguration {
    let n = rng.below(max_points + 1);
    let entries: Vec<(Point, u32)> =
        (0..n).map(|_| (random_point(model, rng), if rng.below(10) == 0 { 2 } else { 1 })).collect();
    PointConfiguration::from_entries(model.space(), model.dim(), entries).expect("valid entries")
}

/// A random `ν ≤ μ` that keeps at least one copy of `keep`.
fn random_sub(config: &PointConfiguration, keep: Option<&Point>, rng: &mut StreamRng) -> PointConfiguration {
    let entries: Vec<(Point, u32)> = config
        .entries()
        .iter()
        .map(|(p, m)| {
            let lo = u32::from(keep == Some(p));
            (p.clone(), lo + rng.below(u64::from(m - lo) + 1) as u32)
        })
        .filter(|(_, m)| *m > 0)
        .collect();
    PointConfiguration::from_entries(config.space(), config.dim(), entries).expect("valid entries")
}

fn pick(config: &PointConfiguration, rng: &mut StreamRng) -> Option<Point> {
    let e = config.entries();
    (!e.is_empty()).then(|| e[rng.below(e.len() as u64) as usize].0.clone())
}

fn pp_determinism(opts: &VerifyOptions) -> Outcome {
    let specs = [
        IntensitySpec::cube(300.0, 2),
        IntensitySpec::lattice(1.0, BoxWindow::centered(2, 6.0)),
        IntensitySpec::euclidean(3.0, BoxWindow::centered(2, 4.0), 0.5),
    ];
    let mut failures = 0;
    for (k, spec) in specs.iter().enumerate() {
        let seed = SeedSpec::new(opts.seed, k as u64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().expect("pool");
        let a = one.install(|| sample_poisson(spec, seed))?;
        let b = four.install(|| sample_poisson(spec, seed))?;
        let c = sample_poisson(spec, seed)?;
        failures += usize::from(a != b || a != c);
    }
    Ok(verdict(failures, specs.len()))
}

fn pp_restrict(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 1);
    let mut failures = 0;
    let mut total = 0;
    for model in suite_models(opts) {
        for _ in 0..opts.cases {
            let config = random_config(&model, &mut rng, 12);
            let Some(x) = pick(&config, &mut rng) else { continue };
            let region = model.region(&x, &config)?;
            let once = config.restrict(&region);
            total += 1;
            failures += usize::from(once.restrict(&region) != once || !once.leq(&config));
        }
    }
    Ok(verdict(failures, total))
}

fn pp_counts(opts: &VerifyOptions) -> Outcome {
    let specs = [
        IntensitySpec::cube(5.0, 2),
        IntensitySpec::lattice(0.7, BoxWindow::centered(2, 3.0)),
        IntensitySpec::euclidean(2.0, BoxWindow::centered(2, 1.5), 0.25),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (k, spec) in specs.iter().enumerate() {
        let masses: Vec<f64> = (0..10_000u64)
            .map(|i| sample_poisson(spec, SeedSpec::new(opts.seed ^ (k as u64 + 7), i)).map(|c| c.total_mass() as f64))
            .collect::<Result<_>>()?;
        let e = mean_and_se(&masses);
        let want = spec.expected_mass();
        ok &= within(e, want);
        details.push(format!("{:.4}±{:.4} vs {want:.4}", e.value, e.se));
    }
    Ok((ok, details.join("; ")))
}

fn pp_leq(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 2);
    let model = &suite_models(opts)[1];
    let mut failures = 0;
    for _ in 0..opts.cases {
        let c = random_config(model, &mut rng, 10);
        let b = random_sub(&c, None, &mut rng);
        let a = random_sub(&b, None, &mut rng);
        let other = random_config(model, &mut rng, 10);
        let reflexive = a.leq(&a) && c.leq(&c);
        let transitive = a.leq(&b) && b.leq(&c) && a.leq(&c);
        let antisymmetric = !(a.leq(&other) && other.leq(&a)) || a == other;
        let chain = !(a.leq(&other) && other.leq(&c)) || a.leq(&c);
        failures += usize::from(!(reflexive && transitive && antisymmetric && chain));
    }
    Ok(verdict(failures, opts.cases))
}

fn sc_restriction(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 3);
    let (mut failures, mut total) = (0, 0);
    for model in suite_models(opts) {
        for _ in 0..opts.cases {
            let config = random_config(&model, &mut rng, 12);
            let Some(x) = pick(&config, &mut rng) else { continue };
            let region = model.region(&x, &config)?;
            if region.is_empty() {
                continue;
            }
            total += 1;
            let restricted = config.restrict(&region);
            failures += usize::from(model.score_at(&x, &config) != model.score_at(&x, &restricted));
        }
    }
    Ok(verdict(failures, total))
}

fn sc_monotone(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 4);
    let (mut failures, mut total) = (0, 0);
    for model in suite_models(opts) {
        for _ in 0..opts.cases {
            let big = random_config(&model, &mut rng, 12);
            let Some(x) = pick(&big, &mut rng) else { continue };
            let small = random_sub(&big, Some(&x), &mut rng);
            total += 1;
            let (rb, rs) = (model.region(&x, &big)?, model.region(&x, &small)?);
            failures += usize::from(!rb.is_subset_of(&rs));
        }
    }
    Ok(verdict(failures, total))
}

fn sc_sandwich(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 5);
    let (mut failures, mut total) = (0, 0);
    for model in suite_models(opts) {
        let mut done = 0;
        let mut attempts = 0;
        while done < opts.cases && attempts < 50 * opts.cases {
            attempts += 1;
            let upper = random_config(&model, &mut rng, 12);
            let Some(x) = pick(&upper, &mut rng) else { continue };
            let lower = random_sub(&upper, Some(&x), &mut rng);
            let v = model.score_at(&x, &lower);
            if v != model.score_at(&x, &upper) {
                continue;
            }
            done += 1;
            let extra = lower.difference_from(&upper).expect("lower <= upper");
            let middle = lower.plus(&random_sub(&extra, None, &mut rng))?;
            failures += usize::from(model.score_at(&x, &middle) != v);
        }
        total += done;
    }
    Ok(verdict(failures, total))
}

fn sc_ordering(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 6);
    let (mut failures, mut total) = (0, 0);
    for model in suite_models(opts) {
        for _ in 0..opts.cases {
            let config = random_config(&model, &mut rng, 15);
            // split multiplicities into unit entries and shuffle them
            let mut units: Vec<(Point, u32)> =
                config.entries().iter().flat_map(|(p, m)| std::iter::repeat_n((p.clone(), 1), *m as usize)).collect();
            for i in (1..units.len()).rev() {
                units.swap(i, rng.below(i as u64 + 1) as usize);
            }
            let shuffled = PointConfiguration::from_entries(model.space(), model.dim(), units)?;
            total += 1;
            failures += usize::from(model.statistic(&shuffled).value.to_bits() != model.statistic(&config).value.to_bits());
        }
    }
    Ok(verdict(failures, total))
}

fn sc_region_rate(opts: &VerifyOptions) -> Outcome {
    let s = 10.0;
    let model: AnyModel = MinimalPoints::new(s, 2, 1.0)?.into();
    let x = Point::from([0.3, 0.4]);
    let y = Point::from([0.1, 0.2]);
    let spec = IntensitySpec::cube(s, 2);
    let hits: Vec<f64> = (0..20_000u64)
        .map(|i| {
            let config = sample_poisson(&spec, SeedSpec::new(opts.seed ^ 0xA3, i))?.add(&x, 1)?;
            Ok(f64::from(u8::from(model.region(&x, &config)?.contains(&y))))
        })
        .collect::<Result<_>>()?;
    let e = mean_and_se(&hits);
    let want = (-model.rate(&x, &y)).exp();
    Ok((within(e, want), format!("{:.5}±{:.5} vs {want:.5}", e.value, e.se)))
}

fn sk_oracle(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 7);
    let mut failures = 0;
    for k in 0..500 {
        let d = 2 + k % 3;
        let n = rng.below(501) as usize;
        let coarse = rng.below(3) == 0;
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new((0..d).map(|_| if coarse { rng.below(6) as f64 / 5.0 } else { rng.uniform() })))
            .collect();
        failures += usize::from(count_minimal_fast(&pts, d) != count_minimal_brute(&pts));
    }
    Ok(verdict(failures, 500))
}

/// Runs `f(model, config, y1, y2)` on random cases for every suite model;
/// the added points sometimes coincide with each other or with the data.
fn diff_cases<F>(opts: &VerifyOptions, salt: u64, mut f: F) -> Outcome
where
    F: FnMut(&AnyModel, &PointConfiguration, &Point, &Point) -> Result<bool>,
{
    let mut rng = rng(opts, salt);
    let (mut failures, mut total) = (0, 0);
    for model in suite_models(opts) {
        for _ in 0..opts.cases {
            let config = random_config(&model, &mut rng, 12);
            let y1 = match pick(&config, &mut rng) {
                Some(p) if rng.below(5) == 0 => p,
                _ => random_point(&model, &mut rng),
            };
            let y2 = if rng.below(8) == 0 { y1.clone() } else { random_point(&model, &mut rng) };
            total += 1;
            failures += usize::from(!f(&model, &config, &y1, &y2)?);
        }
    }
    Ok(verdict(failures, total))
}

fn ml_first(opts: &VerifyOptions) -> Outcome {
    diff_cases(opts, 8, |m, c, y, _| {
        Ok(diff1(m, c, y)?.value.to_bits() == diff1_decomposed(m, c, y)?.to_bits())
    })
}

fn ml_second(opts: &VerifyOptions) -> Outcome {
    diff_cases(opts, 9, |m, c, y1, y2| {
        Ok(diff2(m, c, y1, y2)?.value.to_bits() == diff2_decomposed(m, c, y1, y2)?.to_bits())
    })
}

fn ml_symmetry(opts: &VerifyOptions) -> Outcome {
    diff_cases(opts, 10, |m, c, y1, y2| Ok(diff2(m, c, y1, y2)?.value.to_bits() == diff2(m, c, y2, y1)?.value.to_bits()))
}

fn ml_dnull(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 11);
    diff_cases(opts, 12, |m, c, y1, y2| {
        let x = match pick(c, &mut rng) {
            Some(p) if rng.below(2) == 0 => p,
            _ => random_point(m, &mut rng),
        };
        let y = random_point(m, &mut rng);
        verify_dnull(m, c, &x, &y, y1, y2)
    })
}

fn ml_moments(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 13);
    let models = suite_models(opts);
    let (mut failures, mut total) = (0, 0);
    let eps = 0.5;
    for (model, wmax) in [(&models[1], 2.0), (&models[2], 1.5)] {
        let mut moments = Vec::with_capacity(opts.cases);
        for _ in 0..opts.cases {
            let config = random_config(model, &mut rng, 12);
            let Some(x) = pick(&config, &mut rng) else { continue };
            let y = random_point(model, &mut rng);
            let d = model.score_at(&x, &config.add(&y, 1)?) - model.score_at(&x, &config);
            total += 1;
            failures += usize::from(d.abs() > wmax);
            moments.push(d.abs().powf(4.0 + eps));
        }
        let m = moments.iter().sum::<f64>() / moments.len().max(1) as f64;
        failures += usize::from(m > (2.0 * wmax).powf(4.0 + eps));
    }
    Ok(verdict(failures, total))
}

fn bd_scaling(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 14);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let n = 1000;
    for k in 0..n {
        let alpha = [0.02, 0.1, 0.5, 2.0, 7.0][k % 5];
        let s = 10f64.powf(rng.uniform() * 5.0);
        let d = 2 + (k / 5) % 2;
        let y: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
        let lhs = c_alpha_s(&y, alpha, s, &opts.quad)?.value;
        let rhs = c_alpha_s(&y, 1.0, alpha * s, &opts.quad)?.value / alpha;
        let err = (lhs - rhs).abs() / lhs.max(1.0);
        worst = worst.max(err);
        failures += usize::from(err > 1e-9);
    }
    let (ok, msg) = verdict(failures, n);
    Ok((ok, format!("{msg}; worst {worst:.2e}")))
}

fn bd_meet(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 15);
    let mut failures = 0;
    let n = 100_000;
    for k in 0..n {
        let d = 1 + k % 4;
        let draw = |rng: &mut StreamRng| Point::new((0..d).map(|_| rng.uniform()));
        let (a, b, y) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let lhs = a.meet(&y).volume() * b.meet(&y).volume();
        let rhs = a.meet(&b).meet(&y).volume() * y.volume();
        // equality is common; allow for the order of the products
        failures += usize::from(lhs > rhs * (1.0 + 1e-12));
    }
    Ok(verdict(failures, n))
}

fn bd_power(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 16);
    let mut failures = 0;
    let n = 1000;
    for k in 0..n {
        let alpha = 0.05 + 0.9 * rng.uniform();
        let s = 10f64.powf(rng.uniform() * 4.0);
        let d = 2 + k % 2;
        let x: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
        let vol: f64 = x.iter().product();
        let c1 = c_alpha_s(&x, 1.0, s, &opts.quad)?.value;
        let ca = c_alpha_s(&x, alpha, s, &opts.quad)?.value;
        let rhs = (-alpha * s * vol).exp() + ca;
        failures += usize::from(c1.powf(alpha) > rhs * (1.0 + 1e-9));
    }
    Ok(verdict(failures, n))
}

/// Running supremum of `c_{α,s}(y) / [α^{-1} e^{-αs|y|/2} (1 + |log(αs|y|)|^{d-1})]`
/// as the grid extends one decade of `s` at a time, up to `s = 1e6`. The sup
/// must stay finite and its per-decade increments must not grow.
fn bd_cbound(opts: &VerifyOptions) -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for d in [2usize, 3] {
        let mut sups = Vec::new();
        let mut sup: f64 = 0.0;
        for decade in 0..6 {
            for i in 1..=8 {
                let s = 10f64.powf(decade as f64 + i as f64 / 8.0);
                for alpha in [0.05, 0.5, 1.0] {
                    for j in 0..12 {
                        // |y| from 1 down to 1e-8, spread over the coordinates
                        let v = 8.0 * std::f64::consts::LN_10 * j as f64 / 11.0;
                        let y: Vec<f64> = (0..d).map(|k| (-v * (k + 1) as f64 / ((d * (d + 1)) / 2) as f64).exp()).collect();
                        let t = alpha * s * y.iter().product::<f64>();
                        if t < 1e-12 {
                            continue;
                        }
                        let c = c_alpha_s(&y, alpha, s, &opts.quad)?.value;
                        let env = (-t / 2.0).exp() * (1.0 + t.ln().abs().powi(d as i32 - 1)) / alpha;
                        sup = sup.max(c / env);
                    }
                }
            }
            sups.push(sup);
        }
        let steps: Vec<f64> = sups.windows(2).map(|w| w[1] - w[0]).collect();
        let grows = steps.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-9) + 1e-12);
        ok &= sups.iter().all(|v| v.is_finite()) && !grows;
        detail.push(format!("d={d}: {}", sups.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")));
    }
    Ok((ok, detail.join("; ")))
}

/// `s∫c_{α,s}(x)^i dx` by Gauss–Legendre in `u = -log x` against
/// `s^{i+1} ∫ |z_1∧…∧z_i| e^{-αsΣ|z_j|} dz` by importance sampling.
fn bd_representation(opts: &VerifyOptions) -> Outcome {
    let (s, alpha): (f64, f64) = (50.0, 0.5);
    let gl = GaussLegendre::<f64>::new(24)?;
    let top = (alpha * s).ln() + 30.0;
    let knots = [0.0, (alpha * s).ln(), top];
    let mut ok = true;
    let mut detail = Vec::new();
    // both powers share the same nodes
    let cache = std::cell::RefCell::new(std::collections::HashMap::new());
    for i in [1i32, 2] {
        let mut err = None;
        let lhs = gl.integrate_knots(&knots, 6.0, |u1| {
            gl.integrate_knots(&knots, 6.0, |u2| {
                let x = [(-u1).exp(), (-u2).exp()];
                let key = (u1.to_bits(), u2.to_bits());
                let c = match cache.borrow().get(&key) {
                    Some(&c) => Ok(c),
                    None => c_alpha_s(&x, alpha, s, &opts.quad).map(|c| c.value),
                };
                match c {
                    Ok(c) => {
                        cache.borrow_mut().insert(key, c);
                        s * c.powi(i) * x[0] * x[1]
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        let sampler = crate::bounds::terms::CubeSampler::new(s, 2, alpha);
        let mut rng = rng(opts, 17 + i as u64);
        let vals: Vec<f64> = (0..200_000)
            .map(|_| {
                let mut meet: Option<Point> = None;
                let mut w = s;
                for _ in 0..i {
                    let (z, wz) = sampler.draw(&mut rng);
                    w *= wz * (-alpha * s * z.volume()).exp();
                    meet = Some(match meet {
                        None => z,
                        Some(m) => m.meet(&z),
                    });
                }
                w * meet.expect("i >= 1").volume()
            })
            .collect();
        let e = mean_and_se(&vals);
        ok &= within(e, lhs);
        detail.push(format!("i={i}: {lhs:.6} vs {:.6}±{:.6}", e.value, e.se));
    }
    Ok((ok, detail.join("; ")))
}

fn bd_c_mc(opts: &VerifyOptions) -> Outcome {
    let mc = McSpec::new(200_000, opts.seed);
    let cases: [(&[f64], f64, f64); 4] =
        [(&[0.05, 0.1], 0.5, 200.0), (&[0.3, 0.001], 1.0, 1e4), (&[0.2, 0.01, 0.3], 0.5, 200.0), (&[0.5, 0.5, 0.5], 0.02, 1e3)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (y, alpha, s) in cases {
        let q = c_alpha_s(y, alpha, s, &opts.quad)?;
        let m = c_alpha_s_mc(y, alpha, s, &mc)?;
        ok &= within(m, q.value);
        detail.push(format!("{:.6} vs {:.6}±{:.6}", q.value, m.value, m.se));
    }
    Ok((ok, detail.join("; ")))
}

fn bd_mean_mc(opts: &VerifyOptions) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (s, d) in [(1e3, 2usize), (300.0, 3)] {
        let q: f64 = mean_minimal(s, d, &opts.quad)?;
        let m = c_alpha_s_mc(&vec![0.0; d], 1.0, s, &McSpec::new(200_000, opts.seed ^ 5))?;
        ok &= within(m, q);
        detail.push(format!("{q:.6} vs {:.6}±{:.6}", m.value, m.se));
    }
    Ok((ok, detail.join("; ")))
}

fn bd_gq_mc(opts: &VerifyOptions) -> Outcome {
    let s = 100.0;
    let model: AnyModel = MinimalPoints::new(s, 2, 1.0)?.into();
    let y = Point::from([0.05, 0.2]);
    let g = g_s(&model, &y, &opts.quad)?.value;
    let mut rng = rng(opts, 20);
    // g: uniform x over the cube, weight e^{-ζ s|x|} on {x ⪰ y}
    let zeta = model.zeta();
    let gs: Vec<f64> = (0..200_000)
        .map(|_| {
            let x = Point::new([rng.uniform(), rng.uniform()]);
            if x.dominates(&y) { s * (-zeta * s * x.volume()).exp() } else { 0.0 }
        })
        .collect();
    let ge = mean_and_se(&gs);
    // q: the inner probability is exact, z ranges over the cube
    let (x1, x2) = (Point::from([0.02, 0.3]), Point::from([0.1, 0.05]));
    let q = q_s(&model, &x1, &x2, &opts.quad)?.value;
    let sampler = crate::bounds::terms::CubeSampler::new(s, 2, 1.0);
    let joint = x1.join(&x2);
    let qs: Vec<f64> = (0..200_000)
        .map(|_| {
            let (z, w) = sampler.draw(&mut rng);
            if z.dominates(&joint) { w * (-s * z.volume()).exp() } else { 0.0 }
        })
        .collect();
    let qe = mean_and_se(&qs);
    Ok((
        within(ge, g) && within(qe, q),
        format!("g {g:.6} vs {:.6}±{:.6}; q {q:.6e} vs {:.6e}±{:.2e}", ge.value, ge.se, qe.value, qe.se),
    ))
}

fn bd_f_mc(opts: &VerifyOptions) -> Outcome {
    let model: AnyModel = MinimalPoints::new(100.0, 2, 1.0)?.into();
    let y = Point::from([0.1, 0.03]);
    let AnyModel::Minimal(mp) = &model else { unreachable!() };
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [model.beta(), 2.0 * model.beta()] {
        let q = f_alpha(&model, &y, alpha, &opts.quad, &McSpec::default())?;
        let m = crate::bounds::terms::minimal_f_mc(mp, &y, alpha, &opts.quad, &McSpec::new(10_000, opts.seed ^ 9))?;
        for (a, b) in [(q.f1, m.f1), (q.f2, m.f2), (q.f3, m.f3)] {
            let e = Estimate::new(b.value, (b.se * b.se + a.se * a.se).sqrt());
            ok &= within(e, a.value);
            detail.push(format!("{:.4e} vs {:.4e}±{:.1e}", a.value, b.value, e.se));
        }
    }
    Ok((ok, detail.join("; ")))
}

fn bd_outer_mc(opts: &VerifyOptions) -> Outcome {
    let model: AnyModel = MinimalPoints::new(100.0, 2, 1.0)?.into();
    let q = outer_integrals(&model, &opts.quad, &McSpec::default())?;
    let m = outer_integrals_mc(&model, &opts.quad, &McSpec::new(20_000, opts.seed ^ 11))?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (a, b) in [(q.int_f_beta_sq, m.int_f_beta_sq), (q.int_f_2beta, m.int_f_2beta), (q.int_kg_g, m.int_kg_g)] {
        let e = Estimate::new(b.value, (b.se * b.se + a.se * a.se).sqrt());
        ok &= within(e, a.value);
        detail.push(format!("{:.4e} vs {:.4e}±{:.1e}", a.value, b.value, e.se));
    }
    Ok((ok, detail.join("; ")))
}

fn trapezoid_distances(samples: &[f64]) -> (f64, f64) {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let (lo, hi, m) = (-12.0, 12.0, 2_400_000usize);
    let h = (hi - lo) / m as f64;
    let (mut ks, mut w, mut k) = (0.0f64, 0.0, 0);
    let mut prev: Option<f64> = None;
    for i in 0..=m {
        let t = lo + i as f64 * h;
        while k < v.len() && v[k] <= t {
            k += 1;
        }
        let diff = (k as f64 / n - crate::empirics::normal::phi(t)).abs();
        ks = ks.max(diff);
        if let Some(p) = prev {
            w += 0.5 * h * (p + diff);
        }
        prev = Some(diff);
    }
    (ks, w)
}

fn em_grid(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 21);
    let sample: Vec<f64> = (0..60).map(|_| 0.9 * rng.standard_normal() + 0.2).collect();
    let (ks_grid, w_grid) = trapezoid_distances(&sample);
    let (ks, w) = (ks_distance(&sample)?, wasserstein1(&sample)?);
    // the grid only sees the supremum to within one grid step of the density
    Ok((
        (ks - ks_grid).abs() < 1e-5 && (w - w_grid).abs() < 1e-6,
        format!("ks {ks:.8} vs {ks_grid:.8}; w1 {w:.8} vs {w_grid:.8}"),
    ))
}

fn em_merged(opts: &VerifyOptions) -> Outcome {
    let mut rng = rng(opts, 22);
    let a: Vec<f64> = (0..1000).map(|_| rng.standard_normal() * 1.2).collect();
    let mut b = a.clone();
    b.extend_from_slice(&a);
    let (x, y) = (ks_distance(&a)?, ks_distance(&b)?);
    Ok((x == y, format!("{x} vs {y}")))
}

fn em_threads(opts: &VerifyOptions) -> Outcome {
    let model: AnyModel = MinimalPoints::new(500.0, 2, 1.0)?.into();
    let spec = IntensitySpec::cube(500.0, 2);
    let run = |threads: usize| -> Result<Vec<u8>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool");
        let e = pool.install(|| run_ensemble(&model, &spec, 200, opts.seed))?;
        let mut buf = Vec::new();
        e.write_samples_csv(&mut buf)?;
        Ok(buf)
    };
    let (a, b) = (run(1)?, run(8)?);
    Ok((a == b, format!("{} bytes", a.len())))
}

fn em_rgg_mean(opts: &VerifyOptions) -> Outcome {
    let s = 6.0;
    let rho = RggIsolated::critical_radius(s, 2);
    let rm = RggIsolated::new(s, 2, 1.0, rho, RggWeight::Logarithmic)?;
    let want = mean_rgg(&rm);
    let spec = rm.default_intensity();
    let model: AnyModel = rm.into();
    let e = run_ensemble(&model, &spec, 2000, opts.seed ^ 0x66)?;
    let est = Estimate::new(e.mean, e.se_mean);
    Ok((within(est, want), format!("{:.4}±{:.4} vs {want:.4}", e.mean, e.se_mean)))
}

fn em_lattice_mean(opts: &VerifyOptions) -> Outcome {
    let lm = LatticeIsolated::new(1.0, 2, 1.0, LatticeWeight::indicator(10))?;
    let spec = lm.default_intensity();
    let model: AnyModel = lm.into();
    let e = run_ensemble(&model, &spec, 2000, opts.seed ^ 0x77)?;
    let want = 441.0 * (-4.0f64).exp();
    Ok((within(Estimate::new(e.mean, e.se_mean), want), format!("{:.4}±{:.4} vs {want:.4}", e.mean, e.se_mean)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique() {
        let ids = check_ids();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
    }

    #[test]
    fn filter_selects_scaling_only() {
        let opts = VerifyOptions { filter: Some("scaling".into()), ..VerifyOptions::default() };
        let r = run_suite(&opts);
        assert_eq!(r.len(), 1);
        assert!(r[0].passed, "{:?}", r[0]);
        assert!(format_tap(&r).starts_with("1..1\nok 1 - scaling/c-alpha"));
    }

    #[test]
    fn exact_suites_pass() {
        let opts = VerifyOptions { cases: 200, ..VerifyOptions::default() };
        for id in ["scores/", "malliavin/", "pointproc/leq", "pointproc/restrict"] {
            let r = run_suite(&VerifyOptions { filter: Some(id.into()), ..opts.clone() });
            for c in &r {
                assert!(c.passed, "{c:?}");
            }
        }
    }

    #[test]
    fn fault_is_detected() {
        let opts = VerifyOptions { cases: 300, inject_fault: true, ..VerifyOptions::default() };
        let failed: Vec<String> = ["malliavin/dnull", "scores/sandwich", "scores/restriction"]
            .iter()
            .flat_map(|f| run_suite(&VerifyOptions { filter: Some((*f).into()), ..opts.clone() }))
            .filter(|c| !c.passed)
            .map(|c| c.id)
            .collect();
        assert!(!failed.is_empty());
    }
}
