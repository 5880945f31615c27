//! Command implementations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use region_stabilize::bounds::{
    assemble_bound, lattice_variance, outer_integrals, BoundReport, VarSource,
};
use region_stabilize::empirics::{run_ensemble, variance_mecke_minimal};
use region_stabilize::malliavin::estimate_main_terms;
use region_stabilize::verify::{format_tap, run_suite, VerifyOptions};
use region_stabilize::{AnyModel, Error, ScoreModel};

use crate::config::{Command, RunConfig};

pub enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) => Failure::Io(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Caps the worker pool at `REGION_STABILIZE_THREADS` when it is set.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("REGION_STABILIZE_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("REGION_STABILIZE_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("REGION_STABILIZE_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

pub fn dispatch(cfg: &RunConfig) -> Result<u8, Failure> {
    match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::Bound => bound(cfg),
        Command::Verify => verify(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path`, or to stdout without one.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn model(cfg: &RunConfig, s: f64) -> Result<AnyModel, Failure> {
    cfg.model_at(s).map_err(Failure::Config)
}

fn simulate(cfg: &RunConfig) -> Result<u8, Failure> {
    let m = model(cfg, cfg.s)?;
    let summary = run_ensemble(&m, &m.default_intensity(), cfg.n_reps, cfg.base_seed)?;
    let mut csv = Vec::new();
    summary.write_samples_csv(&mut csv)?;
    emit(cfg.out_samples.as_deref(), &csv)?;
    let json = summary.to_json() + "\n";
    match (&cfg.out_summary, &cfg.out_samples) {
        (Some(p), _) => emit(Some(p), json.as_bytes())?,
        (None, Some(_)) => emit(None, json.as_bytes())?,
        // the samples already went to stdout
        (None, None) => eprint!("{json}"),
    }
    Ok(0)
}

/// Variance for the bound: given, exact, Mecke quadrature, or simulated.
fn variance(cfg: &RunConfig, m: &AnyModel) -> Result<(f64, f64, VarSource), Failure> {
    if let Some(v) = cfg.var {
        return Ok((v, 0.0, VarSource::Empirical));
    }
    match (m, cfg.default_var_source()) {
        (AnyModel::Lattice(l), VarSource::Exact) => Ok((lattice_variance(l), 0.0, VarSource::Exact)),
        (AnyModel::Minimal(_), VarSource::Mecke) => Ok((variance_mecke_minimal(m.s(), 2, &cfg.quad)?, 0.0, VarSource::Mecke)),
        _ => {
            let e = run_ensemble(m, &m.default_intensity(), cfg.n_reps.max(2), cfg.base_seed)?;
            Ok((e.var, e.se_var, VarSource::Empirical))
        }
    }
}

fn report_at(cfg: &RunConfig, s: f64) -> Result<(BoundReport, Option<serde_json::Value>), Failure> {
    let m = model(cfg, s)?;
    let terms = outer_integrals(&m, &cfg.quad, &cfg.mc)?;
    let (var, se_var, source) = variance(cfg, &m)?;
    let report = assemble_bound(&m, &terms, var, se_var, source)?;
    let main = if cfg.main_terms {
        let t = estimate_main_terms(&m, var, &cfg.quad, &cfg.mc)?;
        Some(serde_json::to_value(&t).expect("terms serialize"))
    } else {
        None
    };
    Ok((report, main))
}

fn bound(cfg: &RunConfig) -> Result<u8, Failure> {
    let (report, main) = report_at(cfg, cfg.s)?;
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    if let Some(main) = main {
        doc["main_terms"] = main;
    }
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    emit(cfg.out_report.as_deref(), text.as_bytes())?;
    Ok(0)
}

fn sweep(cfg: &RunConfig) -> Result<u8, Failure> {
    let mut lines = String::new();
    for &s in &cfg.s_grid {
        let (report, main) = report_at(cfg, s)?;
        let mut doc = serde_json::to_value(&report).expect("report serializes");
        if let Some(main) = main {
            doc["main_terms"] = main;
        }
        lines.push_str(&serde_json::to_string(&doc).expect("json"));
        lines.push('\n');
    }
    emit(cfg.out_report.as_deref(), lines.as_bytes())?;
    Ok(0)
}

fn verify(cfg: &RunConfig) -> Result<u8, Failure> {
    let opts = VerifyOptions {
        filter: cfg.filter.clone(),
        cases: cfg.cases,
        seed: cfg.base_seed,
        inject_fault: cfg.inject_fault,
        quad: cfg.quad.clone(),
    };
    let results = run_suite(&opts);
    if results.is_empty() {
        return Err(Failure::Config(format!("no check matches filter {:?}", cfg.filter.as_deref().unwrap_or(""))));
    }
    emit(cfg.out_report.as_deref(), format_tap(&results).as_bytes())?;
    Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
}
