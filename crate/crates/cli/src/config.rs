//! Run configuration: a flat `key=value` file merged under command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use region_stabilize::bounds::{McSpec, QuadratureSpec, VarSource};
use region_stabilize::scores::{LatticeIsolated, LatticeWeight, MinimalPoints, RggIsolated, RggWeight};
use region_stabilize::{AnyModel, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Simulate,
    Bound,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    Log,
    Indicator,
}

/// Every setting, as flags. Unset flags fall back to the config file, then
/// to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Model: minimal, lattice or rgg.
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Intensity multiplier, at least 1.
    #[arg(long)]
    pub s: Option<f64>,
    /// Dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Moment exponent; sets the exponents zeta and beta.
    #[arg(long)]
    pub p: Option<f64>,
    /// Number of replicates.
    #[arg(long = "reps")]
    pub n_reps: Option<usize>,
    /// Base seed; every random stream derives from it.
    #[arg(long = "seed")]
    pub base_seed: Option<u64>,
    /// Gauss-Legendre nodes per axis.
    #[arg(long)]
    pub nodes_per_axis: Option<usize>,
    /// Upper limit of the log-coordinate integrals; derived from s when unset.
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Largest dimension evaluated by quadrature; above it Monte Carlo is used.
    #[arg(long)]
    pub max_dim_tensor: Option<usize>,
    /// Log-grid points per unit for the d = 2 outer integrals.
    #[arg(long)]
    pub grid_per_unit: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub mc_seed: Option<u64>,
    /// Cells per axis for the general-bound probabilities.
    #[arg(long)]
    pub grid_per_axis: Option<usize>,
    /// Lattice weight half width `n` (weight supported on `[-n, n]^d`).
    #[arg(long)]
    pub window: Option<i64>,
    /// Lattice padding in sites.
    #[arg(long)]
    pub pad: Option<i64>,
    /// RGG connection radius; defaults to the critical radius.
    #[arg(long)]
    pub rho: Option<f64>,
    /// RGG weight family.
    #[arg(long)]
    pub weight: Option<WeightKind>,
    /// Support radius of the indicator weight; defaults to s.
    #[arg(long)]
    pub weight_radius: Option<f64>,
    /// Value of the lattice or indicator weight.
    #[arg(long)]
    pub weight_value: Option<f64>,
    /// Variance to plug into the bound instead of computing one.
    #[arg(long)]
    pub var: Option<f64>,
    /// Also estimate the terms of the general bound by Monte Carlo.
    #[arg(long)]
    pub main_terms: Option<bool>,
    /// Comma separated intensities for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    /// Substring selecting the `verify` checks to run.
    #[arg(long)]
    pub filter: Option<String>,
    /// Random cases per model and property in `verify`.
    #[arg(long)]
    pub cases: Option<usize>,
    /// Samples CSV path; stdout when unset.
    #[arg(long)]
    pub out_samples: Option<PathBuf>,
    /// Summary JSON path.
    #[arg(long)]
    pub out_summary: Option<PathBuf>,
    /// Report path for bound, sweep and verify; stdout when unset.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    /// Mutation smoke test: strict dominance in the minimal-point score.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelKind,
    pub s: f64,
    pub d: usize,
    pub p: f64,
    pub n_reps: usize,
    pub base_seed: u64,
    pub quad: QuadratureSpec,
    pub mc: McSpec,
    pub window: i64,
    pub pad: i64,
    pub rho: Option<f64>,
    pub weight: WeightKind,
    pub weight_radius: Option<f64>,
    pub weight_value: f64,
    pub var: Option<f64>,
    pub main_terms: bool,
    pub s_grid: Vec<f64>,
    pub filter: Option<String>,
    pub cases: usize,
    pub out_samples: Option<PathBuf>,
    pub out_summary: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
    pub inject_fault: bool,
}

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "command", "model", "s", "d", "p", "n_reps", "base_seed", "nodes_per_axis", "truncation", "max_dim_tensor",
    "grid_per_unit", "mc_samples", "mc_seed", "grid_per_axis", "window", "pad", "rho", "weight", "weight_radius",
    "weight_value", "var", "main_terms", "s_grid", "filter", "cases", "out_samples", "out_summary", "out_report",
];

/// Parses `key=value` lines; blank lines and lines starting with `#` are skipped.
pub fn parse_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(format!("line {}: unknown key `{k}`", i + 1));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

struct File(BTreeMap<String, String>);

impl File {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| format!("invalid value for `{key}`: {v}")),
        }
    }

    fn value_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, String> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => T::from_str(v, true).map(Some).map_err(|_| format!("invalid value for `{key}`: {v}")),
        }
    }
}

impl RunConfig {
    /// Merges flags over the file over defaults and validates the numbers.
    pub fn resolve(command: Option<Command>, flags: Flags, file: BTreeMap<String, String>) -> Result<Self, String> {
        let file = File(file);
        let command = command.or(file.value_enum("command")?).ok_or("no command given")?;
        let model = match flags.model {
            Some(m) => m,
            None => file.get("model")?.unwrap_or(ModelKind::Minimal),
        };
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                match flags.$field {
                    Some(v) => v,
                    None => file.get(stringify!($field))?.unwrap_or($default),
                }
            };
        }
        macro_rules! pick_opt {
            ($field:ident) => {
                match flags.$field {
                    Some(v) => Some(v),
                    None => file.get(stringify!($field))?,
                }
            };
        }
        let mut quad = QuadratureSpec::default();
        quad.nodes_per_axis = pick!(nodes_per_axis, quad.nodes_per_axis);
        quad.truncation = pick_opt!(truncation);
        quad.max_dim_tensor = pick!(max_dim_tensor, quad.max_dim_tensor);
        quad.grid_per_unit = pick!(grid_per_unit, quad.grid_per_unit);
        let mut mc = McSpec::default();
        mc.n_samples = pick!(mc_samples, mc.n_samples);
        mc.base_seed = pick!(mc_seed, mc.base_seed);
        mc.grid_per_axis = pick!(grid_per_axis, mc.grid_per_axis);
        quad.mc = mc.clone();
        let weight = match flags.weight {
            Some(w) => w,
            None => file.value_enum("weight")?.unwrap_or(WeightKind::Log),
        };
        let s_grid = match flags.s_grid {
            Some(v) => v,
            None => match file.0.get("s_grid") {
                None => vec![1e2, 1e3, 1e4],
                Some(v) => v
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|_| format!("invalid value in `s_grid`: {x}")))
                    .collect::<Result<_, _>>()?,
            },
        };
        let cfg = Self {
            command,
            model,
            s: pick!(s, 100.0),
            d: pick!(d, 2),
            p: pick!(p, 1.0),
            n_reps: pick!(n_reps, 1000),
            base_seed: pick!(base_seed, 0),
            quad,
            mc,
            window: pick!(window, 10),
            pad: pick!(pad, 2),
            rho: pick_opt!(rho),
            weight,
            weight_radius: pick_opt!(weight_radius),
            weight_value: pick!(weight_value, 1.0),
            var: pick_opt!(var),
            main_terms: pick!(main_terms, false),
            s_grid,
            filter: pick_opt!(filter),
            cases: pick!(cases, 1000),
            out_samples: pick_opt!(out_samples),
            out_summary: pick_opt!(out_summary),
            out_report: pick_opt!(out_report),
            inject_fault: flags.inject_fault,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        self.quad.validate().map_err(|e| e.to_string())?;
        if matches!(self.command, Command::Simulate) && self.n_reps < 2 {
            return Err(format!("reps must be at least 2, got {}", self.n_reps));
        }
        if let Some(v) = self.var {
            if !(v > 0.0) {
                return Err(format!("var must be positive, got {v}"));
            }
        }
        if matches!(self.command, Command::Sweep)
            && (self.s_grid.is_empty() || self.s_grid.windows(2).any(|w| !(w[1] > w[0]))) {
                return Err("s_grid must be non-empty and strictly increasing".into());
            }
        if self.cases == 0 {
            return Err("cases must be positive".into());
        }
        if !matches!(self.command, Command::Verify) {
            self.model_at(self.s)?;
        }
        Ok(())
    }

    /// The configured model at intensity `s`.
    pub fn model_at(&self, s: f64) -> Result<AnyModel, String> {
        let model: AnyModel = match self.model {
            ModelKind::Minimal => {
                let m = MinimalPoints::new(s, self.d, self.p).map_err(|e| e.to_string())?;
                if self.inject_fault { m.with_strict_dominance_fault() } else { m }.into()
            }
            ModelKind::Lattice => LatticeIsolated::new(s, self.d, self.p, LatticeWeight { half_width: self.window, value: self.weight_value })
                .and_then(|m| m.with_pad(self.pad))
                .map_err(|e| e.to_string())?
                .into(),
            ModelKind::Rgg => {
                let rho = self.rho.unwrap_or_else(|| RggIsolated::critical_radius(s, self.d));
                let weight = match self.weight {
                    WeightKind::Log => RggWeight::Logarithmic,
                    WeightKind::Indicator => {
                        RggWeight::Indicator { radius: self.weight_radius.unwrap_or(s), value: self.weight_value }
                    }
                };
                RggIsolated::new(s, self.d, self.p, rho, weight).map_err(|e| e.to_string())?.into()
            }
        };
        Ok(model)
    }

    /// Where the variance plugged into a bound comes from when `var` is unset.
    pub fn default_var_source(&self) -> VarSource {
        match self.model {
            ModelKind::Minimal if self.d == 2 => VarSource::Mecke,
            ModelKind::Lattice => VarSource::Exact,
            _ => VarSource::Empirical,
        }
    }
}
