//! Replicated simulation of a statistic and its summary.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::empirics::distance::{ks_distance, wasserstein1};
use crate::error::{invalid, Result};
use crate::pointproc::{sample_poisson, IntensitySpec, SeedSpec};
use crate::scalar::exact_sum;
use crate::scores::{AnyModel, ScoreModel};

/// One simulated replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replicate {
    pub replicate: u64,
    pub seed: u64,
    pub statistic: f64,
    pub point_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n_reps: usize,
    #[serde(skip)]
    pub replicates: Vec<Replicate>,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
    /// `None` when every replicate gave the same value.
    #[serde(rename = "dK_emp")]
    pub dk_emp: Option<f64>,
    #[serde(rename = "dW_emp")]
    pub dw_emp: Option<f64>,
    pub degenerate: bool,
    /// Normal-theory 95% half widths for the mean and the variance.
    pub ci_halfwidths: [f64; 2],
}

impl EnsembleSummary {
    pub fn samples(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.statistic).collect()
    }

    /// `(H − mean)/sd`, refused for a degenerate ensemble.
    pub fn normalized(&self) -> Result<Vec<f64>> {
        if self.degenerate {
            return Err(crate::error::Error::DegenerateVariance);
        }
        let sd = self.var.sqrt();
        Ok(self.replicates.iter().map(|r| (r.statistic - self.mean) / sd).collect())
    }

    /// Normalization by externally known moments instead of the sample ones.
    pub fn normalized_by(&self, mean: f64, var: f64) -> Result<Vec<f64>> {
        if !(var > 0.0) {
            return Err(invalid("reference variance must be positive"));
        }
        let sd = var.sqrt();
        Ok(self.replicates.iter().map(|r| (r.statistic - mean) / sd).collect())
    }

    /// Rows `replicate,seed,statistic,point_count` in replicate order.
    pub fn write_samples_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.replicates {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Recomputes the summary of a set of replicates.
    pub fn from_replicates(replicates: Vec<Replicate>) -> Result<Self> {
        let n = replicates.len();
        if n < 2 {
            return Err(invalid(format!("need at least 2 replicates, got {n}")));
        }
        let values: Vec<f64> = replicates.iter().map(|r| r.statistic).collect();
        let nf = n as f64;
        let mean = exact_sum(values.iter().copied()) / nf;
        let m2 = exact_sum(values.iter().map(|v| (v - mean).powi(2))) / nf;
        let m4 = exact_sum(values.iter().map(|v| (v - mean).powi(4))) / nf;
        let var = m2 * nf / (nf - 1.0);
        let se_mean = (var / nf).sqrt();
        let se_var = ((m4 - m2 * m2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0).sqrt();
        let degenerate = values.iter().all(|v| *v == values[0]);
        let (dk_emp, dw_emp) = if degenerate {
            (None, None)
        } else {
            let sd = var.sqrt();
            let z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
            (Some(ks_distance(&z)?), Some(wasserstein1(&z)?))
        };
        Ok(Self {
            n_reps: n,
            replicates,
            mean,
            var,
            se_mean,
            se_var,
            dk_emp,
            dw_emp,
            degenerate,
            ci_halfwidths: [1.96 * se_mean, 1.96 * se_var],
        })
    }
}

/// Simulates `n_reps` replicates, replicate `i` seeded by `SeedSpec(base_seed, i)`.
/// The result does not depend on the size of the rayon pool.
pub fn run_ensemble(model: &AnyModel, intensity: &IntensitySpec, n_reps: usize, base_seed: u64) -> Result<EnsembleSummary> {
    intensity.validate()?;
    if n_reps < 2 {
        return Err(invalid(format!("n_reps must be at least 2, got {n_reps}")));
    }
    if intensity.space != model.space() || intensity.d != model.dim() {
        return Err(invalid("intensity does not match the model space"));
    }
    let replicates: Result<Vec<Replicate>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let seed = SeedSpec::new(base_seed, i);
            let config = sample_poisson(intensity, seed)?;
            let v = model.statistic(&config);
            Ok(Replicate { replicate: i, seed: seed.stream_seed(), statistic: v.value, point_count: v.point_count })
        })
        .collect();
    EnsembleSummary::from_replicates(replicates?)
}
