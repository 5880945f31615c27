//! Ensembles, distances to the normal law and scaling fits.

pub mod distance;
pub mod ensemble;
pub mod fit;
pub mod moments;
pub mod normal;

pub use distance::{ks_distance, wasserstein1};
pub use ensemble::{run_ensemble, EnsembleSummary, Replicate};
pub use fit::{scaling_fit, ScalingFit};
pub use moments::{mean_rgg, variance_mecke_minimal, weight_moment_rgg};
