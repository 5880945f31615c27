//! Normal approximation bounds for region-stabilizing functionals of Poisson
//! processes, with simulators and numerical evaluation of the bound terms.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod empirics;
pub mod error;
pub mod malliavin;
pub mod pointproc;
pub mod scalar;
pub mod scores;
pub mod verify;

pub use error::{Error, Result};
pub use pointproc::{Point, PointConfiguration, SpaceTag};
pub use scalar::{exact_sum, Estimate, Real};
pub use scores::{AnyModel, ModelKind, ScoreModel};

/// Double-precision instances of the generic numeric kernels.
pub type Estimate64 = Estimate<f64>;
pub type GaussLegendre64 = bounds::GaussLegendre<f64>;
