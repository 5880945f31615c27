//! Numerical evaluation of the bound ingredients and their assembly.

pub mod cfun;
mod loggrid;
pub mod outer;
pub mod quadrature;
pub mod report;
pub mod terms;

pub use cfun::{c_alpha_s, c_alpha_s_mc, mean_minimal};
pub use outer::{outer_integrals, outer_integrals_mc, OuterIntegrals};
pub use quadrature::{GaussLegendre, McSpec, QuadratureSpec};
pub use report::{assemble_bound, lattice_variance, normalized_bounds, BoundReport, VarSource};
pub use terms::{big_g_s, f_alpha, g_s, kappa_s, lens_volume, q_s, BoundTerm, FComponents, TermKind};
