//! Assembly of the normalized Wasserstein and Kolmogorov bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::outer::OuterIntegrals;
use crate::bounds::terms::TermKind;
use crate::error::{invalid, Result};
use crate::pointproc::{BoxWindow, Point};
use crate::scalar::exact_sum;
use crate::scores::{AnyModel, LatticeIsolated, ScoreModel};

/// Where the variance in a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarSource {
    Empirical,
    Mecke,
    Exact,
}

/// Flat record of one bound evaluation. `dW_norm` and `dK_norm` are the
/// bounds with the unquantified constant set to one, so only their
/// behaviour across `s` carries meaning.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub model: String,
    pub s: f64,
    pub d: usize,
    pub p: f64,
    pub zeta: f64,
    pub beta: f64,
    pub int_f_beta_sq: f64,
    pub int_f_2beta: f64,
    pub int_kg_G: f64,
    pub kind_f_beta_sq: TermKind,
    pub kind_f_2beta: TermKind,
    pub kind_kg_G: TermKind,
    pub var: f64,
    pub var_source: VarSource,
    pub dW_norm: f64,
    pub dK_norm: f64,
    pub se_int_f_beta_sq: f64,
    pub se_int_f_2beta: f64,
    pub se_int_kg_G: f64,
    pub se_var: f64,
    pub constant: &'static str,
}

/// `(dW, dK)` with unit constant for integrals `(a, b, c)` and variance `v`.
pub fn normalized_bounds(a: f64, b: f64, c: f64, v: f64) -> (f64, f64) {
    let dw = a.sqrt() / v + c / v.powf(1.5);
    let dk = (a.sqrt() + b.sqrt()) / v + c.sqrt() / v + c / v.powf(1.5) + (c.powf(1.25) + c.powf(1.5)) / (v * v);
    (dw, dk)
}

/// Plugs the outer integrals and a variance into both bounds.
pub fn assemble_bound(
    model: &AnyModel,
    terms: &OuterIntegrals,
    var: f64,
    var_se: f64,
    var_source: VarSource,
) -> Result<BoundReport> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(invalid(format!("variance must be positive, got {var}")));
    }
    let (a, b, c) = (terms.int_f_beta_sq, terms.int_f_2beta, terms.int_kg_g);
    for t in [a, b, c] {
        if !(t.value >= 0.0) {
            return Err(invalid(format!("integral term must be non-negative, got {}", t.value)));
        }
    }
    let (dw, dk) = normalized_bounds(a.value, b.value, c.value, var);
    Ok(BoundReport {
        model: model.kind().to_string(),
        s: model.s(),
        d: model.dim(),
        p: model.p(),
        zeta: model.zeta(),
        beta: model.beta(),
        int_f_beta_sq: a.value,
        int_f_2beta: b.value,
        int_kg_G: c.value,
        kind_f_beta_sq: a.kind,
        kind_f_2beta: b.kind,
        kind_kg_G: c.kind,
        var,
        var_source,
        dW_norm: dw,
        dK_norm: dk,
        se_int_f_beta_sq: a.se,
        se_int_f_2beta: b.se,
        se_int_kg_G: c.se,
        se_var: var_se,
        constant: "up to the constant C(p)",
    })
}

/// Exact variance of the lattice statistic under a Poisson(s) field.
///
/// With `e = e^{-2ds}` (probability that all neighbours are empty), the
/// second factorial moment gives
/// `Var = Σ w²(s+s²)e − Σ_{x,y} w_x w_y s² e² (1 − 1{|x−y|₁>2} − corr)`,
/// where adjacent sites cannot both score and sites at distance two share
/// one or two neighbours.
pub fn lattice_variance(m: &LatticeIsolated) -> f64 {
    let s = m.s();
    let d = m.dim();
    let e = (-((2 * d) as f64) * s).exp();
    let sites = BoxWindow::centered(d, m.weight().half_width as f64).lattice_sites();
    let w = |x: &Point| m.weight().eval(x);
    let mut terms = Vec::new();
    for x in &sites {
        let wx = w(x);
        if wx == 0.0 {
            continue;
        }
        terms.push(wx * wx * (s + s * s) * e - wx * wx * s * s * e * e);
        for y in &sites {
            let dist = x.l1_dist(y);
            if dist == 0.0 || dist > 2.0 {
                continue;
            }
            let wy = w(y);
            if wy == 0.0 {
                continue;
            }
            if dist == 1.0 {
                terms.push(-wx * wy * s * s * e * e);
            } else {
                let diagonal = x.coords().iter().zip(y.coords()).filter(|(a, b)| a != b).count() == 2;
                let shared = if diagonal { 2.0 } else { 1.0 };
                terms.push(wx * wy * s * s * e * e * ((s * shared).exp() - 1.0));
            }
        }
    }
    exact_sum(terms)
}
