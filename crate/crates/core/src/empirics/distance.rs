//! Kolmogorov and Wasserstein-1 distances between an empirical law and N(0,1).

use crate::empirics::normal::{phi, phi_integral, quantile};
use crate::error::{invalid, Result};

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(invalid("distance of an empty sample"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// `sup_t |F_n(t) − Φ(t)|`, checked on both sides of every jump.
pub fn ks_distance(samples: &[f64]) -> Result<f64> {
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let mut best: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let p = phi(v[i]);
        best = best.max((i as f64 / n - p).abs()).max((j as f64 / n - p).abs());
        i = j;
    }
    Ok(best)
}

/// `∫ |F_n(t) − Φ(t)| dt`, exact up to the accuracy of `Φ` and `Ψ`.
pub fn wasserstein1(samples: &[f64]) -> Result<f64> {
    let v = sorted(samples)?;
    let n = v.len();
    let mut parts = Vec::with_capacity(n + 1);
    parts.push(phi_integral(v[0]));
    parts.push(phi_integral(-v[n - 1]));
    for k in 1..n {
        let (a, b) = (v[k - 1], v[k]);
        if a == b {
            continue;
        }
        let c = k as f64 / n as f64;
        // ∫_a^b |c − Φ|, splitting where Φ crosses the level c
        let t = quantile(c).clamp(a, b);
        let below = c * (t - a) - (phi_integral(t) - phi_integral(a));
        let above = (phi_integral(b) - phi_integral(t)) - c * (b - t);
        parts.push(below.max(0.0) + above.max(0.0));
    }
    Ok(crate::scalar::exact_sum(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointproc::StreamRng;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| quantile((i as f64 + 0.5) / n as f64)).collect()
    }

    #[test]
    fn single_point_at_zero() {
        assert!((ks_distance(&[0.0]).unwrap() - 0.5).abs() < 1e-15);
        let w = wasserstein1(&[0.0]).unwrap();
        assert!((w - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((wasserstein1(&[0.0; 5]).unwrap() - w).abs() < 1e-12);
    }

    #[test]
    fn quantile_grid_is_close() {
        let n = 10_000;
        let g = grid(n);
        assert!(ks_distance(&g).unwrap() <= 0.5 / n as f64 + 1e-6);
        assert!(wasserstein1(&g).unwrap() < 1e-3);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(ks_distance(&[]).is_err());
        assert!(wasserstein1(&[]).is_err());
    }

    #[test]
    fn merged_copies_keep_ks() {
        let mut rng = StreamRng::from_seed(3);
        let a: Vec<f64> = (0..500).map(|_| rng.standard_normal() * 1.3 + 0.2).collect();
        let mut b = a.clone();
        b.extend_from_slice(&a);
        assert_eq!(ks_distance(&a).unwrap(), ks_distance(&b).unwrap());
    }

    #[test]
    fn shift_is_lipschitz() {
        let mut rng = StreamRng::from_seed(9);
        let a: Vec<f64> = (0..300).map(|_| rng.standard_normal()).collect();
        let base = wasserstein1(&a).unwrap();
        for _ in 0..50 {
            let c = 4.0 * rng.uniform() - 2.0;
            let shifted: Vec<f64> = a.iter().map(|x| x + c).collect();
            assert!((wasserstein1(&shifted).unwrap() - base).abs() <= c.abs() + 1e-12);
        }
    }

    /// Trapezoid evaluation on a fine grid as an independent check.
    fn trapezoid(samples: &[f64]) -> (f64, f64) {
        let mut v = samples.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len() as f64;
        let (lo, hi, m) = (-12.0, 12.0, 2_400_000);
        let h = (hi - lo) / m as f64;
        let mut ks: f64 = 0.0;
        let mut w = 0.0;
        let mut k = 0;
        let mut prev = None;
        for i in 0..=m {
            let t = lo + i as f64 * h;
            while k < v.len() && v[k] <= t {
                k += 1;
            }
            let diff = (k as f64 / n - phi(t)).abs();
            ks = ks.max(diff);
            if let Some(p) = prev {
                w += 0.5 * h * (p + diff);
            }
            prev = Some(diff);
        }
        (ks, w)
    }

    #[test]
    fn agrees_with_grid_evaluation() {
        let mut rng = StreamRng::from_seed(21);
        let a: Vec<f64> = (0..40).map(|_| rng.standard_normal() * 0.8 + 0.3).collect();
        let (ks, w) = trapezoid(&a);
        assert!((ks_distance(&a).unwrap() - ks).abs() < 1e-5);
        assert!((wasserstein1(&a).unwrap() - w).abs() < 1e-6);
    }

    #[test]
    fn normal_draws_pass_dkw() {
        let n = 100_000;
        let mut fails = 0;
        for seed in 0..5 {
            let mut rng = StreamRng::from_seed(seed);
            let a: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
            if ks_distance(&a).unwrap() >= 1.95 / (n as f64).sqrt() {
                fails += 1;
            }
        }
        assert_eq!(fails, 0);
    }
}
