//! Dyadic-pair Holder modulus estimation for sampled derivatives.
//!
//! The supremum of |v(x) - v(y)| / |x - y|^alpha is probed over pair
//! separations 1, 2, 4, ... grid steps. For a genuinely C^alpha function the
//! per-scale constants stay level; for rougher data they grow toward the
//! finest scale, which is flagged as instability instead of being reported
//! as a finite constant.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct HolderEntry {
    pub alpha: f64,
    /// Largest quotient seen over all dyadic separations.
    pub constant: f64,
    /// Quotient at one grid step.
    pub finest: f64,
    /// False when the finest scales dominate, i.e. the constant has not
    /// stabilized under refinement.
    pub stable: bool,
}

fn scale_sup(vals: &[f64], step: usize, periodic: bool) -> f64 {
    let n = vals.len();
    let mut sup: f64 = 0.0;
    if periodic {
        for k in 0..n {
            sup = sup.max((vals[(k + step) % n] - vals[k]).abs());
        }
    } else {
        for k in 0..n - step {
            sup = sup.max((vals[k + step] - vals[k]).abs());
        }
    }
    sup
}

fn ladder(vals: &[f64], h: f64, periodic: bool, alphas: &[f64]) -> Vec<HolderEntry> {
    let n = vals.len();
    let max_step = if periodic { n / 2 } else { (n - 1) / 2 };
    let mut steps = Vec::new();
    let mut d = 1usize;
    while d <= max_step {
        steps.push(d);
        d *= 2;
    }
    let sups: Vec<(usize, f64)> = steps.iter().map(|&d| (d, scale_sup(vals, d, periodic))).collect();
    alphas
        .iter()
        .map(|&alpha| {
            let per_scale: Vec<f64> = sups
                .iter()
                .map(|&(d, s)| s / (d as f64 * h).powf(alpha))
                .collect();
            let constant = per_scale.iter().cloned().fold(0.0, f64::max);
            let finest = per_scale[0];
            let coarse = per_scale.iter().skip(2).cloned().fold(0.0, f64::max);
            let stable = coarse == 0.0 || finest <= 1.25 * coarse;
            HolderEntry {
                alpha,
                constant,
                finest,
                stable,
            }
        })
        .collect()
}

/// Ladder for samples on a circle of the given period.
pub fn ladder_periodic(vals: &[f64], period: f64, alphas: &[f64]) -> Vec<HolderEntry> {
    ladder(vals, period / vals.len() as f64, true, alphas)
}

/// Ladder for samples on a uniform interval grid.
pub fn ladder_interval(xs: &[f64], vals: &[f64], alphas: &[f64]) -> Vec<HolderEntry> {
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    ladder(vals, h, false, alphas)
}

/// Single Holder constant over dyadic separations on a uniform interval grid.
pub fn constant_interval(xs: &[f64], vals: &[f64], alpha: f64) -> f64 {
    ladder_interval(xs, vals, &[alpha])[0].constant
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_cusp() {
        // v(x) = |x|^0.5 on [-1, 1]: C_alpha finite for alpha <= 0.5,
        // growing under refinement for larger alpha.
        let n = 2049;
        let xs: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|x| x.abs().sqrt()).collect();
        let entries = ladder_interval(&xs, &vals, &[0.3, 0.5, 0.8]);
        assert!(entries[0].stable);
        assert!(entries[1].stable);
        assert!((entries[1].constant - 1.0).abs() < 0.15);
        assert!(!entries[2].stable);
    }

    #[test]
    fn smooth_function_is_stable() {
        let n = 512;
        let vals: Vec<f64> = (0..n)
            .map(|k| (std::f64::consts::TAU * k as f64 / n as f64).sin())
            .collect();
        for e in ladder_periodic(&vals, std::f64::consts::TAU, &[0.2, 0.5, 0.9]) {
            assert!(e.stable, "alpha={} finest={} constant={}", e.alpha, e.finest, e.constant);
        }
    }
}
