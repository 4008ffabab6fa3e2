//! Schwarzian derivatives, the projection of Beltrami coefficients onto
//! quadratic forms, and the weighted norm hierarchy on those forms.
//!
//! Forms are carried jointly as exterior grid samples and as a Laurent
//! series fitted across the sampled circles; the scatter of the per-circle
//! coefficient estimates is the holomorphy residual. Every bounded form
//! decays like z^{-4}, so the weighted profile extends continuously to
//! infinity and the sup norm can be refined off-grid in the u = 1/z chart,
//! where the weighted modulus is smooth on the closed disk.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::beltrami::{BeltramiField, NormOutcome};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::{log_log_slope_fit, Chart, ComplexGridFunction, GridSpec};
use crate::laurent::{fit_laurent, LaurentSeries};
use crate::mobius::{FuchsianSample, MobiusMap};
use crate::solver::{solve_bers, SolvedMap};

/// Per-annulus growth that flags a weighted sup as unbounded.
const GROWTH_MARGIN: f64 = 1.05;
/// Refinement of the sup off the grid only makes sense on clean fits.
const REFINE_RESIDUAL: f64 = 1e-6;

/// Holomorphic quadratic form on the exterior, sampled on the annular grid.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    pub samples: ComplexGridFunction,
    pub series: LaurentSeries,
    pub holo_residual: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayEstimate {
    pub alpha_hat: f64,
    pub r_squared: f64,
    /// True when part of the profile sat below the numerical floor, so the
    /// fitted exponent only bounds the decay from below.
    pub lower_bound_only: bool,
    /// True when the finest annuli were dropped because the angular
    /// resolution cannot represent the form that close to the circle.
    pub resolution_limited: bool,
}

impl QuadraticForm {
    /// Build from exterior circle samples; fits the Laurent series and
    /// records how far the samples are from any holomorphic function.
    pub fn from_exterior_samples(spec: Arc<GridSpec>, rows: &[Vec<Complex64>]) -> Result<Self> {
        let radii = spec.radii_outer.clone();
        if rows.len() != radii.len() {
            return Err(Error::Grid("row count does not match the exterior circles".into()));
        }
        let m_max = -1;
        let m_min = -((spec.n_theta / 2) as i64 - 2);
        let (series, holo_residual) = fit_laurent(&radii, rows, m_min, m_max)?;
        let values: Vec<Complex64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        let samples = ComplexGridFunction::new(spec, Chart::Exterior, values)?;
        let peak = series.max_coeff();
        Ok(QuadraticForm {
            samples,
            series: series.trimmed(peak * 1e-15),
            holo_residual,
        })
    }

    pub fn from_series(spec: Arc<GridSpec>, series: LaurentSeries) -> Result<Self> {
        let samples = ComplexGridFunction::from_fn(spec, Chart::Exterior, |z| series.eval(z))?;
        Ok(QuadraticForm {
            samples,
            series,
            holo_residual: 0.0,
        })
    }

    pub fn zero(spec: Arc<GridSpec>) -> Self {
        QuadraticForm::from_series(spec, LaurentSeries::zero()).expect("zero form is valid")
    }

    pub fn spec(&self) -> &Arc<GridSpec> {
        &self.samples.spec
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.series.eval(z)
    }

    pub fn sub(&self, other: &QuadraticForm) -> Result<QuadraticForm> {
        let samples = self.samples.zip_with(&other.samples, |a, b| a - b)?;
        Ok(QuadraticForm {
            samples,
            series: self.series.sub(&other.series),
            holo_residual: self.holo_residual.max(other.holo_residual),
        })
    }

    /// rho^{-2}(z) |phi(z)| at a sample.
    fn weighted_sample(&self, c: usize, k: usize) -> f64 {
        let r = self.spec().radii_outer[c];
        let w = (r * r - 1.0) * (r * r - 1.0) / 4.0;
        self.samples.value(c, k).norm() * w
    }

    /// Per-annulus maxima of the weighted modulus on the circles 1 + eps_j,
    /// outermost offset first.
    pub fn decay_profile(&self) -> Vec<(f64, f64)> {
        self.spec()
            .outer_boundary_rows()
            .iter()
            .map(|&(c, eps)| {
                let m = (0..self.spec().n_theta)
                    .map(|k| self.weighted_sample(c, k))
                    .fold(0.0, f64::max);
                (eps, m)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        self.samples.to_csv()
    }
}

/// S_f = f'''/f' - (3/2)(f''/f')^2 sampled on the exterior grid, from the
/// Laurent representation of a conformal exterior restriction.
fn schwarzian_from_series(spec: Arc<GridSpec>, f: &LaurentSeries) -> Result<QuadraticForm> {
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let n = spec.n_theta;
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(spec.radii_outer.len());
    for &r in &spec.radii_outer {
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            let z = Complex64::from_polar(r, spec.theta(k));
            let fp = d1.eval(z);
            if fp.norm() < 1e-8 {
                return Err(Error::Branch(format!(
                    "f' vanishes near z = {z}; the map is not injective there"
                )));
            }
            let q = d2.eval(z) / fp;
            row.push(d3.eval(z) / fp - q * q * 1.5);
        }
        rows.push(row);
    }
    QuadraticForm::from_exterior_samples(spec, &rows)
}

/// Schwarzian derivative of a solved Bers-kind map on the exterior.
pub fn schwarzian(f: &SolvedMap) -> Result<QuadraticForm> {
    let tail = f
        .exterior_tail()
        .ok_or_else(|| Error::Chart("schwarzian needs a Bers-kind solved map".into()))?;
    let full = tail.add(&LaurentSeries::new(1, vec![Complex64::new(1.0, 0.0)]));
    schwarzian_from_series(f.spec().clone(), &full)
}

/// Schwarzian of a holomorphic exterior function given by circle samples
/// (used for Mobius-composed maps where no solved tail exists).
pub fn schwarzian_of_exterior_samples(
    spec: Arc<GridSpec>,
    rows: &[Vec<Complex64>],
) -> Result<QuadraticForm> {
    // positive powers appear when the function has singularities beyond the
    // sampled annulus (e.g. the pole of a post-composed Mobius map)
    let m_min = -((spec.n_theta / 2) as i64 - 2);
    let m_max = ((spec.n_theta / 2) as i64 - 2).min(24);
    let (series, res) = fit_laurent(&spec.radii_outer, rows, m_min, m_max)?;
    if res > 1e-6 {
        return Err(Error::Branch(format!(
            "exterior samples are not holomorphic: residual {res:.3e}"
        )));
    }
    schwarzian_from_series(spec, &series)
}

/// The projection mu -> S_{f_mu} restricted to the exterior.
pub fn bers_projection(mu: &BeltramiField, cfg: &Config) -> Result<QuadraticForm> {
    schwarzian(&solve_bers(mu, cfg)?)
}

/// Smooth weighted modulus in the u = 1/z chart:
/// W(u) = ((1 - |u|^2)^2 / 4) |sum c_m u^{-m-4}|.
fn weighted_u(series_q: &LaurentSeries, u: Complex64) -> f64 {
    let w = (1.0 - u.norm_sqr()).powi(2) / 4.0;
    w * series_q.eval_poly(u)
}

impl LaurentSeries {
    /// |sum c_m u^{-m-4}| where the coefficients are interpreted after the
    /// z -> 1/u substitution and division by z^{-4}.
    fn eval_poly(&self, u: Complex64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = self.m_min + i as i64;
            let pow = (-m - 4) as i32;
            if pow >= 0 {
                acc += c * u.powi(pow);
            }
        }
        acc.norm()
    }
}

/// Hyperbolic sup norm: grid maximum, the limit at infinity, and a
/// deterministic off-grid refinement when the series fit is trustworthy.
pub fn b_norm(phi: &QuadraticForm) -> f64 {
    let spec = phi.spec().clone();
    let n = spec.n_theta;
    // z^{-1}..z^{-3} content makes the weighted modulus blow up at infinity;
    // demand it exceed both the fit-noise floor and an absolute floor so a
    // form that is zero to roundoff keeps a tiny finite norm
    let rough: f64 = (-3..=-1)
        .map(|m| phi.series.coeff(m).norm())
        .sum();
    let scale = phi.series.max_coeff().max(1e-300);
    if rough > 1e-7 && rough > 1e-8 * scale {
        return f64::INFINITY;
    }
    let mut best = phi.series.coeff(-4).norm() / 4.0;
    let mut candidates: Vec<(f64, Complex64)> = vec![(best, Complex64::new(0.0, 0.0))];
    let mut sample_max: f64 = 0.0;
    for c in 0..spec.radii_outer.len() {
        for k in 0..n {
            let v = phi.weighted_sample(c, k);
            sample_max = sample_max.max(v);
            let r = spec.radii_outer[c];
            let u = Complex64::from_polar(1.0 / r, -spec.theta(k));
            candidates.push((v, u));
        }
    }
    best = best.max(sample_max);
    if phi.holo_residual > REFINE_RESIDUAL {
        return best;
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    candidates.truncate(4);
    for (_, start) in candidates {
        let refined = refine_max(&phi.series, start);
        best = best.max(refined);
    }
    best
}

/// 5x5 shrinking-stencil ascent of the smooth weighted modulus in the u
/// chart; deterministic and derivative-free.
fn refine_max(series: &LaurentSeries, start: Complex64) -> f64 {
    let mut center = start;
    let mut best = weighted_u(series, center);
    let mut window = 0.2;
    for _ in 0..70 {
        let mut improved = false;
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                if i == 0 && j == 0 {
                    continue;
                }
                let u = center + Complex64::new(i as f64, j as f64) * (window / 2.0);
                if u.norm() >= 1.0 {
                    continue;
                }
                let v = weighted_u(series, u);
                if v > best {
                    best = v;
                    center = u;
                    improved = true;
                }
            }
        }
        window *= if improved { 0.7 } else { 0.5 };
        if window < 1e-13 {
            break;
        }
    }
    best
}

/// Weighted sup with exponent shifted by alpha; flagged divergent when the
/// boundary annuli keep growing.
pub fn b0_alpha_norm(phi: &QuadraticForm, alpha: f64) -> Result<NormOutcome> {
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::Argument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let spec = phi.spec().clone();
    let n = spec.n_theta;
    let mut sup: f64 = 0.0;
    for (c, &r) in spec.radii_outer.iter().enumerate() {
        let rho = 2.0 / (r * r - 1.0);
        let w = rho.powf(alpha - 2.0);
        for k in 0..n {
            sup = sup.max(phi.samples.value(c, k).norm() * w);
        }
    }
    let rows = spec.outer_boundary_rows();
    let m: Vec<f64> = rows
        .iter()
        .map(|&(c, _)| {
            let r = spec.radii_outer[c];
            let w = (2.0 / (r * r - 1.0)).powf(alpha - 2.0);
            (0..n)
                .map(|k| phi.samples.value(c, k).norm() * w)
                .fold(0.0, f64::max)
        })
        .collect();
    let j = m.len();
    if j >= 3 {
        let growing = m[j - 1] > m[j - 2] && m[j - 2] > m[j - 3];
        if growing && m[j - 1] >= GROWTH_MARGIN * m[j - 3] {
            return Ok(NormOutcome::Divergent);
        }
    }
    Ok(NormOutcome::Finite(sup))
}

/// ||phi||_p with ||phi||_p^p = int rho^{2-2p} |phi|^p dA over the exterior;
/// boundary divergence by the Cauchy criterion on the innermost annuli, far
/// tail by power-law extrapolation beyond the outermost circle.
pub fn a_p_norm(phi: &QuadraticForm, p: f64) -> Result<NormOutcome> {
    if p < 2.0 {
        return Err(Error::Argument(format!("p = {p} must be >= 2")));
    }
    let spec = phi.spec().clone();
    let n = spec.n_theta as f64;
    // ascending radii with mean |phi|^p per circle
    let mut rows: Vec<(f64, f64)> = spec
        .radii_outer
        .iter()
        .enumerate()
        .map(|(c, &r)| {
            let mean = phi.samples.row(c).iter().map(|v| v.norm().powf(p)).sum::<f64>() / n;
            (r, mean)
        })
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let integrand = |r: f64, mean: f64| {
        std::f64::consts::TAU * mean * ((r * r - 1.0) / 2.0).powf(2.0 * p - 2.0) * r
    };
    let vals: Vec<f64> = rows.iter().map(|&(r, m)| integrand(r, m)).collect();
    // sliver [1, r_0]: the weight vanishes at the circle for p >= 2
    let mut segments = vec![0.5 * vals[0] * (rows[0].0 - 1.0)];
    for i in 1..rows.len() {
        segments.push(0.5 * (vals[i - 1] + vals[i]) * (rows[i].0 - rows[i - 1].0));
    }
    let total_zero = segments.iter().all(|&s| s == 0.0);
    if total_zero {
        return Ok(NormOutcome::Finite(0.0));
    }
    // Cauchy criterion toward the boundary
    if segments.len() >= 3 && !(segments[0] < segments[1] * 0.999 && segments[1] < segments[2] * 0.999)
    {
        return Ok(NormOutcome::Divergent);
    }
    // far tail
    let m = rows.len();
    let (r_lo, r_hi) = (rows[m - 2].0, rows[m - 1].0);
    let (i_lo, i_hi) = (vals[m - 2], vals[m - 1]);
    let tail = if i_hi <= 0.0 {
        0.0
    } else {
        let s = (i_hi / i_lo).ln() / (r_hi / r_lo).ln();
        if s >= -1.1 {
            return Ok(NormOutcome::Divergent);
        }
        i_hi * r_hi / (-s - 1.0)
    };
    let total: f64 = segments.iter().sum::<f64>() + tail;
    Ok(NormOutcome::Finite(total.powf(1.0 / p)))
}

/// (gamma^* phi)(z) = phi(gamma(z)) gamma'(z)^2, the isometric pullback by a
/// Mobius map of the exterior.
pub fn pullback(phi: &QuadraticForm, gamma: &MobiusMap) -> Result<QuadraticForm> {
    let spec = phi.spec().clone();
    let rows: Vec<Vec<Complex64>> = spec
        .radii_outer
        .iter()
        .map(|&r| {
            (0..spec.n_theta)
                .map(|k| {
                    let z = Complex64::from_polar(r, spec.theta(k));
                    let d = gamma.derivative(z);
                    phi.eval(gamma.apply(z)) * d * d
                })
                .collect()
        })
        .collect();
    QuadraticForm::from_exterior_samples(spec, &rows)
}

/// max over the sample's generators of ||gamma^* phi - phi||_B.
pub fn invariance_residual(phi: &QuadraticForm, sample: &FuchsianSample) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in &sample.generators {
        let pulled = pullback(phi, g)?;
        worst = worst.max(b_norm(&pulled.sub(phi)?));
    }
    Ok(worst)
}

/// Fitted decay exponent of the weighted boundary profile.
///
/// When the Laurent coefficients have not decayed by the bottom of the
/// representable mode range, the form is under-resolved at boundary
/// distances below a few multiples of 1/(mode count); those annuli are
/// excluded from the fit rather than biasing it toward spurious fast decay.
pub fn decay_exponent(phi: &QuadraticForm) -> Result<DecayEstimate> {
    let profile = phi.decay_profile();
    let peak = profile.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Argument("profile is identically zero".into()));
    }
    let coeff_peak = phi.series.max_coeff();
    // resolution only becomes a concern when the series runs into the bottom
    // of the representable mode range while still carrying weight there
    let representable_floor = -((phi.spec().n_theta / 2) as i64 - 2);
    let min_eps = if phi.series.m_min <= representable_floor + 2 {
        let span = (-phi.series.m_min).max(8) as usize;
        let lowest_octave = (span / 8).max(2).min(phi.series.coeffs.len());
        let tail_weight = phi.series.coeffs[..lowest_octave]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if tail_weight > 1e-8 * coeff_peak {
            4.0 / span as f64
        } else {
            0.0
        }
    } else {
        0.0
    };
    let floor = peak * 1e-13;
    let mut kept: Vec<(f64, f64)> = profile
        .iter()
        .filter(|p| p.1 > floor && p.0 >= min_eps)
        .cloned()
        .collect();
    let lower_bound_only = profile.iter().any(|p| p.1 <= floor);
    let resolution_limited = min_eps > 0.0;
    // the coarsest annuli sit in the bulk where the power law has not set in
    while kept.len() > 4 && kept[0].0 > 0.25 {
        kept.remove(0);
    }
    if kept.len() < 4 {
        return Err(Error::Resolution(format!(
            "only {} annuli usable for the decay fit",
            kept.len()
        )));
    }
    // the exponent is an asymptotic boundary quantity: fit the finest annuli
    if kept.len() > 8 {
        kept.drain(0..kept.len() - 8);
    }
    let (alpha_hat, r_squared) = log_log_slope_fit(&kept)?;
    Ok(DecayEstimate {
        alpha_hat,
        r_squared,
        lower_bound_only,
        resolution_limited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> Arc<GridSpec> {
        GridSpec::with_n_theta(128)
    }

    fn cfg() -> Config {
        Config::default()
    }

    /// phi(z) = -6k/(z^2 - k)^2, the projection of the constant coefficient k.
    fn constant_projection_form(k: f64, z: Complex64) -> Complex64 {
        let d = z * z - Complex64::new(k, 0.0);
        Complex64::new(-6.0 * k, 0.0) / (d * d)
    }

    #[test]
    fn schwarzian_of_identity_vanishes() {
        let f = solve_bers(&BeltramiField::zero(spec()), &cfg()).unwrap();
        let phi = schwarzian(&f).unwrap();
        assert!(b_norm(&phi) < 1e-12);
    }

    #[test]
    fn schwarzian_of_constant_coefficient() {
        let k = 0.1;
        let mu = BeltramiField::constant(spec(), Complex64::new(k, 0.0)).unwrap();
        let f = solve_bers(&mu, &cfg()).unwrap();
        let phi = schwarzian(&f).unwrap();
        // spot value at z = 2
        let z = Complex64::new(2.0, 0.0);
        let got = phi.eval(z);
        let want = constant_projection_form(k, z);
        assert!((got - want).norm() < 1e-10 * want.norm());
        assert!((want.norm() - 0.6 / 15.21).abs() < 1e-6);
        let weighted = (z.norm_sqr() - 1.0).powi(2) / 4.0 * got.norm();
        assert!((weighted - 2.25 * 0.039448).abs() < 1e-4);
        // relative accuracy over the whole grid
        for (c, &r) in spec().radii_outer.iter().enumerate() {
            for k_idx in 0..spec().n_theta {
                let z = Complex64::from_polar(r, spec().theta(k_idx));
                let want = constant_projection_form(k, z);
                let got = phi.samples.value(c, k_idx);
                assert!(
                    (got - want).norm() <= 1e-6 * want.norm(),
                    "r={r}: rel err {}",
                    (got - want).norm() / want.norm()
                );
            }
        }
    }

    #[test]
    fn left_mobius_invariance() {
        let mu = BeltramiField::constant(spec(), Complex64::new(0.08, 0.04)).unwrap();
        let f = solve_bers(&mu, &cfg()).unwrap();
        let phi = schwarzian(&f).unwrap();
        let m = MobiusMap::from_center_rotation(Complex64::new(0.04, -0.03), 0.7).unwrap();
        // sample M(f) on the exterior circles and recompute the Schwarzian
        let rows: Vec<Vec<Complex64>> = spec()
            .radii_outer
            .iter()
            .map(|&r| {
                (0..spec().n_theta)
                    .map(|k| m.apply(f.evaluate(Complex64::from_polar(r, spec().theta(k))).unwrap()))
                    .collect()
            })
            .collect();
        let phi2 = schwarzian_of_exterior_samples(spec(), &rows).unwrap();
        let diff = b_norm(&phi2.sub(&phi).unwrap());
        assert!(diff < 1e-6, "Mobius invariance violated by {diff}");
    }

    #[test]
    fn bers_projection_examples() {
        // mu = 0: zero form
        let phi = bers_projection(&BeltramiField::zero(spec()), &cfg()).unwrap();
        assert!(b_norm(&phi) < 1e-12);
        // radial stretch projects to zero
        let mu = BeltramiField::radial_stretch(spec(), 2.0).unwrap();
        let phi = bers_projection(&mu, &cfg()).unwrap();
        assert!(b_norm(&phi) < 5e-3, "stretch projects to {}", b_norm(&phi));
        // constant 0.1 matches the closed form at moderate radii
        let mu = BeltramiField::constant(spec(), Complex64::new(0.1, 0.0)).unwrap();
        let phi = bers_projection(&mu, &cfg()).unwrap();
        for (c, &r) in spec().radii_outer.iter().enumerate() {
            if r < 1.5 {
                continue;
            }
            for k_idx in 0..spec().n_theta {
                let z = Complex64::from_polar(r, spec().theta(k_idx));
                let want = constant_projection_form(0.1, z);
                let got = phi.samples.value(c, k_idx);
                assert!((got - want).norm() <= 1e-3 * want.norm());
            }
        }
    }

    #[test]
    fn b_norm_far_field_and_profile() {
        // phi = c/z^4: weighted sup attained at infinity, value c/4
        let c = 0.2;
        let phi = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(-4, vec![Complex64::new(c, 0.0)]),
        )
        .unwrap();
        let norm = b_norm(&phi);
        assert!((norm - c / 4.0).abs() < 1e-12, "b_norm {norm}");
        // profile decays like eps^2 with slope about 2
        let est = decay_exponent(&phi).unwrap();
        assert!((est.alpha_hat - 2.0).abs() < 0.15, "slope {}", est.alpha_hat);

        let k = 0.1;
        let phi = bers_projection(
            &BeltramiField::constant(spec(), Complex64::new(k, 0.0)).unwrap(),
            &cfg(),
        )
        .unwrap();
        // far-field limiting weighted value is (3/2) k
        let norm = b_norm(&phi);
        assert!(norm >= 1.5 * k - 1e-3, "b_norm {norm}");
        let est = decay_exponent(&phi).unwrap();
        assert!((est.alpha_hat - 2.0).abs() < 0.1);
    }

    #[test]
    fn non_decaying_profile_has_zero_exponent() {
        // phi = c/(z^2-1)^2 is holomorphic on the open exterior with a
        // non-decaying weighted profile along the real axis
        let c = 0.4;
        let rows: Vec<Vec<Complex64>> = spec()
            .radii_outer
            .iter()
            .map(|&r| {
                (0..spec().n_theta)
                    .map(|k| {
                        let z = Complex64::from_polar(r, spec().theta(k));
                        let d = z * z - Complex64::new(1.0, 0.0);
                        Complex64::new(c, 0.0) / (d * d)
                    })
                    .collect()
            })
            .collect();
        let phi = QuadraticForm::from_exterior_samples(spec(), &rows).unwrap();
        let est = decay_exponent(&phi).unwrap();
        assert!(est.alpha_hat.abs() < 0.1, "slope {}", est.alpha_hat);
    }

    #[test]
    fn pullback_isometry_and_cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(
                -6,
                vec![
                    Complex64::new(0.05, 0.02),
                    Complex64::new(-0.03, 0.0),
                    Complex64::new(0.1, -0.04),
                ],
            ),
        )
        .unwrap();
        let id = MobiusMap::identity();
        let same = pullback(&base, &id).unwrap();
        assert!(b_norm(&same.sub(&base).unwrap()) < 1e-12);
        for _ in 0..5 {
            let r: f64 = rng.gen_range(0.0..0.5);
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phi_angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let g = MobiusMap::from_center_rotation(Complex64::from_polar(r, t), phi_angle).unwrap();
            let pulled = pullback(&base, &g).unwrap();
            let d = (b_norm(&pulled) - b_norm(&base)).abs();
            assert!(d < 1e-6, "isometry off by {d}");
            // cocycle
            let h = MobiusMap::from_center_rotation(Complex64::new(0.2, 0.1), 0.3).unwrap();
            let lhs = pullback(&base, &g.compose(&h)).unwrap();
            let rhs = pullback(&pullback(&base, &g).unwrap(), &h).unwrap();
            assert!(b_norm(&lhs.sub(&rhs).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn invariance_residual_examples() {
        let zero = QuadraticForm::zero(spec());
        let gamma = MobiusMap::hyperbolic_axis_real(0.4).unwrap();
        let sample = FuchsianSample::new(vec![gamma], 2).unwrap();
        assert!(invariance_residual(&zero, &sample).unwrap() < 1e-15);

        let generic = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(-5, vec![Complex64::new(0.2, 0.0), Complex64::new(0.0, 0.1)]),
        )
        .unwrap();
        assert!(invariance_residual(&generic, &sample).unwrap() > 1e-3);
    }

    #[test]
    fn a_p_norm_behavior() {
        // c/z^4 is p-integrable for every p >= 2
        let phi = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(-4, vec![Complex64::new(0.3, 0.0)]),
        )
        .unwrap();
        let n2 = a_p_norm(&phi, 2.0).unwrap();
        assert!(n2.finite().is_some());
        let n4 = a_p_norm(&phi, 4.0).unwrap();
        assert!(n4.finite().is_some());
        assert!(a_p_norm(&phi, 1.5).is_err());
        // finite a_p implies a vanishing profile: last annulus well below first
        let profile = phi.decay_profile();
        assert!(profile.last().unwrap().1 < profile[0].1 / 10.0);
        // zero form
        assert_eq!(a_p_norm(&QuadraticForm::zero(spec()), 2.0).unwrap(), NormOutcome::Finite(0.0));
    }

    #[test]
    fn nehari_type_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..4 {
            let a = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let b = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let mu = BeltramiField::from_fn(spec(), |z| {
                (a + b * z * 0.5) * (1.0 - 0.3 * z.norm_sqr())
            })
            .unwrap();
            if crate::beltrami::sup_norm(&mu) > 0.3 {
                continue;
            }
            let phi = bers_projection(&mu, &cfg()).unwrap();
            assert!(b_norm(&phi) <= 6.0);
        }
    }

    #[test]
    fn projection_is_equivariant_under_pullback() {
        // Phi(gamma^* nu) = gamma^* Phi(nu): the coefficient pullback is
        // (gamma^* nu)(z) = nu(gamma z) conj(gamma'(z)) / gamma'(z)
        let sp = GridSpec::coarse();
        let cfg = cfg();
        let nu = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.15, 0.05) * (Complex64::new(1.0, 0.0) - z * z.conj())
        })
        .unwrap();
        let gamma = MobiusMap::from_center_rotation(Complex64::new(0.2, -0.1), 0.6).unwrap();
        let pulled_field = {
            let interp = |w: Complex64| {
                // nu is given by a closure here, evaluate directly
                Complex64::new(0.15, 0.05) * (Complex64::new(1.0, 0.0) - w * w.conj())
            };
            BeltramiField::from_fn(sp.clone(), |z| {
                let d = gamma.derivative(z);
                interp(gamma.apply(z)) * d.conj() / d
            })
            .unwrap()
        };
        let lhs = bers_projection(&pulled_field, &cfg).unwrap();
        let rhs = pullback(&bers_projection(&nu, &cfg).unwrap(), &gamma).unwrap();
        let diff = b_norm(&lhs.sub(&rhs).unwrap());
        assert!(diff < 1e-2, "equivariance defect {diff}");
    }

    #[test]
    fn lehto_bound_for_annulus_supported_coefficient() {
        // coefficient supported in {|z| > 0.6}: Schwarzian norm <= 3 sup |mu|
        let k = 0.1;
        let mu = BeltramiField::from_fn(spec(), |z| {
            if z.norm() > 0.6 {
                Complex64::new(k, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let phi = bers_projection(&mu, &cfg()).unwrap();
        let bound = 3.0 * k * (1.0 + 0.05);
        assert!(
            b_norm(&phi) <= bound,
            "norm {} exceeds Lehto-type bound {bound}",
            b_norm(&phi)
        );
    }
}
