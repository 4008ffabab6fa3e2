//! Conformally natural extension machinery: the barycentric extension of
//! circle homeomorphisms, the Ahlfors-Weill section of small quadratic
//! forms, and the regularity classifier tying boundary smoothness to the
//! decay of the extension's dilatation and of its projected form.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

pub use crate::circle::CircleMap;

use crate::beltrami::BeltramiField;
use crate::bers::{bers_projection, decay_exponent, QuadraticForm};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::{Chart, ComplexGridFunction, GridSpec};
use crate::holder::{ladder_periodic, HolderEntry};
use crate::transforms::{wirtinger_derivatives, AngularFft, PolarInterp};

/// Barycentric extension of a circle homeomorphism: values on the inner grid
/// plus the dilatation field of the extension.
pub struct BarycentricExtension {
    pub spec: Arc<GridSpec>,
    /// Extension values on the grid circles and on the boundary circle.
    rows: Vec<Vec<Complex64>>,
    radii: Vec<f64>,
    pub center: Complex64,
    pub field: BeltramiField,
    /// Empirical constant in rho^2(e(z)) J(z) <= C rho^2(z).
    pub jacobian_bound: f64,
    interp: PolarInterp,
}

impl BarycentricExtension {
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::Chart("barycentric extension lives on the disk".into()));
        }
        Ok(self.interp.eval(z.norm().min(1.0), z.arg()))
    }

    pub fn grid_rows(&self) -> (&[f64], &[Vec<Complex64>]) {
        (&self.radii, &self.rows)
    }
}

/// Boundary points g(psi_z(t_j)) of the harmonic measure at z pushed through
/// g; independent of the barycenter unknown, so computed once per z.
fn pushed_boundary(g: &CircleMap, z: Complex64, n_q: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    (0..n_q)
        .map(|j| {
            let t = TAU * j as f64 / n_q as f64;
            let xi = Complex64::from_polar(1.0, t);
            let pushed = (xi + z) / (one + z.conj() * xi);
            Complex64::from_polar(1.0, g.eval(pushed.arg()))
        })
        .collect()
}

/// Conformal barycenter equation at one point: F(w) = mean of
/// (u - w)/(1 - conj(w) u) over the pushed boundary points.
fn barycenter_residual(us: &[Complex64], w: Complex64) -> (Complex64, Complex64, Complex64) {
    let mut f = Complex64::new(0.0, 0.0);
    let mut a = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for &u in us {
        let den = one - w.conj() * u;
        f += (u - w) / den;
        a -= den.inv();
        b += u * (u - w) / (den * den);
    }
    let s = 1.0 / us.len() as f64;
    (f * s, a * s, b * s)
}

fn solve_barycenter(
    g: &CircleMap,
    z: Complex64,
    start: Complex64,
    n_q: usize,
    cfg: &Config,
) -> Result<Complex64> {
    let us = pushed_boundary(g, z, n_q);
    let mut w = start;
    if w.norm() > 0.999 {
        w *= 0.999 / w.norm();
    }
    let (mut f, mut a, mut b) = barycenter_residual(&us, w);
    for _ in 0..cfg.newton_max_iter {
        if f.norm() < 1e-13 {
            return Ok(w);
        }
        let det = a.norm_sqr() - b.norm_sqr();
        if det.abs() < 1e-14 {
            break;
        }
        let rhs = -f;
        let delta = (a.conj() * rhs - b * rhs.conj()) / det;
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let mut cand = w + delta * lambda;
            if cand.norm() >= 1.0 {
                cand *= 0.9999 / cand.norm();
            }
            let (fc, ac, bc) = barycenter_residual(&us, cand);
            if fc.norm() < f.norm() {
                w = cand;
                f = fc;
                a = ac;
                b = bc;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if f.norm() < 1e-10 {
        Ok(w)
    } else {
        Err(Error::Extension {
            re: z.re,
            im: z.im,
            msg: format!("barycenter equation stalled with residual {:.3e}", f.norm()),
        })
    }
}

/// Quadrature size resolving the harmonic measure at distance 1 - r from the
/// boundary.
fn quadrature_size(n_theta: usize, r: f64) -> usize {
    let needed = (8.0 / (1.0 - r).max(1e-6)) as usize;
    needed.max(n_theta).next_power_of_two().min(16384)
}

/// Douady-Earle barycentric extension of g, solved pointwise by damped
/// Newton with warm starts along each circle.
pub fn barycentric_extension(
    g: &CircleMap,
    spec: Arc<GridSpec>,
    cfg: &Config,
) -> Result<BarycentricExtension> {
    let n = spec.n_theta;
    let inner = spec.radii_inner.clone();
    // barycenter at the origin seeds everything
    let center = {
        let n_q = quadrature_size(n, 0.0);
        let mut mean = Complex64::new(0.0, 0.0);
        for j in 0..n_q {
            let t = TAU * j as f64 / n_q as f64;
            mean += Complex64::from_polar(1.0, g.eval(t));
        }
        mean /= n_q as f64;
        solve_barycenter(g, Complex64::new(0.0, 0.0), mean * 0.5, n_q, cfg)?
    };
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(inner.len() + 1);
    let mut prev_row: Vec<Complex64> = vec![center; n];
    for &r in &inner {
        let n_q = quadrature_size(n, r);
        let mut row = Vec::with_capacity(n);
        for k in 0..n {
            let z = Complex64::from_polar(r, spec.theta(k));
            let start = if k == 0 { prev_row[0] } else { row[k - 1] };
            let w = solve_barycenter(g, z, start, n_q, cfg)?;
            row.push(w);
        }
        prev_row = row.clone();
        rows.push(row);
    }
    // exact boundary row
    let boundary: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, g.eval(spec.theta(k))))
        .collect();
    rows.push(boundary);
    let mut radii = inner.clone();
    radii.push(1.0);

    let fft = AngularFft::new(n);
    let (dz, dzbar) = wirtinger_derivatives(&fft, &radii, &rows);
    let mut values = Vec::with_capacity(inner.len() * n);
    let mut jac_bound: f64 = 0.0;
    for (c, &r) in inner.iter().enumerate() {
        for k in 0..n {
            let d = dz[c][k];
            let db = dzbar[c][k];
            let mu = if d.norm() > 0.0 { db / d } else { Complex64::new(0.0, 0.0) };
            values.push(mu);
            let jac = d.norm_sqr() - db.norm_sqr();
            let w = rows[c][k];
            let rho_w = 2.0 / (1.0 - w.norm_sqr()).max(1e-14);
            let rho_z = 2.0 / (1.0 - r * r);
            jac_bound = jac_bound.max(rho_w * rho_w * jac / (rho_z * rho_z));
        }
    }
    let field = BeltramiField::new(ComplexGridFunction::new(spec.clone(), Chart::Disk, values)?)?;
    let interp = PolarInterp::build(&fft, radii.clone(), &rows, Some(center));
    Ok(BarycentricExtension {
        spec,
        rows,
        radii,
        center,
        field,
        jacobian_bound: jac_bound,
        interp,
    })
}

/// The explicit section of small forms:
/// mu(z) = -(1/2)(1 - |z|^2)^2 conj(z)^{-4} phi(1/conj(z)), evaluated through
/// the form's coefficients so the apparent pole at 0 cancels exactly.
///
/// The formula forces |mu(z)| = 2 rho^{-2}(z*) |phi(z*)| pointwise, so the
/// coefficient stays admissible only for b_norm(phi) < 1/2.
pub fn ahlfors_weill(phi: &QuadraticForm, cfg: &Config) -> Result<BeltramiField> {
    let norm = crate::bers::b_norm(phi);
    if norm >= 0.5 {
        return Err(Error::Argument(format!(
            "b_norm(phi) = {norm:.4} >= 1/2: the section leaves the coefficient ball"
        )));
    }
    let _ = cfg;
    let series = &phi.series;
    let floor = series.max_coeff() * 1e-10;
    for m in series.m_min..=series.m_max() {
        if m > -4 && series.coeff(m).norm() > floor {
            return Err(Error::Argument(format!(
                "form has a z^{m} component; not a bounded quadratic form"
            )));
        }
    }
    let spec = phi.spec().clone();
    let field = BeltramiField::from_fn(spec, |z| {
        // phi(1/conj(z)) conj(z)^{-4} = sum c_m conj(z)^{-m-4}
        let zb = z.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in series.coeffs.iter().enumerate() {
            let m = series.m_min + i as i64;
            let pow = (-m - 4) as i32;
            if pow >= 0 {
                acc += c * zb.powi(pow);
            }
        }
        acc * (-0.5) * (1.0 - z.norm_sqr()).powi(2)
    })?;
    Ok(field)
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub grid_hash: String,
    /// Per-annulus maxima of the extension's dilatation toward the boundary.
    pub vanishing_profile: Vec<(f64, f64)>,
    pub field_vanishing: bool,
    /// Weighted boundary profile of the projected form.
    pub form_profile: Vec<(f64, f64)>,
    pub form_vanishing: bool,
    pub alpha_hat: Option<f64>,
    pub alpha_fit_r2: Option<f64>,
    /// Holder constants of g' over dyadic pair scales.
    pub holder_ladder: Vec<HolderEntry>,
    /// Whether the field and form channels agree on the symmetric verdict.
    pub coherent: bool,
    pub jacobian_bound: f64,
}

fn profile_vanishes(profile: &[(f64, f64)], pass_ratio: f64) -> bool {
    if profile.is_empty() {
        return false;
    }
    let first = profile[0].1;
    let last = profile[profile.len() - 1].1;
    if first < 1e-11 {
        return true;
    }
    last <= first * pass_ratio
}

/// Three-channel regularity diagnostics of a circle map: the boundary decay
/// of its barycentric dilatation, the decay of the projected form, and the
/// Holder ladder of its derivative.
pub fn classify_regularity(
    g: &CircleMap,
    spec: Arc<GridSpec>,
    cfg: &Config,
) -> Result<RegularityReport> {
    let ext = barycentric_extension(g, spec.clone(), cfg)?;
    let vanishing_profile = ext.field.vanishing_profile();
    let field_vanishing = profile_vanishes(&vanishing_profile, cfg.b0_pass_ratio);

    let phi = bers_projection(&ext.field, cfg)?;
    let form_profile = phi.decay_profile();
    let form_vanishing = profile_vanishes(&form_profile, cfg.b0_pass_ratio);
    let (alpha_hat, alpha_fit_r2) = match decay_exponent(&phi) {
        Ok(est) => (Some(est.alpha_hat), Some(est.r_squared)),
        Err(_) => (None, None),
    };

    let alphas: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let holder_ladder = ladder_periodic(&g.deriv_samples(), TAU, &alphas);

    Ok(RegularityReport {
        grid_hash: spec.hash_hex(),
        vanishing_profile,
        field_vanishing,
        form_profile,
        form_vanishing,
        alpha_hat,
        alpha_fit_r2,
        holder_ladder,
        coherent: field_vanishing == form_vanishing,
        jacobian_bound: ext.jacobian_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bers::b_norm;
    use crate::laurent::LaurentSeries;
    use crate::mobius::MobiusMap;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec() -> Arc<GridSpec> {
        GridSpec::with_n_theta(128)
    }

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn extension_of_identity() {
        let g = CircleMap::identity(2048);
        let ext = barycentric_extension(&g, spec(), &cfg()).unwrap();
        assert!(ext.center.norm() < 1e-10);
        let mut worst: f64 = 0.0;
        for (c, &r) in spec().radii_inner.iter().enumerate() {
            for k in 0..spec().n_theta {
                let z = Complex64::from_polar(r, spec().theta(k));
                worst = worst.max((ext.rows[c][k] - z).norm());
            }
        }
        assert!(worst < 1e-9, "identity extension off by {worst}");
        assert!(crate::beltrami::sup_norm(&ext.field) < 1e-6);
    }

    #[test]
    fn extension_reproduces_mobius() {
        let m = MobiusMap::from_center_rotation(Complex64::new(0.3, -0.2), 0.8).unwrap();
        let g = m.as_circle_map(2048);
        let ext = barycentric_extension(&g, spec(), &cfg()).unwrap();
        let mut worst: f64 = 0.0;
        for (c, &r) in spec().radii_inner.iter().enumerate() {
            for k in 0..spec().n_theta {
                let z = Complex64::from_polar(r, spec().theta(k));
                worst = worst.max((ext.rows[c][k] - m.apply(z)).norm());
            }
        }
        assert!(worst < 1e-6, "Mobius reproduction off by {worst}");
        // the dilatation is zero up to finite-difference truncation, and the
        // truncation noise itself decays toward the boundary
        assert!(crate::beltrami::sup_norm(&ext.field) < 5e-3);
        let profile = ext.field.vanishing_profile();
        assert!(profile.last().unwrap().1 < 1e-5);
    }

    #[test]
    fn conformal_naturality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = CircleMap::from_lift_fn(1024, |t| t + 0.25 * t.sin() - 0.1 * (2.0 * t).cos() + 0.1)
            .unwrap();
        let ext_g = barycentric_extension(&g, spec(), &cfg()).unwrap();
        for _ in 0..3 {
            let p1 = MobiusMap::from_center_rotation(
                Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..TAU)),
                rng.gen_range(0.0..TAU),
            )
            .unwrap();
            let p2 = MobiusMap::from_center_rotation(
                Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..TAU)),
                rng.gen_range(0.0..TAU),
            )
            .unwrap();
            let sandwich = p1
                .apply_to_circle_map(&g.compose(&p2.as_circle_map(1024)).unwrap())
                .unwrap();
            let ext_s = barycentric_extension(&sandwich, spec(), &cfg()).unwrap();
            let mut worst: f64 = 0.0;
            for (c, &r) in spec().radii_inner.iter().enumerate() {
                for k in (0..spec().n_theta).step_by(4) {
                    let z = Complex64::from_polar(r, spec().theta(k));
                    let lhs = ext_s.rows[c][k];
                    let rhs = p1.apply(ext_g.evaluate(p2.apply(z)).unwrap());
                    worst = worst.max((lhs - rhs).norm());
                }
            }
            assert!(worst < 1e-4, "conformal naturality off by {worst}");
        }
    }

    #[test]
    fn ahlfors_weill_closed_form_and_bound() {
        // phi = c/z^4 gives mu = -(c/2)(1-|z|^2)^2
        let c = 0.1;
        let phi = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(-4, vec![Complex64::new(c, 0.0)]),
        )
        .unwrap();
        let mu = ahlfors_weill(&phi, &cfg()).unwrap();
        let mut worst: f64 = 0.0;
        for (ci, &r) in spec().radii_inner.iter().enumerate() {
            for k in 0..spec().n_theta {
                let want = -(c / 2.0) * (1.0 - r * r).powi(2);
                let got = mu.samples.value(ci, k);
                worst = worst.max((got - Complex64::new(want, 0.0)).norm());
            }
        }
        assert!(worst < 1e-13, "closed form off by {worst}");

        // pointwise saturation: |mu(z)| rho^2(z*) / |phi(z*)| = 2 exactly
        let mixed = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(
                -6,
                vec![
                    Complex64::new(0.05, -0.02),
                    Complex64::new(0.0, 0.03),
                    Complex64::new(0.08, 0.0),
                ],
            ),
        )
        .unwrap();
        let mu = ahlfors_weill(&mixed, &cfg()).unwrap();
        for (ci, &r) in spec().radii_inner.iter().enumerate() {
            for k in (0..spec().n_theta).step_by(8) {
                let z = Complex64::from_polar(r, spec().theta(k));
                let zs = crate::grid::reflect(z).unwrap();
                let pv = mixed.eval(zs).norm();
                if pv < 1e-12 {
                    continue;
                }
                let rho2 = (2.0 / (zs.norm_sqr() - 1.0)).powi(2);
                let ratio = mu.samples.value(ci, k).norm() * rho2 / pv;
                assert!(
                    (ratio - 2.0).abs() < 1e-9,
                    "saturation ratio {ratio} at r={r}"
                );
            }
        }

        // out-of-range forms are rejected
        let big = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(-4, vec![Complex64::new(2.4, 0.0)]),
        )
        .unwrap();
        assert!(b_norm(&big) >= 0.5);
        assert!(ahlfors_weill(&big, &cfg()).is_err());
    }

    #[test]
    fn ahlfors_weill_section_round_trip() {
        // Phi(aw(phi)) recovers phi to solver accuracy
        let phi = QuadraticForm::from_series(
            spec(),
            LaurentSeries::new(
                -5,
                vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25)],
            ),
        )
        .unwrap();
        assert!(b_norm(&phi) < 0.45, "fixture norm {}", b_norm(&phi));
        let mu = ahlfors_weill(&phi, &cfg()).unwrap();
        let back = bers_projection(&mu, &cfg()).unwrap();
        let err = b_norm(&back.sub(&phi).unwrap());
        assert!(err < 5e-3, "section round trip off by {err}");
    }

    #[test]
    fn classify_identity_trivial() {
        let g = CircleMap::identity(256);
        let report = classify_regularity(&g, spec(), &cfg()).unwrap();
        assert!(report.field_vanishing);
        assert!(report.form_vanishing);
        assert!(report.coherent);
        for e in &report.holder_ladder {
            assert!(e.constant < 1e-6);
        }
        assert!(report.jacobian_bound.is_finite());
    }

    #[test]
    fn classify_analytic_diffeomorphism() {
        // boundary map of the constant-coefficient disk map: real-analytic
        let mu = BeltramiField::constant(spec(), Complex64::new(0.1, 0.0)).unwrap();
        let f = crate::solver::solve_disk(&mu, &cfg()).unwrap();
        let g = f.boundary_map().unwrap().clone();
        let report = classify_regularity(&g, spec(), &cfg()).unwrap();
        assert!(report.coherent);
        for e in &report.holder_ladder {
            assert!(e.stable, "alpha = {} should be stable", e.alpha);
            assert!(e.constant.is_finite());
        }
        if let Some(a) = report.alpha_hat {
            assert!(a > 1.0, "analytic boundary map should decay fast, got {a}");
        }
    }

    #[test]
    fn classify_derivative_cusp() {
        // g' has an exact |theta|^{1/2} cusp at 0; the mean of |w|^{1/2}
        // over the circle is (2/3) sqrt(pi)
        let c = 0.3;
        let mean = 2.0 / 3.0 * std::f64::consts::PI.sqrt();
        let prim = |t: f64| -> f64 {
            // integral of |wrap(s)|^{1/2} ds from 0 to t, t in [0, 2 pi]
            let pi = std::f64::consts::PI;
            if t <= pi {
                2.0 / 3.0 * t.powf(1.5)
            } else {
                2.0 / 3.0 * pi.powf(1.5) + 2.0 / 3.0 * (pi.powf(1.5) - (2.0 * pi - t).powf(1.5))
            }
        };
        let g = CircleMap::from_lift_fn_with_deriv(
            512,
            |t| {
                let tt = t.rem_euclid(TAU);
                t + c * (prim(tt) - mean * tt)
            },
            |t| {
                let tt = t.rem_euclid(TAU);
                let w = if tt <= std::f64::consts::PI { tt } else { TAU - tt };
                1.0 + c * (w.sqrt() - mean)
            },
        )
        .unwrap();
        let report = classify_regularity(&g, GridSpec::with_n_theta(256), &cfg()).unwrap();
        // ladder stable up to 1/2, unstable above
        for e in &report.holder_ladder {
            if e.alpha <= 0.5 {
                assert!(e.stable, "alpha = {} should be stable", e.alpha);
            }
            if e.alpha >= 0.7 {
                assert!(!e.stable, "alpha = {} should blow up", e.alpha);
            }
        }
        // the exponent is read off the resolvable window only; at this
        // resolution the estimate carries a ~0.1 bias toward the bulk
        let a = report.alpha_hat.expect("profile fits");
        assert!((a - 0.5).abs() < 0.2, "decay exponent {a}");
        assert!(report.coherent);
    }
}
