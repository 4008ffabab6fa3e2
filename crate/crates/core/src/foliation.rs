//! Affine-coset diagnostics: does translating a coefficient in a marked
//! subspace move its projected form by an element of the matching form
//! subspace? Plus the quantitative inequality checkers and distortion
//! profiles those diagnostics rest on.

use num_complex::Complex64;
use serde::Serialize;

use crate::beltrami::{
    compose, inverse_field, p_norm, p_norm_function, sup_norm, BeltramiField,
};
use crate::bers::{a_p_norm, b_norm, bers_projection, decay_exponent, schwarzian};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::log_log_slope_fit;
use crate::solver::{maximal_dilatation, solve_bers, solve_disk, MapKind, SolvedMap};

/// The coefficient subspaces whose cosets are diagnosed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Subspace {
    /// Vanishing at the boundary.
    B0,
    /// p-integrable against the hyperbolic area.
    Ap(f64),
    /// Holder-weighted decay of exponent alpha.
    B0Alpha(f64),
    /// Decay of some exponent strictly above alpha.
    B0PosAlpha(f64),
}

impl Subspace {
    pub fn label(&self) -> String {
        match self {
            Subspace::B0 => "B0".into(),
            Subspace::Ap(p) => format!("Ap({p})"),
            Subspace::B0Alpha(a) => format!("B0alpha({a})"),
            Subspace::B0PosAlpha(a) => format!("B0posalpha({a})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct CosetReport {
    pub space: String,
    pub grid_hash: String,
    pub mu_sup: f64,
    pub nu_sup: f64,
    pub nu_max_dilatation: f64,
    /// b-norm of the base form Phi(nu).
    pub psi_b_norm: f64,
    /// b-norm of Phi(r_nu^{-1}(mu)).
    pub translated_b_norm: f64,
    pub delta_b_norm: f64,
    pub delta_profile: Vec<(f64, f64)>,
    pub delta_exponent: Option<f64>,
    pub delta_exponent_r2: Option<f64>,
    pub delta_a_p: Option<f64>,
    pub delta_a_p_divergent: bool,
    /// Exponent threshold applied for the Holder-type spaces.
    pub exponent_threshold: Option<f64>,
    pub verdict: Verdict,
}

fn require_membership(mu: &BeltramiField, space: Subspace, cfg: &Config) -> Result<()> {
    match space {
        Subspace::B0 => {
            if !mu.is_vanishing(cfg.vanishing_eps) {
                let last = mu.vanishing_profile().last().map(|p| p.1).unwrap_or(f64::NAN);
                return Err(Error::Argument(format!(
                    "mu is not boundary-vanishing: innermost annulus max {last:.3e}"
                )));
            }
        }
        Subspace::Ap(p) => {
            if p_norm(mu, p)?.is_divergent() {
                return Err(Error::Argument(format!("mu has divergent {p}-norm")));
            }
        }
        Subspace::B0Alpha(a) => {
            if crate::beltrami::holder_weighted_norm(mu, a)?.is_divergent() {
                return Err(Error::Argument(format!(
                    "mu has divergent Holder-weighted norm at alpha = {a}"
                )));
            }
        }
        Subspace::B0PosAlpha(a) => {
            let probe = (a + cfg.holder_exponent_margin).min(0.99);
            if crate::beltrami::holder_weighted_norm(mu, probe)?.is_divergent() {
                return Err(Error::Argument(format!(
                    "mu has divergent Holder-weighted norm just above alpha = {a}"
                )));
            }
        }
    }
    Ok(())
}

/// Evidence that Phi(r_nu^{-1}(mu)) - Phi(nu) lands in the form subspace
/// matching mu's coefficient subspace.
pub fn coset_residual(
    mu: &BeltramiField,
    nu: &BeltramiField,
    space: Subspace,
    cfg: &Config,
) -> Result<CosetReport> {
    require_membership(mu, space, cfg)?;
    let f_nu = solve_disk(nu, cfg)?;
    let nu_inv = inverse_field(nu, &f_nu, cfg)?;
    let f_nu_inv = solve_disk(&nu_inv, cfg)?;
    // r_nu^{-1}(mu) = mu * nu
    let translated = compose(mu, &nu_inv, &f_nu_inv, cfg)?;
    let phi = bers_projection(&translated, cfg)?;
    let psi = bers_projection(nu, cfg)?;
    let delta = phi.sub(&psi)?;

    let delta_profile = delta.decay_profile();
    let est = decay_exponent(&delta).ok();
    let big_k = maximal_dilatation(nu);
    let mut report = CosetReport {
        space: space.label(),
        grid_hash: mu.grid_hash(),
        mu_sup: sup_norm(mu),
        nu_sup: sup_norm(nu),
        nu_max_dilatation: big_k,
        psi_b_norm: b_norm(&psi),
        translated_b_norm: b_norm(&phi),
        delta_b_norm: b_norm(&delta),
        delta_profile: delta_profile.clone(),
        delta_exponent: est.as_ref().map(|e| e.alpha_hat),
        delta_exponent_r2: est.as_ref().map(|e| e.r_squared),
        delta_a_p: None,
        delta_a_p_divergent: false,
        exponent_threshold: None,
        verdict: Verdict::Indeterminate,
    };

    report.verdict = match space {
        Subspace::B0 => {
            let first = delta_profile.first().map(|p| p.1).unwrap_or(0.0);
            let last = delta_profile.last().map(|p| p.1).unwrap_or(0.0);
            if first < 1e-11 || last <= first * cfg.b0_pass_ratio {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
        Subspace::Ap(p) => {
            let outcome = a_p_norm(&delta, p)?;
            report.delta_a_p = outcome.finite();
            report.delta_a_p_divergent = outcome.is_divergent();
            if outcome.is_divergent() {
                Verdict::Fail
            } else {
                Verdict::Pass
            }
        }
        Subspace::B0Alpha(a) | Subspace::B0PosAlpha(a) => {
            let mut threshold = a / (big_k * big_k) - cfg.base3_exponent_slack;
            if matches!(space, Subspace::B0PosAlpha(_)) {
                threshold += cfg.holder_exponent_margin;
            }
            report.exponent_threshold = Some(threshold);
            match &est {
                Some(e) => {
                    if e.alpha_hat >= threshold {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
                None => Verdict::Indeterminate,
            }
        }
    };
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Base2Report {
    pub grid_hash: String,
    /// max over grid points of |r(mu1) - r(mu2)| minus the hyperbolic bound.
    pub max_violation: f64,
    /// max deviation from the exact middle identity of the proof, over
    /// points where the solved map's Jacobian is well-conditioned.
    pub max_identity_gap: f64,
    pub points: usize,
}

/// Pointwise translation inequality: at zeta = f^nu(z),
/// |r_nu(mu1) - r_nu(mu2)| <= |mu1 - mu2| / sqrt((1-|mu1|^2)(1-|mu2|^2)),
/// with the proof's exact intermediate value
/// |mu1 - mu2| (1-|nu|^2) / (|1 - conj(nu) mu1| |1 - conj(nu) mu2|).
pub fn check_base2(
    mu1: &BeltramiField,
    mu2: &BeltramiField,
    nu: &BeltramiField,
    f_nu: &SolvedMap,
    cfg: &Config,
) -> Result<Base2Report> {
    if f_nu.kind != MapKind::DiskSelfMap {
        return Err(Error::Consistency("base2 needs the normalized disk self-map".into()));
    }
    let spec = mu1.spec().clone();
    let i1 = mu1.interp();
    let i2 = mu2.interp();
    let inu = nu.interp();
    let one = Complex64::new(1.0, 0.0);
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_gap: f64 = 0.0;
    let mut points = 0usize;
    for &r in &spec.radii_inner {
        for k in 0..spec.n_theta {
            let zeta = Complex64::from_polar(r, spec.theta(k));
            let z = f_nu.inverse_evaluate(zeta, cfg)?;
            let (zr, zt) = (z.norm(), z.arg());
            let a = i1.eval(zr, zt);
            let b = i2.eval(zr, zt);
            let nv = inu.eval(zr, zt);
            let dz = f_nu.dz_at(zr, zt);
            let dzbar = f_nu.dzbar_at(zr, zt);
            let phase = dz / dz.conj();
            let r1 = (a - nv) / (one - nv.conj() * a) * phase;
            let r2 = (b - nv) / (one - nv.conj() * b) * phase;
            let lhs = (r1 - r2).norm();
            let bound = (a - b).norm()
                / ((1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr())).sqrt();
            max_violation = max_violation.max(lhs - bound);
            // middle identity at well-conditioned points
            let det = dz.norm_sqr() - dzbar.norm_sqr();
            if dz.norm() > 0.2 && det > 0.05 {
                let middle = (a - b).norm() * (1.0 - nv.norm_sqr())
                    / ((one - nv.conj() * a).norm() * (one - nv.conj() * b).norm());
                max_gap = max_gap.max((lhs - middle).abs());
            }
            points += 1;
        }
    }
    Ok(Base2Report {
        grid_hash: mu1.grid_hash(),
        max_violation,
        max_identity_gap: max_gap,
        points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Base1Report {
    pub grid_hash: String,
    pub samples: usize,
    pub dropped: usize,
    pub max_ratio: f64,
    pub max_lhs: f64,
}

/// Integral bound on the Schwarzian of f_mu (f_nu)^{-1} over the image
/// exterior: |S(zeta)| <= (3 rho(zeta)/sqrt(pi)) (int_Omega ...)^{1/2}.
/// The left side is transported from the solved forms by the conformal
/// change of variable, the right side integrated over the disk.
pub fn check_base1(mu: &BeltramiField, nu: &BeltramiField, cfg: &Config) -> Result<Base1Report> {
    let f_mu = solve_bers(mu, cfg)?;
    let f_nu = solve_bers(nu, cfg)?;
    let s_mu = schwarzian(&f_mu)?;
    let s_nu = schwarzian(&f_nu)?;
    let tail = f_nu.exterior_tail().expect("bers map");
    let dtail = tail.derivative();
    let spec = mu.spec().clone();
    let n = spec.n_theta;

    // quadrature data over the disk
    let mut cells: Vec<(Complex64, f64)> = Vec::new(); // (w = f_nu(s), weighted integrand without the zeta kernel)
    let radii = &spec.radii_inner;
    for (c, &r) in radii.iter().enumerate() {
        let dr = if c == 0 {
            radii[1] - radii[0]
        } else if c + 1 == radii.len() {
            (1.0 - radii[c - 1]) / 2.0
        } else {
            (radii[c + 1] - radii[c - 1]) / 2.0
        };
        let area = r * dr * std::f64::consts::TAU / n as f64;
        let row_mu = mu.samples.row(c);
        let row_nu = nu.samples.row(c);
        let fw = f_nu.inner_row(c);
        let dz = f_nu.inner_dz_row(c);
        let dzbar = f_nu.inner_dzbar_row(c);
        for k in 0..n {
            let jac = dz[k].norm_sqr() - dzbar[k].norm_sqr();
            let num = (row_mu[k] - row_nu[k]).norm_sqr();
            let den = (1.0 - row_mu[k].norm_sqr()) * (1.0 - row_nu[k].norm_sqr());
            cells.push((fw[k], num / den * jac * area));
        }
    }

    let mut max_ratio: f64 = 0.0;
    let mut max_lhs: f64 = 0.0;
    let mut samples = 0usize;
    let mut dropped = 0usize;
    let min_sep = 0.05;
    for (ci, &rr) in spec.radii_outer.iter().enumerate() {
        if rr < 1.3 {
            continue;
        }
        let _ = ci;
        for k in (0..n).step_by(4) {
            let z = Complex64::from_polar(rr, spec.theta(k));
            let zeta = z + tail.eval(z);
            let fp = Complex64::new(1.0, 0.0) + dtail.eval(z);
            let lhs = (s_mu.eval(z) - s_nu.eval(z)).norm() / fp.norm_sqr();
            let rho_omega = (2.0 / (z.norm_sqr() - 1.0)) / fp.norm();
            let mut integral = 0.0;
            let mut bad = false;
            for &(w, weight) in &cells {
                let d2 = (w - zeta).norm_sqr();
                if d2 < min_sep * min_sep {
                    bad = true;
                    break;
                }
                integral += weight / (d2 * d2);
            }
            if bad {
                dropped += 1;
                continue;
            }
            let rhs = 3.0 * rho_omega / std::f64::consts::PI.sqrt() * integral.sqrt();
            samples += 1;
            max_lhs = max_lhs.max(lhs);
            if rhs > 0.0 {
                max_ratio = max_ratio.max(lhs / rhs);
            } else if lhs > 1e-13 {
                max_ratio = f64::INFINITY;
            }
        }
    }
    Ok(Base1Report {
        grid_hash: mu.grid_hash(),
        samples,
        dropped,
        max_ratio,
        max_lhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimsReport {
    pub grid_hash: String,
    pub p: f64,
    /// ||Phi(mu) - Phi(mu')||_p against ||mu - mu'||_p.
    pub claim1_lhs: Option<f64>,
    pub claim1_rhs: Option<f64>,
    pub claim1_ratio: Option<f64>,
    /// ||r_nu(mu1) - r_nu(mu2)||_p against ||mu1 - mu2||_p.
    pub claim2_lhs: Option<f64>,
    pub claim2_rhs: Option<f64>,
    pub claim2_ratio: Option<f64>,
}

/// Empirical constants of the translation inequalities in the p-integrable
/// norm; finiteness is the assertion, the constants are only reported.
pub fn check_claims_p(
    mu1: &BeltramiField,
    mu2: &BeltramiField,
    nu: &BeltramiField,
    p: f64,
    cfg: &Config,
) -> Result<ClaimsReport> {
    if p < 2.0 {
        return Err(Error::Argument(format!("p = {p} must be >= 2")));
    }
    let phi1 = bers_projection(mu1, cfg)?;
    let phi2 = bers_projection(mu2, cfg)?;
    let c1_lhs = a_p_norm(&phi1.sub(&phi2)?, p)?.finite();
    let diff = mu1.samples.zip_with(&mu2.samples, |a, b| a - b)?;
    let c1_rhs = p_norm_function(&diff, p)?.finite();

    let f_nu = solve_disk(nu, cfg)?;
    let t1 = compose(mu1, nu, &f_nu, cfg)?;
    let t2 = compose(mu2, nu, &f_nu, cfg)?;
    let tdiff = t1.samples.zip_with(&t2.samples, |a, b| a - b)?;
    let c2_lhs = p_norm_function(&tdiff, p)?.finite();
    let c2_rhs = c1_rhs;

    let ratio = |lhs: Option<f64>, rhs: Option<f64>| match (lhs, rhs) {
        (Some(l), Some(r)) if r > 0.0 => Some(l / r),
        _ => None,
    };
    Ok(ClaimsReport {
        grid_hash: mu1.grid_hash(),
        p,
        claim1_ratio: ratio(c1_lhs, c1_rhs),
        claim1_lhs: c1_lhs,
        claim1_rhs: c1_rhs,
        claim2_ratio: ratio(c2_lhs, c2_rhs),
        claim2_lhs: c2_lhs,
        claim2_rhs: c2_rhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MoriReport {
    pub grid_hash: String,
    pub rays: usize,
    pub dropped_rays: usize,
    /// Exponent range fitted over the whole boundary ladder.
    pub lower: f64,
    pub upper: f64,
    /// Exponent range over the finest annuli only.
    pub fine_lower: f64,
    pub fine_upper: f64,
}

/// Boundary distortion exponents: fits 1 - |f(r e^{i t})| against 1 - r
/// along every grid ray.
pub fn mori_profile(f: &SolvedMap) -> Result<MoriReport> {
    if f.kind != MapKind::DiskSelfMap {
        return Err(Error::Consistency("distortion profile needs a disk self-map".into()));
    }
    let spec = f.spec().clone();
    let rows = spec.inner_boundary_rows();
    if rows.len() < 4 {
        return Err(Error::Resolution("not enough boundary annuli".into()));
    }
    let n = spec.n_theta;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut fine_lower = f64::INFINITY;
    let mut fine_upper = f64::NEG_INFINITY;
    let mut rays = 0usize;
    let mut dropped = 0usize;
    for k in 0..n {
        let pairs: Vec<(f64, f64)> = rows
            .iter()
            .map(|&(c, eps)| (eps, 1.0 - f.inner_row(c)[k].norm()))
            .collect();
        if pairs.iter().any(|&(_, v)| v <= 1e-12) {
            dropped += 1;
            continue;
        }
        let (slope, _) = log_log_slope_fit(&pairs)?;
        lower = lower.min(slope);
        upper = upper.max(slope);
        let fine = &pairs[pairs.len() - 4..];
        let (fs, _) = log_log_slope_fit(fine)?;
        fine_lower = fine_lower.min(fs);
        fine_upper = fine_upper.max(fs);
        rays += 1;
    }
    if rays == 0 {
        return Err(Error::Resolution("all rays fell below the numerical floor".into()));
    }
    Ok(MoriReport {
        grid_hash: spec.hash_hex(),
        rays,
        dropped_rays: dropped,
        lower,
        upper,
        fine_lower,
        fine_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn spec() -> Arc<GridSpec> {
        GridSpec::with_n_theta(128)
    }

    fn cfg() -> Config {
        Config::default()
    }

    fn random_smooth(rng: &mut ChaCha8Rng, sup: f64) -> BeltramiField {
        let sp = spec();
        let coef: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let raw = move |z: Complex64| {
            coef[0]
                + coef[1] * z
                + coef[2] * z.conj()
                + coef[3] * z * z
                + coef[4] * z * z.conj()
                + coef[5] * z.conj() * z.conj()
        };
        let max = (0..64)
            .flat_map(|i| (0..16).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = Complex64::from_polar(j as f64 / 16.0, std::f64::consts::TAU * i as f64 / 64.0);
                raw(z).norm()
            })
            .fold(0.0, f64::max);
        let scale = sup / max.max(1e-12);
        BeltramiField::from_fn(sp, |z| raw(z) * scale).unwrap()
    }

    #[test]
    fn base2_trivial_and_exact_at_zero() {
        let c = cfg();
        let sp = spec();
        let mu = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.2, 0.1) * (Complex64::new(1.0, 0.0) - z * z.conj())
        })
        .unwrap();
        let zero = BeltramiField::zero(sp);
        let f0 = solve_disk(&zero, &c).unwrap();
        // mu1 = mu2: both sides vanish
        let rep = check_base2(&mu, &mu, &zero, &f0, &c).unwrap();
        assert!(rep.max_violation <= 1e-14);
        // nu = 0: the middle identity is exact
        let mu2 = BeltramiField::constant(mu.spec().clone(), Complex64::new(0.1, -0.05)).unwrap();
        let rep = check_base2(&mu, &mu2, &zero, &f0, &c).unwrap();
        assert!(rep.max_identity_gap < 1e-10, "gap {}", rep.max_identity_gap);
        assert!(rep.max_violation <= 1e-12);
    }

    #[test]
    fn base2_random_triples() {
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..3 {
            let mu1 = random_smooth(&mut rng, 0.3);
            let mu2 = random_smooth(&mut rng, 0.25);
            let nu = random_smooth(&mut rng, 0.3);
            let f_nu = solve_disk(&nu, &c).unwrap();
            let rep = check_base2(&mu1, &mu2, &nu, &f_nu, &c).unwrap();
            assert!(rep.max_violation <= 5e-3, "violation {}", rep.max_violation);
            assert!(rep.max_identity_gap <= 1e-8, "gap {}", rep.max_identity_gap);
        }
    }

    #[test]
    fn base1_closed_form_and_random() {
        let c = cfg();
        let sp = spec();
        // mu = nu: the composed map is conformal, lhs vanishes
        let mu = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.15, 0.0) * (Complex64::new(1.0, 0.0) - z * z.conj())
        })
        .unwrap();
        let rep = check_base1(&mu, &mu, &c).unwrap();
        assert!(rep.max_lhs < 1e-8, "conformal case lhs {}", rep.max_lhs);

        // nu = 0, mu constant: lhs is the closed form, ratio bounded by 1
        let mu = BeltramiField::constant(sp.clone(), Complex64::new(0.1, 0.0)).unwrap();
        let zero = BeltramiField::zero(sp);
        let rep = check_base1(&mu, &zero, &c).unwrap();
        assert!(rep.samples > 100);
        assert!(
            rep.max_ratio <= 1.0 + c.quadrature_margin,
            "ratio {}",
            rep.max_ratio
        );

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..2 {
            let mu = random_smooth(&mut rng, 0.3);
            let nu = random_smooth(&mut rng, 0.3);
            let rep = check_base1(&mu, &nu, &c).unwrap();
            assert!(
                rep.max_ratio <= 1.0 + c.quadrature_margin,
                "ratio {}",
                rep.max_ratio
            );
        }
    }

    #[test]
    fn claims_ratio_one_at_zero_base() {
        let c = cfg();
        let sp = spec();
        let env = |z: Complex64| (1.0 - z.norm_sqr()).powi(2);
        let mu1 = BeltramiField::from_fn(sp.clone(), |z| Complex64::new(0.2 * env(z), 0.0)).unwrap();
        let mu2 = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.0, 0.15) * env(z) * z
        })
        .unwrap();
        let zero = BeltramiField::zero(sp);
        let rep = check_claims_p(&mu1, &mu2, &zero, 2.0, &c).unwrap();
        let r2 = rep.claim2_ratio.unwrap();
        assert!((r2 - 1.0).abs() < 1e-9, "claim2 ratio {r2}");
        assert!(rep.claim1_ratio.unwrap().is_finite());
    }

    #[test]
    fn mori_identity_and_stretch() {
        let c = cfg();
        let sp = spec();
        let id = solve_disk(&BeltramiField::zero(sp.clone()), &c).unwrap();
        let rep = mori_profile(&id).unwrap();
        assert!((rep.lower - 1.0).abs() < 1e-6 && (rep.upper - 1.0).abs() < 1e-6);

        // radial stretch: 1 - r^K behaves like K (1 - r), exponent 1 within
        // the Mori window [1/K, K]
        let big_k = 2.0;
        let mu = BeltramiField::radial_stretch(sp, big_k).unwrap();
        let f = solve_disk(&mu, &c).unwrap();
        let rep = mori_profile(&f).unwrap();
        assert!(rep.lower >= 1.0 / big_k - c.mori_slack, "lower {}", rep.lower);
        assert!(rep.upper <= big_k + c.mori_slack, "upper {}", rep.upper);
        assert!((rep.fine_lower - 1.0).abs() < 0.1, "fine {}", rep.fine_lower);
    }

    #[test]
    fn mori_vanishing_coefficient() {
        let c = cfg();
        let mu = BeltramiField::from_fn(spec(), |z| {
            Complex64::new(0.2 * (1.0 - z.norm_sqr()), 0.0)
        })
        .unwrap();
        let f = solve_disk(&mu, &c).unwrap();
        let rep = mori_profile(&f).unwrap();
        let big_k = maximal_dilatation(&mu);
        assert!(rep.lower >= 1.0 / big_k - c.mori_slack);
        assert!(rep.upper <= big_k + c.mori_slack);
        assert!(
            rep.fine_lower >= 1.0 - c.mori2_eps && rep.fine_upper <= 1.0 + c.mori2_eps,
            "fine exponents [{}, {}]",
            rep.fine_lower,
            rep.fine_upper
        );
    }

    #[test]
    fn coset_zero_is_trivially_inside() {
        let c = cfg();
        let sp = spec();
        let zero = BeltramiField::zero(sp.clone());
        let nu = BeltramiField::from_fn(sp, |z| {
            Complex64::new(0.15, -0.05) * (Complex64::new(1.0, 0.0) - z * z.conj() * 0.3)
        })
        .unwrap();
        let rep = coset_residual(&zero, &nu, Subspace::B0, &c).unwrap();
        assert!(matches!(rep.verdict, Verdict::Pass));
        // two compose layers and two disk solves each contribute ~1e-5
        assert!(rep.delta_b_norm < 1e-4, "delta norm {}", rep.delta_b_norm);
    }

    #[test]
    fn coset_well_defined_on_same_coset_pair() {
        // mu1 = mu0 * mu2 with mu0 boundary-vanishing: mu1 and mu2 represent
        // the same coset, so the difference of their translated projections
        // passes the vanishing diagnostic
        let c = cfg();
        let sp = spec();
        let mu0 = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.15 * (1.0 - z.norm_sqr()), 0.0)
        })
        .unwrap();
        let mu2 = random_smooth(&mut ChaCha8Rng::seed_from_u64(41), 0.2);
        let f_mu2 = solve_disk(&mu2, &c).unwrap();
        let mu2_inv = inverse_field(&mu2, &f_mu2, &c).unwrap();
        let f_mu2_inv = solve_disk(&mu2_inv, &c).unwrap();
        let mu1 = compose(&mu0, &mu2_inv, &f_mu2_inv, &c).unwrap();

        let nu = BeltramiField::from_fn(sp, |z| {
            Complex64::new(0.12, -0.04) * (Complex64::new(1.0, 0.0) - z * z.conj() * 0.6)
        })
        .unwrap();
        let f_nu = solve_disk(&nu, &c).unwrap();
        let nu_inv = inverse_field(&nu, &f_nu, &c).unwrap();
        let f_nu_inv = solve_disk(&nu_inv, &c).unwrap();
        let t1 = compose(&mu1, &nu_inv, &f_nu_inv, &c).unwrap();
        let t2 = compose(&mu2, &nu_inv, &f_nu_inv, &c).unwrap();
        let d1 = bers_projection(&t1, &c).unwrap();
        let d2 = bers_projection(&t2, &c).unwrap();
        let delta = d1.sub(&d2).unwrap();
        let profile = delta.decay_profile();
        let first = profile[0].1;
        let last = profile[profile.len() - 1].1;
        assert!(
            first < 1e-11 || last <= first * c.b0_pass_ratio,
            "coset difference does not vanish: first {first:.3e}, last {last:.3e}"
        );
    }

    #[test]
    fn coset_holder_strict_union_space() {
        let c = cfg();
        let sp = spec();
        // decay exponent 0.5 sits strictly inside the union space above 0.3
        let mu = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.1 * (1.0 - z.norm_sqr()).powf(0.5), 0.0)
        })
        .unwrap();
        let nu = BeltramiField::from_fn(sp, |z| {
            Complex64::new(0.12 * (1.0 - z.norm_sqr()), 0.0)
        })
        .unwrap();
        let rep = coset_residual(&mu, &nu, Subspace::B0PosAlpha(0.3), &c).unwrap();
        assert!(matches!(rep.verdict, Verdict::Pass), "report {rep:?}");
    }

    #[test]
    fn coset_b0_fixture() {
        let c = cfg();
        let sp = spec();
        let mu = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.2 * (1.0 - z.norm_sqr()), 0.0)
        })
        .unwrap();
        let nu = BeltramiField::from_fn(sp.clone(), |z| {
            Complex64::new(0.2, 0.0) * (Complex64::new(1.0, 0.0) - z * z.conj())
        })
        .unwrap();
        let rep = coset_residual(&mu, &nu, Subspace::B0, &c).unwrap();
        assert!(matches!(rep.verdict, Verdict::Pass), "report {rep:?}");

        // a non-vanishing coefficient is rejected up front
        let bad = BeltramiField::constant(sp, Complex64::new(0.2, 0.0)).unwrap();
        assert!(coset_residual(&bad, &nu, Subspace::B0, &c).is_err());
    }
}
