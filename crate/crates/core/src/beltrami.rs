//! Beltrami coefficients on the disk: the sup, p-integrable and
//! Holder-weighted norms, boundary-vanishing membership, the group operation
//! through solved maps, and the compact-truncation split.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::{Chart, ComplexGridFunction, GridSpec};
use crate::solver::{MapKind, SolvedMap};
use crate::transforms::{AngularFft, PolarInterp};

/// Per-annulus growth that flags a weighted sup as unbounded.
const GROWTH_MARGIN: f64 = 1.05;

/// Grid-sampled complex dilatation with sup norm strictly below 1.
#[derive(Clone, Debug)]
pub struct BeltramiField {
    pub samples: ComplexGridFunction,
    pub sup_bound: f64,
}

/// Value of a norm that may fail to exist on the hyperbolically infinite
/// disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum NormOutcome {
    Finite(f64),
    Divergent,
}

impl NormOutcome {
    pub fn finite(&self) -> Option<f64> {
        match self {
            NormOutcome::Finite(v) => Some(*v),
            NormOutcome::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, NormOutcome::Divergent)
    }
}

impl BeltramiField {
    pub fn new(samples: ComplexGridFunction) -> Result<Self> {
        if samples.chart != Chart::Disk {
            return Err(Error::Chart("Beltrami fields live on the disk chart".into()));
        }
        let sup_bound = samples.sup();
        if sup_bound >= 1.0 {
            return Err(Error::Domain(format!(
                "sup |mu| = {sup_bound} must be strictly below 1"
            )));
        }
        Ok(BeltramiField { samples, sup_bound })
    }

    pub fn from_fn(spec: Arc<GridSpec>, f: impl FnMut(Complex64) -> Complex64) -> Result<Self> {
        BeltramiField::new(ComplexGridFunction::from_fn(spec, Chart::Disk, f)?)
    }

    pub fn zero(spec: Arc<GridSpec>) -> Self {
        BeltramiField::from_fn(spec, |_| Complex64::new(0.0, 0.0)).expect("zero field is valid")
    }

    pub fn constant(spec: Arc<GridSpec>, k: Complex64) -> Result<Self> {
        BeltramiField::from_fn(spec, |_| k)
    }

    /// mu_K(z) = ((K-1)/(K+1)) z / conj(z), the dilatation of z |z|^{K-1}.
    pub fn radial_stretch(spec: Arc<GridSpec>, big_k: f64) -> Result<Self> {
        if big_k < 1.0 {
            return Err(Error::Argument("K must be >= 1".into()));
        }
        let c = (big_k - 1.0) / (big_k + 1.0);
        BeltramiField::from_fn(spec, move |z| {
            Complex64::from_polar(c, 2.0 * z.arg())
        })
    }

    pub fn spec(&self) -> &Arc<GridSpec> {
        &self.samples.spec
    }

    pub fn grid_hash(&self) -> String {
        self.samples.spec.hash_hex()
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(
        &self,
        other: &BeltramiField,
        f: impl FnMut(Complex64, Complex64) -> Complex64,
    ) -> Result<BeltramiField> {
        BeltramiField::new(self.samples.zip_with(&other.samples, f)?)
    }

    pub(crate) fn interp(&self) -> PolarInterp {
        let spec = self.spec();
        let fft = AngularFft::new(spec.n_theta);
        let rows: Vec<Vec<Complex64>> = (0..self.samples.circles())
            .map(|c| self.samples.row(c).to_vec())
            .collect();
        PolarInterp::build(&fft, spec.radii_inner.clone(), &rows, None)
    }

    /// Per-annulus maxima of |mu| on the circles at 1 - eps_j, outermost
    /// offset first.
    pub fn vanishing_profile(&self) -> Vec<(f64, f64)> {
        self.spec()
            .inner_boundary_rows()
            .iter()
            .map(|&(c, eps)| (eps, self.samples.row_sup(c)))
            .collect()
    }

    /// Boundary-vanishing membership proxy: the innermost annulus maximum is
    /// below `eps0` and the maxima decrease across the last three annuli.
    pub fn is_vanishing(&self, eps0: f64) -> bool {
        let profile = self.vanishing_profile();
        let n = profile.len();
        if n < 3 {
            return false;
        }
        let last = profile[n - 1].1;
        last < eps0 && profile[n - 1].1 <= profile[n - 2].1 && profile[n - 2].1 <= profile[n - 3].1
    }

    pub fn to_csv(&self) -> String {
        self.samples.to_csv()
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "sup_bound": self.sup_bound,
            "grid_hash": self.grid_hash(),
        }))
        .expect("sidecar serializes")
    }

    pub fn from_csv(spec: Arc<GridSpec>, text: &str) -> Result<Self> {
        BeltramiField::new(ComplexGridFunction::from_csv(spec, Chart::Disk, text)?)
    }
}

/// Grid maximum of |mu|.
pub fn sup_norm(mu: &BeltramiField) -> f64 {
    mu.sup_bound
}

/// Radial integrand profile: mean over angles of |f|^p times rho^2 r at each
/// inner circle, plus segment contributions of the trapezoid rule.
fn radial_contributions(f: &ComplexGridFunction, p: f64) -> Vec<f64> {
    let spec = &f.spec;
    let radii = &spec.radii_inner;
    let n = spec.n_theta as f64;
    let integrand: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(c, &r)| {
            let mean: f64 = f.row(c).iter().map(|v| v.norm().powf(p)).sum::<f64>() / n;
            mean * std::f64::consts::TAU * 4.0 * r / ((1.0 - r * r) * (1.0 - r * r))
        })
        .collect();
    // segment 0: [0, r_0] with the integrand vanishing at the origin
    let mut segments = vec![0.5 * integrand[0] * radii[0]];
    for c in 1..radii.len() {
        segments.push(0.5 * (integrand[c - 1] + integrand[c]) * (radii[c] - radii[c - 1]));
    }
    segments
}

/// ||mu||_p with ||mu||_p^p = int |mu|^p rho^2 dA; divergence is declared by
/// failure of the Cauchy criterion on the last three boundary annuli.
pub fn p_norm(mu: &BeltramiField, p: f64) -> Result<NormOutcome> {
    p_norm_function(&mu.samples, p)
}

/// Same hyperbolic p-norm for an arbitrary disk grid function (differences
/// of coefficients need not be admissible fields themselves).
pub fn p_norm_function(f: &ComplexGridFunction, p: f64) -> Result<NormOutcome> {
    if p < 1.0 {
        return Err(Error::Argument(format!("p = {p} must be >= 1")));
    }
    if f.chart != Chart::Disk {
        return Err(Error::Chart("hyperbolic p-norm lives on the disk chart".into()));
    }
    let segments = radial_contributions(f, p);
    let total: f64 = segments.iter().sum();
    if total == 0.0 {
        return Ok(NormOutcome::Finite(0.0));
    }
    let n = segments.len();
    let (s3, s2, s1) = (segments[n - 3], segments[n - 2], segments[n - 1]);
    let decreasing = s1 < s2 * 0.999 && s2 < s3 * 0.999;
    if !decreasing {
        return Ok(NormOutcome::Divergent);
    }
    // geometric extrapolation of the remaining boundary mass
    let ratio = s1 / s2;
    let tail = s1 * ratio / (1.0 - ratio);
    Ok(NormOutcome::Finite((total + tail).powf(1.0 / p)))
}

/// ||mu||_{infinity, alpha} = sup rho^alpha |mu|; flagged divergent when the
/// maxima keep growing across the innermost boundary annuli.
pub fn holder_weighted_norm(mu: &BeltramiField, alpha: f64) -> Result<NormOutcome> {
    if alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::Argument(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let spec = mu.spec();
    let mut sup = 0.0f64;
    for (c, &r) in spec.radii_inner.iter().enumerate() {
        let rho = 2.0 / (1.0 - r * r);
        sup = sup.max(rho.powf(alpha) * mu.samples.row_sup(c));
    }
    let rows = spec.inner_boundary_rows();
    let m: Vec<f64> = rows
        .iter()
        .map(|&(c, _)| {
            let r = spec.radii_inner[c];
            (2.0 / (1.0 - r * r)).powf(alpha) * mu.samples.row_sup(c)
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

fn check_solved_from(f: &SolvedMap, nu: &BeltramiField) -> Result<()> {
    if f.kind != MapKind::DiskSelfMap {
        return Err(Error::Consistency("composition needs a normalized disk self-map".into()));
    }
    let mismatch = f
        .source
        .samples
        .values
        .iter()
        .zip(&nu.samples.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if mismatch > 1e-12 {
        return Err(Error::Consistency(format!(
            "solved map does not belong to this coefficient (sup mismatch {mismatch:.3e})"
        )));
    }
    Ok(())
}

/// nu1 * nu2^{-1}, the dilatation of f^{nu1} (f^{nu2})^{-1}, sampled on the
/// grid of nu1. At the grid point zeta the value is
/// [(nu1 - nu2)/(1 - conj(nu2) nu1)](z) * df^{nu2}(z)/conj(df^{nu2}(z)) with
/// z the solved preimage of zeta.
pub fn compose(
    nu1: &BeltramiField,
    nu2: &BeltramiField,
    f_nu2: &SolvedMap,
    cfg: &Config,
) -> Result<BeltramiField> {
    check_solved_from(f_nu2, nu2)?;
    let spec = nu1.spec().clone();
    let i1 = nu1.interp();
    let i2 = nu2.interp();
    let n = spec.n_theta;
    let mut values = Vec::with_capacity(spec.radii_inner.len() * n);
    let cap = |v: Complex64, sup: f64| {
        if v.norm() > sup {
            v * (sup / v.norm())
        } else {
            v
        }
    };
    for &r in &spec.radii_inner {
        for k in 0..n {
            let zeta = Complex64::from_polar(r, spec.theta(k));
            let z = f_nu2.inverse_evaluate(zeta, cfg)?;
            let (zr, zt) = (z.norm(), z.arg());
            let a = cap(i1.eval(zr, zt), nu1.sup_bound);
            let b = cap(i2.eval(zr, zt), nu2.sup_bound);
            let dz = f_nu2.dz_at(zr, zt);
            let phase = if dz.norm() > 0.0 {
                let p = dz / dz.conj();
                p / p.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            values.push((a - b) / (Complex64::new(1.0, 0.0) - b.conj() * a) * phase);
        }
    }
    BeltramiField::new(ComplexGridFunction::new(spec, Chart::Disk, values)?)
}

/// The right translation r_nu(mu) = mu * nu^{-1}.
pub fn right_translate(
    mu: &BeltramiField,
    nu: &BeltramiField,
    f_nu: &SolvedMap,
    cfg: &Config,
) -> Result<BeltramiField> {
    compose(mu, nu, f_nu, cfg)
}

/// nu^{-1} = 0 * nu^{-1}, the dilatation of the inverse map.
pub fn inverse_field(nu: &BeltramiField, f_nu: &SolvedMap, cfg: &Config) -> Result<BeltramiField> {
    compose(&BeltramiField::zero(nu.spec().clone()), nu, f_nu, cfg)
}

/// Restriction of mu to {|z| > r0}, zero elsewhere.
pub fn tail_restriction(mu: &BeltramiField, r0: f64) -> Result<BeltramiField> {
    let spec = mu.spec().clone();
    if r0 <= spec.radii_inner[0] || r0 >= *spec.radii_inner.last().unwrap() {
        return Err(Error::Argument(format!(
            "r0 = {r0} must lie strictly inside the radial range"
        )));
    }
    let n = spec.n_theta;
    let mut values = mu.samples.values.clone();
    for (c, &r) in spec.radii_inner.iter().enumerate() {
        if r <= r0 {
            for v in &mut values[c * n..(c + 1) * n] {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
    BeltramiField::new(ComplexGridFunction::new(spec, Chart::Disk, values)?)
}

/// Split mu = mu_core * mu_tail with mu_tail = mu restricted to {|z| > r0};
/// `f_tail` must be the solved normalized map of that restriction. The
/// support of mu_core lies in the f_tail-image of {|z| <= r0} up to grid
/// resolution.
pub fn split_tail(
    mu: &BeltramiField,
    r0: f64,
    f_tail: &SolvedMap,
    cfg: &Config,
) -> Result<(BeltramiField, BeltramiField)> {
    let tail = tail_restriction(mu, r0)?;
    check_solved_from(f_tail, &tail)?;
    let core = compose(mu, &tail, f_tail, cfg)?;
    Ok((tail, core))
}
