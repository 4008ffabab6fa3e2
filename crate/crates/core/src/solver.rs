//! Measurable-Riemann-mapping solver.
//!
//! `solve_bers` integrates dbar f = mu df for a coefficient supported in the
//! closed disk via the Neumann series h = mu + mu T[h] (T the Beurling
//! transform in angular modes), then f = z + C[h]. Outside the disk C[h] is
//! a decaying Laurent tail, so the exterior restriction is holomorphic by
//! construction and hydrodynamically normalized, f(z) = z + O(1/z).
//!
//! `solve_disk` extends the coefficient to the exterior by the circle
//! reflection nu*(z) = (z/conj(z))^2 conj(nu(1/conj(z))), truncated at the
//! reflection of the innermost support circle, solves the same equation, and
//! post-composes the sphere Mobius fixing 1, i, -1. The symmetric coefficient
//! makes the untruncated solution preserve the disk; truncation perturbs this
//! by O(||nu|| / R_trunc^2).

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::beltrami::{sup_norm, BeltramiField};
use crate::circle::CircleMap;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::{Chart, ComplexGridFunction, GridSpec};
use crate::laurent::LaurentSeries;
use crate::mobius::SphereMobius;
use crate::transforms::{beurling, cauchy_at, cauchy_at_origin, laurent_moments, wirtinger_derivatives, AngularFft, PolarInterp, PolarModes};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MapKind {
    Bers,
    DiskSelfMap,
}

/// Numerically solved quasiconformal map with forward and inverse evaluation.
pub struct SolvedMap {
    pub kind: MapKind,
    pub source: BeltramiField,
    /// max |dbar f - mu df| over the interior grid, by finite differences
    /// independent of the solver's own derivative data.
    pub dbar_residual: f64,
    pub neumann_terms: usize,
    /// Increment ratios of the Neumann iteration.
    pub contraction_ratios: Vec<f64>,
    spec: Arc<GridSpec>,
    /// Disk-chart evaluation radii: two synthetic inner circles, the grid
    /// circles, and the boundary circle r = 1.
    disk_radii: Vec<f64>,
    /// Offset of radii_inner[0] inside `disk_radii`.
    inner_offset: usize,
    disk_rows: Vec<Vec<Complex64>>,
    dz_rows: Vec<Vec<Complex64>>,
    dzbar_rows: Vec<Vec<Complex64>>,
    center: Complex64,
    /// Bers kind: f(z) = z + tail(z) outside the disk.
    tail: Option<LaurentSeries>,
    exterior_rows: Option<Vec<Vec<Complex64>>>,
    boundary: Option<CircleMap>,
    normalization: Option<SphereMobius>,
    interp_f: PolarInterp,
    interp_dz: PolarInterp,
    interp_dzbar: PolarInterp,
}

/// K = (1 + k)/(1 - k) for k = sup |mu|.
pub fn maximal_dilatation(mu: &BeltramiField) -> f64 {
    let k = sup_norm(mu);
    (1.0 + k) / (1.0 - k)
}

struct NeumannResult {
    h_rows: Vec<Vec<Complex64>>,
    t_rows: Vec<Vec<Complex64>>,
    h_modes: PolarModes,
    iterations: usize,
    ratios: Vec<f64>,
}

fn neumann_solve(
    fft: &AngularFft,
    radii: &[f64],
    mu_rows: &[Vec<Complex64>],
    cfg: &Config,
) -> Result<NeumannResult> {
    let one = Complex64::new(1.0, 0.0);
    let mut h_rows: Vec<Vec<Complex64>> = mu_rows.to_vec();
    let mut ratios = Vec::new();
    let mut prev_inc = f64::NAN;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let modes = PolarModes::from_rows(fft, radii, &h_rows);
        let t = beurling(&modes);
        let t_rows = t.to_rows(fft);
        let mut inc: f64 = 0.0;
        let mut next = vec![vec![Complex64::new(0.0, 0.0); fft.n]; radii.len()];
        for c in 0..radii.len() {
            for k in 0..fft.n {
                let v = mu_rows[c][k] * (one + t_rows[c][k]);
                inc = inc.max((v - h_rows[c][k]).norm());
                next[c][k] = v;
            }
        }
        h_rows = next;
        if prev_inc.is_finite() && prev_inc > 0.0 {
            ratios.push(inc / prev_inc);
        }
        prev_inc = inc;
        if inc < cfg.neumann_tol {
            let h_modes = PolarModes::from_rows(fft, radii, &h_rows);
            let t_rows = beurling(&h_modes).to_rows(fft);
            return Ok(NeumannResult {
                h_rows,
                t_rows,
                h_modes,
                iterations,
                ratios,
            });
        }
        if iterations >= cfg.neumann_max_iter {
            return Err(Error::SolverDiverged {
                last_increment: inc,
                iterations,
            });
        }
    }
}

/// Disk-side support rows: two synthetic circles below the grid (linear
/// extrapolation of the coefficient, clamped), the grid circles, and a held
/// row at r = 1.
fn disk_support(mu: &BeltramiField) -> (Vec<f64>, Vec<Vec<Complex64>>, usize) {
    let spec = mu.spec().clone();
    let inner = &spec.radii_inner;
    let n = spec.n_theta;
    let r0 = inner[0];
    let mut radii = vec![r0 / 4.0, r0 / 2.0];
    radii.extend(inner.iter().copied());
    radii.push(1.0);
    let row0 = mu.samples.row(0).to_vec();
    let row1 = mu.samples.row(1).to_vec();
    let cap = mu.sup_bound;
    let extrap = |r: f64| -> Vec<Complex64> {
        let t = (r - inner[0]) / (inner[1] - inner[0]);
        (0..n)
            .map(|k| {
                let v = row0[k] * (1.0 - t) + row1[k] * t;
                if v.norm() > cap && v.norm() > 0.0 {
                    v * (cap / v.norm())
                } else {
                    v
                }
            })
            .collect()
    };
    let mut rows = vec![extrap(r0 / 4.0), extrap(r0 / 2.0)];
    for c in 0..inner.len() {
        rows.push(mu.samples.row(c).to_vec());
    }
    rows.push(mu.samples.row(inner.len() - 1).to_vec());
    (radii, rows, 2)
}

/// Circle reflection of a coefficient row: nu*(R e^{i t}) =
/// e^{4 i t} conj(nu((1/R) e^{i t})).
fn reflect_row(row: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            Complex64::from_polar(1.0, 4.0 * t) * row[k].conj()
        })
        .collect()
}

fn winding_check(rows: &[Vec<Complex64>], center: Complex64) -> Result<()> {
    for row in rows {
        let mut total = 0.0;
        for k in 0..row.len() {
            let a = row[k] - center;
            let b = row[(k + 1) % row.len()] - center;
            if a.norm() == 0.0 || b.norm() == 0.0 {
                return Err(Error::Branch("image circle passes through the center".into()));
            }
            total += (b / a).arg();
        }
        if (total - std::f64::consts::TAU).abs() > 0.5 {
            return Err(Error::Branch(format!(
                "fold detected: image circle winds {:.3} instead of 2 pi",
                total
            )));
        }
    }
    Ok(())
}

fn assemble(
    kind: MapKind,
    mu: &BeltramiField,
    cfg: &Config,
    support_radii: Vec<f64>,
    support_rows: Vec<Vec<Complex64>>,
    inner_offset: usize,
    disk_count: usize,
) -> Result<SolvedMap> {
    let spec = mu.spec().clone();
    let fft = AngularFft::new(spec.n_theta);
    let n = spec.n_theta;
    let nr = neumann_solve(&fft, &support_radii, &support_rows, cfg)?;

    let disk_radii: Vec<f64> = support_radii[..disk_count].to_vec();
    let c_modes = cauchy_at(&nr.h_modes, &disk_radii);
    let c_rows = c_modes.to_rows(&fft);
    let mut disk_rows: Vec<Vec<Complex64>> = Vec::with_capacity(disk_count);
    for (i, &r) in disk_radii.iter().enumerate() {
        let row = (0..n)
            .map(|k| Complex64::from_polar(r, spec.theta(k)) + c_rows[i][k])
            .collect();
        disk_rows.push(row);
    }
    let mut center = cauchy_at_origin(&nr.h_modes);
    let one = Complex64::new(1.0, 0.0);
    let mut dz_rows: Vec<Vec<Complex64>> = (0..disk_count)
        .map(|c| (0..n).map(|k| one + nr.t_rows[c][k]).collect())
        .collect();
    let mut dzbar_rows: Vec<Vec<Complex64>> = nr.h_rows[..disk_count].to_vec();

    let mut tail = None;
    let mut exterior_rows = None;
    let mut boundary = None;
    let mut normalization = None;

    match kind {
        MapKind::Bers => {
            let jmax = (n / 2 - 2).min(160);
            let moments = laurent_moments(&nr.h_modes, jmax);
            let coeffs: Vec<Complex64> = (0..jmax).map(|idx| moments[jmax - 1 - idx]).collect();
            let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let series = LaurentSeries::new(-(jmax as i64), coeffs).trimmed(peak * 1e-16);
            let ext: Vec<Vec<Complex64>> = spec
                .radii_outer
                .iter()
                .map(|&r| {
                    (0..n)
                        .map(|k| {
                            let z = Complex64::from_polar(r, spec.theta(k));
                            z + series.eval(z)
                        })
                        .collect()
                })
                .collect();
            tail = Some(series);
            exterior_rows = Some(ext);
        }
        MapKind::DiskSelfMap => {
            let brow = &disk_rows[disk_count - 1];
            let triple = [brow[0], brow[n / 4], brow[n / 2]];
            let targets = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
            ];
            let m = SphereMobius::from_triples(triple, targets)?;
            for i in 0..disk_count {
                for k in 0..n {
                    let fval = disk_rows[i][k];
                    let dm = m.derivative(fval);
                    disk_rows[i][k] = m.apply(fval);
                    dz_rows[i][k] *= dm;
                    dzbar_rows[i][k] *= dm;
                }
            }
            center = m.apply(center);
            let fixed_err = (disk_rows[disk_count - 1][0] - targets[0]).norm()
                + (disk_rows[disk_count - 1][n / 4] - targets[1]).norm()
                + (disk_rows[disk_count - 1][n / 2] - targets[2]).norm();
            if fixed_err > 1e-9 {
                return Err(Error::Conditioning(format!(
                    "normalization points move by {fixed_err:.3e}"
                )));
            }
            let angles: Vec<f64> = disk_rows[disk_count - 1].iter().map(|v| v.arg()).collect();
            let base = CircleMap::from_angle_samples(&angles)?;
            let deriv: Vec<f64> = (0..n)
                .map(|k| {
                    let t = spec.theta(k);
                    let f = disk_rows[disk_count - 1][k];
                    let dfdt = Complex64::new(0.0, 1.0)
                        * (Complex64::from_polar(1.0, t) * dz_rows[disk_count - 1][k]
                            - Complex64::from_polar(1.0, -t) * dzbar_rows[disk_count - 1][k]);
                    (dfdt * f.conj()).im / f.norm_sqr()
                })
                .collect();
            let bmap = if deriv.iter().all(|&d| d > 0.0) {
                CircleMap::from_lift(base.lift_samples().to_vec(), Some(deriv))?
            } else {
                base
            };
            boundary = Some(bmap);
            normalization = Some(m);
        }
    }

    // independent finite-difference residual of the defining equation,
    // evaluated away from radial jumps of the coefficient where the stencil
    // has nothing to resolve
    let inner = &mu.spec().radii_inner;
    let mut slopes = Vec::with_capacity(inner.len().saturating_sub(1));
    for c in 0..inner.len() - 1 {
        let d = mu
            .samples
            .row(c)
            .iter()
            .zip(mu.samples.row(c + 1))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        slopes.push(d / (inner[c + 1] - inner[c]));
    }
    let mut sorted = slopes.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let mut smooth = vec![true; inner.len()];
    for (c, &s) in slopes.iter().enumerate() {
        if s > 4.0 * median + 1e-6 {
            smooth[c] = false;
            smooth[c + 1] = false;
            if c + 2 < smooth.len() {
                smooth[c + 2] = false;
            }
            if c > 0 {
                smooth[c - 1] = false;
            }
        }
    }
    let (fd_dz, fd_dzbar) = wirtinger_derivatives(&fft, &disk_radii, &disk_rows);
    let mut residual: f64 = 0.0;
    for c in 0..inner.len() {
        if !smooth[c] {
            continue;
        }
        let row_idx = inner_offset + c;
        for k in 0..n {
            let mu_v = mu.samples.value(c, k);
            residual = residual.max((fd_dzbar[row_idx][k] - mu_v * fd_dz[row_idx][k]).norm());
        }
    }
    if residual > cfg.dbar_tol {
        return Err(Error::Consistency(format!(
            "finite-difference dbar residual {residual:.3e} exceeds tolerance {:.1e}",
            cfg.dbar_tol
        )));
    }

    winding_check(&disk_rows[inner_offset..disk_count - 1], center)?;

    let interp_f = PolarInterp::build(&fft, disk_radii.clone(), &disk_rows, Some(center));
    let interp_dz = PolarInterp::build(&fft, disk_radii.clone(), &dz_rows, None);
    let interp_dzbar = PolarInterp::build(&fft, disk_radii.clone(), &dzbar_rows, None);

    Ok(SolvedMap {
        kind,
        source: mu.clone(),
        dbar_residual: residual,
        neumann_terms: nr.iterations,
        contraction_ratios: nr.ratios,
        spec,
        disk_radii,
        inner_offset,
        disk_rows,
        dz_rows,
        dzbar_rows,
        center,
        tail,
        exterior_rows,
        boundary,
        normalization,
        interp_f,
        interp_dz,
        interp_dzbar,
    })
}

/// Solve with the coefficient extended by zero to the exterior; the result is
/// conformal on |z| > 1 with hydrodynamic normalization.
pub fn solve_bers(mu: &BeltramiField, cfg: &Config) -> Result<SolvedMap> {
    if sup_norm(mu) > cfg.sup_budget {
        return Err(Error::Budget(sup_norm(mu), cfg.sup_budget));
    }
    let (radii, rows, inner_offset) = disk_support(mu);
    let disk_count = radii.len();
    assemble(MapKind::Bers, mu, cfg, radii, rows, inner_offset, disk_count)
}

/// Solve with the circle-symmetric extension of the coefficient and
/// post-compose the Mobius fixing 1, i, -1; the restriction to the disk is
/// the normalized self-map f^nu.
pub fn solve_disk(nu: &BeltramiField, cfg: &Config) -> Result<SolvedMap> {
    if sup_norm(nu) > cfg.sup_budget {
        return Err(Error::Budget(sup_norm(nu), cfg.sup_budget));
    }
    let n = nu.spec().n_theta;
    let (mut radii, mut rows, inner_offset) = disk_support(nu);
    let disk_count = radii.len();
    // jump row carrying the exterior-side limit at the circle
    radii.push(1.0 + 1e-9);
    rows.push(reflect_row(&rows[disk_count - 1], n));
    // reflections of every disk support circle, ascending
    for i in (0..disk_count - 1).rev() {
        radii.push(1.0 / radii[i]);
        rows.push(reflect_row(&rows[i], n));
    }
    assemble(MapKind::DiskSelfMap, nu, cfg, radii, rows, inner_offset, disk_count)
}

impl SolvedMap {
    pub fn spec(&self) -> &Arc<GridSpec> {
        &self.spec
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    /// Exterior Laurent tail of a Bers-kind map: f(z) = z + tail(z).
    pub fn exterior_tail(&self) -> Option<&LaurentSeries> {
        self.tail.as_ref()
    }

    pub fn boundary_map(&self) -> Option<&CircleMap> {
        self.boundary.as_ref()
    }

    pub fn normalization(&self) -> Option<&SphereMobius> {
        self.normalization.as_ref()
    }

    /// Sample of the solved map on the grid circle `c` (disk chart).
    pub fn inner_row(&self, c: usize) -> &[Complex64] {
        &self.disk_rows[self.inner_offset + c]
    }

    /// Boundary-circle samples (r = 1).
    pub fn boundary_row(&self) -> &[Complex64] {
        &self.disk_rows[self.disk_radii.len() - 1]
    }

    /// df samples on the grid circle `c`.
    pub fn inner_dz_row(&self, c: usize) -> &[Complex64] {
        &self.dz_rows[self.inner_offset + c]
    }

    /// dbar f samples on the grid circle `c`.
    pub fn inner_dzbar_row(&self, c: usize) -> &[Complex64] {
        &self.dzbar_rows[self.inner_offset + c]
    }

    pub fn dz_at(&self, r: f64, theta: f64) -> Complex64 {
        self.interp_dz.eval(r, theta)
    }

    pub fn dzbar_at(&self, r: f64, theta: f64) -> Complex64 {
        self.interp_dzbar.eval(r, theta)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        match self.kind {
            MapKind::DiskSelfMap => {
                if r > 1.0 + 1e-12 {
                    return Err(Error::Chart(format!(
                        "|z| = {r:.6} outside the disk chart of a self-map"
                    )));
                }
                Ok(self.interp_f.eval(r.min(1.0), z.arg()))
            }
            MapKind::Bers => {
                if r <= 1.0 {
                    Ok(self.interp_f.eval(r, z.arg()))
                } else {
                    Ok(z + self.tail.as_ref().expect("bers tail").eval(z))
                }
            }
        }
    }

    /// Newton inversion on the interpolant, seeded from the target itself and
    /// falling back to the nearest grid sample.
    pub fn inverse_evaluate(&self, w: Complex64, cfg: &Config) -> Result<Complex64> {
        match self.kind {
            MapKind::Bers if w.norm() > 1.0 => {
                if let Some(z) = self.exterior_newton(w, cfg) {
                    return Ok(z);
                }
                self.disk_newton(w, cfg)
            }
            _ => self.disk_newton(w, cfg),
        }
    }

    fn exterior_newton(&self, w: Complex64, cfg: &Config) -> Option<Complex64> {
        let tail = self.tail.as_ref()?;
        let dtail = tail.derivative();
        let mut z = w;
        for _ in 0..cfg.newton_max_iter {
            if z.norm() < 1.0 {
                return None;
            }
            let f = z + tail.eval(z) - w;
            if f.norm() < cfg.newton_tol {
                return Some(z);
            }
            let d = Complex64::new(1.0, 0.0) + dtail.eval(z);
            if d.norm() < 1e-12 {
                return None;
            }
            z -= f / d;
        }
        None
    }

    fn disk_newton(&self, w: Complex64, cfg: &Config) -> Result<Complex64> {
        let seeds = {
            let mut s = vec![w];
            if w.norm() > 0.98 {
                s.push(w * (0.98 / w.norm()));
            }
            s.push(self.nearest_grid_preimage(w));
            s
        };
        for seed in seeds {
            if let Some(z) = self.newton_from(seed, w, cfg) {
                return Ok(z);
            }
        }
        Err(Error::Inversion(format!(
            "Newton inversion failed for target {w}"
        )))
    }

    fn nearest_grid_preimage(&self, w: Complex64) -> Complex64 {
        let n = self.spec.n_theta;
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        for (i, row) in self.disk_rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let d = (v - w).norm();
                if d < best.0 {
                    best = (d, Complex64::from_polar(self.disk_radii[i], std::f64::consts::TAU * k as f64 / n as f64));
                }
            }
        }
        best.1
    }

    fn newton_from(&self, seed: Complex64, w: Complex64, cfg: &Config) -> Option<Complex64> {
        let mut z = seed;
        if z.norm() > 1.0 {
            z *= 0.999999 / z.norm();
        }
        let mut fval = self.interp_f.eval(z.norm(), z.arg()) - w;
        for _ in 0..cfg.newton_max_iter {
            if fval.norm() < cfg.newton_tol {
                return Some(z);
            }
            let a = self.interp_dz.eval(z.norm(), z.arg());
            let b = self.interp_dzbar.eval(z.norm(), z.arg());
            let det = a.norm_sqr() - b.norm_sqr();
            if det.abs() < 1e-14 {
                return None;
            }
            let rhs = -fval;
            let delta = (a.conj() * rhs - b * rhs.conj()) / det;
            // damped step, projected into the closed disk
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let mut cand = z + delta * lambda;
                if cand.norm() > 1.0 {
                    cand *= 1.0 / cand.norm();
                }
                let fc = self.interp_f.eval(cand.norm(), cand.arg()) - w;
                if fc.norm() < fval.norm() {
                    z = cand;
                    fval = fc;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !improved {
                return None;
            }
        }
        if fval.norm() < cfg.newton_tol * 100.0 {
            Some(z)
        } else {
            None
        }
    }

    /// Samples on the grid's inner circles as a grid function.
    pub fn disk_grid_function(&self) -> ComplexGridFunction {
        let inner = self.spec.radii_inner.len();
        let mut values = Vec::with_capacity(inner * self.spec.n_theta);
        for c in 0..inner {
            values.extend_from_slice(self.inner_row(c));
        }
        ComplexGridFunction::new(self.spec.clone(), Chart::Disk, values)
            .expect("solver rows are finite")
    }

    /// Samples on the grid's exterior circles: the stored conformal values
    /// for a Bers map, the circle-symmetric reflection for a disk self-map.
    pub fn exterior_grid_function(&self) -> ComplexGridFunction {
        let n = self.spec.n_theta;
        let values: Vec<Complex64> = match (&self.exterior_rows, self.kind) {
            (Some(rows), _) => rows.iter().flat_map(|r| r.iter().copied()).collect(),
            (None, _) => {
                let mut v = Vec::with_capacity(self.spec.radii_outer.len() * n);
                for &r in &self.spec.radii_outer {
                    for k in 0..n {
                        let t = self.spec.theta(k);
                        let inside = self.interp_f.eval(1.0 / r, t);
                        v.push(inside.conj().inv());
                    }
                }
                v
            }
        };
        ComplexGridFunction::new(self.spec.clone(), Chart::Exterior, values)
            .expect("solver rows are finite")
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "kind": match self.kind { MapKind::Bers => "bers", MapKind::DiskSelfMap => "disk_self_map" },
            "dbar_residual": self.dbar_residual,
            "neumann_terms": self.neumann_terms,
            "source_grid_hash": self.spec.hash_hex(),
        }))
        .expect("metadata serializes")
    }
}
