//! Shared polar discretization of the disk and its exterior, hyperbolic
//! geometry primitives, and small numeric utilities used everywhere else.
//!
//! Angular sampling is uniform so circles can be transformed by FFT; radial
//! sampling refines geometrically toward the unit circle because every decay
//! and distortion estimate of interest is a power law in the distance to the
//! boundary.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which chart a sampled function lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// The unit disk, circles at `radii_inner`.
    Disk,
    /// The exterior |z| > 1, circles at `radii_outer`; infinity is handled
    /// through the w = 1/z chart by the consumers that need it.
    Exterior,
}

/// Polar sampling layout: uniform angles, one list of circles inside the unit
/// disk and one outside it, plus the geometric ladder of boundary distances
/// used for decay fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    /// Strictly increasing radii in (0, 1).
    pub radii_inner: Vec<f64>,
    /// Strictly decreasing radii in (1, r_max], approaching 1.
    pub radii_outer: Vec<f64>,
    /// Geometric sequence eps_j = eps0 * q^j, strictly decreasing.
    pub boundary_offsets: Vec<f64>,
}

impl GridSpec {
    pub fn new(
        n_theta: usize,
        radii_inner: Vec<f64>,
        radii_outer: Vec<f64>,
        boundary_offsets: Vec<f64>,
    ) -> Result<Self> {
        if n_theta < 64 || !n_theta.is_power_of_two() {
            return Err(Error::Grid(format!(
                "n_theta must be a power of two >= 64, got {n_theta}"
            )));
        }
        if radii_inner.is_empty() || radii_outer.is_empty() || boundary_offsets.len() < 4 {
            return Err(Error::Grid("grid lists must be nonempty (>= 4 offsets)".into()));
        }
        for w in radii_inner.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Grid("inner radii must be strictly increasing".into()));
            }
        }
        if radii_inner[0] <= 0.0 || *radii_inner.last().unwrap() >= 1.0 {
            return Err(Error::Grid("inner radii must lie in (0, 1)".into()));
        }
        for w in radii_outer.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::Grid("outer radii must be strictly decreasing".into()));
            }
        }
        if *radii_outer.last().unwrap() <= 1.0 {
            return Err(Error::Grid("outer radii must be > 1".into()));
        }
        for w in boundary_offsets.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::Grid("boundary offsets must be strictly decreasing".into()));
            }
        }
        if *boundary_offsets.last().unwrap() <= 0.0 {
            return Err(Error::Grid("boundary offsets must be positive".into()));
        }
        Ok(GridSpec {
            n_theta,
            radii_inner,
            radii_outer,
            boundary_offsets,
        })
    }

    /// Default layout: linear radial fill of the core plus circles at
    /// 1 - eps_j inside and 1 + eps_j outside, eps_j = 0.4 * 0.6^j.
    pub fn default_grid() -> Arc<GridSpec> {
        Self::with_n_theta(256)
    }

    /// Smaller grid for solver round-trip tests where many solves are needed.
    pub fn coarse() -> Arc<GridSpec> {
        Self::with_n_theta(64)
    }

    pub fn with_n_theta(n_theta: usize) -> Arc<GridSpec> {
        let offsets: Vec<f64> = (0..12).map(|j| 0.4 * 0.6f64.powi(j)).collect();
        // linear core, a short bridge, then circles at 1 - eps_j; spacing
        // changes stay below ~1.7x so second-order radial stencils hold up
        let mut inner: Vec<f64> = (1..24).map(|k| k as f64 * 0.025).collect();
        inner.extend([0.64, 0.68, 0.72, 0.81]);
        inner.extend(offsets.iter().map(|e| 1.0 - e));
        inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut outer: Vec<f64> = vec![4.0, 3.4, 2.9, 2.45, 2.05, 1.7, 1.55];
        outer.extend(offsets.iter().map(|e| 1.0 + e));
        outer.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Arc::new(
            GridSpec::new(n_theta, inner, outer, offsets)
                .expect("default grid layout is valid"),
        )
    }

    pub fn theta(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n_theta as f64
    }

    /// Indices of the inner circles sitting at radius 1 - eps_j, innermost
    /// offset last, paired with the offsets actually present in the grid.
    pub fn inner_boundary_rows(&self) -> Vec<(usize, f64)> {
        let mut rows = Vec::new();
        for &eps in &self.boundary_offsets {
            let target = 1.0 - eps;
            if let Some(c) = self
                .radii_inner
                .iter()
                .position(|&r| (r - target).abs() < 1e-12)
            {
                rows.push((c, eps));
            }
        }
        rows
    }

    /// Same for the exterior circles at radius 1 + eps_j.
    pub fn outer_boundary_rows(&self) -> Vec<(usize, f64)> {
        let mut rows = Vec::new();
        for &eps in &self.boundary_offsets {
            let target = 1.0 + eps;
            if let Some(c) = self
                .radii_outer
                .iter()
                .position(|&r| (r - target).abs() < 1e-12)
            {
                rows.push((c, eps));
            }
        }
        rows
    }

    pub fn radii(&self, chart: Chart) -> &[f64] {
        match chart {
            Chart::Disk => &self.radii_inner,
            Chart::Exterior => &self.radii_outer,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("GridSpec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GridSpec = serde_json::from_str(text)?;
        GridSpec::new(
            spec.n_theta,
            spec.radii_inner,
            spec.radii_outer,
            spec.boundary_offsets,
        )
    }

    /// FNV-1a hash of the canonical JSON form; embedded in every report so
    /// results are reproducible bit-for-bit given the same layout.
    pub fn hash_hex(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_json().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Complex samples indexed by (circle, angle) on one chart.
#[derive(Clone, Debug)]
pub struct ComplexGridFunction {
    pub spec: Arc<GridSpec>,
    pub chart: Chart,
    /// Row-major: `values[c * n_theta + k]` is the sample on circle `c` at
    /// angle `theta_k`.
    pub values: Vec<Complex64>,
}

impl ComplexGridFunction {
    pub fn new(spec: Arc<GridSpec>, chart: Chart, values: Vec<Complex64>) -> Result<Self> {
        let circles = spec.radii(chart).len();
        if values.len() != circles * spec.n_theta {
            return Err(Error::Grid(format!(
                "value count {} does not match {} circles x {} angles",
                values.len(),
                circles,
                spec.n_theta
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Grid("non-finite sample".into()));
        }
        Ok(ComplexGridFunction { spec, chart, values })
    }

    pub fn from_fn(
        spec: Arc<GridSpec>,
        chart: Chart,
        mut f: impl FnMut(Complex64) -> Complex64,
    ) -> Result<Self> {
        let radii = spec.radii(chart).to_vec();
        let n = spec.n_theta;
        let mut values = Vec::with_capacity(radii.len() * n);
        for &r in &radii {
            for k in 0..n {
                let t = spec.theta(k);
                values.push(f(Complex64::from_polar(r, t)));
            }
        }
        ComplexGridFunction::new(spec, chart, values)
    }

    pub fn circles(&self) -> usize {
        self.spec.radii(self.chart).len()
    }

    pub fn value(&self, circle: usize, angle: usize) -> Complex64 {
        self.values[circle * self.spec.n_theta + angle]
    }

    pub fn row(&self, circle: usize) -> &[Complex64] {
        let n = self.spec.n_theta;
        &self.values[circle * n..(circle + 1) * n]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Maximum modulus on each circle.
    pub fn row_sup(&self, circle: usize) -> f64 {
        self.row(circle).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn zip_with(
        &self,
        other: &ComplexGridFunction,
        mut f: impl FnMut(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexGridFunction> {
        if self.chart != other.chart || self.values.len() != other.values.len() {
            return Err(Error::Grid("mismatched grid functions".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ComplexGridFunction::new(self.spec.clone(), self.chart, values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("circle_index,angle_index,re,im\n");
        let n = self.spec.n_theta;
        for c in 0..self.circles() {
            for k in 0..n {
                let v = self.value(c, k);
                out.push_str(&format!("{c},{k},{:.17e},{:.17e}\n", v.re, v.im));
            }
        }
        out
    }

    pub fn from_csv(spec: Arc<GridSpec>, chart: Chart, text: &str) -> Result<Self> {
        let circles = spec.radii(chart).len();
        let n = spec.n_theta;
        let mut values = vec![Complex64::new(0.0, 0.0); circles * n];
        let mut seen = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 && line.starts_with("circle_index") {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Argument(format!("bad CSV line {}", lineno + 1)));
            }
            let c: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| Error::Argument("bad circle index".into()))?;
            let k: usize = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::Argument("bad angle index".into()))?;
            let re: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::Argument("bad re field".into()))?;
            let im: f64 = fields[3]
                .trim()
                .parse()
                .map_err(|_| Error::Argument("bad im field".into()))?;
            if c >= circles || k >= n {
                return Err(Error::Argument("CSV index out of range".into()));
            }
            values[c * n + k] = Complex64::new(re, im);
            seen += 1;
        }
        if seen != circles * n {
            return Err(Error::Argument(format!(
                "CSV holds {seen} samples, grid wants {}",
                circles * n
            )));
        }
        ComplexGridFunction::new(spec, chart, values)
    }
}

/// rho_D(z) = 2 / (1 - |z|^2), the hyperbolic density of the unit disk.
pub fn hyperbolic_density_disk(z: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} not inside the disk", r2.sqrt())));
    }
    Ok(2.0 / (1.0 - r2))
}

/// rho_{D*}(z) = 2 / (|z|^2 - 1), the hyperbolic density of the exterior.
pub fn hyperbolic_density_exterior(z: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 <= 1.0 {
        return Err(Error::Domain(format!("|z| = {} not outside the disk", r2.sqrt())));
    }
    Ok(2.0 / (r2 - 1.0))
}

/// z* = 1 / conj(z), reflection across the unit circle.
pub fn reflect(z: Complex64) -> Result<Complex64> {
    if z.norm_sqr() == 0.0 {
        return Err(Error::Domain("reflection of 0 is the point at infinity".into()));
    }
    Ok(Complex64::new(1.0, 0.0) / z.conj())
}

/// Ordinary least squares of log(value) against log(scale).
///
/// Returns (slope, r_squared). This is the exponent estimator behind every
/// decay and distortion fit.
pub fn log_log_slope_fit(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.len() < 4 {
        return Err(Error::Argument(format!(
            "need at least 4 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(s, v)| s <= 0.0 || v <= 0.0) {
        return Err(Error::Argument("all scales and values must be positive".into()));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument("degenerate fit: all scales equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, r2.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_disk_values() {
        assert_eq!(hyperbolic_density_disk(Complex64::new(0.0, 0.0)).unwrap(), 2.0);
        let v = hyperbolic_density_disk(Complex64::new(0.5, 0.0)).unwrap();
        assert!((v - 8.0 / 3.0).abs() < 1e-15);
        let v = hyperbolic_density_disk(Complex64::new(0.9, 0.0)).unwrap();
        assert!((v - 2.0 / 0.19).abs() < 1e-12);
        assert!(hyperbolic_density_disk(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn density_exterior_values() {
        let v = hyperbolic_density_exterior(Complex64::new(2.0, 0.0)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let v = hyperbolic_density_exterior(Complex64::new(2f64.sqrt(), 0.0)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        // monotone blow-up stays finite just outside the circle
        let v = hyperbolic_density_exterior(Complex64::new(1.0 + 1e-12, 0.0)).unwrap();
        assert!(v.is_finite() && v > 1e9);
        assert!(hyperbolic_density_exterior(Complex64::new(0.5, 0.5)).is_err());
    }

    #[test]
    fn reflect_values() {
        let v = reflect(Complex64::new(0.5, 0.0)).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let b = Complex64::from_polar(1.0, 0.73);
        assert!((reflect(b).unwrap() - b).norm() < 1e-15);
        let v = reflect(Complex64::new(0.0, 0.5)).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(reflect(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn reflect_is_involutive() {
        for &(re, im) in &[(0.3, -0.4), (1.7, 2.2), (-0.01, 0.003), (5.0, -9.0)] {
            let z = Complex64::new(re, im);
            let back = reflect(reflect(z).unwrap()).unwrap();
            assert!((back - z).norm() < 1e-14 * z.norm().max(1.0));
        }
    }

    #[test]
    fn density_weight_identities() {
        for &r in &[0.1, 0.5, 0.99, 0.99999] {
            let z = Complex64::from_polar(r, 1.0);
            let rho = hyperbolic_density_disk(z).unwrap();
            assert!((rho * (1.0 - z.norm_sqr()) - 2.0).abs() < 1e-15);
        }
        for &r in &[1.0001, 1.5, 4.0, 100.0] {
            let z = Complex64::from_polar(r, -2.0);
            let rho = hyperbolic_density_exterior(z).unwrap();
            assert!((rho * (z.norm_sqr() - 1.0) - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn slope_fit_power_laws() {
        let eps = [0.1, 0.05, 0.025, 0.0125];
        let quad: Vec<(f64, f64)> = eps.iter().map(|&e| (e, e * e)).collect();
        let (s, r2) = log_log_slope_fit(&quad).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);

        let half: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 3.0 * e.sqrt())).collect();
        let (s, _) = log_log_slope_fit(&half).unwrap();
        assert!((s - 0.5).abs() < 1e-12);

        let flat: Vec<(f64, f64)> = eps.iter().map(|&e| (e, 7.5)).collect();
        let (s, _) = log_log_slope_fit(&flat).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn slope_fit_rejects_bad_input() {
        assert!(log_log_slope_fit(&[(0.1, 1.0), (0.2, 2.0), (0.3, 3.0)]).is_err());
        assert!(log_log_slope_fit(&[(0.1, 1.0), (0.2, 2.0), (0.3, 3.0), (0.4, -1.0)]).is_err());
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(60, vec![0.5], vec![2.0], vec![0.4, 0.2, 0.1, 0.05]).is_err());
        assert!(GridSpec::new(128, vec![0.5, 0.4], vec![2.0], vec![0.4, 0.2, 0.1, 0.05]).is_err());
        assert!(GridSpec::new(128, vec![0.5], vec![0.9], vec![0.4, 0.2, 0.1, 0.05]).is_err());
        let spec = GridSpec::default_grid();
        assert_eq!(spec.n_theta, 256);
        assert!(spec.inner_boundary_rows().len() == spec.boundary_offsets.len());
        assert!(spec.outer_boundary_rows().len() == spec.boundary_offsets.len());
    }

    #[test]
    fn grid_spec_json_round_trip() {
        let spec = GridSpec::default_grid();
        let back = GridSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(*spec, back);
        assert_eq!(spec.hash_hex(), back.hash_hex());
    }

    #[test]
    fn grid_function_csv_round_trip() {
        let spec = GridSpec::coarse();
        let f = ComplexGridFunction::from_fn(spec.clone(), Chart::Disk, |z| {
            z * z + Complex64::new(0.1, -0.2)
        })
        .unwrap();
        let back = ComplexGridFunction::from_csv(spec, Chart::Disk, &f.to_csv()).unwrap();
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
