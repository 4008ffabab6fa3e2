//! Angular-mode representations of circle data and the singular integral
//! operators of the Beltrami equation expressed in those modes.
//!
//! A field h supported on circles 0 < r <= R_end decomposes as
//! h(sigma e^{i a}) = sum_m h_m(sigma) e^{i m a}. Both the Cauchy transform
//! C[h](z) = (1/pi) int h(w)/(z - w) dA and the Beurling transform
//! T[h] = dC[h]/dz act mode by mode:
//!
//!   C_n(r) =  2 r^n int_0^r sigma^{-n} h_{n+1} d sigma          (n <= -1)
//!   C_n(r) = -2 r^n int_r^{R} sigma^{-n} h_{n+1} d sigma        (n >=  0)
//!   T_m(r) =  h_{m+2}(r) + 2(m+1) r^m *
//!               { int_0^r sigma^{-m-1} h_{m+2} d sigma          (m <= -2)
//!               { -int_r^{R} sigma^{-m-1} h_{m+2} d sigma       (m >= -1)
//!
//! The radial integrals are evaluated with the power weight integrated
//! exactly against a piecewise-linear interpolant of h_m, in variables
//! normalized by the target radius so no intermediate quantity overflows.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/backward FFT pair for one angular resolution.
pub(crate) struct AngularFft {
    pub n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl AngularFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        AngularFft {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    /// Sample row -> Fourier coefficients, scaled so that
    /// value(theta) = sum_m modes[idx(m)] e^{i m theta}.
    pub fn to_modes(&self, row: &[Complex64]) -> Vec<Complex64> {
        let mut buf = row.to_vec();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    pub fn to_values(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let mut buf = modes.to_vec();
        self.inv.process(&mut buf);
        buf
    }
}

/// Signed frequency of FFT bin `idx` for length `n`.
pub(crate) fn freq(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 - 1 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Bin of signed frequency `m`, if representable.
pub(crate) fn bin(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m >= 0 && m < half {
        Some(m as usize)
    } else if m >= -half && m < 0 {
        Some((m + n as i64) as usize)
    } else {
        None
    }
}

/// Mode data of one field on an ascending list of support circles.
pub(crate) struct PolarModes {
    pub radii: Vec<f64>,
    /// `modes[c]` holds the angular coefficients on circle `c` in FFT layout.
    pub modes: Vec<Vec<Complex64>>,
    pub n: usize,
}

impl PolarModes {
    pub fn from_rows(fft: &AngularFft, radii: &[f64], rows: &[Vec<Complex64>]) -> Self {
        assert_eq!(radii.len(), rows.len());
        PolarModes {
            radii: radii.to_vec(),
            modes: rows.iter().map(|r| fft.to_modes(r)).collect(),
            n: fft.n,
        }
    }

    pub fn to_rows(&self, fft: &AngularFft) -> Vec<Vec<Complex64>> {
        self.modes.iter().map(|m| fft.to_values(m)).collect()
    }

    /// Radial samples of the mode in FFT bin `idx`.
    fn mode_radial(&self, idx: usize) -> Vec<Complex64> {
        self.modes.iter().map(|m| m[idx]).collect()
    }

    #[cfg(test)]
    pub fn sup(&self, fft: &AngularFft) -> f64 {
        self.to_rows(fft)
            .iter()
            .flat_map(|r| r.iter().map(|v| v.norm()))
            .fold(0.0, f64::max)
    }
}

/// int_{u0}^{u1} u^p du, valid for any real p and 0 < u0 <= u1.
fn ipow(p: f64, u0: f64, u1: f64) -> f64 {
    if (p + 1.0).abs() < 1e-12 {
        (u1 / u0).ln()
    } else {
        (u1.powf(p + 1.0) - u0.powf(p + 1.0)) / (p + 1.0)
    }
}

/// int_{u0}^{u1} u^p g(u) du with g linear through (u0, g0) and (u1, g1).
fn seg_int(p: f64, u0: f64, u1: f64, g0: Complex64, g1: Complex64) -> Complex64 {
    if u1 <= u0 {
        return Complex64::new(0.0, 0.0);
    }
    let b = (g1 - g0) / (u1 - u0);
    let a = g0 - b * u0;
    a * ipow(p, u0, u1) + b * ipow(p + 1.0, u0, u1)
}

/// Cumulative inner integrals I_c = int_0^1 u^p g(u R_c) du for every support
/// circle. Below the innermost circle the mode is modeled as
/// g(sigma) = g(R_0) (sigma/R_0)^s with s = |angular frequency|, the leading
/// behavior of a smooth field.
fn inner_ints(radii: &[f64], g: &[Complex64], p: f64, s: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii.len());
    let mut acc = g[0] / (p + s + 1.0);
    out.push(acc);
    for c in 1..radii.len() {
        let u0 = radii[c - 1] / radii[c];
        acc = acc * u0.powf(p + 1.0) + seg_int(p, u0, 1.0, g[c - 1], g[c]);
        out.push(acc);
    }
    out
}

/// Cumulative outer integrals O_c = int_1^{R_end/R_c} u^{-p} g(u R_c) du.
/// The field is zero beyond the outermost circle.
fn outer_ints(radii: &[f64], g: &[Complex64], p: f64) -> Vec<Complex64> {
    let count = radii.len();
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    for c in (0..count.saturating_sub(1)).rev() {
        let u1 = radii[c + 1] / radii[c];
        out[c] = seg_int(-p, 1.0, u1, g[c], g[c + 1]) + out[c + 1] * u1.powf(1.0 - p);
    }
    out
}

/// T[h] on the support circles of `h`.
pub(crate) fn beurling(h: &PolarModes) -> PolarModes {
    let n = h.n;
    let count = h.radii.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut modes = vec![vec![zero; n]; count];
    for out_idx in 0..n {
        let m = freq(out_idx, n);
        let src_idx = match bin(m + 2, n) {
            Some(i) => i,
            None => continue,
        };
        let g = h.mode_radial(src_idx);
        let coef = 2.0 * (m + 1) as f64;
        if m <= -2 {
            let ints = inner_ints(&h.radii, &g, (-m - 1) as f64, (m + 2).abs() as f64);
            for c in 0..count {
                modes[c][out_idx] = g[c] + ints[c] * coef;
            }
        } else if m == -1 {
            for c in 0..count {
                modes[c][out_idx] = g[c];
            }
        } else {
            let ints = outer_ints(&h.radii, &g, (m + 1) as f64);
            for c in 0..count {
                modes[c][out_idx] = g[c] - ints[c] * coef;
            }
        }
    }
    PolarModes {
        radii: h.radii.clone(),
        modes,
        n,
    }
}

/// Continue the cumulative inner integral from the nearest lower support
/// circle to an arbitrary radius r (field linear between circles, zero beyond
/// the support, power-law model below the innermost circle).
fn inner_at(radii: &[f64], g: &[Complex64], ints: &[Complex64], p: f64, s: f64, r: f64) -> Complex64 {
    let last = radii.len() - 1;
    if r <= radii[0] {
        return g[0] * (r / radii[0]).powf(s) / (p + s + 1.0);
    }
    if r >= radii[last] {
        return ints[last] * (radii[last] / r).powf(p + 1.0);
    }
    // radii[j] <= r < radii[j+1]
    let j = match radii.partition_point(|&x| x <= r) {
        0 => 0,
        k => k - 1,
    };
    let gr = interp_linear(radii, g, j, r);
    ints[j] * (radii[j] / r).powf(p + 1.0) + seg_int(p, radii[j] / r, 1.0, g[j], gr)
}

/// Same continuation for the outer integral.
fn outer_at(radii: &[f64], g: &[Complex64], ints: &[Complex64], p: f64, s: f64, r: f64) -> Complex64 {
    let last = radii.len() - 1;
    if r >= radii[last] {
        return Complex64::new(0.0, 0.0);
    }
    if r < radii[0] {
        // model segment [r, R_0] then the accumulated tail
        let model = g[0] * (r / radii[0]).powf(s) * ipow(s - p, 1.0, radii[0] / r);
        return model + ints[0] * (radii[0] / r).powf(1.0 - p);
    }
    let j = match radii.partition_point(|&x| x <= r) {
        0 => 0,
        k => k - 1,
    };
    if j >= last {
        return Complex64::new(0.0, 0.0);
    }
    let gr = interp_linear(radii, g, j, r);
    seg_int(-p, 1.0, radii[j + 1] / r, gr, g[j + 1]) + ints[j + 1] * (radii[j + 1] / r).powf(1.0 - p)
}

fn interp_linear(radii: &[f64], g: &[Complex64], j: usize, r: f64) -> Complex64 {
    let t = (r - radii[j]) / (radii[j + 1] - radii[j]);
    g[j] * (1.0 - t) + g[j + 1] * t
}

/// C[h] modes at arbitrary evaluation radii (any positive values).
pub(crate) fn cauchy_at(h: &PolarModes, eval_radii: &[f64]) -> PolarModes {
    let n = h.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut modes = vec![vec![zero; n]; eval_radii.len()];
    for out_idx in 0..n {
        let m = freq(out_idx, n);
        let src_idx = match bin(m + 1, n) {
            Some(i) => i,
            None => continue,
        };
        let g = h.mode_radial(src_idx);
        let s = (m + 1).abs() as f64;
        if m <= -1 {
            let p = (-m) as f64;
            let ints = inner_ints(&h.radii, &g, p, s);
            for (e, &r) in eval_radii.iter().enumerate() {
                modes[e][out_idx] = inner_at(&h.radii, &g, &ints, p, s, r) * (2.0 * r);
            }
        } else {
            let p = m as f64;
            let ints = outer_ints(&h.radii, &g, p);
            for (e, &r) in eval_radii.iter().enumerate() {
                modes[e][out_idx] = outer_at(&h.radii, &g, &ints, p, s, r) * (-2.0 * r);
            }
        }
    }
    PolarModes {
        radii: eval_radii.to_vec(),
        modes,
        n,
    }
}

/// C[h](0); only the e^{i a} mode of h contributes.
pub(crate) fn cauchy_at_origin(h: &PolarModes) -> Complex64 {
    let idx = match bin(1, h.n) {
        Some(i) => i,
        None => return Complex64::new(0.0, 0.0),
    };
    let g = h.mode_radial(idx);
    // -2 int_0^{R} h_1(sigma) d sigma, trapezoid with h_1 ~ sigma below R_0
    let mut total = g[0] * (h.radii[0] / 2.0);
    for c in 1..h.radii.len() {
        total += (g[c - 1] + g[c]) * (0.5 * (h.radii[c] - h.radii[c - 1]));
    }
    total * -2.0
}

/// Coefficients a_j of C[h](z) = sum_{j>=1} a_j z^{-j} valid outside the
/// support. a_j = 2 int_0^{R} sigma^j h_{1-j}(sigma) d sigma.
pub(crate) fn laurent_moments(h: &PolarModes, count: usize) -> Vec<Complex64> {
    let r_end = *h.radii.last().unwrap();
    let mut out = Vec::with_capacity(count);
    for j in 1..=count {
        let coef = match bin(1 - j as i64, h.n) {
            Some(src_idx) => {
                let g = h.mode_radial(src_idx);
                let p = j as f64;
                let s = (1 - j as i64).abs() as f64;
                let ints = inner_ints(&h.radii, &g, p, s);
                ints[h.radii.len() - 1] * 2.0 * r_end.powi(j as i32 + 1)
            }
            None => Complex64::new(0.0, 0.0),
        };
        out.push(coef);
    }
    out
}

/// First derivative on a nonuniform ascending grid, second order, one-sided
/// at the ends. Returns df/dr rows.
pub(crate) fn radial_derivative(radii: &[f64], rows: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let count = radii.len();
    let n = rows[0].len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; count];
    for c in 0..count {
        let (i0, i1, i2) = if c == 0 {
            (0, 1, 2)
        } else if c == count - 1 {
            (count - 3, count - 2, count - 1)
        } else {
            (c - 1, c, c + 1)
        };
        let (x0, x1, x2) = (radii[i0], radii[i1], radii[i2]);
        let x = radii[c];
        // derivative of the quadratic through three points
        let w0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let w1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let w2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        for k in 0..n {
            out[c][k] = rows[i0][k] * w0 + rows[i1][k] * w1 + rows[i2][k] * w2;
        }
    }
    out
}

/// Spectral d/dtheta for each row.
pub(crate) fn angular_derivative(fft: &AngularFft, rows: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    rows.iter()
        .map(|row| {
            let mut modes = fft.to_modes(row);
            let n = fft.n;
            for (idx, v) in modes.iter_mut().enumerate() {
                let m = freq(idx, n) as f64;
                *v *= Complex64::new(0.0, m);
            }
            fft.to_values(&modes)
        })
        .collect()
}

/// Complex Wirtinger derivatives of polar rows:
/// df/dz    = e^{-i t}/2 (d/dr - (i/r) d/dt),
/// df/dzbar = e^{+i t}/2 (d/dr + (i/r) d/dt).
pub(crate) fn wirtinger_derivatives(
    fft: &AngularFft,
    radii: &[f64],
    rows: &[Vec<Complex64>],
) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let dr = radial_derivative(radii, rows);
    let dt = angular_derivative(fft, rows);
    let n = fft.n;
    let mut dz = vec![vec![Complex64::new(0.0, 0.0); n]; radii.len()];
    let mut dzbar = dz.clone();
    for c in 0..radii.len() {
        let r = radii[c];
        for k in 0..n {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let em = Complex64::from_polar(0.5, -t);
            let ep = Complex64::from_polar(0.5, t);
            let it = Complex64::new(0.0, 1.0) * dt[c][k] / r;
            dz[c][k] = em * (dr[c][k] - it);
            dzbar[c][k] = ep * (dr[c][k] + it);
        }
    }
    (dz, dzbar)
}

/// Trigonometric-in-angle, cubic-Lagrange-in-radius interpolation of polar
/// rows. Rows are stored as trimmed (frequency, coefficient) lists.
pub(crate) struct PolarInterp {
    radii: Vec<f64>,
    rows: Vec<Vec<(i64, Complex64)>>,
    center: Option<Complex64>,
}

impl PolarInterp {
    pub fn build(
        fft: &AngularFft,
        radii: Vec<f64>,
        value_rows: &[Vec<Complex64>],
        center: Option<Complex64>,
    ) -> Self {
        let n = fft.n;
        let rows = value_rows
            .iter()
            .map(|row| {
                let modes = fft.to_modes(row);
                let peak = modes.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let floor = peak * 1e-14;
                modes
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() > floor)
                    .map(|(idx, &c)| (freq(idx, n), c))
                    .collect()
            })
            .collect();
        PolarInterp { radii, rows, center }
    }

    fn eval_row(&self, c: usize, theta: f64) -> Complex64 {
        self.rows[c]
            .iter()
            .map(|&(m, coef)| coef * Complex64::from_polar(1.0, m as f64 * theta))
            .sum()
    }

    pub fn eval(&self, r: f64, theta: f64) -> Complex64 {
        let count = self.radii.len();
        if r <= self.radii[0] {
            // quadratic through the center value and the two innermost rows
            return match self.center {
                Some(v) if count >= 2 => {
                    let (r0, r1) = (self.radii[0], self.radii[1]);
                    let (f0, f1) = (self.eval_row(0, theta), self.eval_row(1, theta));
                    let w_c = (r - r0) * (r - r1) / (r0 * r1);
                    let w_0 = r * (r - r1) / (r0 * (r0 - r1));
                    let w_1 = r * (r - r0) / (r1 * (r1 - r0));
                    v * w_c + f0 * w_0 + f1 * w_1
                }
                Some(v) => v + (self.eval_row(0, theta) - v) * (r / self.radii[0]),
                None => self.eval_row(0, theta),
            };
        }
        if r >= self.radii[count - 1] {
            return self.eval_row(count - 1, theta);
        }
        let j = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k => k - 1,
        };
        let lo = j.saturating_sub(1);
        let hi = (j + 2).min(count - 1);
        let idx: Vec<usize> = (lo..=hi).collect();
        let vals: Vec<Complex64> = idx.iter().map(|&i| self.eval_row(i, theta)).collect();
        // Lagrange interpolation over the bracketing rows
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &ia) in idx.iter().enumerate() {
            let mut w = 1.0;
            for (b, &ib) in idx.iter().enumerate() {
                if a != b {
                    w *= (r - self.radii[ib]) / (self.radii[ia] - self.radii[ib]);
                }
            }
            acc += vals[a] * w;
        }
        acc
    }
}
