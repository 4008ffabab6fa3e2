//! Finite Laurent series on an annulus, fitted from circle samples.
//!
//! A holomorphic function on an annulus has one coefficient per angular mode:
//! the FFT of each sampled circle, rescaled by r^{-m}, must agree across
//! circles. The scatter of those per-circle estimates is the holomorphy
//! residual; averaging them (weighted by signal strength) gives the series.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transforms::{bin, AngularFft};

/// sum_{m = m_min}^{m_max} c[m - m_min] z^m.
#[derive(Clone, Debug)]
pub struct LaurentSeries {
    pub m_min: i64,
    pub coeffs: Vec<Complex64>,
}

impl LaurentSeries {
    pub fn new(m_min: i64, coeffs: Vec<Complex64>) -> Self {
        LaurentSeries { m_min, coeffs }
    }

    pub fn zero() -> Self {
        LaurentSeries {
            m_min: 0,
            coeffs: vec![],
        }
    }

    pub fn m_max(&self) -> i64 {
        self.m_min + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        if m < self.m_min || m > self.m_max() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m - self.m_min) as usize]
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.coeffs.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        // Horner from the top power down, then scale by z^{m_min}
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.m_min as i32)
    }

    pub fn derivative(&self) -> LaurentSeries {
        if self.coeffs.is_empty() {
            return LaurentSeries::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (self.m_min + i as i64) as f64)
            .collect();
        LaurentSeries {
            m_min: self.m_min - 1,
            coeffs,
        }
    }

    pub fn scaled(&self, s: Complex64) -> LaurentSeries {
        LaurentSeries {
            m_min: self.m_min,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        if self.coeffs.is_empty() {
            return other.clone();
        }
        if other.coeffs.is_empty() {
            return self.clone();
        }
        let m_min = self.m_min.min(other.m_min);
        let m_max = self.m_max().max(other.m_max());
        let coeffs = (m_min..=m_max)
            .map(|m| self.coeff(m) + other.coeff(m))
            .collect();
        LaurentSeries { m_min, coeffs }
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Drop leading/trailing coefficients below `tol` in modulus.
    pub fn trimmed(&self, tol: f64) -> LaurentSeries {
        let mut lo = 0usize;
        let mut hi = self.coeffs.len();
        while lo < hi && self.coeffs[lo].norm() <= tol {
            lo += 1;
        }
        while hi > lo && self.coeffs[hi - 1].norm() <= tol {
            hi -= 1;
        }
        LaurentSeries {
            m_min: self.m_min + lo as i64,
            coeffs: self.coeffs[lo..hi].to_vec(),
        }
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Least-squares fit of a Laurent series through circle samples, together
/// with the holomorphy residual (worst absolute misfit relative to the
/// largest sample).
pub fn fit_laurent(
    radii: &[f64],
    rows: &[Vec<Complex64>],
    m_min: i64,
    m_max: i64,
) -> Result<(LaurentSeries, f64)> {
    if radii.len() < 2 {
        return Err(Error::Argument("laurent fit needs at least two circles".into()));
    }
    let n = rows[0].len();
    let half = (n / 2) as i64;
    if m_min < -half || m_max >= half {
        return Err(Error::Argument(format!(
            "mode range [{m_min}, {m_max}] exceeds the angular resolution"
        )));
    }
    let fft = AngularFft::new(n);
    let mode_rows: Vec<Vec<Complex64>> = rows.iter().map(|r| fft.to_modes(r)).collect();
    let sup = rows
        .iter()
        .flat_map(|r| r.iter().map(|v| v.norm()))
        .fold(0.0, f64::max);

    let mut coeffs = Vec::with_capacity((m_max - m_min + 1) as usize);
    let mut residual: f64 = 0.0;
    for m in m_min..=m_max {
        let idx = bin(m, n).expect("mode in range");
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (c, &r) in radii.iter().enumerate() {
            let w = r.powi(m as i32);
            num += mode_rows[c][idx] * w;
            den += w * w;
        }
        let est = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
        for (c, &r) in radii.iter().enumerate() {
            let w = r.powi(m as i32);
            residual = residual.max((mode_rows[c][idx] - est * w).norm());
        }
        coeffs.push(est);
    }
    // modes outside the fitted range are also misfit
    for (c, row) in mode_rows.iter().enumerate() {
        let _ = c;
        for (idx, v) in row.iter().enumerate() {
            let m = crate::transforms::freq(idx, n);
            if m < m_min || m > m_max {
                residual = residual.max(v.norm());
            }
        }
    }
    let rel = if sup > 0.0 { residual / sup } else { residual };
    Ok((LaurentSeries { m_min, coeffs }, rel))
}
