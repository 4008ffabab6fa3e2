//! Orientation-preserving self-homeomorphisms of the unit circle, stored as
//! strictly increasing lifts on a uniform angular grid.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transforms::{freq, AngularFft};

/// Circle homeomorphism g with lift g(theta + 2 pi) = g(theta) + 2 pi.
#[derive(Clone, Debug)]
pub struct CircleMap {
    /// Lift values at theta_k = 2 pi k / n, strictly increasing with total
    /// increase 2 pi over one period.
    lift: Vec<f64>,
    /// Angle derivative samples when available (analytic fixtures, chain
    /// rules); otherwise estimated spectrally on demand.
    deriv: Option<Vec<f64>>,
}

impl CircleMap {
    pub fn from_lift(lift: Vec<f64>, deriv: Option<Vec<f64>>) -> Result<Self> {
        let n = lift.len();
        if n < 16 {
            return Err(Error::Argument("circle map needs at least 16 samples".into()));
        }
        for k in 0..n {
            let next = if k + 1 < n { lift[k + 1] } else { lift[0] + TAU };
            if next <= lift[k] {
                return Err(Error::Monotonicity(format!(
                    "lift not strictly increasing at sample {k}"
                )));
            }
        }
        if let Some(d) = &deriv {
            if d.len() != n {
                return Err(Error::Argument("derivative sample count mismatch".into()));
            }
            if d.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
                return Err(Error::Monotonicity("derivative samples must be positive".into()));
            }
        }
        Ok(CircleMap { lift, deriv })
    }

    pub fn identity(n: usize) -> Self {
        let lift = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let deriv = vec![1.0; n];
        CircleMap { lift, deriv: Some(deriv) }
    }

    pub fn rotation(n: usize, phi: f64) -> Self {
        let lift = (0..n).map(|k| TAU * k as f64 / n as f64 + phi).collect();
        CircleMap { lift, deriv: Some(vec![1.0; n]) }
    }

    /// Sample a map given as a continuous lift function.
    pub fn from_lift_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let lift = (0..n).map(|k| f(TAU * k as f64 / n as f64)).collect();
        CircleMap::from_lift(lift, None)
    }

    pub fn from_lift_fn_with_deriv(
        n: usize,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let lift = (0..n).map(|k| f(TAU * k as f64 / n as f64)).collect();
        let deriv = (0..n).map(|k| df(TAU * k as f64 / n as f64)).collect();
        CircleMap::from_lift(lift, Some(deriv))
    }

    /// Unwrap raw angle samples (mod 2 pi) into a degree-one lift.
    pub fn from_angle_samples(angles: &[f64]) -> Result<Self> {
        let n = angles.len();
        let mut lift = Vec::with_capacity(n);
        let mut prev = angles[0].rem_euclid(TAU);
        lift.push(prev);
        for &a in &angles[1..] {
            let step = (a - prev).rem_euclid(TAU);
            prev += step;
            lift.push(prev);
        }
        let closing = (angles[0] - prev).rem_euclid(TAU);
        if (prev + closing - lift[0] - TAU).abs() > 1e-9 {
            return Err(Error::Monotonicity("samples do not wind once around the circle".into()));
        }
        CircleMap::from_lift(lift, None)
    }

    pub fn len(&self) -> usize {
        self.lift.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lift_samples(&self) -> &[f64] {
        &self.lift
    }

    pub fn min_increment(&self) -> f64 {
        let n = self.lift.len();
        (0..n)
            .map(|k| {
                let next = if k + 1 < n { self.lift[k + 1] } else { self.lift[0] + TAU };
                next - self.lift[k]
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Monotone cubic (harmonic-mean slopes) evaluation of the lift.
    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.lift.len();
        let wraps = (theta / TAU).floor();
        let t = theta - wraps * TAU;
        let pos = t / TAU * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let h = TAU / n as f64;
        let x = pos - k as f64;
        let (y0, y1) = (self.lift[k], self.wrapped(k + 1));
        let s0 = self.slope(k);
        let s1 = self.slope(k + 1);
        let x2 = x * x;
        let x3 = x2 * x;
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        h00 * y0 + h10 * h * s0 + h01 * y1 + h11 * h * s1 + wraps * TAU
    }

    fn wrapped(&self, k: usize) -> f64 {
        let n = self.lift.len();
        if k < n {
            self.lift[k]
        } else {
            self.lift[k - n] + TAU
        }
    }

    fn secant(&self, k: usize) -> f64 {
        let n = self.lift.len() as f64;
        let h = TAU / n;
        (self.wrapped(k + 1) - self.wrapped(k)) / h
    }

    /// Harmonic-mean slope at node k: monotone by construction.
    fn slope(&self, k: usize) -> f64 {
        let n = self.lift.len();
        let prev = self.secant((k + n - 1) % n);
        let here = self.secant(k % n);
        2.0 * prev * here / (prev + here)
    }

    /// Inverse lift by bisection; g is strictly increasing so this always
    /// converges.
    pub fn inverse_eval(&self, phi: f64) -> f64 {
        let base = self.lift[0];
        let wraps = ((phi - base) / TAU).floor();
        let target = phi - wraps * TAU;
        let (mut lo, mut hi) = (0.0, TAU);
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi) + wraps * TAU
    }

    /// Derivative samples: provided ones, else spectral differentiation of
    /// the periodic part of the lift.
    pub fn deriv_samples(&self) -> Vec<f64> {
        if let Some(d) = &self.deriv {
            return d.clone();
        }
        let n = self.lift.len();
        let fft = AngularFft::new(n);
        let row: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(self.lift[k] - TAU * k as f64 / n as f64, 0.0))
            .collect();
        let mut modes = fft.to_modes(&row);
        for (idx, v) in modes.iter_mut().enumerate() {
            let m = freq(idx, n) as f64;
            *v *= Complex64::new(0.0, m);
        }
        fft.to_values(&modes)
            .iter()
            .map(|v| 1.0 + v.re)
            .collect()
    }

    pub fn has_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    /// g composed with an inner map: self(inner(theta)).
    pub fn compose(&self, inner: &CircleMap) -> Result<CircleMap> {
        let lift: Vec<f64> = inner.lift.iter().map(|&t| self.eval(t)).collect();
        let deriv = match (&self.deriv, &inner.deriv) {
            (Some(_), Some(di)) => {
                let outer = self.deriv_interp();
                let chained: Vec<f64> =
                    inner.lift.iter().zip(di).map(|(&t, &d)| outer(t) * d).collect();
                chained.iter().all(|&v| v > 0.0).then_some(chained)
            }
            _ => None,
        };
        CircleMap::from_lift(lift, deriv)
    }

    fn deriv_interp(&self) -> impl Fn(f64) -> f64 + '_ {
        let d = self.deriv.as_ref().expect("derivative present");
        let n = d.len();
        move |theta: f64| {
            let pos = theta.rem_euclid(TAU) / TAU * n as f64;
            let k = (pos.floor() as usize).min(n - 1);
            let x = pos - k as f64;
            d[k] * (1.0 - x) + d[(k + 1) % n] * x
        }
    }

    /// Point on the unit circle at parameter theta: e^{i g(theta)}.
    pub fn point(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.eval(theta))
    }

    /// Largest deviation from another map, as angles.
    pub fn sup_distance(&self, other: &CircleMap) -> f64 {
        let n = self.lift.len().max(other.lift.len());
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let mut d = (self.eval(t) - other.eval(t)).abs() % TAU;
                if d > PI {
                    d = TAU - d;
                }
                d
            })
            .fold(0.0, f64::max)
    }
}
