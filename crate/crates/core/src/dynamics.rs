//! One-dimensional hyperbolic germs and their linearization by Banach
//! contraction, the brute-force Koenigs limit as an independent oracle,
//! numerical conjugation of circle maps by Mobius elements, and the chart
//! experiment promoting local regularity of a conjugating map to the circle.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::circle::CircleMap;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::holder::{constant_interval, ladder_interval, HolderEntry};
use crate::mobius::{classify, MobiusClass, MobiusMap};

/// Cubic Lagrange interpolation on a uniform grid.
fn cubic_at(x0: f64, dx: f64, vals: &[f64], x: f64) -> f64 {
    let n = vals.len();
    let pos = (x - x0) / dx;
    let k = (pos.floor() as isize).clamp(1, n as isize - 3) as usize;
    let idx = [k - 1, k, k + 1, k + 2];
    let mut acc = 0.0;
    for (a, &ia) in idx.iter().enumerate() {
        let xa = x0 + ia as f64 * dx;
        let mut w = 1.0;
        for (b, &ib) in idx.iter().enumerate() {
            if a != b {
                let xb = x0 + ib as f64 * dx;
                w *= (x - xb) / (xa - xb);
            }
        }
        acc += vals[ia] * w;
    }
    acc
}

enum GermEval {
    Samples,
    Closure(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Sampled real germ on [-delta0, delta0] with g(0) = 0 and g'(0) = a.
pub struct Germ1D {
    pub xs: Vec<f64>,
    pub gs: Vec<f64>,
    /// Multiplier g'(0), normalized into (0, 1).
    pub a: f64,
    /// Holder exponent of g'.
    pub alpha: f64,
    /// Measured Holder constant of g' over the full interval.
    pub c_delta: f64,
    /// Set when the input germ had a > 1 and was replaced by its inverse.
    pub inverted: bool,
    eval: GermEval,
}

impl Germ1D {
    /// Build from a closure with known multiplier. Germs with a > 1 are
    /// replaced by their inverse (computed by bisection), recorded in
    /// `inverted`, so downstream work always sees a in (0, 1).
    pub fn from_fn(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: f64,
        alpha: f64,
        delta0: f64,
        n: usize,
    ) -> Result<Germ1D> {
        if a <= 0.0 {
            return Err(Error::Argument("germ must be orientation-preserving: a > 0".into()));
        }
        if (a - 1.0).abs() < 1e-12 {
            return Err(Error::Argument("parabolic germ (a = 1) is out of scope".into()));
        }
        if alpha <= 0.0 || alpha >= 1.0 {
            return Err(Error::Argument("alpha must lie in (0, 1)".into()));
        }
        let n = if n % 2 == 0 { n + 1 } else { n };
        if f(0.0).abs() > 1e-14 {
            return Err(Error::Argument(format!("g(0) = {} must vanish", f(0.0))));
        }
        let (closure, a, inverted): (Arc<dyn Fn(f64) -> f64 + Send + Sync>, f64, bool) = if a < 1.0
        {
            (Arc::new(f), a, false)
        } else {
            // invert by bisection on the monotone germ
            let fwd = Arc::new(f);
            let cap = delta0;
            let inv = {
                let fwd = fwd.clone();
                move |y: f64| -> f64 {
                    let (mut lo, mut hi) = (-cap, cap);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if fwd(mid) < y {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    0.5 * (lo + hi)
                }
            };
            (Arc::new(inv), 1.0 / a, true)
        };
        let xs: Vec<f64> = (0..n)
            .map(|k| -delta0 + 2.0 * delta0 * k as f64 / (n - 1) as f64)
            .collect();
        let gs: Vec<f64> = xs.iter().map(|&x| closure(x)).collect();
        for w in gs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Monotonicity("germ samples must be strictly increasing".into()));
            }
        }
        let mut germ = Germ1D {
            xs,
            gs,
            a,
            alpha,
            c_delta: 0.0,
            inverted,
            eval: GermEval::Closure(closure),
        };
        germ.c_delta = germ.holder_constant_on(delta0);
        // sanity net only: a finite-difference estimate of g'(0) carries an
        // O(dx^alpha) bias for C^{1+alpha} germs, so the tolerance is loose
        let measured = germ.derivative_at_zero();
        if (measured - germ.a).abs() > 0.01 * (1.0 + germ.a) {
            return Err(Error::Argument(format!(
                "declared multiplier {} disagrees with samples ({measured})",
                germ.a
            )));
        }
        Ok(germ)
    }

    /// Build from raw samples; the multiplier is estimated from the grid.
    pub fn from_samples(xs: Vec<f64>, gs: Vec<f64>, alpha: f64) -> Result<Germ1D> {
        if xs.len() != gs.len() || xs.len() < 9 {
            return Err(Error::Argument("need at least 9 matched samples".into()));
        }
        let n = xs.len();
        let mid = n / 2;
        if xs[mid].abs() > 1e-14 || gs[mid].abs() > 1e-14 {
            return Err(Error::Argument("samples must be centered with g(0) = 0".into()));
        }
        for w in gs.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Monotonicity("germ samples must be strictly increasing".into()));
            }
        }
        let dx = xs[1] - xs[0];
        // fourth-order five-point derivative at the center
        let a = (8.0 * (gs[mid + 1] - gs[mid - 1]) - (gs[mid + 2] - gs[mid - 2])) / (12.0 * dx);
        if a <= 0.0 || (a - 1.0).abs() < 1e-10 {
            return Err(Error::Argument(format!("estimated multiplier {a} unusable")));
        }
        if a >= 1.0 {
            return Err(Error::Argument(
                "sampled germs with a > 1 should be inverted by the caller".into(),
            ));
        }
        let mut germ = Germ1D {
            xs,
            gs,
            a,
            alpha,
            c_delta: 0.0,
            inverted: false,
            eval: GermEval::Samples,
        };
        germ.c_delta = germ.holder_constant_on(germ.xs[germ.xs.len() - 1]);
        Ok(germ)
    }

    pub fn delta0(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.eval {
            GermEval::Closure(f) => f(x),
            GermEval::Samples => {
                let dx = self.xs[1] - self.xs[0];
                cubic_at(self.xs[0], dx, &self.gs, x)
            }
        }
    }

    fn derivative_at_zero(&self) -> f64 {
        let mid = self.xs.len() / 2;
        let dx = self.xs[1] - self.xs[0];
        (8.0 * (self.gs[mid + 1] - self.gs[mid - 1]) - (self.gs[mid + 2] - self.gs[mid - 2]))
            / (12.0 * dx)
    }

    /// Centered-difference derivative samples on the sub-interval |x| <= d.
    fn deriv_samples_on(&self, d: f64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ds = Vec::new();
        let dx = self.xs[1] - self.xs[0];
        for k in 1..self.xs.len() - 1 {
            if self.xs[k].abs() <= d {
                xs.push(self.xs[k]);
                ds.push((self.gs[k + 1] - self.gs[k - 1]) / (2.0 * dx));
            }
        }
        (xs, ds)
    }

    /// Dyadic Holder constant of g' on [-d, d] at the germ's exponent.
    pub fn holder_constant_on(&self, d: f64) -> f64 {
        let (xs, ds) = self.deriv_samples_on(d);
        if xs.len() < 9 {
            return f64::INFINITY;
        }
        constant_interval(&xs, &ds, self.alpha)
    }

    /// Full Holder ladder of g' on the germ interval.
    pub fn derivative_ladder(&self, alphas: &[f64]) -> Vec<HolderEntry> {
        let (xs, ds) = self.deriv_samples_on(self.delta0());
        ladder_interval(&xs, &ds, alphas)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,g\n");
        for (x, g) in self.xs.iter().zip(&self.gs) {
            out.push_str(&format!("{x:.17e},{g:.17e}\n"));
        }
        out
    }

    pub fn from_csv(text: &str, alpha: f64) -> Result<Germ1D> {
        let mut xs = Vec::new();
        let mut gs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 && line.starts_with('x') {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let x: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Argument(format!("bad germ CSV line {}", lineno + 1)))?;
            let g: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Argument(format!("bad germ CSV line {}", lineno + 1)))?;
            xs.push(x);
            gs.push(g);
        }
        Germ1D::from_samples(xs, gs, alpha)
    }
}

/// The operator-norm bound (1/a)[(a + c d^alpha)^{1+alpha} + c d^alpha] of
/// the linearization contraction on the interval [-d, d].
pub fn contraction_bound(a: f64, alpha: f64, c: f64, d: f64) -> f64 {
    let t = c * d.powf(alpha);
    ((a + t).powf(1.0 + alpha) + t) / a
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeltaChoice {
    pub delta: f64,
    pub bound: f64,
    pub c_delta: f64,
}

/// Largest grid-admissible delta with contraction bound <= 0.9 and
/// g([-delta, delta]) inside [-delta, delta].
pub fn choose_delta(germ: &Germ1D) -> Result<DeltaChoice> {
    choose_delta_capped(germ, f64::INFINITY)
}

pub fn choose_delta_capped(germ: &Germ1D, cap: f64) -> Result<DeltaChoice> {
    let mid = germ.xs.len() / 2;
    for k in (mid + 8..germ.xs.len()).rev() {
        let d = germ.xs[k];
        if d > cap {
            continue;
        }
        if germ.eval(d).abs() > d || germ.eval(-d).abs() > d {
            continue;
        }
        let c = germ.holder_constant_on(d);
        if !c.is_finite() {
            continue;
        }
        let bound = contraction_bound(germ.a, germ.alpha, c, d);
        if bound <= 0.9 {
            return Ok(DeltaChoice {
                delta: d,
                bound,
                c_delta: c,
            });
        }
    }
    Err(Error::Resolution(
        "no admissible delta at this grid resolution: the contraction bound never drops below 0.9"
            .into(),
    ))
}

/// Evaluation of the correction psi, which vanishes to order 1 + alpha at
/// the fixed point. Inside the two cells touching 0 a polynomial interpolant
/// would leave an error that does not vanish at 0 and gets amplified by 1/a
/// every iteration; instead each side is modeled as
/// A |y|^{1+alpha} + B y^2 through the two nearest nodes, exact for both a
/// pure Holder cusp and a smooth germ, with both basis terms vanishing fast
/// enough to keep the iteration contractive.
fn psi_eval(xs: &[f64], psi: &[f64], alpha: f64, y: f64) -> f64 {
    let n = xs.len();
    let dx = xs[1] - xs[0];
    let mid = n / 2;
    if y.abs() < dx {
        let q = 1.0 + alpha;
        let (p1, p2) = if y >= 0.0 {
            (psi[mid + 1], psi[mid + 2])
        } else {
            (psi[mid - 1], psi[mid - 2])
        };
        let denom = 4.0 - 2f64.powf(q);
        let a_coef = (4.0 * p1 - p2) / (dx.powf(q) * denom);
        let b_coef = (p2 - 2f64.powf(q) * p1) / (dx * dx * denom);
        let t = y.abs();
        return a_coef * t.powf(q) + b_coef * t * t;
    }
    cubic_at(xs[0], dx, psi, y)
}

/// Linearizing conjugacy h(x) = x + psi(x) on a uniform grid.
#[derive(Clone, Debug)]
pub struct LinearizedMap {
    pub xs: Vec<f64>,
    /// psi samples; h values at the nodes are xs + psi.
    pub psi: Vec<f64>,
    pub alpha: f64,
}

impl LinearizedMap {
    pub fn eval(&self, x: f64) -> f64 {
        x + psi_eval(&self.xs, &self.psi, self.alpha, x)
    }

    pub fn node_value(&self, k: usize) -> f64 {
        self.xs[k] + self.psi[k]
    }

    /// Inverse by bisection; h is monotone near 0.
    pub fn inverse_eval(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (self.xs[0], self.xs[self.xs.len() - 1]);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearizationReport {
    pub delta: f64,
    pub c_delta: f64,
    pub analytic_bound: f64,
    pub contraction_factor: f64,
    pub iterations: usize,
    pub residual: f64,
    pub h_prime0: f64,
    pub taylor2: f64,
}

/// Solve h(g(x)) = a h(x) by iterating F(psi) = (psi(g(x)) + g(x) - a x)/a
/// to its fixed point and setting h = x + psi.
pub fn sternberg_linearize(
    germ: &Germ1D,
    tol: f64,
    cfg: &Config,
) -> Result<(LinearizedMap, LinearizationReport)> {
    sternberg_linearize_capped(germ, f64::INFINITY, tol, cfg)
}

pub fn sternberg_linearize_capped(
    germ: &Germ1D,
    delta_cap: f64,
    tol: f64,
    cfg: &Config,
) -> Result<(LinearizedMap, LinearizationReport)> {
    let choice = choose_delta_capped(germ, delta_cap)?;
    let d = choice.delta;
    let n = if cfg.germ_points % 2 == 0 {
        cfg.germ_points + 1
    } else {
        cfg.germ_points
    };
    let xs: Vec<f64> = (0..n)
        .map(|k| -d + 2.0 * d * k as f64 / (n - 1) as f64)
        .collect();
    let dx = xs[1] - xs[0];
    let a = germ.a;
    let gx: Vec<f64> = xs.iter().map(|&x| germ.eval(x).clamp(-d, d)).collect();
    let psi_star: Vec<f64> = xs.iter().zip(&gx).map(|(&x, &g)| g - a * x).collect();

    let mut psi = vec![0.0f64; n];
    let mut prev_inc = f64::NAN;
    let mut factor: f64 = 0.0;
    let mut stalls = 0usize;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let mut inc: f64 = 0.0;
        let next: Vec<f64> = (0..n)
            .map(|k| {
                let v = (psi_eval(&xs, &psi, germ.alpha, gx[k]) + psi_star[k]) / a;
                inc = inc.max((v - psi[k]).abs());
                v
            })
            .collect();
        psi = next;
        if prev_inc.is_finite() && prev_inc > 0.0 {
            let r = inc / prev_inc;
            if iterations > 3 {
                factor = factor.max(r);
            }
            if r >= 1.0 {
                stalls += 1;
                if stalls >= 3 {
                    return Err(Error::Contraction(format!(
                        "iteration stalled: increments {prev_inc:.3e} -> {inc:.3e} at step {iterations}"
                    )));
                }
            } else {
                stalls = 0;
            }
        }
        prev_inc = inc;
        if inc < tol * 0.05 || inc == 0.0 {
            break;
        }
        if iterations > 20_000 {
            return Err(Error::Contraction(format!(
                "no convergence after {iterations} iterations, increment {inc:.3e}"
            )));
        }
    }

    let h = LinearizedMap {
        xs: xs.clone(),
        psi: psi.clone(),
        alpha: germ.alpha,
    };
    // conjugacy residual with the same interpolation used in the iteration
    let mut residual: f64 = 0.0;
    for k in 0..n {
        residual = residual.max((h.eval(gx[k]) - a * h.node_value(k)).abs());
    }
    let mid = n / 2;
    let h_prime0 = 1.0
        + (8.0 * (psi[mid + 1] - psi[mid - 1]) - (psi[mid + 2] - psi[mid - 2])) / (12.0 * dx);
    // least-squares fit of psi against x^2, x^3, x^4 near the origin
    let taylor2 = {
        let window = d / 4.0;
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        for k in 0..n {
            let x = xs[k];
            if x.abs() > window {
                continue;
            }
            let basis = [x * x, x * x * x, x * x * x * x];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += basis[i] * basis[j];
                }
                rhs[i] += basis[i] * psi[k];
            }
        }
        solve3(m, rhs)[0]
    };
    let report = LinearizationReport {
        delta: d,
        c_delta: choice.c_delta,
        analytic_bound: choice.bound,
        contraction_factor: factor,
        iterations,
        residual,
        h_prime0,
        taylor2,
    };
    Ok((h, report))
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    let mut out = [0.0f64; 3];
    for i in 0..3 {
        let mut mi = m;
        for r in 0..3 {
            mi[r][i] = b[r];
        }
        out[i] = det(mi) / d;
    }
    out
}

#[derive(Clone, Debug)]
pub struct KoenigsResult {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub n_iter: usize,
    /// Set when scaling back the iterates lost precision.
    pub underflow: bool,
}

/// Brute-force limit h(x) = a^{-n} g^n(x), sampled on the given interval.
pub fn koenigs_oracle(germ: &Germ1D, delta: f64, points: usize, n_iter: usize) -> Result<KoenigsResult> {
    let scale = germ.a.powi(n_iter as i32);
    if scale < 1e-280 {
        return Err(Error::Argument(format!(
            "a^n = {scale:.3e} underflows; lower the iteration count"
        )));
    }
    let points = if points % 2 == 0 { points + 1 } else { points };
    let xs: Vec<f64> = (0..points)
        .map(|k| -delta + 2.0 * delta * k as f64 / (points - 1) as f64)
        .collect();
    let mut underflow = false;
    let values = xs
        .iter()
        .map(|&x| {
            let mut y = x;
            for _ in 0..n_iter {
                y = germ.eval(y);
            }
            if y != 0.0 && y.abs() < 1e-280 {
                underflow = true;
            }
            y / scale
        })
        .collect();
    Ok(KoenigsResult {
        xs,
        values,
        n_iter,
        underflow,
    })
}

/// f gamma f^{-1} as a sampled circle map; the inverse is computed by
/// monotone bisection on the lift.
pub fn conjugate_circle(f: &CircleMap, gamma: &MobiusMap) -> Result<CircleMap> {
    let n = f.len();
    let mut angles = Vec::with_capacity(n);
    for k in 0..n {
        let theta = TAU * k as f64 / n as f64;
        let t = f.inverse_eval(theta);
        let u = gamma.apply(Complex64::from_polar(1.0, t)).arg();
        angles.push(f.eval(u).rem_euclid(TAU));
    }
    let base = CircleMap::from_angle_samples(&angles)?;
    if f.has_deriv() {
        let fd = f.deriv_samples();
        let interp = |theta: f64| -> f64 {
            let pos = theta.rem_euclid(TAU) / TAU * n as f64;
            let k = (pos.floor() as usize).min(n - 1);
            let x = pos - k as f64;
            fd[k] * (1.0 - x) + fd[(k + 1) % n] * x
        };
        let deriv: Vec<f64> = (0..n)
            .map(|k| {
                let theta = TAU * k as f64 / n as f64;
                let t = f.inverse_eval(theta);
                let gp = gamma.derivative(Complex64::from_polar(1.0, t)).norm();
                let u = gamma.apply(Complex64::from_polar(1.0, t)).arg();
                (interp(u) * gp / interp(t)).max(1e-12)
            })
            .collect();
        CircleMap::from_lift(base.lift_samples().to_vec(), Some(deriv))
    } else {
        Ok(base)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PromotionReport {
    pub multiplier: f64,
    pub conjugate_multiplier: f64,
    pub hypothesis_ok: bool,
    pub failure: Option<String>,
    pub linearization_base: Option<LinearizationReport>,
    pub linearization_conjugate: Option<LinearizationReport>,
    /// Coefficient and relative residual of the linearity fit of
    /// h2 . phi . h1^{-1}.
    pub linearity_constant: f64,
    pub linearity_residual: f64,
    /// Holder ladder of the promoted local conjugacy derivative.
    pub promoted_ladder: Vec<HolderEntry>,
    /// Direct ladder of f' near the attracting fixed point.
    pub direct_near_ladder: Vec<HolderEntry>,
    /// Holder constants of f' on windows spread by the inverse element.
    pub spread_constants: Vec<f64>,
    pub verdict: String,
}

fn failed_report(multiplier: f64, conj: f64, msg: String) -> PromotionReport {
    PromotionReport {
        multiplier,
        conjugate_multiplier: conj,
        hypothesis_ok: false,
        failure: Some(msg),
        linearization_base: None,
        linearization_conjugate: None,
        linearity_constant: f64::NAN,
        linearity_residual: f64::NAN,
        promoted_ladder: vec![],
        direct_near_ladder: vec![],
        spread_constants: vec![],
        verdict: "indeterminate".into(),
    }
}

/// Chart experiment behind regularity promotion: linearize the hyperbolic
/// element and its conjugate at their attracting fixed points, check that
/// the conjugating map becomes linear between the two charts, and compare
/// the promoted local regularity with direct measurements of f away from
/// the fixed point after spreading by the inverse element.
pub fn promotion_experiment(
    f: &CircleMap,
    gamma: &MobiusMap,
    r_target: f64,
    cfg: &Config,
) -> Result<PromotionReport> {
    if r_target <= 1.0 {
        return Err(Error::Argument("target regularity must exceed 1".into()));
    }
    if classify(gamma) != MobiusClass::Hyperbolic {
        return Err(Error::Classification("promotion needs a hyperbolic element".into()));
    }
    let alpha = (r_target - 1.0).clamp(0.05, 0.9);
    let (att, _) = gamma.circle_fixed_points()?;
    let lambda = gamma.derivative(att).norm();
    let theta_fix = att.arg();

    let g = conjugate_circle(f, gamma)?;
    // refine the conjugate's fixed point by bisection on the displacement
    let approx = f.eval(theta_fix);
    let theta_g = {
        let disp = |t: f64| g.eval(t) - t;
        let (lo, hi) = (approx - 0.3, approx + 0.3);
        if disp(lo) * disp(hi) > 0.0 {
            return Ok(failed_report(
                lambda,
                f64::NAN,
                "no fixed point of the conjugate near f(attracting point)".into(),
            ));
        }
        // displacement decreases through an attracting fixed point
        let (mut lo, mut hi) = if disp(lo) > 0.0 { (lo, hi) } else { (hi, lo) };
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if disp(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let delta0 = 0.3;
    let n_germ = 4097;
    let gamma_local = *gamma;
    let germ_base = Germ1D::from_fn(
        move |x| {
            let p = gamma_local.apply(Complex64::from_polar(1.0, theta_fix + x));
            let mut d = p.arg() - theta_fix;
            while d > std::f64::consts::PI {
                d -= TAU;
            }
            while d < -std::f64::consts::PI {
                d += TAU;
            }
            d
        },
        lambda,
        alpha,
        delta0,
        n_germ,
    )?;

    let g_clone = g.clone();
    let conj_mult = {
        let h = 1e-6;
        (g_clone.eval(theta_g + h) - g_clone.eval(theta_g - h)) / (2.0 * h)
    };
    let germ_conj = match Germ1D::from_fn(
        move |x| g_clone.eval(theta_g + x) - theta_g,
        conj_mult,
        alpha,
        delta0,
        n_germ,
    ) {
        Ok(g) => g,
        Err(e) => {
            return Ok(failed_report(
                lambda,
                conj_mult,
                format!("conjugate germ rejected: {e}"),
            ))
        }
    };
    if (conj_mult - lambda).abs() > 0.05 * lambda {
        return Ok(failed_report(
            lambda,
            conj_mult,
            format!("multipliers disagree: {lambda} vs {conj_mult}"),
        ));
    }
    // the hypothesis is that the conjugate is C^{1+alpha} at its fixed
    // point: its derivative, at the circle map's native sampling, must carry
    // a Holder-alpha ladder that is stable under refinement
    let gd = g.deriv_samples();
    let n_g = g.len();
    let window: Vec<f64> = (0..n_g)
        .filter(|&k| {
            let t = TAU * k as f64 / n_g as f64;
            let mut d = (t - theta_g).abs() % TAU;
            if d > std::f64::consts::PI {
                d = TAU - d;
            }
            d <= delta0
        })
        .map(|k| gd[k])
        .collect();
    if window.len() > 32 {
        let wxs: Vec<f64> = (0..window.len()).map(|k| k as f64 * TAU / n_g as f64).collect();
        let conj_ladder = ladder_interval(&wxs, &window, &[alpha]);
        if !conj_ladder[0].stable {
            return Ok(failed_report(
                lambda,
                conj_mult,
                format!(
                    "conjugate derivative fails the Holder-{alpha} ladder near its fixed point: finest-scale constant {:.3e} vs {:.3e}",
                    conj_ladder[0].finest, conj_ladder[0].constant
                ),
            ));
        }
    }

    let lin_base = sternberg_linearize(&germ_base, cfg.sternberg_tol, cfg)?;
    let lin_conj = match sternberg_linearize(&germ_conj, cfg.sternberg_tol, cfg) {
        Ok(l) => l,
        Err(e) => {
            let mut rep = failed_report(lambda, conj_mult, format!("conjugate not linearizable: {e}"));
            rep.linearization_base = Some(lin_base.1);
            return Ok(rep);
        }
    };
    let (h1, rep1) = lin_base;
    let (h2, rep2) = lin_conj;

    // phi, the local representation of f, conjugates the two germs; in the
    // linearizing charts it must become multiplication by a constant
    let overlap = (rep1.delta.min(rep2.delta)) * 0.4;
    let mut cs = Vec::new();
    let mut num = 0.0;
    let mut den = 0.0;
    let probes: Vec<f64> = (1..=64)
        .flat_map(|k| {
            let x = overlap * k as f64 / 64.0;
            [x, -x]
        })
        .collect();
    for &y in &probes {
        let x = h1.inverse_eval(y);
        let phi_x = f.eval(theta_fix + x) - theta_g;
        if phi_x.abs() > rep2.delta {
            continue;
        }
        let l = h2.eval(phi_x);
        num += l * y;
        den += y * y;
        cs.push((y, l));
    }
    let c = num / den;
    let mut lin_res: f64 = 0.0;
    let mut lin_scale: f64 = 0.0;
    for &(y, l) in &cs {
        lin_res = lin_res.max((l - c * y).abs());
        lin_scale = lin_scale.max(l.abs());
    }
    let linearity_residual = if lin_scale > 0.0 { lin_res / lin_scale } else { 0.0 };

    // promoted conjugacy phi = h2^{-1}(c h1(x)); ladder of its derivative
    let m = 513;
    let xs: Vec<f64> = (0..m)
        .map(|k| -overlap + 2.0 * overlap * k as f64 / (m - 1) as f64)
        .collect();
    let phi_prom: Vec<f64> = xs.iter().map(|&x| h2.inverse_eval(c * h1.eval(x))).collect();
    let dx = xs[1] - xs[0];
    let dphi: Vec<f64> = (1..m - 1)
        .map(|k| (phi_prom[k + 1] - phi_prom[k - 1]) / (2.0 * dx))
        .collect();
    let alphas: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let promoted_ladder = ladder_interval(&xs[1..m - 1], &dphi, &alphas);

    // direct ladder of f' near the fixed point
    let fd = f.deriv_samples();
    let n = f.len();
    let near: Vec<f64> = (0..n)
        .filter(|&k| {
            let t = TAU * k as f64 / n as f64;
            let mut d = (t - theta_fix).abs() % TAU;
            if d > std::f64::consts::PI {
                d = TAU - d;
            }
            d <= 0.4
        })
        .map(|k| fd[k])
        .collect();
    let near_xs: Vec<f64> = (0..near.len()).map(|k| k as f64 * TAU / n as f64).collect();
    let direct_near_ladder = if near.len() > 16 {
        ladder_interval(&near_xs, &near, &alphas)
    } else {
        vec![]
    };

    // spread a window around the fixed point by the inverse element and
    // measure the Holder constant of f' on each image window
    let inv = gamma.inverse();
    let mut lo = theta_fix - 0.2;
    let mut hi = theta_fix + 0.2;
    let mut spread_constants = Vec::new();
    for _ in 0..8 {
        let samples: Vec<f64> = (0..n)
            .filter(|&k| {
                let t = TAU * k as f64 / n as f64;
                let rel = (t - lo).rem_euclid(TAU);
                rel <= (hi - lo).rem_euclid(TAU).max(1e-9)
            })
            .map(|k| fd[k])
            .collect();
        if samples.len() > 16 {
            let sx: Vec<f64> = (0..samples.len()).map(|k| k as f64 * TAU / n as f64).collect();
            spread_constants.push(constant_interval(&sx, &samples, alpha));
        }
        lo = inv.apply(Complex64::from_polar(1.0, lo)).arg();
        hi = inv.apply(Complex64::from_polar(1.0, hi)).arg();
    }

    let promoted_ok = promoted_ladder
        .iter()
        .filter(|e| e.alpha <= alpha + 1e-9)
        .all(|e| e.stable);
    let verdict = if linearity_residual < 1e-3 && promoted_ok {
        "promoted".to_string()
    } else {
        "inconclusive".to_string()
    };

    Ok(PromotionReport {
        multiplier: lambda,
        conjugate_multiplier: conj_mult,
        hypothesis_ok: true,
        failure: None,
        linearization_base: Some(rep1),
        linearization_conjugate: Some(rep2),
        linearity_constant: c,
        linearity_residual,
        promoted_ladder,
        direct_near_ladder,
        spread_constants,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn contraction_bound_values() {
        // exact linear germ: bound a^alpha < 1 for any delta
        let b = contraction_bound(0.5, 0.5, 0.0, 0.3);
        assert!((b - 0.5f64.powf(0.5)).abs() < 1e-12);
        // the worked pair of evaluations
        let b1 = contraction_bound(0.5, 0.5, 1.0, 0.01);
        assert!((b1 - 2.0 * ((0.6f64).powf(1.5) + 0.1)).abs() < 1e-12);
        assert!(b1 > 1.0);
        let b2 = contraction_bound(0.5, 0.5, 1.0, 0.0004);
        assert!(b2 < 0.9, "bound {b2}");
    }

    #[test]
    fn germ_construction_and_inversion() {
        let g = Germ1D::from_fn(|x| 0.5 * x, 0.5, 0.5, 0.4, 513).unwrap();
        assert!(!g.inverted);
        assert!(g.c_delta < 1e-8);

        // a > 1 is replaced by the inverse germ
        let g = Germ1D::from_fn(|x| 2.0 * x + 0.1 * x * x, 2.0, 0.5, 0.4, 513).unwrap();
        assert!(g.inverted);
        assert!((g.a - 0.5).abs() < 1e-9);

        assert!(Germ1D::from_fn(|x| x, 1.0, 0.5, 0.4, 513).is_err());
        assert!(Germ1D::from_fn(|x| 0.5 * x + 0.01, 0.5, 0.5, 0.4, 513).is_err());
    }

    #[test]
    fn choose_delta_linear_germ() {
        let g = Germ1D::from_fn(|x| 0.5 * x, 0.5, 0.5, 0.4, 513).unwrap();
        let choice = choose_delta(&g).unwrap();
        assert!((choice.delta - 0.4).abs() < 1e-12, "delta {}", choice.delta);
        assert!((choice.bound - 0.5f64.powf(0.5)).abs() < 1e-6);
    }

    #[test]
    fn linearize_linear_germ_is_identity() {
        let g = Germ1D::from_fn(|x| 0.5 * x, 0.5, 0.5, 0.4, 1025).unwrap();
        let (h, rep) = sternberg_linearize(&g, 1e-9, &cfg()).unwrap();
        assert!(rep.residual < 1e-12);
        for k in 0..h.xs.len() {
            assert!((h.xs[k] - h.node_value(k)).abs() < 1e-12);
        }
        assert!((rep.h_prime0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linearize_quadratic_germ() {
        // h(g(x)) = a h(x) with g = a x + c x^2 forces taylor2 = c/(a - a^2)
        let g = Germ1D::from_fn(|x| 0.5 * x + 0.1 * x * x, 0.5, 0.5, 0.4, 1025).unwrap();
        let (h, rep) = sternberg_linearize(&g, 1e-10, &cfg()).unwrap();
        assert!(rep.residual <= 1e-9, "residual {}", rep.residual);
        assert!((rep.taylor2 - 0.4).abs() < 1e-3, "taylor2 {}", rep.taylor2);
        assert!((rep.h_prime0 - 1.0).abs() < 1e-8);
        assert!(
            rep.contraction_factor <= rep.analytic_bound + 0.05,
            "factor {} vs bound {}",
            rep.contraction_factor,
            rep.analytic_bound
        );
        // conjugacy residual holds pointwise
        let x = 0.013;
        assert!((h.eval(g.eval(x)) - 0.5 * h.eval(x)).abs() < 1e-9);
    }

    #[test]
    fn linearize_c_one_alpha_germ() {
        // C^{1.5} but not C^2
        let g = Germ1D::from_fn(
            |x| 0.5 * x + 0.05 * x * x.abs().sqrt(),
            0.5,
            0.5,
            0.4,
            2049,
        )
        .unwrap();
        let (h, rep) = sternberg_linearize(&g, 1e-9, &cfg()).unwrap();
        assert!(rep.residual < 1e-8, "residual {}", rep.residual);
        // h' has a finite Holder-1/2 ladder
        let dx = h.xs[1] - h.xs[0];
        let dh: Vec<f64> = (1..h.xs.len() - 1)
            .map(|k| (h.node_value(k + 1) - h.node_value(k - 1)) / (2.0 * dx))
            .collect();
        let c = constant_interval(&h.xs[1..h.xs.len() - 1], &dh, 0.5);
        assert!(c.is_finite() && c < 10.0);
    }

    #[test]
    fn koenigs_agrees_with_contraction() {
        let g = Germ1D::from_fn(|x| 0.5 * x, 0.5, 0.5, 0.4, 513).unwrap();
        let k = koenigs_oracle(&g, 0.2, 129, 30).unwrap();
        for (x, v) in k.xs.iter().zip(&k.values) {
            assert!((x - v).abs() < 1e-13);
        }

        let g = Germ1D::from_fn(|x| 0.5 * x + 0.1 * x * x, 0.5, 0.5, 0.4, 2049).unwrap();
        let (h, rep) = sternberg_linearize(&g, 1e-10, &cfg()).unwrap();
        let k = koenigs_oracle(&g, rep.delta / 2.0, 257, 40).unwrap();
        let mut worst: f64 = 0.0;
        for (x, v) in k.xs.iter().zip(&k.values) {
            worst = worst.max((h.eval(*x) - v).abs());
        }
        assert!(worst < 1e-6, "oracle disagreement {worst}");
    }

    #[test]
    fn uniqueness_across_deltas() {
        let g = Germ1D::from_fn(|x| 0.5 * x + 0.1 * x * x, 0.5, 0.5, 0.4, 2049).unwrap();
        let (h1, r1) = sternberg_linearize(&g, 1e-10, &cfg()).unwrap();
        let (h2, r2) = sternberg_linearize_capped(&g, r1.delta / 2.0, 1e-10, &cfg()).unwrap();
        assert!(r2.delta < r1.delta);
        let overlap = r2.delta / 2.0;
        let mut worst: f64 = 0.0;
        for k in 0..101 {
            let x = -overlap + 2.0 * overlap * k as f64 / 100.0;
            worst = worst.max((h1.eval(x) - h2.eval(x)).abs());
        }
        assert!(worst < 1e-8, "uniqueness overlap {worst}");
    }

    #[test]
    fn conjugate_circle_by_identity_map() {
        let gamma = MobiusMap::hyperbolic_axis_real(0.5).unwrap();
        let f = CircleMap::identity(256);
        let conj = conjugate_circle(&f, &gamma).unwrap();
        let direct = gamma.as_circle_map(256);
        assert!(conj.sup_distance(&direct) < 1e-9);
    }

    #[test]
    fn conjugate_circle_by_mobius_is_mobius() {
        let gamma = MobiusMap::hyperbolic_axis_real(0.5).unwrap();
        let m = MobiusMap::from_center_rotation(Complex64::new(0.2, 0.1), 0.4).unwrap();
        let f = m.as_circle_map(512);
        let conj = conjugate_circle(&f, &gamma).unwrap();
        let algebra = gamma.conjugate_by(&m).as_circle_map(512);
        assert!(
            conj.sup_distance(&algebra) < 1e-5,
            "distance {}",
            conj.sup_distance(&algebra)
        );
        // trace data survives numerically: same translation length
        let t = crate::mobius::translation_length(&gamma.conjugate_by(&m)).unwrap();
        assert!((t - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn conjugation_functoriality() {
        // f (g1 g2) f^{-1} equals (f g1 f^{-1})(f g2 f^{-1}) as circle maps
        let g1 = MobiusMap::hyperbolic_axis_real(0.4).unwrap();
        let g2 = MobiusMap::from_center_rotation(Complex64::new(0.1, 0.2), 0.5).unwrap();
        let f = CircleMap::from_lift_fn(512, |t| t + 0.2 * t.sin()).unwrap();
        let lhs = conjugate_circle(&f, &g1.compose(&g2)).unwrap();
        let c1 = conjugate_circle(&f, &g1).unwrap();
        let c2 = conjugate_circle(&f, &g2).unwrap();
        let rhs = c1.compose(&c2).unwrap();
        let d = lhs.sup_distance(&rhs);
        assert!(d < 1e-4, "functoriality defect {d}");
    }

    #[test]
    fn germ_csv_round_trip() {
        let g = Germ1D::from_fn(|x| 0.5 * x + 0.1 * x * x, 0.5, 0.5, 0.4, 513).unwrap();
        let back = Germ1D::from_csv(&g.to_csv(), 0.5).unwrap();
        assert!((back.a - 0.5).abs() < 1e-8);
        assert!((back.eval(0.123) - g.eval(0.123)).abs() < 1e-9);
    }

    #[test]
    fn promotion_mobius_conjugator() {
        let gamma = MobiusMap::hyperbolic_axis_real(0.5).unwrap();
        let m = MobiusMap::from_center_rotation(Complex64::new(0.15, 0.1), 0.3).unwrap();
        let f = m.as_circle_map(1024);
        let rep = promotion_experiment(&f, &gamma, 1.5, &cfg()).unwrap();
        assert!(rep.hypothesis_ok, "failure: {:?}", rep.failure);
        assert_eq!(rep.verdict, "promoted");
        assert!(rep.linearity_residual < 1e-3, "residual {}", rep.linearity_residual);
        for e in &rep.promoted_ladder {
            assert!(e.constant.is_finite());
        }
        assert!(rep.spread_constants.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn promotion_negative_control() {
        // derivative cusp parked at the attracting fixed point 1 of gamma
        let gamma = MobiusMap::hyperbolic_axis_real(0.5).unwrap();
        let c = 0.4;
        let beta = 0.25;
        let mean = {
            // mean of |wrap(t)|^beta over the circle
            let pi = std::f64::consts::PI;
            pi.powf(beta) / (beta + 1.0)
        };
        let prim = |t: f64| -> f64 {
            let pi = std::f64::consts::PI;
            let b1 = beta + 1.0;
            if t <= pi {
                t.powf(b1) / b1
            } else {
                pi.powf(b1) / b1 + (pi.powf(b1) - (2.0 * pi - t).powf(b1)) / b1
            }
        };
        let f = CircleMap::from_lift_fn_with_deriv(
            1024,
            |t| {
                let tt = t.rem_euclid(TAU);
                t + c * (prim(tt) - mean * tt)
            },
            |t| {
                let tt = t.rem_euclid(TAU);
                let w = if tt <= std::f64::consts::PI { tt } else { TAU - tt };
                1.0 + c * (w.powf(beta) - mean)
            },
        )
        .unwrap();
        let rep = promotion_experiment(&f, &gamma, 1.5, &cfg()).unwrap();
        assert!(!rep.hypothesis_ok, "cusp fixture must abort: {:?}", rep.verdict);
        assert!(rep.failure.is_some());
    }
}
