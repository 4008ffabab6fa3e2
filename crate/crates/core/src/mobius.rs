//! Mobius transformations preserving the unit disk (and hence the circle and
//! the exterior), their trace classification, translation lengths, finite
//! Lehner-condition evidence, and the three-point boundary normalization.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::CircleMap;
use crate::error::{Error, Result};

const TRACE_TOL: f64 = 1e-10;

/// z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
#[derive(Clone, Copy, Debug)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MobiusClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl MobiusMap {
    /// Normalizes (a, b); rejects pairs that do not preserve the disk.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::Argument(format!(
                "|a|^2 - |b|^2 = {det} must be positive for a disk Mobius map"
            )));
        }
        let s = det.sqrt();
        Ok(MobiusMap { a: a / s, b: b / s })
    }

    pub fn identity() -> Self {
        MobiusMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Rotation z -> e^{i phi} z.
    pub fn rotation(phi: f64) -> Self {
        MobiusMap {
            a: Complex64::from_polar(1.0, phi / 2.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// z -> (z + c) / (1 + c z) for real c in (-1, 1); hyperbolic with axis
    /// through -1 and 1 when c != 0.
    pub fn hyperbolic_axis_real(c: f64) -> Result<Self> {
        if c.abs() >= 1.0 {
            return Err(Error::Argument("axis parameter must satisfy |c| < 1".into()));
        }
        MobiusMap::new(Complex64::new(1.0, 0.0), Complex64::new(c, 0.0))
    }

    /// Map with m(0) = alpha followed by rotation: e^{i phi}(z + alpha)/(1 + conj(alpha) z).
    pub fn from_center_rotation(alpha: Complex64, phi: f64) -> Result<Self> {
        if alpha.norm() >= 1.0 {
            return Err(Error::Argument("center must lie inside the disk".into()));
        }
        let s = (1.0 - alpha.norm_sqr()).sqrt();
        let half = Complex64::from_polar(1.0, phi / 2.0);
        MobiusMap::new(half / s, half * alpha / s)
    }

    pub fn coefficients(&self) -> (Complex64, Complex64) {
        (self.a, self.b)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// m'(z) = 1 / (conj(b) z + conj(a))^2.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = self.b.conj() * z + self.a.conj();
        (d * d).inv()
    }

    /// self after other: (self . other)(z) = self(other(z)).
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        MobiusMap { a, b }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// g self g^{-1}.
    pub fn conjugate_by(&self, g: &MobiusMap) -> MobiusMap {
        g.compose(self).compose(&g.inverse())
    }

    /// |trace| of the SL(2) representative; sign-independent.
    pub fn trace_abs(&self) -> f64 {
        2.0 * self.a.re.abs()
    }

    /// Angle of the boundary action at e^{i theta}, not unwrapped.
    pub fn boundary_angle(&self, theta: f64) -> f64 {
        self.apply(Complex64::from_polar(1.0, theta)).arg()
    }

    /// The boundary action as a sampled circle map with exact derivative
    /// |m'(e^{i theta})|.
    pub fn as_circle_map(&self, n: usize) -> CircleMap {
        let angles: Vec<f64> = (0..n).map(|k| self.boundary_angle(TAU * k as f64 / n as f64)).collect();
        let base = CircleMap::from_angle_samples(&angles).expect("Mobius boundary action is monotone");
        let deriv: Vec<f64> = (0..n)
            .map(|k| self.derivative(Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).norm())
            .collect();
        CircleMap::from_lift(base.lift_samples().to_vec(), Some(deriv))
            .expect("derivative of a Mobius map is positive")
    }

    /// Post-compose a circle map with this Mobius map exactly at the samples,
    /// with the chain-rule derivative when the input carries one.
    pub fn apply_to_circle_map(&self, g: &CircleMap) -> Result<CircleMap> {
        let angles: Vec<f64> = g
            .lift_samples()
            .iter()
            .map(|&l| self.apply(Complex64::from_polar(1.0, l)).arg())
            .collect();
        let base = CircleMap::from_angle_samples(&angles)?;
        let deriv = if g.has_deriv() {
            let gd = g.deriv_samples();
            Some(
                g.lift_samples()
                    .iter()
                    .zip(&gd)
                    .map(|(&l, &d)| self.derivative(Complex64::from_polar(1.0, l)).norm() * d)
                    .collect(),
            )
        } else {
            None
        };
        CircleMap::from_lift(base.lift_samples().to_vec(), deriv)
    }

    /// Fixed points on the circle of a hyperbolic element,
    /// ordered (attracting, repelling).
    pub fn circle_fixed_points(&self) -> Result<(Complex64, Complex64)> {
        if classify(self) != MobiusClass::Hyperbolic {
            return Err(Error::Classification("fixed points on the circle need a hyperbolic element".into()));
        }
        // conj(b) z^2 + (conj(a) - a) z - b = 0
        let cb = self.b.conj();
        if cb.norm() < 1e-15 {
            // rotation-free diagonal case cannot be hyperbolic
            return Err(Error::Classification("degenerate hyperbolic element".into()));
        }
        let beta = self.a.conj() - self.a;
        let disc = (beta * beta + cb * self.b * 4.0).sqrt();
        let z1 = (-beta + disc) / (cb * 2.0);
        let z2 = (-beta - disc) / (cb * 2.0);
        let d1 = self.derivative(z1).norm();
        if d1 < 1.0 {
            Ok((z1, z2))
        } else {
            Ok((z2, z1))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MobiusJson {
            a_re: self.a.re,
            a_im: self.a.im,
            b_re: self.b.re,
            b_im: self.b.im,
        })
        .expect("Mobius map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: MobiusJson = serde_json::from_str(text)?;
        let a = Complex64::new(j.a_re, j.a_im);
        let b = Complex64::new(j.b_re, j.b_im);
        let det = a.norm_sqr() - b.norm_sqr();
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!(
                "serialized map is not determinant-normalized: |a|^2-|b|^2 = {det}"
            )));
        }
        MobiusMap::new(a, b)
    }
}

#[derive(Serialize, Deserialize)]
struct MobiusJson {
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
}

/// Trace classification: |tr| < 2 elliptic, = 2 parabolic (tolerance 1e-10),
/// > 2 hyperbolic.
pub fn classify(m: &MobiusMap) -> MobiusClass {
    let (a, b) = m.coefficients();
    if b.norm() < TRACE_TOL && a.im.abs() < TRACE_TOL {
        return MobiusClass::Identity;
    }
    let t = m.trace_abs();
    if (t - 2.0).abs() <= TRACE_TOL {
        MobiusClass::Parabolic
    } else if t < 2.0 {
        MobiusClass::Elliptic
    } else {
        MobiusClass::Hyperbolic
    }
}

/// Translation length 2 arccosh(|tr|/2) of a hyperbolic element; equal to the
/// logarithm of the multiplier.
pub fn translation_length(m: &MobiusMap) -> Result<f64> {
    match classify(m) {
        MobiusClass::Hyperbolic => {
            let x = m.trace_abs() / 2.0;
            Ok(2.0 * (x + (x * x - 1.0).sqrt()).ln())
        }
        c => Err(Error::Classification(format!(
            "translation length needs a hyperbolic element, got {c:?}"
        ))),
    }
}

/// Finite sample of a Fuchsian group: generators plus a word-length cap for
/// enumeration.
#[derive(Clone, Debug)]
pub struct FuchsianSample {
    pub generators: Vec<MobiusMap>,
    pub word_length_cap: usize,
}

impl FuchsianSample {
    pub fn new(generators: Vec<MobiusMap>, word_length_cap: usize) -> Result<Self> {
        if word_length_cap == 0 {
            return Err(Error::Argument("word length cap must be positive".into()));
        }
        Ok(FuchsianSample {
            generators,
            word_length_cap,
        })
    }

    /// All reduced words up to the cap (no immediate backtracking),
    /// deduplicated up to the projective sign.
    pub fn enumerate(&self) -> Vec<MobiusMap> {
        let mut letters: Vec<(usize, MobiusMap)> = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            letters.push((2 * i, *g));
            letters.push((2 * i + 1, g.inverse()));
        }
        let mut out: Vec<MobiusMap> = Vec::new();
        let mut seen: std::collections::BTreeSet<[i64; 4]> = std::collections::BTreeSet::new();
        let mut frontier: Vec<(usize, MobiusMap)> = Vec::new();
        for &(id, m) in &letters {
            frontier.push((id, m));
        }
        for _ in 0..self.word_length_cap {
            let mut next = Vec::new();
            for &(last, m) in &frontier {
                if seen.insert(projective_key(&m)) {
                    out.push(m);
                }
                for &(id, g) in &letters {
                    // skip g g^{-1}
                    if id / 2 == last / 2 && id % 2 != last % 2 {
                        continue;
                    }
                    next.push((id, g.compose(&m)));
                }
            }
            frontier = next;
            if frontier.len() > 100_000 {
                break;
            }
        }
        out
    }
}

fn projective_key(m: &MobiusMap) -> [i64; 4] {
    let (mut a, mut b) = m.coefficients();
    // canonical sign: make the dominant entry have positive real part
    let lead = if a.re.abs() >= 1e-12 { a.re } else if a.im.abs() >= 1e-12 { a.im } else { b.re };
    if lead < 0.0 {
        a = -a;
        b = -b;
    }
    let q = |x: f64| (x / 1e-9).round() as i64;
    [q(a.re), q(a.im), q(b.re), q(b.im)]
}

#[derive(Clone, Debug, Serialize)]
pub struct LehnerReport {
    /// Minimum translation length over the enumerated hyperbolic elements;
    /// None when the sample produced none (indeterminate, not failure).
    pub min_length: Option<f64>,
    pub satisfied: Option<bool>,
    pub threshold: f64,
    pub words_checked: usize,
    pub hyperbolic_count: usize,
}

/// Necessary-evidence check of the Lehner condition on a finite enumeration:
/// it can refute the condition on the sample but never certify the group.
pub fn lehner_check(sample: &FuchsianSample, threshold: f64) -> LehnerReport {
    let words = sample.enumerate();
    let mut min_length: Option<f64> = None;
    let mut hyper = 0usize;
    for w in &words {
        if let Ok(l) = translation_length(w) {
            hyper += 1;
            min_length = Some(match min_length {
                Some(cur) => cur.min(l),
                None => l,
            });
        }
    }
    LehnerReport {
        min_length,
        satisfied: min_length.map(|l| l > threshold),
        threshold,
        words_checked: words.len(),
        hyperbolic_count: hyper,
    }
}

/// General 2x2 complex Mobius transformation of the sphere; used internally
/// for cross-ratio constructions and the solve_disk renormalization.
#[derive(Clone, Copy, Debug)]
pub struct SphereMobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl SphereMobius {
    pub fn identity() -> Self {
        SphereMobius {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let det = self.a * self.d - self.b * self.c;
        let den = self.c * z + self.d;
        det / (den * den)
    }

    pub fn compose(&self, o: &SphereMobius) -> SphereMobius {
        SphereMobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> SphereMobius {
        SphereMobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// The map sending (p0, p1, p2) to (0, 1, infinity).
    pub fn to_zero_one_inf(p: [Complex64; 3]) -> Result<SphereMobius> {
        let sep = (p[0] - p[1]).norm().min((p[1] - p[2]).norm()).min((p[0] - p[2]).norm());
        if sep < 1e-8 {
            return Err(Error::Conditioning(format!(
                "triple nearly degenerate: min separation {sep:.3e}"
            )));
        }
        Ok(SphereMobius {
            a: p[1] - p[2],
            b: -p[0] * (p[1] - p[2]),
            c: p[1] - p[0],
            d: -p[2] * (p[1] - p[0]),
        })
    }

    /// The unique sphere Mobius with m(p_i) = q_i.
    pub fn from_triples(p: [Complex64; 3], q: [Complex64; 3]) -> Result<SphereMobius> {
        let sp = Self::to_zero_one_inf(p)?;
        let sq = Self::to_zero_one_inf(q)?;
        Ok(sq.inverse().compose(&sp))
    }

    /// Project onto the disk-preserving subgroup; errors when the map is not
    /// close to one.
    pub fn to_disk_map(&self) -> Result<MobiusMap> {
        let det = (self.a * self.d - self.b * self.c).sqrt();
        if det.norm() < 1e-14 {
            return Err(Error::Conditioning("singular Mobius matrix".into()));
        }
        let (a, b, c, d) = (self.a / det, self.b / det, self.c / det, self.d / det);
        // disk form has d = conj(a), c = conj(b) up to a global sign
        let dev_plus = (d - a.conj()).norm() + (c - b.conj()).norm();
        let dev_minus = (d + a.conj()).norm() + (c + b.conj()).norm();
        let (a, b, c, d, dev) = if dev_plus <= dev_minus {
            (a, b, c, d, dev_plus)
        } else {
            (-a, -b, -c, -d, dev_plus.min(dev_minus))
        };
        if dev > 1e-6 {
            return Err(Error::Conditioning(format!(
                "matrix deviates from the disk subgroup by {dev:.3e}"
            )));
        }
        let aa = (a + d.conj()) / 2.0;
        let bb = (b + c.conj()) / 2.0;
        MobiusMap::new(aa, bb)
    }
}

/// The unique disk Mobius m with m(g(1)) = 1, m(g(i)) = i, m(g(-1)) = -1,
/// together with the normalized map m . g.
pub fn normalize_fixing_1_i_minus1(g: &CircleMap) -> Result<(MobiusMap, CircleMap)> {
    let images = [
        Complex64::from_polar(1.0, g.eval(0.0)),
        Complex64::from_polar(1.0, g.eval(TAU / 4.0)),
        Complex64::from_polar(1.0, g.eval(TAU / 2.0)),
    ];
    let targets = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
    ];
    let m = SphereMobius::from_triples(images, targets)?.to_disk_map()?;
    let normalized = m.apply_to_circle_map(g)?;
    Ok((m, normalized))
}
