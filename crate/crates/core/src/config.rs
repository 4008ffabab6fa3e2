//! Tolerances and thresholds used across the toolkit.
//!
//! Everything that decides a verdict lives here, set once, so individual
//! checks cannot shop for a threshold that makes them pass.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Sup-norm budget for the Neumann-series solver.
    pub sup_budget: f64,
    /// Stop the Neumann iteration once the increment sup drops below this.
    pub neumann_tol: f64,
    pub neumann_max_iter: usize,
    /// Acceptance bound on the finite-difference residual max |dbar f - mu df|.
    /// The residual is limited by the radial stencil, which loses accuracy as
    /// the coefficient steepens; genuine solver failures sit orders of
    /// magnitude above this gate.
    pub dbar_tol: f64,
    /// Pointwise Newton inversion tolerance.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// A decay profile "tends to zero" when last <= ratio * first.
    pub b0_pass_ratio: f64,
    /// Per-annulus growth factor that flags a weighted sup as infinite.
    pub growth_margin: f64,
    /// Outermost-annulus bound for boundary-vanishing membership.
    pub vanishing_eps: f64,
    /// Extra exponent margin demanded by the ">alpha" union spaces.
    pub holder_exponent_margin: f64,
    /// Allowed slack below alpha/K^2 for translated Holder-space diagnostics.
    pub base3_exponent_slack: f64,
    /// Slack around [1/K, K] for distortion exponents.
    pub mori_slack: f64,
    /// Vanishing-coefficient distortion band half-width on the finest annuli.
    pub mori2_eps: f64,
    /// Minimal translation length demanded by the finite Lehner check.
    pub lehner_threshold: f64,
    /// Target conjugacy residual for germ linearization.
    pub sternberg_tol: f64,
    /// Sample count per germ interval (odd, so 0 is a node).
    pub germ_points: usize,
    /// Relative quadrature margin allowed in integral-inequality checks.
    pub quadrature_margin: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            sup_budget: 0.95,
            neumann_tol: 1e-11,
            neumann_max_iter: 4000,
            dbar_tol: 2e-2,
            newton_tol: 1e-12,
            newton_max_iter: 60,
            b0_pass_ratio: 0.1,
            growth_margin: 1.05,
            vanishing_eps: 1e-2,
            holder_exponent_margin: 0.05,
            base3_exponent_slack: 0.1,
            mori_slack: 0.05,
            mori2_eps: 0.15,
            lehner_threshold: 0.1,
            sternberg_tol: 1e-9,
            germ_points: 4097,
            quadrature_margin: 5e-2,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
