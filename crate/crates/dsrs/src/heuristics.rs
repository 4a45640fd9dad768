//! Defaults for the truncation radius and the generalized-Gaussian shape.

use serde::{Deserialize, Serialize};

use crate::distributions::SmoothingSpec;
use crate::error::{invalid, Result};
use crate::numerics::gamma_quantile;

/// Affine-in-`ln(1 - P_A)` rule for the ball mass of the truncation radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub p_floor: f64,
    pub p_ceiling: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { p_floor: 0.5, p_ceiling: 0.999, slope: -0.08, intercept: 0.2 }
    }
}

impl HeuristicConfig {
    pub fn validated(self) -> Result<Self> {
        if !(0.0 < self.p_floor && self.p_floor <= self.p_ceiling && self.p_ceiling < 1.0) {
            return invalid(format!("need 0 < floor <= ceiling < 1, got [{}, {}]", self.p_floor, self.p_ceiling));
        }
        Ok(self)
    }

    /// Target ball mass for a given lower bound on `P_A`.
    pub fn target_mass(&self, pa_lower: f64) -> f64 {
        let raw = self.slope * (-pa_lower).ln_1p() + self.intercept;
        raw.clamp(self.p_floor, self.p_ceiling)
    }
}

/// Truncation radius whose ball carries the heuristic mass under `spec`.
pub fn t_from_pa(pa_lower: f64, spec: &SmoothingSpec, cfg: &HeuristicConfig) -> Result<f64> {
    if !(pa_lower > 0.0 && pa_lower < 1.0) {
        return invalid(format!("lower bound on P_A must lie in (0, 1), got {pa_lower}"));
    }
    let cfg = cfg.validated()?;
    let p = cfg.target_mass(pa_lower);
    Ok(spec.radius_at(gamma_quantile(spec.shape(), p, false)))
}

/// Shape parameter `k` used when none is given.
pub fn default_k(d: u64) -> Result<u64> {
    match d {
        784 => Ok(380),
        3072 => Ok(1530),
        150_528 => Ok(75_260),
        d if d >= 26 => Ok(d / 2 - 8),
        d => invalid(format!("no default k below d = 26, got d = {d}")),
    }
}
