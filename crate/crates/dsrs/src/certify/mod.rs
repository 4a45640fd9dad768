//! Certification: integrands, dual solvers, the worst-case probability
//! selection and the outer radius search.

mod functionals;
mod integrands;
mod radius;
mod search;
mod truncated;
mod variance;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::distributions::SmoothingSpec;
use crate::error::{invalid, Result};
use crate::numerics::LogScalar;
use crate::quadrature::GammaWeight;

pub use functionals::{compute_p, compute_q, compute_r, h, u1, u2, u3};
pub use radius::{certify, check_radius, np_radius, worst_case_pa_qa, Binding, WorstCase};
pub use truncated::dual_solve_truncated;
pub use variance::dual_solve_var;

pub(crate) use functionals::Kernel;
pub(crate) use integrands::Geometry;

/// Default absolute quadrature tolerance.
pub const DEFAULT_DELTA_INT: f64 = 1.5e-8;
/// Default precision of the dual searches, in log units.
pub const DEFAULT_EPS_DUAL: f64 = 1e-9;
/// Default precision of the radius search.
pub const DEFAULT_EPS_RADIUS: f64 = 1e-4;

// ratio between the reported quadrature tolerance and the one searches use
const SEARCH_REFINEMENT: f64 = 256.0;

/// How the additional distribution relates to P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QFamily {
    /// P conditioned on a centred ball.
    Truncated,
    /// Same shape as P with a different scale.
    Variance,
}

/// Everything a single-radius evaluation needs.
#[derive(Debug, Clone)]
pub struct CertContext {
    pub p_spec: SmoothingSpec,
    pub q_spec: SmoothingSpec,
    pub r: f64,
    pub nu: f64,
    pub delta_int: f64,
    pub eps_dual: f64,
    pub eps_radius: f64,
    /// Upper end of the radius search; `sigma sqrt(d)` unless overridden.
    pub r_max: f64,
    weight: GammaWeight,
}

impl CertContext {
    pub fn new(p_spec: SmoothingSpec, q_spec: SmoothingSpec, r: f64) -> Result<Self> {
        let p_spec = p_spec.validated()?;
        let q_spec = q_spec.validated()?;
        if p_spec.is_truncated() {
            return invalid("P must not be truncated");
        }
        if p_spec.d != q_spec.d || p_spec.k != q_spec.k {
            return invalid("P and Q must share d and k");
        }
        if q_spec.is_truncated() {
            if q_spec.sigma != p_spec.sigma {
                return invalid("a truncated Q must use the noise level of P");
            }
        } else if q_spec.sigma == p_spec.sigma {
            return invalid("an untruncated Q must differ from P in scale");
        }
        if !(r >= 0.0 && r.is_finite()) {
            return invalid(format!("radius must be finite and nonnegative, got {r}"));
        }
        Ok(CertContext {
            p_spec,
            q_spec,
            r,
            nu: q_spec.nu(),
            delta_int: DEFAULT_DELTA_INT,
            eps_dual: DEFAULT_EPS_DUAL,
            eps_radius: DEFAULT_EPS_RADIUS,
            r_max: p_spec.sigma * (p_spec.d as f64).sqrt(),
            weight: GammaWeight::new(p_spec.shape()),
        })
    }

    pub fn with_tolerances(mut self, delta_int: f64, eps_dual: f64, eps_radius: f64) -> Result<Self> {
        for (name, v) in [("delta_int", delta_int), ("eps_dual", eps_dual), ("eps_radius", eps_radius)] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        self.delta_int = delta_int;
        self.eps_dual = eps_dual;
        self.eps_radius = eps_radius;
        Ok(self)
    }

    pub fn with_r_max(mut self, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return invalid(format!("r_max must be positive, got {r_max}"));
        }
        self.r_max = r_max;
        Ok(self)
    }

    /// The same context at another shift length.
    pub fn at_radius(&self, r: f64) -> Self {
        CertContext { r, ..self.clone() }
    }

    pub fn q_family(&self) -> QFamily {
        if self.q_spec.is_truncated() {
            QFamily::Truncated
        } else {
            QFamily::Variance
        }
    }

    /// Gamma time at the truncation radius; infinite without truncation.
    pub fn t_star(&self) -> f64 {
        match self.q_spec.t {
            Some(t) => self.p_spec.radial_time(t),
            None => f64::INFINITY,
        }
    }

    /// The same context with the finer quadrature tolerance used inside
    /// searches, so that sound brackets lose little against the optimum.
    pub(crate) fn refined(&self) -> Self {
        CertContext { delta_int: self.delta_int / SEARCH_REFINEMENT, ..self.clone() }
    }

    pub(crate) fn weight(&self) -> &GammaWeight {
        &self.weight
    }
}

/// Dual multipliers with the brackets they were taken from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPoint {
    pub lambda1: LogScalar,
    pub lambda2: LogScalar,
    pub lambda1_bracket: (LogScalar, LogScalar),
    /// Bracket of `lambda1 + nu lambda2`.
    pub sum_bracket: (LogScalar, LogScalar),
}

impl DualPoint {
    /// A point with degenerate brackets.
    pub fn new(lambda1: LogScalar, lambda2: LogScalar, nu: f64) -> Self {
        let sum = lambda1.add(lambda2.scale_ln(nu.ln()));
        DualPoint { lambda1, lambda2, lambda1_bracket: (lambda1, lambda1), sum_bracket: (sum, sum) }
    }

    /// `lambda1 + nu lambda2`.
    pub fn sum(&self, nu: f64) -> LogScalar {
        self.lambda1.add(self.lambda2.scale_ln(nu.ln()))
    }
}

/// Result of certifying one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertOutcome {
    pub radius_np: f64,
    pub radius_dsrs: f64,
    pub abstained: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl CertOutcome {
    /// The l-infinity radius implied by the l2 one.
    pub fn radius_linf(&self, d: u64) -> f64 {
        self.radius_dsrs / (d as f64).sqrt()
    }
}
