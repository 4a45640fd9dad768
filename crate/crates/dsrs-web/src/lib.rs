//! Three certification operations exported to the browser. Each takes
//! plain numbers and returns a JSON string.

use dsrs::certify::{certify, CertContext};
use dsrs::confidence::{binom_interval, boxes_from_counts, ProbBound, SamplingRecord, Sidedness};
use dsrs::distributions::SmoothingSpec;
use dsrs::heuristics::{default_k, t_from_pa, HeuristicConfig};
use dsrs::synthetic::{concentration_point, sampled_q_floor, CurvePoint};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certified {
    pub k: u64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
    /// Truncation radius, for a truncated `Q`.
    pub t: Option<f64>,
    pub radius_np: f64,
    pub radius_dsrs: f64,
    pub radius_linf_dsrs: f64,
    pub abstained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncation {
    pub k: u64,
    pub t: f64,
    /// Mass of `P` inside the truncation ball.
    pub mass: f64,
    pub nu: f64,
}

fn shape_or_default(d: u64, k: i64) -> dsrs::Result<u64> {
    if k < 0 {
        default_k(d)
    } else {
        Ok(k as u64)
    }
}

/// Certify from sampling counts. A negative `k` picks the default shape;
/// `q_param` is the truncation radius (NaN for the heuristic) when
/// `truncated`, else the rescaled noise level. `q_trials = 0` means every
/// draw came from `P`.
#[allow(clippy::too_many_arguments)]
pub fn certify_counts(
    d: u64,
    sigma: f64,
    k: i64,
    truncated: bool,
    q_param: f64,
    p: (u64, u64),
    q: (u64, u64),
    alpha: f64,
) -> dsrs::Result<Certified> {
    let k = shape_or_default(d, k)?;
    let p_spec = SmoothingSpec::generalized(d, sigma, k)?;
    let p_rec = SamplingRecord::new(p.0, p.1)?;
    let (p_box, q_box) = if q.0 == 0 {
        (binom_interval(p_rec, alpha, Sidedness::LowerOnly)?, ProbBound::vacuous())
    } else {
        boxes_from_counts(p_rec, SamplingRecord::new(q.0, q.1)?, alpha)?
    };
    let (q_spec, t) = if truncated {
        let t = if q_param.is_nan() {
            t_from_pa(p_box.lo.clamp(0.5, 1.0 - 1e-16), &p_spec, &HeuristicConfig::default())?
        } else {
            q_param
        };
        (p_spec.truncated(t)?, Some(t))
    } else {
        (SmoothingSpec::generalized(d, q_param, k)?, None)
    };
    let out = certify(&p_box, &q_box, &CertContext::new(p_spec, q_spec, 0.0)?)?;
    Ok(Certified {
        k,
        p_lo: p_box.lo,
        p_hi: p_box.hi,
        q_lo: q_box.lo,
        q_hi: q_box.hi,
        t,
        radius_np: out.radius_np,
        radius_dsrs: out.radius_dsrs,
        radius_linf_dsrs: out.radius_linf(d),
        abstained: out.abstained,
    })
}

/// Radii for a classifier right on the `p_con` Gaussian ball, after `n`
/// all-success draws from `Q` (`n = 0` for exact `Q_A = 1`).
pub fn curve_point(d: u64, sigma: f64, p_con: f64, pa: f64, n: u64, alpha: f64) -> dsrs::Result<CurvePoint> {
    let q_lo = sampled_q_floor(alpha, (n > 0).then_some(n));
    concentration_point(d, sigma, p_con, pa, q_lo, dsrs::certify::DEFAULT_DELTA_INT, dsrs::certify::DEFAULT_EPS_RADIUS)
}

/// Truncation radius the heuristic picks for a lower bound on `P_A`.
pub fn truncation(d: u64, sigma: f64, k: i64, pa_lower: f64) -> dsrs::Result<Truncation> {
    let k = shape_or_default(d, k)?;
    let spec = SmoothingSpec::generalized(d, sigma, k)?;
    let t = t_from_pa(pa_lower, &spec, &HeuristicConfig::default())?;
    Ok(Truncation { k, t, mass: spec.ball_mass(t), nu: spec.truncated(t)?.nu() })
}

fn to_js<T: Serialize>(v: dsrs::Result<T>) -> Result<String, JsError> {
    let v = v.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = certifyCounts)]
#[allow(clippy::too_many_arguments)]
pub fn certify_counts_js(
    d: u32,
    sigma: f64,
    k: i32,
    truncated: bool,
    q_param: f64,
    p_trials: f64,
    p_successes: f64,
    q_trials: f64,
    q_successes: f64,
    alpha: f64,
) -> Result<String, JsError> {
    to_js(certify_counts(
        d as u64,
        sigma,
        k as i64,
        truncated,
        q_param,
        (p_trials as u64, p_successes as u64),
        (q_trials as u64, q_successes as u64),
        alpha,
    ))
}

#[wasm_bindgen(js_name = curvePoint)]
pub fn curve_point_js(d: u32, sigma: f64, p_con: f64, pa: f64, n: f64, alpha: f64) -> Result<String, JsError> {
    to_js(curve_point(d as u64, sigma, p_con, pa, n as u64, alpha))
}

#[wasm_bindgen(js_name = truncation)]
pub fn truncation_js(d: u32, sigma: f64, k: i32, pa_lower: f64) -> Result<String, JsError> {
    to_js(truncation(d as u64, sigma, k as i64, pa_lower))
}
