//! A base classifier with closed-form behaviour: it predicts the true class
//! exactly on a centred ball. Used as ground truth for soundness checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{certify, CertContext, Geometry, QFamily};
use crate::confidence::{ProbBound, SamplingRecord};
use crate::distributions::SmoothingSpec;
use crate::error::{invalid, Result};
use crate::heuristics::{t_from_pa, HeuristicConfig};
use crate::numerics::gamma_quantile;
use crate::quadrature::GammaWeight;

/// Predicts the true class exactly on `{x : |x| <= t_true}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallClassifier {
    pub t_true: f64,
    pub d: u64,
}

impl BallClassifier {
    pub fn new(t_true: f64, d: u64) -> Result<Self> {
        if !(t_true >= 0.0) {
            return invalid(format!("ball radius must be nonnegative, got {t_true}"));
        }
        Ok(BallClassifier { t_true, d })
    }

    /// The ball carrying `mass` under `spec`.
    pub fn with_mass(spec: &SmoothingSpec, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass < 1.0) {
            return invalid(format!("mass must lie in (0, 1), got {mass}"));
        }
        Self::new(spec.radius_at(gamma_quantile(spec.shape(), mass, false)), spec.d)
    }
}

fn check_dims(clf: &BallClassifier, spec: &SmoothingSpec) -> Result<()> {
    if clf.d != spec.d {
        return invalid(format!("classifier lives in d = {}, noise in d = {}", clf.d, spec.d));
    }
    Ok(())
}

/// Probability that the smoothed classifier predicts the true class at a
/// point shifted by `u` from the centre.
pub fn analytic_shifted_prob(clf: &BallClassifier, p_spec: &SmoothingSpec, u: f64, delta_int: f64) -> Result<f64> {
    check_dims(clf, p_spec)?;
    if p_spec.is_truncated() {
        return invalid("shifted probabilities are defined for untruncated noise");
    }
    if !(u >= 0.0 && u.is_finite()) {
        return invalid(format!("shift must be finite and nonnegative, got {u}"));
    }
    let t = clf.t_true;
    if t == 0.0 {
        return Ok(0.0);
    }
    if u == 0.0 {
        return Ok(p_spec.ball_mass(t));
    }
    let sp = p_spec.sigma_prime();
    let geo = Geometry { r: u, k: p_spec.k as f64, sp2: sp * sp, beta_shape: (p_spec.d as f64 - 1.0) / 2.0 };
    let weight = GammaWeight::new(p_spec.shape());
    let mut kinks = vec![p_spec.radial_time(t + u)];
    if t > u {
        kinks.push(p_spec.radial_time(t - u));
    }
    let v = weight.expect_split(|tm| geo.in_ball(2.0 * sp * sp * tm, t), 0.0, f64::INFINITY, &kinks, delta_int)?;
    Ok(v.min(1.0))
}

/// Largest shift at which the smoothed prediction still exceeds one half,
/// to within `eps_radius` from below.
pub fn true_radius(clf: &BallClassifier, p_spec: &SmoothingSpec, eps_radius: f64, delta_int: f64) -> Result<f64> {
    check_dims(clf, p_spec)?;
    if p_spec.ball_mass(clf.t_true) <= 0.5 {
        return Ok(0.0);
    }
    let weight = GammaWeight::new(p_spec.shape());
    // beyond this no shifted draw can reach the ball
    let mut hi = clf.t_true + p_spec.radius_at(weight.range().1);
    let mut lo = 0.0;
    while hi - lo > eps_radius {
        let mid = 0.5 * (lo + hi);
        if analytic_shifted_prob(clf, p_spec, mid, delta_int)? > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Exact `(P_A, Q_A)` for the ball classifier.
pub fn exact_pa_qa(clf: &BallClassifier, p_spec: &SmoothingSpec, q_spec: &SmoothingSpec) -> Result<(f64, f64)> {
    check_dims(clf, p_spec)?;
    check_dims(clf, q_spec)?;
    Ok((p_spec.ball_mass(clf.t_true), q_spec.ball_mass(clf.t_true)))
}

/// Count how many of `n` draws from `spec` the classifier gets right.
pub fn mc_sample_classifier(clf: &BallClassifier, spec: &SmoothingSpec, n: u64, seed: u64) -> Result<SamplingRecord> {
    check_dims(clf, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = (0..n).filter(|_| spec.sample(&mut rng, false).radius <= clf.t_true).count() as u64;
    SamplingRecord::new(n, successes)
}

/// One point of the soundness grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub d: u64,
    pub sigma: f64,
    pub k: u64,
    /// `P_A` the classifier ball is sized for.
    pub target_pa: f64,
}

/// Shape used by the grid; below the table of defaults it falls back to
/// `d/2 - 8` when that is positive.
pub fn grid_k(d: u64) -> Result<u64> {
    match crate::heuristics::default_k(d) {
        Ok(k) => Ok(k),
        Err(_) if d > 16 => Ok(d / 2 - 8),
        Err(e) => Err(e),
    }
}

/// The 27-point grid over dimension, noise level and `P_A`.
pub fn default_grid() -> Vec<GridConfig> {
    let mut out = Vec::new();
    for d in [20u64, 784, 3072] {
        let k = grid_k(d).expect("grid dimensions have a shape");
        for sigma in [0.25, 0.5, 1.0] {
            for target_pa in [0.6, 0.75, 0.9] {
                out.push(GridConfig { d, sigma, k, target_pa });
            }
        }
    }
    out
}

/// Ratio of the rescaled-Q noise level to that of P on the grid.
pub const GRID_VAR_RATIO: f64 = 0.8;

/// Exact probabilities, the analytic true radius and the certified radii
/// for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub config: GridConfig,
    pub family: QFamily,
    pub t_true: f64,
    pub pa: f64,
    pub qa: f64,
    pub true_radius: f64,
    pub radius_np: f64,
    pub radius_dsrs: f64,
    pub abstained: bool,
}

impl OracleRow {
    /// Certified radius does not exceed the true one.
    pub fn sound(&self, eps_radius: f64) -> bool {
        self.radius_dsrs <= self.true_radius + eps_radius
    }

    /// Adding the `Q` constraint never loses radius.
    pub fn dominant(&self, eps_radius: f64) -> bool {
        self.radius_dsrs >= self.radius_np - eps_radius
    }
}

/// The `Q` used for a grid point: truncation by the heuristic radius, or a
/// rescaling by [`GRID_VAR_RATIO`].
pub fn grid_q_spec(p_spec: &SmoothingSpec, pa: f64, family: QFamily) -> Result<SmoothingSpec> {
    match family {
        QFamily::Truncated => p_spec.truncated(t_from_pa(pa, p_spec, &HeuristicConfig::default())?),
        QFamily::Variance => SmoothingSpec::generalized(p_spec.d, GRID_VAR_RATIO * p_spec.sigma, p_spec.k),
    }
}

/// Certify a grid point with exact probabilities and compare with the truth.
pub fn oracle_row(config: &GridConfig, family: QFamily, delta_int: f64, eps_radius: f64) -> Result<OracleRow> {
    let p_spec = SmoothingSpec::generalized(config.d, config.sigma, config.k)?;
    let clf = BallClassifier::with_mass(&p_spec, config.target_pa)?;
    let pa = p_spec.ball_mass(clf.t_true);
    let q_spec = grid_q_spec(&p_spec, pa, family)?;
    let (_, qa) = exact_pa_qa(&clf, &p_spec, &q_spec)?;
    let ctx = CertContext::new(p_spec, q_spec, 0.0)?.with_tolerances(
        delta_int,
        crate::certify::DEFAULT_EPS_DUAL,
        eps_radius,
    )?;
    let out = certify(&ProbBound::exact(pa)?, &ProbBound::exact(qa)?, &ctx)?;
    Ok(OracleRow {
        config: *config,
        family,
        t_true: clf.t_true,
        pa,
        qa,
        true_radius: true_radius(&clf, &p_spec, eps_radius, delta_int)?,
        radius_np: out.radius_np,
        radius_dsrs: out.radius_dsrs,
        abstained: out.abstained,
    })
}

/// Lower end of the `Q_A` box when the classifier is right on the whole
/// ball: the one-sided bound after `n` all-success draws, or 1 without
/// sampling error.
pub fn sampled_q_floor(alpha: f64, n: Option<u64>) -> f64 {
    n.map_or(1.0, |n| alpha.powf(1.0 / n as f64))
}

/// Lower end of the `Q_A` box when the ball holds with probability
/// `exp(-d^a)`.
pub fn relaxed_q_floor(d: u64, a: f64) -> f64 {
    (-(d as f64).powf(a)).exp()
}

/// Growth curve `r_np d^(a / 1.18)` fitted to relaxed runs.
pub fn projected_radius(radius_np: f64, d: u64, a: f64) -> f64 {
    radius_np * (d as f64).powf(a / 1.18)
}

/// One point of a concentration curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub d: u64,
    pub k: u64,
    /// Truncation radius of `Q`, the `p_con` quantile of the Gaussian norm.
    pub t: f64,
    pub pa: f64,
    pub q_lo: f64,
    pub radius_np: f64,
    pub radius_dsrs: f64,
    pub abstained: bool,
}

/// Certify an input whose classifier is right on the ball holding `p_con`
/// of Gaussian noise, with exact `P_A = pa` and `Q_A` in `[q_lo, 1]`.
pub fn concentration_point(
    d: u64,
    sigma: f64,
    p_con: f64,
    pa: f64,
    q_lo: f64,
    delta_int: f64,
    eps_radius: f64,
) -> Result<CurvePoint> {
    if !(p_con > 0.0 && p_con < 1.0) {
        return invalid(format!("p_con must lie in (0, 1), got {p_con}"));
    }
    let k = grid_k(d)?;
    let p_spec = SmoothingSpec::generalized(d, sigma, k)?;
    let t = sigma * (2.0 * gamma_quantile(d as f64 / 2.0, p_con, false)).sqrt();
    let ctx = CertContext::new(p_spec, p_spec.truncated(t)?, 0.0)?.with_tolerances(
        delta_int,
        crate::certify::DEFAULT_EPS_DUAL,
        eps_radius,
    )?;
    let q_box = ProbBound::new(q_lo, 1.0, 1.0)?;
    let out = certify(&ProbBound::exact(pa)?, &q_box, &ctx)?;
    Ok(CurvePoint { d, k, t, pa, q_lo, radius_np: out.radius_np, radius_dsrs: out.radius_dsrs, abstained: out.abstained })
}

/// Sampled pipeline for one grid point: half of `n` draws from `P`, the
/// heuristic truncation picked from the resulting `P_A` lower bound, the
/// other half from that truncated `Q`. Returns the row and the two boxes.
pub fn sampled_row(
    config: &GridConfig,
    n: u64,
    alpha: f64,
    seed: u64,
    delta_int: f64,
    eps_radius: f64,
) -> Result<(OracleRow, ProbBound, ProbBound)> {
    if n < 2 {
        return invalid(format!("need at least two draws, got {n}"));
    }
    let p_spec = SmoothingSpec::generalized(config.d, config.sigma, config.k)?;
    let clf = BallClassifier::with_mass(&p_spec, config.target_pa)?;
    let (alpha_p, alpha_q) = crate::confidence::split_budget(alpha)?;
    let p_rec = mc_sample_classifier(&clf, &p_spec, n / 2, seed)?;
    let p_box = crate::confidence::binom_interval(p_rec, alpha_p, crate::confidence::Sidedness::TwoSided)?;
    let q_spec = grid_q_spec(&p_spec, p_box.lo.max(0.5), QFamily::Truncated)?;
    let q_rec = mc_sample_classifier(&clf, &q_spec, n - n / 2, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let q_box = crate::confidence::binom_interval(q_rec, alpha_q, crate::confidence::Sidedness::TwoSided)?;
    let ctx = CertContext::new(p_spec, q_spec, 0.0)?.with_tolerances(
        delta_int,
        crate::certify::DEFAULT_EPS_DUAL,
        eps_radius,
    )?;
    let out = certify(&p_box, &q_box, &ctx)?;
    let (pa, qa) = exact_pa_qa(&clf, &p_spec, &q_spec)?;
    let row = OracleRow {
        config: *config,
        family: QFamily::Truncated,
        t_true: clf.t_true,
        pa,
        qa,
        true_radius: true_radius(&clf, &p_spec, eps_radius, delta_int)?,
        radius_np: out.radius_np,
        radius_dsrs: out.radius_dsrs,
        abstained: out.abstained,
    };
    Ok((row, p_box, q_box))
}
