//! Exact binomial confidence bounds and the sampling-budget rules.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::reg_beta;

/// `successes` out of `trials` Bernoulli draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingRecord {
    pub trials: u64,
    pub successes: u64,
}

impl SamplingRecord {
    pub fn new(trials: u64, successes: u64) -> Result<Self> {
        if trials == 0 {
            return invalid("a sampling record needs at least one trial");
        }
        if successes > trials {
            return invalid(format!("{successes} successes out of {trials} trials"));
        }
        Ok(SamplingRecord { trials, successes })
    }
}

/// A probability interval together with its confidence level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbBound {
    pub lo: f64,
    pub hi: f64,
    pub confidence: f64,
}

impl ProbBound {
    pub fn new(lo: f64, hi: f64, confidence: f64) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return invalid(format!("probability interval [{lo}, {hi}] is not inside [0, 1]"));
        }
        Ok(ProbBound { lo, hi, confidence })
    }

    /// A point with no sampling uncertainty.
    pub fn exact(p: f64) -> Result<Self> {
        Self::new(p, p, 1.0)
    }

    /// `[0, 1]`, carrying no information.
    pub fn vacuous() -> Self {
        ProbBound { lo: 0.0, hi: 1.0, confidence: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sidedness {
    TwoSided,
    LowerOnly,
}

// smallest p with Pr[Bin(n, p) >= x] >= level, i.e. I_p(x, n - x + 1) = level
fn solve_tail(a: f64, b: f64, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reg_beta(a, b, mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clopper-Pearson bounds; the two-sided form spends `alpha / 2` per side.
pub fn binom_interval(rec: SamplingRecord, alpha: f64, sidedness: Sidedness) -> Result<ProbBound> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let n = rec.trials as f64;
    let x = rec.successes as f64;
    let side = match sidedness {
        Sidedness::TwoSided => alpha / 2.0,
        Sidedness::LowerOnly => alpha,
    };
    let lo = if rec.successes == 0 {
        0.0
    } else if rec.successes == rec.trials {
        side.powf(1.0 / n)
    } else {
        solve_tail(x, n - x + 1.0, side)
    };
    let hi = match sidedness {
        Sidedness::LowerOnly => 1.0,
        Sidedness::TwoSided if rec.successes == rec.trials => 1.0,
        Sidedness::TwoSided if rec.successes == 0 => 1.0 - side.powf(1.0 / n),
        Sidedness::TwoSided => solve_tail(x + 1.0, n - x, 1.0 - side),
    };
    ProbBound::new(lo, hi.max(lo), 1.0 - alpha)
}

/// Even split of the total budget between the P and Q estimates.
pub fn split_budget(alpha_total: f64) -> Result<(f64, f64)> {
    if !(alpha_total > 0.0 && alpha_total < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha_total}"));
    }
    Ok((alpha_total / 2.0, alpha_total / 2.0))
}

/// Whether every P-draw succeeded, in which case Q adds nothing useful.
pub fn fallback_decision(p_record: SamplingRecord) -> bool {
    p_record.successes == p_record.trials
}

/// Pool two records drawn from the same law.
pub fn merge_records(a: SamplingRecord, b: SamplingRecord) -> SamplingRecord {
    SamplingRecord { trials: a.trials + b.trials, successes: a.successes + b.successes }
}

/// Boxes for `P_A` and `Q_A` from separate counts, each holding with
/// confidence `1 - alpha/2` and split evenly between its two sides.
pub fn boxes_from_counts(p: SamplingRecord, q: SamplingRecord, alpha: f64) -> Result<(ProbBound, ProbBound)> {
    let (alpha_p, alpha_q) = split_budget(alpha)?;
    Ok((binom_interval(p, alpha_p, Sidedness::TwoSided)?, binom_interval(q, alpha_q, Sidedness::TwoSided)?))
}
