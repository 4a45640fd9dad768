//! Bracketing root search for monotone functionals that are only known up
//! to a quadrature error.

use crate::error::Result;
use crate::numerics::LogScalar;

/// Precision and expansion limits of a bracket search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchParams {
    pub tol: f64,
    /// Added to the magnitude in the relative stopping rule.
    pub floor: f64,
    pub max_doublings: usize,
}

impl SearchParams {
    pub(crate) fn is_narrow(&self, lo: f64, hi: f64) -> bool {
        hi - lo <= self.tol * (self.floor + lo.abs().min(hi.abs()))
    }
}

/// A sound bracket `[lo, hi]` around the root of an exactly monotone `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

struct Cache<F> {
    f: F,
    points: Vec<(f64, f64)>,
}

impl<F: FnMut(f64) -> Result<f64>> Cache<F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        if let Some(&(_, v)) = self.points.iter().find(|p| p.0 == x) {
            return Ok(v);
        }
        let v = (self.f)(x)?;
        self.points.push((x, v));
        Ok(v)
    }

    /// Largest point strictly below `level`, and the smallest point above it
    /// that reaches `level`.
    fn straddle(&self, level: f64) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
        let below = self.points.iter().filter(|p| p.1 < level).max_by(|a, b| a.0.total_cmp(&b.0)).copied();
        let above = self
            .points
            .iter()
            .filter(|p| p.1 >= level && below.map_or(true, |b| p.0 > b.0))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .copied();
        (below, above)
    }
}

/// Illinois iteration for `f = level`, keeping `f(lo) < level <= f(hi)`.
fn refine<F: FnMut(f64) -> Result<f64>>(
    cache: &mut Cache<F>,
    level: f64,
    (mut lo, mut flo): (f64, f64),
    (mut hi, mut fhi): (f64, f64),
    params: SearchParams,
) -> Result<(f64, f64)> {
    let mut side = 0i8;
    for _ in 0..200 {
        let width = hi - lo;
        if params.is_narrow(lo, hi) {
            break;
        }
        let (glo, ghi) = (flo - level, fhi - level);
        let mut x = if ghi > glo { lo + width * (-glo) / (ghi - glo) } else { 0.5 * (lo + hi) };
        // stay clear of the ends so each step shrinks the bracket
        let guard = 0.01 * width;
        if !(x > lo + guard && x < hi - guard) {
            x = x.clamp(lo + guard, hi - guard);
        }
        if !(x > lo && x < hi) {
            break;
        }
        let fx = cache.eval(x)?;
        if fx < level {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi = level + 0.5 * (fhi - level);
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo = level + 0.5 * (flo - level);
            }
            side = 1;
        }
    }
    Ok((lo, hi))
}

/// Bracket the root of a nondecreasing `f` whose computed values are within
/// `slack` of the truth, with exact limits `limits` at `-inf` and `+inf`.
///
/// The returned `lo` has a computed value below `target - slack` and `hi`
/// one at or above `target + slack`, so the exact root lies between them
/// whatever the quadrature error. An end that cannot be pinned inside the
/// expansion budget is reported as infinite.
pub(crate) fn sound_bracket(
    f: impl FnMut(f64) -> Result<f64>,
    target: f64,
    slack: f64,
    limits: (f64, f64),
    guess: f64,
    params: SearchParams,
) -> Result<Bracket> {
    let lo_level = target - slack;
    let hi_level = target + slack;
    let need_lo = lo_level > limits.0;
    let need_hi = hi_level < limits.1;
    let mut cache = Cache { f, points: Vec::new() };
    if !need_lo && !need_hi {
        return Ok(Bracket { lo: f64::NEG_INFINITY, hi: f64::INFINITY });
    }
    let g = cache.eval(guess)?;

    // expand downwards until something falls below the lower level
    let mut lo_inf = false;
    if need_lo && g >= lo_level {
        let mut step = 1.0;
        let mut x = guess;
        let mut found = false;
        for _ in 0..params.max_doublings {
            x -= step;
            step *= 2.0;
            if !x.is_finite() {
                break;
            }
            if cache.eval(x)? < lo_level {
                found = true;
                break;
            }
        }
        lo_inf = !found;
    }
    let mut hi_inf = false;
    if need_hi && g < hi_level {
        let mut step = 1.0;
        let mut x = guess;
        let mut found = false;
        for _ in 0..params.max_doublings {
            x += step;
            step *= 2.0;
            if !x.is_finite() {
                break;
            }
            if cache.eval(x)? >= hi_level {
                found = true;
                break;
            }
        }
        hi_inf = !found;
    }

    let lo = if !need_lo || lo_inf {
        f64::NEG_INFINITY
    } else {
        match cache.straddle(lo_level) {
            (Some(below), Some(above)) => refine(&mut cache, lo_level, below, above, params)?.0,
            (Some(below), None) => below.0,
            (None, _) => f64::NEG_INFINITY,
        }
    };
    let hi = if !need_hi || hi_inf {
        f64::INFINITY
    } else {
        match cache.straddle(hi_level) {
            (Some(below), Some(above)) => refine(&mut cache, hi_level, below, above, params)?.1,
            (None, Some(above)) => above.0,
            (_, None) => f64::INFINITY,
        }
    };
    Ok(Bracket { lo, hi })
}

/// Signed multiplier `sign(theta) * expm1(|theta|)`, linear near zero and
/// exponential far out.
pub(crate) fn signed_multiplier(theta: f64) -> LogScalar {
    if theta == 0.0 {
        return LogScalar::ZERO;
    }
    let a = theta.abs();
    let ln_mag = if a.is_infinite() {
        f64::INFINITY
    } else if a < 1.0 {
        a.exp_m1().ln()
    } else {
        a + (-(-a).exp()).ln_1p()
    };
    LogScalar::new(if theta > 0.0 { 1 } else { -1 }, ln_mag)
}
