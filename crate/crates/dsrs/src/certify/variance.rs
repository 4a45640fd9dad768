//! Joint dual search for the variance family. Both multipliers live on the
//! signed scale `sign(theta) expm1(|theta|)`. For fixed `lambda1` the `P`
//! constraint pins `lambda2`; along that curve `Q` decreases in `lambda1`,
//! which drives the outer search.

use super::search::{signed_multiplier, sound_bracket, Bracket, SearchParams};
use super::truncated::{MAX_DOUBLINGS, SIGNED_FLOOR};
use super::{CertContext, DualPoint, Kernel};
use crate::error::{abstain, invalid, Result};
use crate::numerics::LogScalar;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    /// `Q` on the curve is surely above the target: the root is to the right.
    Above,
    /// Surely below: the root is to the left.
    Below,
    Unclear,
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    x: f64,
    inner: Bracket,
    // Q at the two ends of the inner bracket
    q_lo: f64,
    q_hi: f64,
}
/// Outcome of a variance-family solve.
pub(crate) struct VarSolution {
    /// Sound lower ends of both multipliers, when the outer search closed.
    pub dual: Option<DualPoint>,
    /// Points on the `P` constraint curve next to the root, for the
    /// weak-duality bound.
    pub centers: Vec<(LogScalar, LogScalar)>,
}

enum Walk {
    Hit(Probe),
    /// `Q` along the curve stopped moving before reaching the target.
    Plateau,
}

enum Outer {
    Closed(Probe, Probe),
    /// Every probe of the stalled walk.
    Plateau(Vec<Probe>),
}

struct VarSolver<'k, 'c> {
    kernel: &'k Kernel<'c>,
    pa: f64,
    qa: f64,
    params: SearchParams,
    inner_guess: f64,
    path: Vec<Probe>,
}

impl VarSolver<'_, '_> {
    fn slack(&self) -> f64 {
        self.kernel.ctx().delta_int
    }

    fn q_at(&self, x: f64, y: f64, infinite: f64) -> Result<f64> {
        if !y.is_finite() {
            return Ok(infinite);
        }
        self.kernel.q_var(signed_multiplier(x), signed_multiplier(y))
    }

    fn probe(&mut self, x: f64) -> Result<Probe> {
        let w1 = signed_multiplier(x);
        let inner = sound_bracket(
            |y| self.kernel.p_var(w1, signed_multiplier(y)),
            self.pa,
            self.slack(),
            (0.0, 1.0),
            self.inner_guess,
            self.params,
        )?;
        if inner.lo.is_finite() && inner.hi.is_finite() {
            self.inner_guess = 0.5 * (inner.lo + inner.hi);
        }
        let q_lo = self.q_at(x, inner.lo, 0.0)?;
        let q_hi = self.q_at(x, inner.hi, 1.0)?;
        Ok(Probe { x, inner, q_lo, q_hi })
    }

    fn side(&self, p: &Probe) -> Side {
        if p.q_hi + self.slack() < self.qa {
            Side::Below
        } else if p.q_lo - self.slack() > self.qa {
            Side::Above
        } else {
            Side::Unclear
        }
    }

    fn gap(&self, p: &Probe) -> f64 {
        0.5 * (p.q_lo + p.q_hi) - self.qa
    }

    // walk from `start` in direction `dir` until a probe lands on `want`
    fn expand(&mut self, start: &Probe, dir: f64, want: Side) -> Result<Walk> {
        let mut step = 1.0;
        let mut prev = *start;
        self.path.clear();
        self.path.push(*start);
        for i in 0..MAX_DOUBLINGS {
            let x = prev.x + dir * step;
            step *= 2.0;
            if !x.is_finite() {
                break;
            }
            let p = self.probe(x)?;
            self.path.push(p);
            if self.side(&p) == want {
                return Ok(Walk::Hit(p));
            }
            if i >= 3 && (self.gap(&p) - self.gap(&prev)).abs() <= self.slack() {
                return Ok(Walk::Plateau);
            }
            prev = p;
        }
        abstain("outer bracket expansion exceeded its cap")
    }

    fn solve(&mut self, guess: f64) -> Result<Outer> {
        let first = self.probe(guess)?;
        let mut lo = first;
        let mut hi = first;
        if self.side(&first) != Side::Above {
            match self.expand(&first, -1.0, Side::Above)? {
                Walk::Hit(p) => lo = p,
                Walk::Plateau => return Ok(Outer::Plateau(std::mem::take(&mut self.path))),
            }
        }
        if self.side(&first) != Side::Below {
            match self.expand(&first, 1.0, Side::Below)? {
                Walk::Hit(p) => hi = p,
                Walk::Plateau => return Ok(Outer::Plateau(std::mem::take(&mut self.path))),
            }
        }
        // innermost undecided probes on either side, once any is seen
        let mut unclear: Option<(f64, f64)> = None;
        let mut last = 0i8;
        let (mut g_lo, mut g_hi) = (self.gap(&lo), self.gap(&hi));
        for _ in 0..100 {
            if self.params.is_narrow(lo.x, hi.x) {
                break;
            }
            let x = match unclear {
                None => {
                    let w = hi.x - lo.x;
                    let t = if g_lo > g_hi { g_lo / (g_lo - g_hi) } else { 0.5 };
                    lo.x + w * t.clamp(0.01, 0.99)
                }
                // bisect the wider of the two decided gaps
                Some((ul, ur)) => {
                    if ul - lo.x >= hi.x - ur {
                        0.5 * (lo.x + ul)
                    } else {
                        0.5 * (ur + hi.x)
                    }
                }
            };
            if !(x > lo.x && x < hi.x) {
                break;
            }
            let p = self.probe(x)?;
            match self.side(&p) {
                Side::Above => {
                    lo = p;
                    g_lo = self.gap(&p);
                    if last == -1 {
                        g_hi *= 0.5;
                    }
                    last = -1;
                }
                Side::Below => {
                    hi = p;
                    g_hi = self.gap(&p);
                    if last == 1 {
                        g_lo *= 0.5;
                    }
                    last = 1;
                }
                Side::Unclear => {
                    unclear = Some(match unclear {
                        None => (x, x),
                        Some((ul, ur)) => (ul.min(x), ur.max(x)),
                    });
                }
            }
            if let Some((ul, ur)) = unclear {
                if self.params.is_narrow(lo.x, ul) && self.params.is_narrow(ur, hi.x) {
                    break;
                }
            }
        }
        Ok(Outer::Closed(lo, hi))
    }
}

fn center(p: &Probe) -> Option<(LogScalar, LogScalar)> {
    (p.inner.lo.is_finite() && p.inner.hi.is_finite())
        .then(|| (signed_multiplier(p.x), signed_multiplier(0.5 * (p.inner.lo + p.inner.hi))))
}

/// Solve with the outer search started at `guess`.
pub(crate) fn solve_var_with(kernel: &Kernel, pa: f64, qa: f64, guess: f64) -> Result<VarSolution> {
    let ctx = kernel.ctx();
    if !(pa > 0.0 && pa < 1.0 && qa > 0.0 && qa <= 1.0) {
        return invalid(format!("probabilities must lie in (0, 1), got ({pa}, {qa})"));
    }
    let params = SearchParams { tol: ctx.eps_dual, floor: SIGNED_FLOOR, max_doublings: MAX_DOUBLINGS };
    let mut solver = VarSolver { kernel, pa, qa, params, inner_guess: 0.0, path: Vec::new() };
    let (dual, centers) = match solver.solve(guess)? {
        Outer::Plateau(path) => (None, path.iter().filter_map(center).collect()),
        Outer::Closed(lo, hi) => {
            let dual = hi.inner.lo.is_finite().then(|| {
                let l1 = (signed_multiplier(lo.x), signed_multiplier(hi.x));
                let l2 = signed_multiplier(hi.inner.lo);
                DualPoint { lambda1: l1.0, lambda2: l2, lambda1_bracket: l1, sum_bracket: (l1.0.add(l2), l1.1.add(l2)) }
            });
            (dual, [center(&lo), center(&hi)].into_iter().flatten().collect())
        }
    };
    Ok(VarSolution { dual, centers })
}

/// Sound dual point for a rescaled `Q`: lower ends of both multipliers.
pub fn dual_solve_var(pa: f64, qa: f64, ctx: &CertContext) -> Result<DualPoint> {
    let fine = ctx.refined();
    let kernel = Kernel::new(&fine)?;
    if ctx.q_spec.is_truncated() {
        return invalid("variance solve needs an untruncated Q");
    }
    // start where Q carries no weight
    let np = super::radius::np_lambda(&kernel, pa)?;
    let guess = if np.lo.is_finite() { theta_of(LogScalar::from_ln(np.lo)) } else { 0.0 };
    match solve_var_with(&kernel, pa, qa, guess)?.dual {
        Some(d) => Ok(d),
        None => abstain("Q along the constraint curve levels off before the target"),
    }
}

/// Inverse of the signed multiplier.
pub(crate) fn theta_of(x: LogScalar) -> f64 {
    let sign = f64::from(x.sign());
    if sign == 0.0 {
        return 0.0;
    }
    let v = x.log_magnitude();
    // ln(1 + e^v)
    let mag = if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
    sign * mag
}
