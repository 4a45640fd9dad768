//! Dual search for the truncated family: first the inner sum against `Q`,
//! then the outer multiplier against the shell mass `h`.

use super::search::{sound_bracket, Bracket, SearchParams};
use super::{CertContext, DualPoint, Kernel};
use crate::error::{invalid, Error, Result};
use crate::numerics::LogScalar;

/// Tolerance below which a target is treated as sitting on its boundary.
pub(crate) const BOUNDARY_TOL: f64 = 1e-9;

pub(crate) const MAX_DOUBLINGS: usize = 200;

/// Stopping floor on the signed-multiplier scale, where zero is an ordinary
/// point and precision has to stay relative right down to it.
pub(crate) const SIGNED_FLOOR: f64 = 1e-30;

/// Whether `(pa, qa)` lies in the feasible region of the truncated family.
pub(crate) fn feasible(pa: f64, qa: f64, nu: f64) -> bool {
    qa / nu <= pa + BOUNDARY_TOL && pa <= 1.0 - (1.0 - qa) / nu + BOUNDARY_TOL
}

// bracket in ln(multiplier) for a monotone functional with range (0, top)
pub(crate) fn log_bracket(
    f: impl FnMut(f64) -> Result<f64>,
    target: f64,
    top: f64,
    ctx: &CertContext,
    guess: f64,
) -> Result<Bracket> {
    // targets on the boundary of the range are attained only in the limit
    if target <= BOUNDARY_TOL {
        return Ok(Bracket { lo: f64::NEG_INFINITY, hi: f64::NEG_INFINITY });
    }
    if target >= top - BOUNDARY_TOL {
        return Ok(Bracket { lo: f64::INFINITY, hi: f64::INFINITY });
    }
    let params = SearchParams { tol: ctx.eps_dual, floor: 1.0, max_doublings: MAX_DOUBLINGS };
    sound_bracket(f, target, ctx.delta_int, (0.0, top), guess, params)
}

/// Sound dual point for the truncated family: `lambda1` is a lower end and
/// `lambda1 + nu lambda2` is the lower end of the sum bracket, so that `R`
/// at the result does not exceed the exact optimum.
pub fn dual_solve_truncated(pa: f64, qa: f64, ctx: &CertContext) -> Result<DualPoint> {
    if !(0.0..=1.0).contains(&pa) || !(0.0..=1.0).contains(&qa) {
        return invalid(format!("probabilities must lie in [0, 1], got ({pa}, {qa})"));
    }
    let fine = ctx.refined();
    let kernel = Kernel::new(&fine)?;
    if ctx.t_star().is_infinite() {
        return invalid("truncated solve needs a truncated Q");
    }
    let nu = ctx.nu;
    if !feasible(pa, qa, nu) {
        return Err(Error::Infeasible { pa, qa });
    }
    let sum = log_bracket(|ln_a| kernel.q_sum(ln_a), qa, 1.0, &fine, 0.0)?;
    let outer_target = pa - qa / nu;
    let outer = log_bracket(|ln_l| kernel.h(ln_l), outer_target, 1.0 - 1.0 / nu, &fine, 0.0)?;

    let a_lo = LogScalar::from_ln(sum.lo);
    let l1_lo = LogScalar::from_ln(outer.lo);
    let l1_hi = LogScalar::from_ln(outer.hi);
    // R splits into a piece inside the ball driven by the sum alone and a
    // piece outside driven by lambda1 alone, both increasing; the lower
    // corner (l1_lo, a_lo) therefore bounds R from below
    let lambda2 = a_lo.sub(l1_lo).scale_ln(-nu.ln());
    Ok(DualPoint {
        lambda1: l1_lo,
        lambda2,
        lambda1_bracket: (l1_lo, l1_hi),
        sum_bracket: (a_lo, LogScalar::from_ln(sum.hi)),
    })
}
