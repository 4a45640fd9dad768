//! Worst-case probabilities inside the confidence boxes, the single-radius
//! check and the outer radius search.

use std::collections::BTreeMap;

use serde::Serialize;

use super::search::{signed_multiplier, sound_bracket, Bracket, SearchParams};
use super::truncated::{dual_solve_truncated, log_bracket, BOUNDARY_TOL, MAX_DOUBLINGS, SIGNED_FLOOR};
use super::variance::{solve_var_with, theta_of};
use super::{CertContext, CertOutcome, Kernel, QFamily};
use crate::confidence::ProbBound;
use crate::distributions::Family;
use crate::error::{invalid, Error, Result};
use crate::numerics::{std_normal_quantile, LogScalar};

/// Which of the two constraints the worst case actually uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Binding {
    /// Only the `P` constraint; the bound is the single-distribution one.
    POnly,
    /// Only the `Q` constraint.
    QOnly,
    Both,
}

/// Probabilities at which the certified value is smallest over the boxes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCase {
    pub pa: f64,
    pub qa: f64,
    pub binding: Binding,
}

/// Bracket of `ln lambda` with `P(lambda, 0) = pa`.
pub(crate) fn np_lambda(kernel: &Kernel, pa: f64) -> Result<Bracket> {
    log_bracket(|l| kernel.p_np(l), pa, 1.0, kernel.ctx(), 0.0)
}

// Q at the single-multiplier point (lambda, 0)
fn q_of_np(kernel: &Kernel, ln_lambda: f64) -> Result<f64> {
    if ln_lambda == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if ln_lambda == f64::INFINITY {
        return Ok(1.0);
    }
    match kernel.ctx().q_family() {
        QFamily::Truncated => kernel.q_sum(ln_lambda),
        QFamily::Variance => kernel.q_var(LogScalar::from_ln(ln_lambda), LogScalar::ZERO),
    }
}

/// Sound intervals found along the way, reused by the radius check.
struct Solved {
    worst: WorstCase,
    np: Bracket,
    // bracket of the Q-only multiplier: ln(a) when truncated, theta otherwise
    q_only: Option<Bracket>,
}

fn q_only_bracket(kernel: &Kernel, qa: f64) -> Result<Bracket> {
    let ctx = kernel.ctx();
    match ctx.q_family() {
        QFamily::Truncated => log_bracket(|l| kernel.q_sum(l), qa, 1.0, ctx, 0.0),
        QFamily::Variance => {
            let params = SearchParams { tol: ctx.eps_dual, floor: SIGNED_FLOOR, max_doublings: MAX_DOUBLINGS };
            sound_bracket(
                |y| kernel.q_var(LogScalar::ZERO, signed_multiplier(y)),
                qa,
                ctx.delta_int,
                (0.0, 1.0),
                0.0,
                params,
            )
        }
    }
}

fn check_box(p_box: &ProbBound, q_box: &ProbBound, ctx: &CertContext) -> Result<()> {
    for b in [p_box, q_box] {
        if !(0.0 <= b.lo && b.lo <= b.hi && b.hi <= 1.0) {
            return invalid(format!("probability box [{}, {}] is not inside [0, 1]", b.lo, b.hi));
        }
    }
    if ctx.q_family() == QFamily::Truncated {
        // some q in the box must satisfy 1 - nu (1 - P_hi') <= q <= nu P_hi
        let nu = ctx.nu;
        let q_min = q_box.lo.max(1.0 - nu * (1.0 - p_box.lo));
        let q_max = q_box.hi.min(nu * p_box.hi);
        if q_min > q_max + BOUNDARY_TOL {
            return Err(Error::Infeasible { pa: p_box.lo, qa: q_box.lo });
        }
    }
    Ok(())
}

fn solve_worst(kernel: &Kernel, p_box: &ProbBound, q_box: &ProbBound) -> Result<Solved> {
    let ctx = kernel.ctx();
    check_box(p_box, q_box, ctx)?;
    let slack = ctx.delta_int;
    let np = np_lambda(kernel, p_box.lo)?;
    let q_lo = q_of_np(kernel, np.lo)? - slack;
    let q_hi = q_of_np(kernel, np.hi)? + slack;
    let p_only = |qa: f64| WorstCase { pa: p_box.lo, qa, binding: Binding::POnly };
    let mid = (0.5 * (q_lo + q_hi)).clamp(0.0, 1.0);

    if q_lo > q_box.lo {
        let worst = if q_hi < q_box.hi {
            p_only(mid)
        } else if q_lo > q_box.hi {
            WorstCase { pa: p_box.lo, qa: q_box.hi, binding: Binding::Both }
        } else {
            p_only(mid)
        };
        return Ok(Solved { worst, np, q_only: None });
    }
    if q_hi > q_box.lo {
        // cannot tell which side of the lower Q bound the P-only optimum sits
        return Ok(Solved { worst: p_only(mid), np, q_only: None });
    }

    let mu = q_only_bracket(kernel, q_box.lo)?;
    let (p_lo, p_hi) = match ctx.q_family() {
        QFamily::Truncated => {
            let p = q_box.lo / ctx.nu;
            (p, p)
        }
        QFamily::Variance => {
            let at = |y: f64, inf: f64| -> Result<f64> {
                if !y.is_finite() {
                    return Ok(inf);
                }
                kernel.p_var(LogScalar::ZERO, signed_multiplier(y))
            };
            (at(mu.lo, 0.0)? - slack, at(mu.hi, 1.0)? + slack)
        }
    };
    let worst = if p_hi < p_box.lo {
        WorstCase { pa: p_box.lo, qa: q_box.lo, binding: Binding::Both }
    } else if p_lo >= p_box.lo && p_hi <= p_box.hi + BOUNDARY_TOL {
        WorstCase { pa: p_lo.min(p_box.hi), qa: q_box.lo, binding: Binding::QOnly }
    } else if p_lo > p_box.hi {
        if ctx.q_family() == QFamily::Truncated {
            return Err(Error::Infeasible { pa: p_box.hi, qa: q_box.lo });
        }
        WorstCase { pa: p_box.hi, qa: q_box.lo, binding: Binding::Both }
    } else {
        p_only(q_box.lo)
    };
    Ok(Solved { worst, np, q_only: Some(mu) })
}

/// Worst-case `(P_A, Q_A)` over the boxes. Whenever the sign of a
/// comparison is hidden by quadrature error the `P`-only bound is chosen,
/// which never overstates the certificate.
pub fn worst_case_pa_qa(p_box: &ProbBound, q_box: &ProbBound, ctx: &CertContext) -> Result<WorstCase> {
    let fine = ctx.refined();
    let kernel = Kernel::new(&fine)?;
    Ok(solve_worst(&kernel, p_box, q_box)?.worst)
}

fn certified(value: f64, ctx: &CertContext) -> bool {
    value - ctx.delta_int > 0.5
}

fn np_r(kernel: &Kernel, np: &Bracket) -> Result<f64> {
    kernel.r_np(np.lo)
}

/// Whether the shift length `r` is certified. Quadrature or search
/// failures come back as [`Error::Abstain`].
pub fn check_radius(r: f64, p_box: &ProbBound, q_box: &ProbBound, ctx: &CertContext) -> Result<bool> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    if p_box.lo <= 0.5 {
        check_box(p_box, q_box, ctx)?;
        return Ok(false);
    }
    let ctx_r = ctx.at_radius(r);
    let fine = ctx_r.refined();
    let kernel = Kernel::new(&fine)?;
    let solved = solve_worst(&kernel, p_box, q_box)?;
    // the single-distribution bound is always valid on its own
    if certified(np_r(&kernel, &solved.np)?, &ctx_r) {
        return Ok(true);
    }
    let WorstCase { pa, qa, binding } = solved.worst;
    let value = match (binding, ctx_r.q_family()) {
        (Binding::POnly, _) => return Ok(false),
        (Binding::QOnly, QFamily::Truncated) => {
            let mu = solved.q_only.expect("Q-only branch keeps its bracket");
            kernel.r_trunc(f64::NEG_INFINITY, mu.lo)?
        }
        (Binding::QOnly, QFamily::Variance) => {
            let mu = solved.q_only.expect("Q-only branch keeps its bracket");
            if !mu.lo.is_finite() {
                return Ok(false);
            }
            kernel.r_var(LogScalar::ZERO, signed_multiplier(mu.lo))?
        }
        (Binding::Both, QFamily::Truncated) => {
            let dual = dual_solve_truncated(pa, qa, &ctx_r)?;
            kernel.r_trunc(ln_or_zero(dual.lambda1), ln_or_zero(dual.sum(ctx_r.nu)))?
        }
        (Binding::Both, QFamily::Variance) => {
            if !(pa > 0.0 && pa < 1.0 && qa > 0.0) {
                return Ok(false);
            }
            let guess = if solved.np.lo.is_finite() { theta_of(LogScalar::from_ln(solved.np.lo)) } else { 0.0 };
            let sol = solve_var_with(&kernel, pa, qa, guess)?;
            let mut best = f64::NEG_INFINITY;
            if let Some(d) = sol.dual {
                best = kernel.r_var(d.lambda1, d.lambda2)? - ctx_r.delta_int;
            }
            for (l1, l2) in sol.centers {
                best = best.max(weak_dual_bound(&kernel, l1, l2, p_box, q_box, ctx_r.delta_int)?);
            }
            return Ok(best > 0.5);
        }
    };
    Ok(certified(value, &ctx_r))
}

// Largest multiplier-weighted quadrature error the weak-duality bound may
// carry; past it the bound only amplifies integration noise.
const WEAK_DUAL_BUDGET: f64 = 1e-3;

// Lagrangian lower bound over the boxes, valid for any multipliers. Each
// functional's error enters scaled by its multiplier and is charged at the
// reported tolerance `tol`, above the one the functionals were run at.
fn weak_dual_bound(
    kernel: &Kernel,
    l1: LogScalar,
    l2: LogScalar,
    p_box: &ProbBound,
    q_box: &ProbBound,
    tol: f64,
) -> Result<f64> {
    let (w1, w2) = (l1.to_f64(), l2.to_f64());
    let spread = 1.0 + w1.abs() + w2.abs();
    if !(spread * tol <= WEAK_DUAL_BUDGET) {
        return Ok(f64::NEG_INFINITY);
    }
    let r = kernel.r_var(l1, l2)?;
    let p = kernel.p_var(l1, l2)?;
    let q = kernel.q_var(l1, l2)?;
    let p_edge = if w1 >= 0.0 { p_box.lo } else { p_box.hi };
    let q_edge = if w2 >= 0.0 { q_box.lo } else { q_box.hi };
    Ok(r + w1 * (p_edge - p) + w2 * (q_edge - q) - spread * tol)
}

fn ln_or_zero(x: LogScalar) -> f64 {
    if x.is_positive() {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn bisect_radius(ctx: &CertContext, mut check: impl FnMut(f64) -> Result<bool>) -> Result<(f64, usize, usize)> {
    let (mut lo, mut hi) = (0.0, ctx.r_max);
    let (mut checks, mut abstains) = (0, 0);
    while hi - lo > ctx.eps_radius {
        let mid = 0.5 * (lo + hi);
        checks += 1;
        match check(mid) {
            Ok(true) => lo = mid,
            Ok(false) => hi = mid,
            Err(Error::Abstain(_)) => {
                abstains += 1;
                hi = mid;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((lo, checks, abstains))
}

/// Radius certified by the `P` constraint alone.
pub fn np_radius(pa: f64, ctx: &CertContext) -> Result<f64> {
    if !(0.0..=1.0).contains(&pa) {
        return invalid(format!("P_A must lie in [0, 1], got {pa}"));
    }
    if pa <= 0.5 {
        return Ok(0.0);
    }
    if ctx.p_spec.family == Family::StandardGaussian {
        return Ok((ctx.p_spec.sigma * std_normal_quantile(pa)?).min(ctx.r_max));
    }
    let (r, _, _) = bisect_radius(ctx, |r| {
        let ctx_r = ctx.at_radius(r);
        let fine = ctx_r.refined();
        let kernel = Kernel::new(&fine)?;
        let np = np_lambda(&kernel, pa)?;
        Ok(certified(np_r(&kernel, &np)?, &ctx_r))
    })?;
    Ok(r)
}

/// Largest certified radius on the search grid, together with the
/// single-distribution radius at the lower end of the `P` box.
pub fn certify(p_box: &ProbBound, q_box: &ProbBound, ctx: &CertContext) -> Result<CertOutcome> {
    check_box(p_box, q_box, ctx)?;
    let mut diagnostics = BTreeMap::new();
    if p_box.lo <= 0.5 {
        return Ok(CertOutcome { radius_np: 0.0, radius_dsrs: 0.0, abstained: false, diagnostics });
    }
    let radius_np = match np_radius(p_box.lo, ctx) {
        Ok(r) => r,
        Err(Error::Abstain(_)) => {
            diagnostics.insert("np_abstained".to_string(), 1.0);
            0.0
        }
        Err(e) => return Err(e),
    };
    let (found, checks, abstains) = bisect_radius(ctx, |r| check_radius(r, p_box, q_box, ctx))?;
    diagnostics.insert("checks".to_string(), checks as f64);
    diagnostics.insert("abstains".to_string(), abstains as f64);
    if abstains > 0 && abstains == checks {
        return Ok(CertOutcome { radius_np: 0.0, radius_dsrs: 0.0, abstained: true, diagnostics });
    }
    let radius_dsrs = if abstains > 0 { found.max(radius_np) } else { found };
    Ok(CertOutcome { radius_np, radius_dsrs, abstained: false, diagnostics })
}
