//! Gamma-weighted expectations of the integrands: the P, Q and R functionals
//! of a dual point.

use super::integrands::{Geometry, MixedLevel};
use super::{CertContext, DualPoint, QFamily};
use crate::error::{invalid, Result};
use crate::numerics::LogScalar;

// log of a multiplier; nonpositive multipliers accept nothing
fn ln_pos(x: LogScalar) -> f64 {
    if x.is_positive() {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn geometry(ctx: &CertContext) -> Geometry {
    let p = &ctx.p_spec;
    let sp = p.sigma_prime();
    Geometry { r: ctx.r, k: p.k as f64, sp2: sp * sp, beta_shape: (p.d as f64 - 1.0) / 2.0 }
}

/// Scale data of the variance family.
#[derive(Debug, Clone, Copy)]
struct VarScale {
    // 1/(2 sigma'^2) and 1/(2 beta'^2)
    a: f64,
    b: f64,
    bq2: f64,
    ln_rho_c: f64,
}

/// Precomputed evaluator for one context.
pub(crate) struct Kernel<'a> {
    ctx: &'a CertContext,
    geo: Geometry,
    var: Option<VarScale>,
}

impl<'a> Kernel<'a> {
    pub(crate) fn new(ctx: &'a CertContext) -> Result<Self> {
        if !(ctx.r > 0.0) {
            return invalid(format!("functionals need a positive shift length, got {}", ctx.r));
        }
        let geo = geometry(ctx);
        let var = match ctx.q_family() {
            QFamily::Truncated => None,
            QFamily::Variance => {
                let bq = ctx.q_spec.sigma_prime();
                let sp = ctx.p_spec.sigma_prime();
                let dof = ctx.p_spec.d as f64 - 2.0 * ctx.p_spec.k as f64;
                Some(VarScale {
                    a: 0.5 / (sp * sp),
                    b: 0.5 / (bq * bq),
                    bq2: bq * bq,
                    ln_rho_c: dof * (sp.ln() - bq.ln()),
                })
            }
        };
        Ok(Kernel { ctx, geo, var })
    }

    pub(crate) fn ctx(&self) -> &CertContext {
        self.ctx
    }

    fn s2(&self, t: f64) -> f64 {
        2.0 * self.geo.sp2 * t
    }

    fn tol(&self) -> f64 {
        self.ctx.delta_int
    }

    fn var(&self) -> Result<VarScale> {
        match self.var {
            Some(v) => Ok(v),
            None => invalid("operation needs a rescaled Q"),
        }
    }

    fn t_star(&self) -> Result<f64> {
        match self.ctx.q_family() {
            QFamily::Truncated => Ok(self.ctx.t_star()),
            QFamily::Variance => invalid("operation needs a truncated Q"),
        }
    }

    /// `P` with the single multiplier `lambda`.
    pub(crate) fn p_np(&self, ln_lambda: f64) -> Result<f64> {
        let v = self.ctx.weight().expect_all(|t| self.geo.u3(self.s2(t), ln_lambda), self.tol())?;
        Ok(v.min(1.0))
    }

    /// `R` with the single multiplier `lambda`.
    pub(crate) fn r_np(&self, ln_lambda: f64) -> Result<f64> {
        let v = self.ctx.weight().expect_all(|t| self.geo.r_np(self.s2(t), ln_lambda), self.tol())?;
        Ok(v.min(1.0))
    }

    /// Truncated `Q`, which only sees `a = lambda1 + nu lambda2`.
    pub(crate) fn q_sum(&self, ln_a: f64) -> Result<f64> {
        let t_star = self.t_star()?;
        let nu = self.ctx.nu;
        let v = self.ctx.weight().expect(|t| self.geo.u3(self.s2(t), ln_a), 0.0, t_star, self.tol() / nu)?;
        Ok((nu * v).min(1.0))
    }

    /// `P - Q / nu`: the part of `P` outside the truncation ball.
    pub(crate) fn h(&self, ln_lambda1: f64) -> Result<f64> {
        let t_star = self.t_star()?;
        let v = self.ctx.weight().expect(|t| self.geo.u3(self.s2(t), ln_lambda1), t_star, f64::INFINITY, self.tol())?;
        Ok(v.min(1.0 - 1.0 / self.ctx.nu))
    }

    /// Truncated `R` from the outer multiplier and the inner sum.
    pub(crate) fn r_trunc(&self, ln_lambda1: f64, ln_a: f64) -> Result<f64> {
        self.t_star()?;
        let t = self.ctx.q_spec.radius_cap();
        let r = self.ctx.r;
        let mut kinks = vec![self.ctx.p_spec.radial_time(t + r)];
        if t > r {
            kinks.push(self.ctx.p_spec.radial_time(t - r));
        }
        let v = self.ctx.weight().expect_split(
            |tm| {
                let s2 = self.s2(tm);
                self.geo.u1(s2, ln_a, t) + self.geo.u2(s2, ln_lambda1, t)
            },
            0.0,
            f64::INFINITY,
            &kinks,
            self.tol(),
        )?;
        Ok(v.min(1.0))
    }

    /// Variance-family `P` at multipliers `(w1, lambda2)`.
    pub(crate) fn p_var(&self, w1: LogScalar, lambda2: LogScalar) -> Result<f64> {
        let vs = self.var()?;
        let w2 = lambda2.scale_ln(vs.ln_rho_c);
        let gap = vs.b - vs.a;
        let v = self.ctx.weight().expect_all(|t| self.geo.u3_mixed(self.s2(t), w1, w2, gap), self.tol())?;
        Ok(v.min(1.0))
    }

    /// Variance-family `Q`: the same acceptance set under draws from `Q`.
    pub(crate) fn q_var(&self, w1: LogScalar, lambda2: LogScalar) -> Result<f64> {
        let vs = self.var()?;
        let w2 = lambda2.scale_ln(vs.ln_rho_c);
        let gap = vs.b - vs.a;
        let v = self
            .ctx
            .weight()
            .expect_all(|x| self.geo.u3_mixed(2.0 * vs.bq2 * x, w1, w2, gap), self.tol())?;
        Ok(v.min(1.0))
    }

    /// Variance-family `R`.
    pub(crate) fn r_var(&self, w1: LogScalar, lambda2: LogScalar) -> Result<f64> {
        let vs = self.var()?;
        let w2 = lambda2.scale_ln(vs.ln_rho_c);
        let (t_lo, t_hi) = self.ctx.weight().range();
        let r = self.ctx.r;
        let s_lo = self.s2(t_lo).sqrt();
        let s_hi = self.s2(t_hi).sqrt();
        let x_range = ((s_lo - r).max(0.0).powi(2), (s_hi + r).powi(2));
        let level = MixedLevel::new(w1, w2, vs.a, vs.b, self.geo.k, x_range);
        let v = self.ctx.weight().expect_all(|t| level.accept_prob(&self.geo, self.s2(t)), self.tol())?;
        Ok(v.min(1.0))
    }
}

/// Direction probability that the shift lowers the density below
/// `lambda` times its value, at gamma time `t`.
pub fn u3(t: f64, lambda: LogScalar, ctx: &CertContext) -> f64 {
    let geo = geometry(ctx);
    geo.u3(2.0 * geo.sp2 * t, ln_pos(lambda))
}

/// Inner-ball acceptance at gamma time `t` for the sum multiplier `a`.
pub fn u1(t: f64, a: LogScalar, ctx: &CertContext) -> f64 {
    let geo = geometry(ctx);
    geo.u1(2.0 * geo.sp2 * t, ln_pos(a), ctx.q_spec.radius_cap())
}

/// Outer-shell acceptance at gamma time `t` for the multiplier `lambda1`.
pub fn u2(t: f64, lambda1: LogScalar, ctx: &CertContext) -> f64 {
    let geo = geometry(ctx);
    geo.u2(2.0 * geo.sp2 * t, ln_pos(lambda1), ctx.q_spec.radius_cap())
}

/// `Pr_P[p(x - delta) < lambda1 p(x) + lambda2 q(x)]`.
pub fn compute_p(dual: &DualPoint, ctx: &CertContext) -> Result<f64> {
    match ctx.q_family() {
        QFamily::Truncated => {
            // two pieces, each held to half the tolerance
            let mut half = ctx.clone();
            half.delta_int *= 0.5;
            let k = Kernel::new(&half)?;
            let inner = k.q_sum(ln_pos(dual.sum(ctx.nu)))? / ctx.nu;
            Ok((inner + k.h(ln_pos(dual.lambda1))?).min(1.0))
        }
        QFamily::Variance => Kernel::new(ctx)?.p_var(dual.lambda1, dual.lambda2),
    }
}

/// `Pr_Q[p(x - delta) < lambda1 p(x) + lambda2 q(x)]`.
pub fn compute_q(dual: &DualPoint, ctx: &CertContext) -> Result<f64> {
    let k = Kernel::new(ctx)?;
    match ctx.q_family() {
        QFamily::Truncated => k.q_sum(ln_pos(dual.sum(ctx.nu))),
        QFamily::Variance => k.q_var(dual.lambda1, dual.lambda2),
    }
}

/// `Pr_P[p(x) < lambda1 p(x + delta) + lambda2 q(x + delta)]`.
pub fn compute_r(dual: &DualPoint, ctx: &CertContext) -> Result<f64> {
    let k = Kernel::new(ctx)?;
    match ctx.q_family() {
        QFamily::Truncated => k.r_trunc(ln_pos(dual.lambda1), ln_pos(dual.sum(ctx.nu))),
        QFamily::Variance => k.r_var(dual.lambda1, dual.lambda2),
    }
}

/// Mass of the acceptance set outside the truncation ball.
pub fn h(lambda1: LogScalar, ctx: &CertContext) -> Result<f64> {
    Kernel::new(ctx)?.h(ln_pos(lambda1))
}
