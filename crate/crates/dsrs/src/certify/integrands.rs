//! Per-radius integrands. A draw of norm `s` is shifted by `r` along a fixed
//! axis; the probability over its direction that the shifted norm `rho`
//! satisfies `rho^2 <= s^2 + D` is a symmetric beta CDF evaluated at
//! `1/2 + (D - r^2) / (4 r s)`. Everything here works with the offset
//! `z = (D - r^2) / (4 r s)` from the centre.

use crate::numerics::{beta_sym_centered, lambert_w0_of_exp, LogScalar};

/// Radial kernel `rho^(-2k) exp(-rho^2 / (2 sp2))` of the P density and the
/// shift it is tested against.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub r: f64,
    pub k: f64,
    pub sp2: f64,
    pub beta_shape: f64,
}

/// `Pr[z' <= z]` for the centred direction variable.
fn cap(beta_shape: f64, z: f64) -> f64 {
    beta_sym_centered(beta_shape, z)
}

/// `cap(hi) - cap(lo)`, taken from the upper tails when both are large.
fn cap_between(beta_shape: f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let v = if lo >= 0.0 {
        cap(beta_shape, -lo) - cap(beta_shape, -hi)
    } else {
        cap(beta_shape, hi) - cap(beta_shape, lo)
    };
    v.max(0.0)
}

// root of tau * expm1(eta) + eta = c; the left side is convex and increasing
fn solve_level(tau: f64, c: f64) -> f64 {
    let mut eta = c / (tau + 1.0);
    if eta.abs() > 1.0 {
        let w = lambert_w0_of_exp(tau.ln() + tau + c);
        eta = w.ln() - tau.ln();
    }
    if !eta.is_finite() {
        return eta;
    }
    for _ in 0..60 {
        if eta > 700.0 {
            return f64::INFINITY;
        }
        let e = eta.exp();
        let f = tau * eta.exp_m1() + eta - c;
        let step = f / (tau * e + 1.0);
        eta -= step;
        if step.abs() <= 4.0 * f64::EPSILON * eta.abs().max(1.0) {
            break;
        }
    }
    eta
}

impl Geometry {
    /// `D = rho^2 - s^2` on the level set `g(rho) = lambda g(s)`, given
    /// `ln lambda`; `-s^2` when no finite radius is small enough.
    pub(crate) fn level_offset(&self, s2: f64, ln_lambda: f64) -> f64 {
        if ln_lambda == f64::INFINITY {
            return -s2;
        }
        if ln_lambda == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        if self.k == 0.0 {
            return (-2.0 * self.sp2 * ln_lambda).max(-s2);
        }
        let tau = s2 / (2.0 * self.sp2 * self.k);
        let eta = solve_level(tau, -ln_lambda / self.k);
        if eta == f64::INFINITY {
            return f64::INFINITY;
        }
        s2 * eta.exp_m1()
    }

    fn z_of(&self, s: f64, offset: f64) -> f64 {
        (offset - self.r * self.r) / (4.0 * self.r * s)
    }

    // z for the truncation sphere: rho <= t
    fn z_ball(&self, s: f64, t: f64) -> f64 {
        ((t - s) * (t + s) - self.r * self.r) / (4.0 * self.r * s)
    }

    /// `Pr[p(x - delta) < lambda p(x)]` over directions at `|x|^2 = s2`.
    pub(crate) fn u3(&self, s2: f64, ln_lambda: f64) -> f64 {
        if ln_lambda == f64::NEG_INFINITY {
            return 0.0;
        }
        let s = s2.sqrt();
        let offset = self.level_offset(s2, ln_lambda);
        // the shifted point must land outside the level sphere
        cap(self.beta_shape, -self.z_of(s, offset))
    }

    /// `u3` with the multiplier `w1 + w2 exp(-gap * s2)`, zero where that
    /// multiplier is not positive.
    pub(crate) fn u3_mixed(&self, s2: f64, w1: LogScalar, w2: LogScalar, gap: f64) -> f64 {
        let lam = w1.add(w2.scale_ln(-gap * s2));
        if !lam.is_positive() {
            return 0.0;
        }
        self.u3(s2, lam.ln())
    }

    /// `Pr[p(x) < lambda p(x + delta)]` for a draw `x` of squared norm `s2`.
    pub(crate) fn r_np(&self, s2: f64, ln_lambda: f64) -> f64 {
        if ln_lambda == f64::NEG_INFINITY {
            return 0.0;
        }
        let s = s2.sqrt();
        cap(self.beta_shape, self.z_of(s, self.level_offset(s2, -ln_lambda)))
    }

    /// Direction probability that the shifted point lands in the centred
    /// ball of radius `t`.
    pub(crate) fn in_ball(&self, s2: f64, t: f64) -> f64 {
        cap(self.beta_shape, self.z_ball(s2.sqrt(), t))
    }

    /// Part of the acceptance set inside the truncation ball, multiplier `a`.
    pub(crate) fn u1(&self, s2: f64, ln_a: f64, t: f64) -> f64 {
        if ln_a == f64::NEG_INFINITY || ln_a.is_nan() {
            return 0.0;
        }
        let s = s2.sqrt();
        let offset = self.level_offset(s2, -ln_a);
        let z = if s2 + offset < t * t { self.z_of(s, offset) } else { self.z_ball(s, t) };
        cap(self.beta_shape, z)
    }

    /// Part of the acceptance set outside the truncation ball.
    pub(crate) fn u2(&self, s2: f64, ln_lambda1: f64, t: f64) -> f64 {
        if ln_lambda1 == f64::NEG_INFINITY {
            return 0.0;
        }
        let s = s2.sqrt();
        let z_out = self.z_of(s, self.level_offset(s2, -ln_lambda1));
        cap_between(self.beta_shape, self.z_ball(s, t), z_out)
    }
}

/// Acceptance set `rho^(-2k) (w1 e^(-a X) + w2 e^(-b X)) > s^(-2k) e^(-a s^2)`
/// in `X = rho^2` for the mixed P/Q comparison of the variance family.
///
/// `F(X) = ln(w1 e^(-aX) + w2 e^(-bX)) - k ln X` does not depend on `s`, so
/// its turning points are found once and each draw only bisects within the
/// monotone pieces.
#[derive(Debug, Clone)]
pub(crate) struct MixedLevel {
    w1: LogScalar,
    w2: LogScalar,
    a: f64,
    b: f64,
    k: f64,
    breaks: Vec<f64>,
}

impl MixedLevel {
    /// `x_range` bounds the `X` values that any draw can reach.
    pub(crate) fn new(w1: LogScalar, w2: LogScalar, a: f64, b: f64, k: f64, x_range: (f64, f64)) -> Self {
        let mut level = MixedLevel { w1, w2, a, b, k, breaks: Vec::new() };
        level.breaks = level.turning_points(x_range);
        level
    }

    // share of the second term in the weighted sum, at X
    fn second_share(&self, x: f64) -> f64 {
        if self.w2.is_zero() {
            return 0.0;
        }
        if self.w1.is_zero() {
            return 1.0;
        }
        let ratio_ln = self.w1.log_magnitude() - self.w2.log_magnitude() + (self.b - self.a) * x;
        let sign = f64::from(self.w1.sign() * self.w2.sign());
        1.0 / (1.0 + sign * ratio_ln.exp())
    }

    fn in_domain(&self, x: f64) -> bool {
        signed_sum(self.w1, self.w2, -self.a * x, -self.b * x).is_positive()
    }

    fn slope(&self, x: f64) -> f64 {
        -self.k / x - self.a - (self.b - self.a) * self.second_share(x)
    }

    fn turning_points(&self, (x_lo, x_hi): (f64, f64)) -> Vec<f64> {
        let mut out = Vec::new();
        let x_hi = x_hi.max(1e-300);
        let x_lo = x_lo.max(x_hi * 1e-12);
        const GRID: usize = 512;
        let (l0, l1) = (x_lo.ln(), x_hi.ln());
        let mut grid: Vec<f64> = (0..=GRID).map(|i| (l0 + (l1 - l0) * i as f64 / GRID as f64).exp()).collect();
        // sign change of the weighted sum; F runs off to -inf there
        let mut edge = None;
        if self.w1.sign() * self.w2.sign() < 0 && self.a != self.b {
            let x0 = (self.w2.log_magnitude() - self.w1.log_magnitude()) / (self.b - self.a);
            if x0 > x_lo && x0 < x_hi {
                out.push(x0);
                let pos = grid.partition_point(|&x| x < x0);
                let slope = if self.in_domain(grid[pos]) { f64::INFINITY } else { f64::NEG_INFINITY };
                grid.insert(pos, x0);
                edge = Some((x0, slope));
            }
        }
        let mut prev: Option<(f64, f64)> = None;
        for &x in &grid {
            let g = match edge {
                Some((x0, slope)) if x == x0 => slope,
                _ if self.in_domain(x) => self.slope(x),
                _ => {
                    prev = None;
                    continue;
                }
            };
            if let Some((px, pg)) = prev {
                if (pg > 0.0) != (g > 0.0) {
                    let (mut lo, mut hi) = (px, x);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if (self.slope(mid) > 0.0) == (pg > 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.push(0.5 * (lo + hi));
                }
            }
            prev = Some((x, g));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Log-ratio of the two sides at `rho^2 = s2 + offset`; positive means
    /// accepted.
    fn margin(&self, s2: f64, offset: f64) -> f64 {
        let sum = signed_sum(self.w1, self.w2, -self.a * offset, -self.b * offset - (self.b - self.a) * s2);
        if !sum.is_positive() {
            return f64::NEG_INFINITY;
        }
        if self.k == 0.0 {
            return sum.ln();
        }
        sum.ln() - self.k * (offset / s2).ln_1p()
    }

    /// Direction probability of acceptance for a draw with `|x|^2 = s2`.
    pub(crate) fn accept_prob(&self, geo: &Geometry, s2: f64) -> f64 {
        let s = s2.sqrt();
        let r = geo.r;
        let lo = r * r - 2.0 * r * s;
        let hi = r * r + 2.0 * r * s;
        let mut cuts = vec![lo];
        for &x in &self.breaks {
            let off = x - s2;
            if off > lo && off < hi {
                cuts.push(off);
            }
        }
        cuts.push(hi);
        let tol = 1e-13 * 4.0 * r * s;
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (d0, d1) = (w[0], w[1]);
            let (m0, m1) = (self.margin(s2, d0), self.margin(s2, d1));
            let (acc0, acc1) = (m0 > 0.0, m1 > 0.0);
            let (from, to) = match (acc0, acc1) {
                (true, true) => (d0, d1),
                (false, false) => continue,
                _ => {
                    // keep the endpoint on the accepted side
                    let (mut inside, mut outside) = if acc0 { (d0, d1) } else { (d1, d0) };
                    for _ in 0..200 {
                        if (outside - inside).abs() <= tol {
                            break;
                        }
                        let mid = 0.5 * (inside + outside);
                        if self.margin(s2, mid) > 0.0 {
                            inside = mid;
                        } else {
                            outside = mid;
                        }
                    }
                    if acc0 {
                        (d0, inside)
                    } else {
                        (inside, d1)
                    }
                }
            };
            total += cap_between(geo.beta_shape, geo.z_of(s, from), geo.z_of(s, to));
        }
        total.min(1.0)
    }
}

// w1 e^x1 + w2 e^x2 in log form
fn signed_sum(w1: LogScalar, w2: LogScalar, x1: f64, x2: f64) -> LogScalar {
    w1.scale_ln(x1).add(w2.scale_ln(x2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(k: f64) -> Geometry {
        Geometry { r: 0.7, k, sp2: 1.3, beta_shape: 4.5 }
    }

    #[test]
    fn level_offset_solves_the_level_equation() {
        let g = geo(3.0);
        for &s2 in &[0.5, 4.0, 30.0] {
            for &ln_l in &[-40.0, -2.0, 0.0, 0.3, 5.0, 60.0] {
                let off = g.level_offset(s2, ln_l);
                let rho2 = s2 + off;
                let lhs = -g.k * (rho2 / s2).ln() - off / (2.0 * g.sp2);
                // rebuilding rho^2 from the offset cancels when rho^2 << s^2
                let cond = g.k * 4.0 * f64::EPSILON * s2 / rho2;
                assert!((lhs - ln_l).abs() < 1e-9 * ln_l.abs().max(1.0) + cond, "{s2} {ln_l}: {lhs}");
            }
        }
    }

    #[test]
    fn zero_shape_offset_is_linear() {
        let g = geo(0.0);
        assert!((g.level_offset(2.0, 0.25) - (-2.0 * 1.3 * 0.25)).abs() < 1e-15);
        assert_eq!(g.level_offset(0.1, 10.0), -0.1);
    }

    #[test]
    fn limits() {
        let g = geo(2.0);
        assert_eq!(g.u3(3.0, f64::NEG_INFINITY), 0.0);
        assert_eq!(g.u3(3.0, f64::INFINITY), 1.0);
        assert_eq!(g.u1(3.0, f64::NEG_INFINITY, 2.0), 0.0);
        assert_eq!(g.u2(3.0, f64::NEG_INFINITY, 2.0), 0.0);
    }

    #[test]
    fn mixed_level_with_one_term_matches_np() {
        let g = geo(2.0);
        let lam = 1.7f64;
        let level = MixedLevel::new(LogScalar::from_f64(lam), LogScalar::ZERO, 1.0 / (2.0 * g.sp2), 0.4, g.k, (1e-3, 100.0));
        for &s2 in &[0.8, 3.0, 9.0] {
            let a = level.accept_prob(&g, s2);
            let b = g.r_np(s2, lam.ln());
            assert!((a - b).abs() < 1e-10, "{s2}: {a} vs {b}");
        }
    }

    // acceptance measure by summing cap increments over a fine offset grid
    fn brute_accept(level: &MixedLevel, g: &Geometry, s2: f64) -> f64 {
        let s = s2.sqrt();
        let (lo, hi) = (g.r * g.r - 2.0 * g.r * s, g.r * g.r + 2.0 * g.r * s);
        let n = 200_000;
        let mut total = 0.0;
        for i in 0..n {
            let d0 = lo + (hi - lo) * i as f64 / n as f64;
            let d1 = lo + (hi - lo) * (i + 1) as f64 / n as f64;
            if level.margin(s2, 0.5 * (d0 + d1)) > 0.0 {
                total += cap(g.beta_shape, g.z_of(s, d1)) - cap(g.beta_shape, g.z_of(s, d0));
            }
        }
        total
    }

    #[test]
    fn turning_point_next_to_the_domain_edge() {
        // negative second weight: F climbs from -inf just past the edge and
        // peaks well inside one grid cell
        let (sp2, bq2) = (784.0 / 24.0 * 0.25, 784.0 / 24.0 * 0.16);
        let g = Geometry { r: 1.75, k: 380.0, sp2, beta_shape: 391.5 };
        let w1 = LogScalar::from_ln(-3.1535);
        let w2 = LogScalar::new(-1, -6.4012 + 12.0 * (sp2 / bq2).ln());
        let level = MixedLevel::new(w1, w2, 0.5 / sp2, 0.5 / bq2, 380.0, (1.0, 2000.0));
        assert_eq!(level.breaks.len(), 2, "{:?}", level.breaks);
        for &s2 in &[50.0, 61.0, 70.0, 120.0] {
            let a = level.accept_prob(&g, s2);
            let b = brute_accept(&level, &g, s2);
            assert!((a - b).abs() < 1e-4, "{s2}: {a} vs {b}");
        }
    }
}
