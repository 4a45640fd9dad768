//! Definitional Monte-Carlo oracles. Draws and densities are built here from
//! scratch so that they share nothing with the library's integrals.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use statrs::function::gamma::{gamma_lr, ln_gamma};

/// Radial law `|x|^(-2k) exp(-|x|^2 / (2 scale^2))` on R^d, maybe cut at `cap`.
#[derive(Debug, Clone, Copy)]
pub struct Law {
    pub d: u64,
    pub k: u64,
    pub scale: f64,
    pub cap: Option<f64>,
}

impl Law {
    pub fn new(d: u64, sigma: f64, k: u64) -> Self {
        let scale = sigma * (d as f64 / (d as f64 - 2.0 * k as f64)).sqrt();
        Law { d, k, scale, cap: None }
    }

    pub fn capped(self, cap: f64) -> Self {
        Law { cap: Some(cap), ..self }
    }

    pub fn shape(&self) -> f64 {
        self.d as f64 / 2.0 - self.k as f64
    }

    /// Log density at norm `rho`, up to a constant shared by every law of the
    /// same `d` and `k`.
    pub fn ln_density(&self, rho: f64) -> f64 {
        if let Some(c) = self.cap {
            if rho > c {
                return f64::NEG_INFINITY;
            }
        }
        let m = self.shape();
        let s2 = self.scale * self.scale;
        let mut v = -2.0 * self.k as f64 * rho.ln() - rho * rho / (2.0 * s2) - m * (2.0 * s2).ln() - ln_gamma(m);
        if let Some(c) = self.cap {
            v -= gamma_lr(m, c * c / (2.0 * s2)).ln();
        }
        v
    }

    /// Norm of one draw; the cut is applied by rejection.
    pub fn draw_norm(&self, rng: &mut ChaCha8Rng) -> f64 {
        let g = Gamma::new(self.shape(), 1.0).unwrap();
        loop {
            let rho = self.scale * (2.0 * g.sample(rng)).sqrt();
            match self.cap {
                Some(c) if rho > c => continue,
                _ => return rho,
            }
        }
    }
}

/// First coordinate of a uniform direction in R^d.
pub fn draw_cos(rng: &mut ChaCha8Rng, d: u64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let rest = ChiSquared::new(d as f64 - 1.0).unwrap().sample(rng);
    z / (z * z + rest).sqrt()
}

/// Whether `ln a < ln(l1 e^x + l2 e^y)` for signed `l1`, `l2`.
pub fn below_mix(ln_a: f64, l1: f64, x: f64, l2: f64, y: f64) -> bool {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return false;
    }
    let s = l1 * (x - m).exp() + l2 * (y - m).exp();
    s > 0.0 && ln_a < m + s.ln()
}

/// Monte-Carlo estimates of `P`, `Q` and `R` at multipliers `(l1, l2)` for
/// the shift `r e_1`.
#[derive(Debug, Clone, Copy)]
pub struct Estimates {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub n: usize,
}

impl Estimates {
    /// Four binomial standard deviations of an estimate `v`, with a floor
    /// for probabilities at the edge.
    pub fn band(&self, v: f64) -> f64 {
        let n = self.n as f64;
        4.0 * (v * (1.0 - v) / n).sqrt().max(1.0 / n)
    }
}

pub fn estimate(p: &Law, q: &Law, r: f64, l1: f64, l2: f64, n: usize, rng: &mut ChaCha8Rng) -> Estimates {
    let d = p.d;
    // the acceptance set {x : p(x - delta) < l1 p(x) + l2 q(x)}
    let accept = |x_norm: f64, shifted_norm: f64| {
        below_mix(p.ln_density(shifted_norm), l1, p.ln_density(x_norm), l2, q.ln_density(x_norm))
    };
    let (mut cp, mut cq, mut cr) = (0usize, 0usize, 0usize);
    for _ in 0..n {
        // x from P, tested at x and with x - delta
        let rho = p.draw_norm(rng);
        let c = draw_cos(rng, d);
        let minus = (rho * rho - 2.0 * r * rho * c + r * r).max(0.0).sqrt();
        let plus = (rho * rho + 2.0 * r * rho * c + r * r).max(0.0).sqrt();
        if accept(rho, minus) {
            cp += 1;
        }
        // x + delta has law P shifted by delta
        if accept(plus, rho) {
            cr += 1;
        }
        let rho_q = q.draw_norm(rng);
        let cq_ = draw_cos(rng, d);
        let minus_q = (rho_q * rho_q - 2.0 * r * rho_q * cq_ + r * r).max(0.0).sqrt();
        if accept(rho_q, minus_q) {
            cq += 1;
        }
    }
    let nf = n as f64;
    Estimates { p: cp as f64 / nf, q: cq as f64 / nf, r: cr as f64 / nf, n }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
