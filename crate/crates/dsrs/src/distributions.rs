//! Isotropic smoothing distributions: standard and generalized Gaussians,
//! optionally conditioned on a centred ball.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::numerics::{gamma_quantile, gamma_tails, LogScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    StandardGaussian,
    GeneralizedGaussian,
    TruncatedStandardGaussian,
    TruncatedGeneralizedGaussian,
}

impl Family {
    pub fn is_truncated(self) -> bool {
        matches!(self, Family::TruncatedStandardGaussian | Family::TruncatedGeneralizedGaussian)
    }
}

/// Density proportional to `|x|^(-2k) exp(-|x|^2 / (2 sigma'^2))` on R^d,
/// where `sigma' = sqrt(d / (d - 2k)) sigma`, possibly restricted to the
/// ball of radius `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSpec {
    pub family: Family,
    pub d: u64,
    pub sigma: f64,
    pub k: u64,
    pub t: Option<f64>,
}

/// One Monte-Carlo draw: its norm and, if requested, its direction.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSample {
    pub radius: f64,
    pub direction: Option<Vec<f64>>,
}

impl SmoothingSpec {
    pub fn standard(d: u64, sigma: f64) -> Result<Self> {
        Self { family: Family::StandardGaussian, d, sigma, k: 0, t: None }.validated()
    }

    pub fn generalized(d: u64, sigma: f64, k: u64) -> Result<Self> {
        Self { family: Family::GeneralizedGaussian, d, sigma, k, t: None }.validated()
    }

    /// The same law conditioned on `|x| <= t`.
    pub fn truncated(&self, t: f64) -> Result<Self> {
        let family = match self.family {
            Family::StandardGaussian | Family::TruncatedStandardGaussian => Family::TruncatedStandardGaussian,
            _ => Family::TruncatedGeneralizedGaussian,
        };
        Self { family, t: Some(t), ..*self }.validated()
    }

    /// The untruncated parent law.
    pub fn parent(&self) -> Self {
        let family = match self.family {
            Family::TruncatedStandardGaussian => Family::StandardGaussian,
            Family::TruncatedGeneralizedGaussian => Family::GeneralizedGaussian,
            f => f,
        };
        Self { family, t: None, ..*self }
    }

    pub fn validated(self) -> Result<Self> {
        if self.d == 0 {
            return invalid("dimension must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return invalid(format!("sigma must be positive, got {}", self.sigma));
        }
        if 2 * self.k >= self.d {
            return invalid(format!("need 2k < d, got k = {}, d = {}", self.k, self.d));
        }
        if matches!(self.family, Family::StandardGaussian | Family::TruncatedStandardGaussian) && self.k != 0 {
            return invalid("standard Gaussian families have k = 0");
        }
        match (self.family.is_truncated(), self.t) {
            (true, Some(t)) if t > 0.0 && t.is_finite() => Ok(self),
            (true, _) => invalid("truncated family needs a finite positive radius"),
            (false, None) => Ok(self),
            (false, Some(_)) => invalid("untruncated family takes no radius"),
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.family.is_truncated()
    }

    /// Truncation radius, infinite for untruncated laws.
    pub fn radius_cap(&self) -> f64 {
        self.t.unwrap_or(f64::INFINITY)
    }

    /// Shape `d/2 - k` of the gamma law of `|x|^2 / (2 sigma'^2)`.
    pub fn shape(&self) -> f64 {
        self.d as f64 / 2.0 - self.k as f64
    }

    pub fn sigma_prime(&self) -> f64 {
        if self.k == 0 {
            return self.sigma;
        }
        let d = self.d as f64;
        (d / (d - 2.0 * self.k as f64)).sqrt() * self.sigma
    }

    /// `|x|^2 / (2 sigma'^2)` for a point of norm `radius`.
    pub fn radial_time(&self, radius: f64) -> f64 {
        let sp = self.sigma_prime();
        radius * radius / (2.0 * sp * sp)
    }

    /// Inverse of [`radial_time`](Self::radial_time).
    pub fn radius_at(&self, time: f64) -> f64 {
        self.sigma_prime() * (2.0 * time).sqrt()
    }

    fn untruncated_mass(&self, radius: f64) -> f64 {
        gamma_tails(self.shape(), self.radial_time(radius)).0
    }

    /// Probability that a draw has norm at most `radius`.
    pub fn ball_mass(&self, radius: f64) -> f64 {
        if radius <= 0.0 {
            return 0.0;
        }
        match self.t {
            Some(t) if radius >= t => 1.0,
            Some(t) => (self.untruncated_mass(radius) / self.untruncated_mass(t)).min(1.0),
            None => self.untruncated_mass(radius),
        }
    }

    /// Reciprocal of the parent mass of the truncation ball; 1 without
    /// truncation.
    pub fn nu(&self) -> f64 {
        match self.t {
            Some(t) => 1.0 / self.untruncated_mass(t),
            None => 1.0,
        }
    }

    /// Log of the normalised density at any point of norm `radius`.
    pub fn log_radial_density(&self, radius: f64) -> LogScalar {
        if !(radius > 0.0) || radius > self.radius_cap() {
            return LogScalar::ZERO;
        }
        let d = self.d as f64;
        let m = self.shape();
        let sp = self.sigma_prime();
        // area of the unit sphere times the radial normaliser
        let ln_area = std::f64::consts::LN_2 + 0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d);
        let ln_norm = -ln_area + std::f64::consts::LN_2 - m * (2.0 * sp * sp).ln() - ln_gamma(m);
        let ln_kernel = -2.0 * self.k as f64 * radius.ln() - self.radial_time(radius);
        LogScalar::from_ln(ln_norm + ln_kernel + self.nu().ln())
    }

    /// Draw one sample. Truncated laws invert the conditional gamma CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, with_direction: bool) -> RadialSample {
        let m = self.shape();
        let time = match self.t {
            None => Gamma::new(m, 1.0).expect("valid gamma shape").sample(rng),
            Some(t) => {
                let cap = gamma_tails(m, self.radial_time(t)).0;
                let u: f64 = rng.random::<f64>();
                gamma_quantile(m, (u * cap).max(f64::MIN_POSITIVE), false).min(self.radial_time(t))
            }
        };
        let radius = self.radius_at(time);
        let direction = with_direction.then(|| unit_vector(rng, self.d as usize));
        RadialSample { radius, direction }
    }
}

/// Uniform point on the unit sphere in R^d.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SmoothingSpec::generalized(10, 1.0, 5).is_err());
        assert!(SmoothingSpec::standard(10, 0.0).is_err());
        let s = SmoothingSpec::generalized(10, 1.0, 2).unwrap();
        assert!(s.truncated(-1.0).is_err());
        assert_eq!(s.truncated(2.0).unwrap().parent(), s);
    }

    #[test]
    fn two_dimensional_closed_form() {
        let s = SmoothingSpec::standard(2, 1.0).unwrap();
        assert!((s.ball_mass(1.0) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let q = s.truncated(1.0).unwrap();
        assert!((q.nu() - 1.0 / (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert_eq!(q.ball_mass(1.0), 1.0);
    }
}
