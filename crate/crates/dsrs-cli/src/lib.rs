//! Command implementations behind the `dsrs` binary.

pub mod certify;
pub mod format;
pub mod oracle;
pub mod record;
pub mod sample;
pub mod simulate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Dsrs(#[from] dsrs::Error),
    #[error("malformed record: {0}")]
    Record(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub delta_int: f64,
    pub eps_radius: f64,
    /// `None` means `sigma * sqrt(d)`.
    pub r_max: Option<f64>,
    pub workers: usize,
    pub seed: u64,
    pub fallback: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.001,
            delta_int: dsrs::certify::DEFAULT_DELTA_INT,
            eps_radius: dsrs::certify::DEFAULT_EPS_RADIUS,
            r_max: None,
            workers: 1,
            seed: 0,
            fallback: false,
        }
    }
}

impl RunConfig {
    pub fn validated(self) -> Result<Self, CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be positive, got {v}")))
            }
        };
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        positive("delta-int", self.delta_int)?;
        positive("eps-radius", self.eps_radius)?;
        if let Some(r) = self.r_max {
            positive("rmax", r)?;
        }
        if self.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        Ok(self)
    }

    /// Run `f` on a pool of `workers` threads.
    pub fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(pool.install(f))
    }
}
