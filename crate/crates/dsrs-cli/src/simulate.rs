//! `simulate`: radius curves for a classifier that is right on a centred
//! Gaussian ball.

use dsrs::synthetic::{concentration_point, projected_radius, relaxed_q_floor, sampled_q_floor};
use rayon::prelude::*;

use crate::format::{field, opt, sig10};
use crate::{CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// `Q_A` lower bound `alpha^(1/N)` from `N` all-success draws.
    Concentration,
    /// The ball holds with probability `exp(-d^a)`.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub mode: Mode,
    pub dims: Vec<u64>,
    /// `None` stands for exact `Q_A = 1`.
    pub counts: Vec<Option<u64>>,
    pub exponents: Vec<f64>,
    pub sigma: f64,
    pub p_con: f64,
    pub pa: f64,
}

pub const HEADER: &str = "mode,d,N,a,k,T,q_lo,radius_np,radius_dsrs,radius_proj,note";

/// Rows in the order of `dims` then `counts` (or `exponents`).
pub fn simulate(args: &SimulateArgs, cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let cfg = cfg.validated()?;
    let cases: Vec<(u64, Option<u64>, Option<f64>)> = match args.mode {
        Mode::Concentration => args.dims.iter().flat_map(|&d| args.counts.iter().map(move |&n| (d, n, None))).collect(),
        Mode::Relaxed => args.dims.iter().flat_map(|&d| args.exponents.iter().map(move |&a| (d, None, Some(a)))).collect(),
    };
    if cases.is_empty() {
        return Err(CliError::Usage("nothing to simulate".into()));
    }
    cfg.in_pool(|| {
        cases
            .par_iter()
            .map(|&(d, n, a)| {
                let q_lo = match a {
                    Some(a) => relaxed_q_floor(d, a),
                    None => sampled_q_floor(cfg.alpha, n),
                };
                let mode = match args.mode {
                    Mode::Concentration => "concentration",
                    Mode::Relaxed => "relaxed",
                };
                let n_col = match (args.mode, n) {
                    (Mode::Concentration, None) => "inf".to_string(),
                    (_, n) => n.map(|n| n.to_string()).unwrap_or_default(),
                };
                let head = format!("{mode},{d},{n_col},{}", opt(a));
                match concentration_point(d, args.sigma, args.p_con, args.pa, q_lo, cfg.delta_int, cfg.eps_radius) {
                    Ok(pt) => {
                        let proj = a.map(|a| projected_radius(pt.radius_np, d, a));
                        let note = if pt.abstained { "abstained" } else { "" };
                        format!(
                            "{head},{},{},{},{},{},{},{note}",
                            pt.k,
                            sig10(pt.t),
                            sig10(q_lo),
                            sig10(pt.radius_np),
                            sig10(pt.radius_dsrs),
                            opt(proj)
                        )
                    }
                    Err(e) => format!("{head},,,{},,,,{}", sig10(q_lo), field(&e.to_string())),
                }
            })
            .collect()
    })
}
