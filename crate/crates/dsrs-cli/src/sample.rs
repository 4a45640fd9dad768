//! `sample`: input records drawn from the ball classifier.

use dsrs::confidence::{binom_interval, fallback_decision, merge_records, split_budget, Sidedness};
use dsrs::distributions::SmoothingSpec;
use dsrs::heuristics::{default_k, t_from_pa, HeuristicConfig};
use dsrs::synthetic::{mc_sample_classifier, BallClassifier};
use rayon::prelude::*;

use crate::record::{InputRecord, QFamilyArg};
use crate::{CliError, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleArgs {
    pub d: u64,
    pub sigma: f64,
    pub k: Option<u64>,
    pub q_family: QFamilyArg,
    pub t: Option<f64>,
    pub beta: Option<f64>,
    /// Mass of `P` on the classifier's ball.
    pub ball_mass: f64,
    /// Total draws per record, split between `P` and `Q`.
    pub n: u64,
    pub records: usize,
    pub id_prefix: String,
}

// distinct streams for the P and Q draws of one record
fn stream(seed: u64, index: usize, which: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add((index as u64) << 1 | which)
}

fn one(args: &SampleArgs, p_spec: &SmoothingSpec, clf: &BallClassifier, index: usize, cfg: &RunConfig) -> Result<InputRecord, CliError> {
    let half = args.n / 2;
    let p_count = mc_sample_classifier(clf, p_spec, half, stream(cfg.seed, index, 0))?;
    let mut rec = InputRecord {
        id: format!("{}{index}", args.id_prefix),
        d: args.d,
        sigma: args.sigma,
        k: Some(p_spec.k),
        q_family: args.q_family,
        t: None,
        beta: None,
        p_count,
        q_count: None,
    };
    if cfg.fallback && fallback_decision(p_count) {
        let rest = mc_sample_classifier(clf, p_spec, args.n - half, stream(cfg.seed, index, 1))?;
        rec.p_count = merge_records(p_count, rest);
        return Ok(rec);
    }
    let q_spec = match args.q_family {
        QFamilyArg::Trunc => {
            let t = match args.t {
                Some(t) => t,
                None => {
                    let (alpha_p, _) = split_budget(cfg.alpha)?;
                    let lo = binom_interval(p_count, alpha_p, Sidedness::TwoSided)?.lo;
                    t_from_pa(lo.clamp(0.5, 1.0 - 1e-16), p_spec, &HeuristicConfig::default())?
                }
            };
            rec.t = Some(t);
            p_spec.truncated(t)?
        }
        QFamilyArg::Var => {
            let beta = args.beta.ok_or_else(|| CliError::Usage("a rescaled Q needs --beta".into()))?;
            rec.beta = Some(beta);
            SmoothingSpec::generalized(args.d, beta, p_spec.k)?
        }
    };
    rec.q_count = Some(mc_sample_classifier(clf, &q_spec, args.n - half, stream(cfg.seed, index, 1))?);
    Ok(rec)
}

/// Records in index order; each depends only on its index and the seed.
pub fn sample(args: &SampleArgs, cfg: &RunConfig) -> Result<Vec<InputRecord>, CliError> {
    let cfg = cfg.validated()?;
    if args.n < 2 {
        return Err(CliError::Usage(format!("need at least two draws per record, got {}", args.n)));
    }
    let k = match args.k {
        Some(k) => k,
        None => default_k(args.d)?,
    };
    let p_spec = SmoothingSpec::generalized(args.d, args.sigma, k)?;
    let clf = BallClassifier::with_mass(&p_spec, args.ball_mass)?;
    cfg.in_pool(|| (0..args.records).into_par_iter().map(|i| one(args, &p_spec, &clf, i, &cfg)).collect())?
}
