//! `certify`: sampling records in, radii out.

use dsrs::certify::{certify, CertContext};
use dsrs::confidence::{binom_interval, boxes_from_counts, ProbBound, Sidedness};
use dsrs::distributions::SmoothingSpec;
use dsrs::heuristics::{default_k, t_from_pa, HeuristicConfig};
use rayon::prelude::*;

use crate::format::{field, opt, sig10};
use crate::record::{InputRecord, QFamilyArg};
use crate::{CliError, RunConfig};

pub const HEADER: &str = "id,p_lo,p_hi,q_lo,q_hi,T,radius_np,radius_dsrs,radius_linf_dsrs,abstained";

#[derive(Debug, Clone, PartialEq)]
pub struct CertRow {
    pub id: String,
    pub p_box: ProbBound,
    pub q_box: ProbBound,
    pub t: Option<f64>,
    pub radius_np: f64,
    pub radius_dsrs: f64,
    pub radius_linf_dsrs: f64,
    pub abstained: bool,
}

impl CertRow {
    pub fn to_csv(&self) -> String {
        [
            field(&self.id),
            sig10(self.p_box.lo),
            sig10(self.p_box.hi),
            sig10(self.q_box.lo),
            sig10(self.q_box.hi),
            opt(self.t),
            sig10(self.radius_np),
            sig10(self.radius_dsrs),
            sig10(self.radius_linf_dsrs),
            self.abstained.to_string(),
        ]
        .join(",")
    }
}

/// Outcome for one input line.
pub type LineResult = Result<CertRow, (String, CliError)>;

/// CSV line for a record that could not be certified: the id and `error`.
pub fn error_csv(id: &str) -> String {
    format!("{},,,,,,,,,error", field(id))
}

fn spec_for(rec: &InputRecord) -> Result<SmoothingSpec, CliError> {
    let k = match rec.k {
        Some(k) => k,
        None => default_k(rec.d)?,
    };
    Ok(SmoothingSpec::generalized(rec.d, rec.sigma, k)?)
}

/// Certify one record.
pub fn certify_record(rec: &InputRecord, cfg: &RunConfig) -> Result<CertRow, CliError> {
    let p_spec = spec_for(rec)?;
    let (p_box, q_box) = match rec.q_count {
        Some(q) => boxes_from_counts(rec.p_count, q, cfg.alpha)?,
        // every draw came from P: the whole budget goes to its lower end
        None => (binom_interval(rec.p_count, cfg.alpha, Sidedness::LowerOnly)?, ProbBound::vacuous()),
    };
    let (q_spec, t) = match rec.q_family {
        QFamilyArg::Trunc => {
            let t = match rec.t {
                Some(t) => t,
                None => t_from_pa(p_box.lo.clamp(0.5, 1.0 - 1e-16), &p_spec, &HeuristicConfig::default())?,
            };
            (p_spec.truncated(t)?, Some(t))
        }
        QFamilyArg::Var => {
            // without Q draws the rescaled law is never evaluated
            let beta = rec.beta.unwrap_or(rec.sigma);
            (SmoothingSpec::generalized(p_spec.d, beta, p_spec.k)?, None)
        }
    };
    let mut ctx = CertContext::new(p_spec, q_spec, 0.0)?.with_tolerances(
        cfg.delta_int,
        dsrs::certify::DEFAULT_EPS_DUAL,
        cfg.eps_radius,
    )?;
    if let Some(r) = cfg.r_max {
        ctx = ctx.with_r_max(r)?;
    }
    let out = certify(&p_box, &q_box, &ctx)?;
    Ok(CertRow {
        id: rec.id.clone(),
        p_box,
        q_box,
        t,
        radius_np: out.radius_np,
        radius_dsrs: out.radius_dsrs,
        radius_linf_dsrs: out.radius_linf(rec.d),
        abstained: out.abstained,
    })
}

/// Certify every nonblank line, in input order.
pub fn certify_lines(lines: &[String], cfg: &RunConfig) -> Result<Vec<LineResult>, CliError> {
    let cfg = cfg.validated()?;
    let work: Vec<(usize, &String)> = lines.iter().enumerate().filter(|(_, l)| !l.trim().is_empty()).collect();
    cfg.in_pool(|| {
        work.par_iter()
            .map(|(i, line)| {
                let rec = InputRecord::parse(line).map_err(|e| (format!("line {}", i + 1), e))?;
                certify_record(&rec, &cfg).map_err(|e| (rec.id.clone(), e))
            })
            .collect()
    })
}
