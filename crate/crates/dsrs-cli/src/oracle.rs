//! `oracle-check`: certify the ball-classifier grid with exact
//! probabilities and compare against the analytic true radius.

use dsrs::certify::QFamily;
use dsrs::synthetic::{oracle_row, GridConfig, OracleRow};
use rayon::prelude::*;

use crate::format::{field, sig10};
use crate::{CliError, RunConfig};

pub const HEADER: &str =
    "family,d,sigma,k,target_pa,pa,qa,true_radius,radius_np,radius_dsrs,sound_margin,dominance_margin,abstained,status";

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub lines: Vec<String>,
    pub violations: usize,
    pub abstains: usize,
    pub errors: usize,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }
}

fn family_name(f: QFamily) -> &'static str {
    match f {
        QFamily::Truncated => "trunc",
        QFamily::Variance => "var",
    }
}

/// Run the grid for each family. With `inject_fault` every certified
/// radius is replaced by one `2 eps_radius` past the larger of itself and
/// the true radius, which the comparison must flag.
pub fn oracle_check(grid: &[GridConfig], families: &[QFamily], inject_fault: bool, cfg: &RunConfig) -> Result<OracleReport, CliError> {
    let cfg = cfg.validated()?;
    let cases: Vec<(QFamily, GridConfig)> = families.iter().flat_map(|&f| grid.iter().map(move |c| (f, *c))).collect();
    let rows: Vec<(QFamily, GridConfig, Result<OracleRow, dsrs::Error>)> = cfg.in_pool(|| {
        cases.par_iter().map(|&(f, c)| (f, c, oracle_row(&c, f, cfg.delta_int, cfg.eps_radius))).collect()
    })?;
    let mut report = OracleReport { lines: Vec::new(), violations: 0, abstains: 0, errors: 0 };
    for (family, c, row) in rows {
        let head = format!("{},{},{},{},{}", family_name(family), c.d, sig10(c.sigma), c.k, sig10(c.target_pa));
        match row {
            Ok(mut row) => {
                if inject_fault {
                    row.radius_dsrs = row.radius_dsrs.max(row.true_radius) + 2.0 * cfg.eps_radius;
                }
                let sound = row.true_radius + cfg.eps_radius - row.radius_dsrs;
                let dominance = row.radius_dsrs - row.radius_np + cfg.eps_radius;
                let ok = row.sound(cfg.eps_radius) && row.dominant(cfg.eps_radius);
                if row.abstained {
                    report.abstains += 1;
                }
                if !ok {
                    report.violations += 1;
                }
                report.lines.push(format!(
                    "{head},{},{},{},{},{},{},{},{},{}",
                    sig10(row.pa),
                    sig10(row.qa),
                    sig10(row.true_radius),
                    sig10(row.radius_np),
                    sig10(row.radius_dsrs),
                    sig10(sound),
                    sig10(dominance),
                    row.abstained,
                    if ok { "ok" } else { "violation" }
                ));
            }
            Err(e) => {
                report.errors += 1;
                report.lines.push(format!("{head},,,,,,,,,{}", field(&format!("error: {e}"))));
            }
        }
    }
    Ok(report)
}
