//! Line-delimited input records.

use dsrs::confidence::SamplingRecord;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum QFamilyArg {
    Trunc,
    Var,
}

/// One input to `certify`. `q_count` may be absent when every draw came
/// from `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub id: String,
    pub d: u64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub q_family: QFamilyArg,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub p_count: SamplingRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_count: Option<SamplingRecord>,
}

impl InputRecord {
    pub fn parse(line: &str) -> Result<Self, CliError> {
        let rec: InputRecord = serde_json::from_str(line).map_err(|e| CliError::Record(e.to_string()))?;
        rec.validated()
    }

    pub fn validated(self) -> Result<Self, CliError> {
        SamplingRecord::new(self.p_count.trials, self.p_count.successes)?;
        if let Some(q) = self.q_count {
            SamplingRecord::new(q.trials, q.successes)?;
        }
        match self.q_family {
            QFamilyArg::Trunc if self.beta.is_some() => {
                return Err(CliError::Record("beta given for a truncated Q".into()));
            }
            QFamilyArg::Var if self.t.is_some() => {
                return Err(CliError::Record("T given for a rescaled Q".into()));
            }
            QFamilyArg::Var if self.beta.is_none() && self.q_count.is_some() => {
                return Err(CliError::Record("rescaled Q needs beta".into()));
            }
            _ => {}
        }
        Ok(self)
    }
}
