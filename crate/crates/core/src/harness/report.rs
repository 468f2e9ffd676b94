use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::stats::MeanStdErr;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One named summary statistic with its sampling uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub name: String,
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Stat {
    pub fn from_samples(name: impl Into<String>, xs: &[f64]) -> Stat {
        let MeanStdErr { mean, std_err, n } = crate::stats::mean_std_err(xs);
        Stat {
            name: name.into(),
            mean,
            std_err,
            n,
            median: crate::stats::median(xs),
            q25: crate::stats::quantile(xs, 0.25),
            q75: crate::stats::quantile(xs, 0.75),
        }
    }
}

/// A declared pass/fail comparison. The pass rule is
/// |value − target| ≤ max(tolerance, 3·std_err) unless the check is an
/// upper bound, in which case value ≤ tolerance decides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub std_err: Option<f64>,
    pub pass: bool,
}

impl CheckResult {
    pub fn against_target(
        name: impl Into<String>,
        value: f64,
        target: f64,
        tolerance: f64,
        std_err: Option<f64>,
    ) -> CheckResult {
        let band = std_err.map_or(tolerance, |se| tolerance.max(3.0 * se));
        CheckResult {
            name: name.into(),
            value,
            target,
            tolerance,
            std_err,
            pass: (value - target).abs() <= band,
        }
    }

    pub fn upper_bound(name: impl Into<String>, value: f64, bound: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            value,
            target: 0.0,
            tolerance: bound,
            std_err: None,
            pass: value <= bound,
        }
    }

    /// Strict variant: the error must clear both the stated tolerance and
    /// 3 standard errors.
    pub fn against_target_strict(
        name: impl Into<String>,
        value: f64,
        target: f64,
        tolerance: f64,
        std_err: f64,
    ) -> CheckResult {
        let err = (value - target).abs();
        CheckResult {
            name: name.into(),
            value,
            target,
            tolerance,
            std_err: Some(std_err),
            pass: err <= tolerance && err <= 3.0 * std_err,
        }
    }
}

/// Statistics gathered at a single level t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub t: f64,
    /// trials at this level (those with t below the extinction time)
    pub n_effective: usize,
    pub excluded: usize,
    pub stats: Vec<Stat>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_ms: u64,
}

/// Raw per-trial series for external plotting; never part of the JSON
/// report (and so never part of the determinism contract's byte string).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawSamples {
    pub columns: Vec<(String, Vec<f64>)>,
}

impl RawSamples {
    /// Renders `name,…` columns row-wise as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            &self.columns.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>().join(","),
        );
        out.push('\n');
        let rows = self.columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        for i in 0..rows {
            let row: Vec<String> = self
                .columns
                .iter()
                .map(|(_, v)| v.get(i).map(|x| format!("{x:.16e}")).unwrap_or_default())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub per_t: Vec<LevelSummary>,
    pub checks: Vec<CheckResult>,
    pub timing: Timing,
    #[serde(skip)]
    pub raw: RawSamples,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        let warnings = config.discretization_warnings();
        ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            warnings,
            per_t: Vec::new(),
            checks: Vec::new(),
            timing: Timing::default(),
            raw: RawSamples::default(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Serialization with the timing zeroed; this is the byte string the
    /// determinism contract is stated for (wall time genuinely varies,
    /// everything else must not).
    pub fn canonical_bytes(&self) -> Result<Vec<u8>> {
        let mut clone = self.clone();
        clone.timing = Timing::default();
        Ok(serde_json::to_vec(&clone)?)
    }
}
