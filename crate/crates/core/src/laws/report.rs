//! Machine-readable verdicts of Monte Carlo comparisons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ks::{ks_statistic, ks_threshold, ks_two_sample, KsResult};
use super::LawError;

/// Default KS level: the `p = 0.001` asymptotic quantile.
pub const DEFAULT_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticResult {
    pub name: String,
    pub n: usize,
    pub ks_distance: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    /// Negative controls are reported but never asserted.
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub name: String,
    pub empirical: f64,
    pub theoretical: f64,
    pub standard_error: f64,
}

/// A deterministic identity check: `value` is a gap compared to `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub asserted: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            value,
            tolerance,
            verdict: Verdict::from_bool(value <= tolerance),
            asserted: true,
        }
    }

    pub fn descriptive(mut self) -> Self {
        self.asserted = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub trials: usize,
    /// Degenerate or pairing-failed trials left out of the statistics.
    pub excluded: usize,
    pub seed: u64,
    pub statistics: Vec<StatisticResult>,
    pub moments: Vec<MomentRow>,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
    pub runtime_seconds: f64,
    /// The run configuration, embedded for replay.
    pub config: Option<serde_json::Value>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, trials: usize, seed: u64) -> Self {
        ExperimentReport {
            name: name.into(),
            trials,
            seed,
            ..Default::default()
        }
    }

    /// Every asserted statistic and check passes.
    pub fn passed(&self) -> bool {
        self.statistics
            .iter()
            .filter(|s| s.asserted)
            .all(|s| s.verdict.is_pass())
            && self
                .checks
                .iter()
                .filter(|c| c.asserted)
                .all(|c| c.verdict.is_pass())
    }

    pub fn merge(&mut self, other: ExperimentReport) {
        self.excluded += other.excluded;
        self.statistics.extend(other.statistics);
        self.moments.extend(other.moments);
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }
}

/// Threshold overrides keyed by full statistic name or bare statistic name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Thresholds(pub BTreeMap<String, f64>);

impl Thresholds {
    pub fn lookup(&self, full: &str) -> Option<f64> {
        self.0
            .get(full)
            .or_else(|| full.rsplit('.').next().and_then(|short| self.0.get(short)))
            .copied()
    }

    pub fn resolve(&self, full: &str, ks: &KsResult) -> f64 {
        self.lookup(full)
            .unwrap_or_else(|| ks_threshold(ks.n_eff, DEFAULT_ALPHA))
    }
}

fn result(name: String, n: usize, ks: KsResult, threshold: f64, asserted: bool) -> StatisticResult {
    StatisticResult {
        name,
        n,
        ks_distance: ks.distance,
        p_value: ks.p_value,
        threshold,
        verdict: Verdict::from_bool(ks.distance <= threshold),
        asserted,
    }
}

pub fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// Column-wise two-sample KS between observed and reference statistic vectors.
pub fn compare_two_sample(
    prefix: &str,
    names: &[String],
    observed: &[Vec<f64>],
    reference: &[Vec<f64>],
    thresholds: &Thresholds,
    asserted: bool,
) -> Result<Vec<StatisticResult>, LawError> {
    names
        .iter()
        .enumerate()
        .map(|(j, stat)| {
            let ks = ks_two_sample(&column(observed, j), &column(reference, j))?;
            let full = format!("{prefix}.{stat}");
            let threshold = thresholds.resolve(&full, &ks);
            Ok(result(full, observed.len(), ks, threshold, asserted))
        })
        .collect()
}

pub fn compare_one_sample(
    name: &str,
    sample: &[f64],
    cdf: impl Fn(f64) -> f64,
    thresholds: &Thresholds,
    default_threshold: Option<f64>,
) -> Result<StatisticResult, LawError> {
    let ks = ks_statistic(sample, cdf)?;
    let threshold = thresholds
        .lookup(name)
        .or(default_threshold)
        .unwrap_or_else(|| ks_threshold(ks.n_eff, DEFAULT_ALPHA));
    Ok(result(name.to_string(), sample.len(), ks, threshold, true))
}

/// Two-sample comparison with an explicit default threshold.
pub fn compare_two_sample_at(
    name: &str,
    a: &[f64],
    b: &[f64],
    thresholds: &Thresholds,
    default_threshold: f64,
    asserted: bool,
) -> Result<StatisticResult, LawError> {
    let ks = ks_two_sample(a, b)?;
    let threshold = thresholds.lookup(name).unwrap_or(default_threshold);
    Ok(result(name.to_string(), a.len(), ks, threshold, asserted))
}

/// Two-sample comparison at the configured or default KS threshold.
pub fn compare_two_sample_default(
    name: &str,
    a: &[f64],
    b: &[f64],
    thresholds: &Thresholds,
    asserted: bool,
) -> Result<StatisticResult, LawError> {
    let ks = ks_two_sample(a, b)?;
    let threshold = thresholds.resolve(name, &ks);
    Ok(result(name.to_string(), a.len(), ks, threshold, asserted))
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

pub fn moment_rows(
    prefix: &str,
    names: &[String],
    observed: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Vec<MomentRow> {
    names
        .iter()
        .enumerate()
        .map(|(j, stat)| {
            let (m, se) = mean_se(&column(observed, j));
            let (t, _) = mean_se(&column(reference, j));
            MomentRow {
                name: format!("{prefix}.{stat}"),
                empirical: m,
                theoretical: t,
                standard_error: se,
            }
        })
        .collect()
}
