use std::collections::BTreeMap;

use cmspectra::degseq::ConditionReport;
use cmspectra::pruning::PruneSummary;
use cmspectra::spectra::ReferenceDistribution;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceInfo {
    pub n: usize,
    pub total_degree: u64,
    pub min_degree: u32,
    pub max_degree: u32,
    pub generator: String,
    pub parity_fixup: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub reference: ReferenceDistribution,
    pub ks: f64,
    pub wasserstein1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub k: u32,
    pub empirical: f64,
    pub reference: f64,
    pub abs_error: f64,
    /// Present for sampled estimates.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub k: u32,
    pub exact: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
    pub within_3se: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub matching_count: u64,
    pub rows: Vec<OracleRow>,
    /// Largest deviation from the configured golden file, if any.
    pub golden_max_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub value: u64,
    pub config_hash: String,
    pub ks: Option<f64>,
    pub moments: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Everything a run produced. Wall-clock timings live in a separate file so
/// that the report itself is byte-identical across reruns in dense mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub library_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub degree_sequence: SequenceInfo,
    pub condition: ConditionReport,
    /// Output files by role, relative to the output directory.
    pub files: BTreeMap<String, String>,
    pub distances: Option<Distances>,
    pub moments: Vec<MomentRow>,
    pub prune: Option<PruneSummary>,
    pub oracle: Option<OracleReport>,
    pub sweep: Option<Vec<SweepCell>>,
    pub degree_moment_diagnostics: Option<BTreeMap<u32, f64>>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
