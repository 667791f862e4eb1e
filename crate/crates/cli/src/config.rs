use std::path::{Path, PathBuf};

use cmspectra::laplacian::DEFAULT_DENSE_CAP;
use cmspectra::spectra::ReferenceDistribution;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeKind {
    Regular,
    TwoValued,
    /// Inline `degrees = [...]`.
    List,
    /// `degree_file`, one degree per line.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    N,
    D,
    D1,
    D2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<u64>,
}

fn default_c() -> f64 {
    4.0
}
fn default_epsilon() -> f64 {
    0.01
}
fn default_k_list() -> Vec<u32> {
    vec![1, 2, 3, 4]
}
fn default_bins() -> usize {
    100
}
fn default_range() -> [f64; 2] {
    [-2.5, 2.5]
}
fn default_samples() -> usize {
    1000
}
fn default_probes() -> usize {
    200
}
fn default_true() -> bool {
    true
}
fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}
fn default_max_k() -> u32 {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigMode {
    #[default]
    Dense,
    Operator,
}

/// One experiment. Written as TOML; command-line flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub degree_spec: DegreeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_file: Option<PathBuf>,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<u32>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_range")]
    pub range: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub subtract_rank1: bool,
    #[serde(default)]
    pub mode: ConfigMode,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    #[serde(default)]
    pub wasserstein: bool,
    #[serde(default = "reference_default")]
    pub reference: ReferenceDistribution,
    #[serde(default = "default_max_k")]
    pub max_k: u32,
    /// `--assert` threshold on the KS distance (spectrum, sweep cells).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_max: Option<f64>,
    /// `--assert` threshold on `|empirical - reference|` per moment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_tolerance: Option<f64>,
    /// Oracle golden file to compare against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn reference_default() -> ReferenceDistribution {
    ReferenceDistribution::Semicircle
}

impl ExperimentConfig {
    pub fn new(degree_spec: DegreeKind) -> Self {
        toml::from_str(&format!("degree_spec = \"{}\"", kind_name(degree_spec))).expect("defaults parse")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |field: &str, msg: &str| Err(CliError::Validation(format!("field `{field}`: {msg}")));
        // A swept field is filled in per cell, so it may be absent here.
        let swept = |p: SweepParameter| self.sweep.as_ref().is_some_and(|s| s.parameter == p && !s.values.is_empty());
        let given = |v: Option<u64>, p: SweepParameter| v.unwrap_or(0) > 0 || swept(p);
        match self.degree_spec {
            DegreeKind::Regular => {
                if !given(self.n.map(|n| n as u64), SweepParameter::N) {
                    return fail("n", "regular sequences need n >= 1");
                }
                if !given(self.d.map(u64::from), SweepParameter::D) {
                    return fail("d", "regular sequences need d >= 1");
                }
            }
            DegreeKind::TwoValued => {
                if !given(self.n.map(|n| n as u64), SweepParameter::N) {
                    return fail("n", "two-valued sequences need n >= 1");
                }
                if !given(self.d1.map(u64::from), SweepParameter::D1) || !given(self.d2.map(u64::from), SweepParameter::D2) {
                    return fail("d1/d2", "two-valued sequences need d1 >= 1 and d2 >= 1");
                }
            }
            DegreeKind::List => {
                if self.degrees.as_ref().is_none_or(|d| d.is_empty()) {
                    return fail("degrees", "list sequences need a nonempty `degrees` array");
                }
            }
            DegreeKind::File => {
                if self.degree_file.is_none() {
                    return fail("degree_file", "file sequences need `degree_file`");
                }
            }
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return fail("c", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return fail("epsilon", "must lie in [0, 1]");
        }
        if self.bins == 0 {
            return fail("bins", "must be at least 1");
        }
        if !(self.range[0] < self.range[1]) {
            return fail("range", "needs lo < hi");
        }
        if self.samples < 2 {
            return fail("samples", "must be at least 2");
        }
        if self.probes < 2 {
            return fail("probes", "must be at least 2");
        }
        if self.k_list.is_empty() {
            return fail("k_list", "must not be empty");
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return fail("sweep.values", "empty parameter grid");
            }
        }
        Ok(())
    }
}

fn kind_name(k: DegreeKind) -> &'static str {
    match k {
        DegreeKind::Regular => "regular",
        DegreeKind::TwoValued => "two_valued",
        DegreeKind::List => "list",
        DegreeKind::File => "file",
    }
}
