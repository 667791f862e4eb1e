//! Spectra of `M`: eigenvalues, moments, reference laws, distances.

pub mod distance;
pub mod eigen;
pub mod histogram;
pub mod moments;
pub mod reference;
pub mod stochastic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use distance::{ks_distance, ks_two_sample, ks_two_sample_tol, wasserstein1};
pub use eigen::{eigenvalues_dense, symmetric_eigenvalues};
pub use histogram::{esd_histogram, EsdHistogram};
pub use moments::{empirical_moment, trace_moment};
pub use reference::{
    catalan, kesten_mckay_density, semicircle_cdf, semicircle_density, semicircle_moment, ReferenceDistribution,
};
pub use stochastic::{stochastic_moment, TraceEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub moments: BTreeMap<u32, f64>,
    pub histogram: EsdHistogram,
}

impl SpectralSummary {
    pub fn new(eigenvalues: Vec<f64>, ks: &[u32], bins: usize, range: (f64, f64)) -> Result<Self> {
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("eigenvalues must be sorted ascending".into()));
        }
        let moments = ks.iter().map(|&k| (k, empirical_moment(&eigenvalues, k))).collect();
        let histogram = esd_histogram(&eigenvalues, bins, range)?;
        Ok(Self { eigenvalues, moments, histogram })
    }

    /// One eigenvalue per line, ascending.
    pub fn eigenvalues_text(&self) -> String {
        self.eigenvalues.iter().map(|x| format!("{x:e}\n")).collect()
    }

    /// CSV `k,empirical,reference,abs_error`.
    pub fn moment_table_csv(&self, reference: &ReferenceDistribution) -> String {
        moment_table_csv(&self.moments, reference)
    }
}

pub fn moment_table_csv(moments: &BTreeMap<u32, f64>, reference: &ReferenceDistribution) -> String {
    let mut out = String::from("k,empirical,reference,abs_error\n");
    for (&k, &m) in moments {
        let r = reference.moment(k);
        out.push_str(&format!("{k},{m},{r},{}\n", (m - r).abs()));
    }
    out
}
