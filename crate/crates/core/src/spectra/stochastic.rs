//! Hutchinson trace estimation with Rademacher probes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::LaplacianView;
use crate::numeric::mean_and_std_error;
use crate::seed;

use super::moments::quadratic_form_power;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub probes: usize,
}

fn rademacher(master: u64, probe: usize, n: usize) -> Vec<f64> {
    let mut rng = seed::stream(master, "probe", probe as u64);
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Unbiased estimate of `(1/n) Tr(M^k)`: the mean over probes `z` of
/// `z^T M^k z / n`, with the standard error from the sample variance.
pub fn stochastic_moment(view: &LaplacianView, k: u32, probes: usize, seed: u64) -> Result<TraceEstimate> {
    if k == 0 || probes < 2 {
        return Err(Error::InvalidParameter(format!(
            "stochastic_moment needs k >= 1 and probes >= 2, got k={k}, probes={probes}"
        )));
    }
    let n = view.n();
    let samples: Vec<f64> = (0..probes)
        .into_par_iter()
        .map(|p| quadratic_form_power(view, rademacher(seed, p, n), k).map(|q| q / n as f64))
        .collect::<Result<_>>()?;
    let (estimate, std_error) = mean_and_std_error(&samples);
    Ok(TraceEstimate { estimate, std_error, probes })
}
