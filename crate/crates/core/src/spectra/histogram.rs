use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdHistogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// `count / (n * width)`.
    pub density: Vec<f64>,
    pub underflow: u64,
    pub overflow: u64,
    pub n: u64,
}

impl EsdHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn bin_edges(&self, b: usize) -> (f64, f64) {
        let w = self.width();
        let right = if b + 1 == self.bins() { self.hi } else { self.lo + (b + 1) as f64 * w };
        (self.lo + b as f64 * w, right)
    }

    /// CSV with header `bin_left,bin_right,count,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count,density\n");
        for (b, (&c, &d)) in self.counts.iter().zip(&self.density).enumerate() {
            let (l, r) = self.bin_edges(b);
            out.push_str(&format!("{l},{r},{c},{d}\n"));
        }
        out
    }
}

/// Histogram of eigenvalues on `[lo, hi]` with equal-width bins. The last bin is
/// closed on the right; values outside the range go to `underflow`/`overflow`.
pub fn esd_histogram(eigs: &[f64], bins: usize, range: (f64, f64)) -> Result<EsdHistogram> {
    let (lo, hi) = range;
    if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!("histogram needs bins >= 1 and lo < hi, got {bins} on [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let (mut underflow, mut overflow) = (0, 0);
    for &x in eigs {
        if x < lo {
            underflow += 1;
        } else if x > hi {
            overflow += 1;
        } else {
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    let n = eigs.len() as u64;
    let density = counts
        .iter()
        .map(|&c| if n == 0 { 0.0 } else { c as f64 / (n as f64 * width) })
        .collect();
    Ok(EsdHistogram { lo, hi, counts, density, underflow, overflow, n })
}
