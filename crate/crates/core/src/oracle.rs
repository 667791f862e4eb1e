//! Exact expectations by enumerating every matching of a tiny degree sequence.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confmodel::{adjacency_counts, enumerate_matchings, sample_matching_shared, Matching};
use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::laplacian::LaplacianView;
use crate::numeric::{mean_and_std_error, CompensatedSum};
use crate::seed;
use crate::spectra::moments::trace_moment;
use crate::spectra::stochastic::TraceEstimate;

pub const MAX_ORACLE_K: u32 = 8;

/// A non-negative rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self - other`, or `None` if negative.
    pub fn checked_sub(self, other: Self) -> Option<Self> {
        let (a, b) = (self.num * other.den, other.num * self.den);
        a.checked_sub(b).map(|d| Self::new(d, self.den * other.den))
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.num * other.num, self.den * other.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyStat {
    pub i: usize,
    pub j: usize,
    pub mean: Ratio,
    pub variance: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactStats {
    pub degrees: Vec<u32>,
    pub max_k: u32,
    pub matching_count: u64,
    /// Entries with `i <= j`.
    pub adjacency: Vec<AdjacencyStat>,
    /// `(1/n) E[Tr M^k]` with the rank-one mean subtracted.
    pub moments_subtracted: BTreeMap<u32, f64>,
    /// The same without the subtraction.
    pub moments_unsubtracted: BTreeMap<u32, f64>,
}

impl ExactStats {
    pub fn mean(&self, i: usize, j: usize) -> Ratio {
        self.entry(i, j).mean
    }

    pub fn variance(&self, i: usize, j: usize) -> Ratio {
        self.entry(i, j).variance
    }

    fn entry(&self, i: usize, j: usize) -> &AdjacencyStat {
        let (i, j) = (i.min(j), i.max(j));
        let n = self.degrees.len();
        &self.adjacency[i * n - i * (i + 1) / 2 + j]
    }

    pub fn moment(&self, k: u32, subtract_rank1: bool) -> Option<f64> {
        let map = if subtract_rank1 { &self.moments_subtracted } else { &self.moments_unsubtracted };
        map.get(&k).copied()
    }

    /// Golden-file JSON with the generating command line embedded.
    pub fn to_golden_json(&self, command: &str) -> String {
        #[derive(Serialize)]
        struct Golden<'a> {
            command: &'a str,
            stats: &'a ExactStats,
        }
        serde_json::to_string_pretty(&Golden { command, stats: self }).expect("serializable") + "\n"
    }

    pub fn from_golden_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Golden {
            stats: ExactStats,
        }
        serde_json::from_str::<Golden>(text)
            .map(|g| g.stats)
            .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
    }
}

/// Power traces `(1/n) Tr(M^k)` for `k = 1..=max_k` of a small dense matrix.
fn power_traces(view: &LaplacianView, max_k: u32) -> Vec<f64> {
    let m = view.dense_matrix().expect("dense view");
    let n = m.nrows();
    let mut power = m.to_owned();
    let mut out = Vec::with_capacity(max_k as usize);
    for k in 1..=max_k {
        if k > 1 {
            power = &power * m;
        }
        let tr: CompensatedSum = (0..n).map(|i| power[(i, i)]).collect();
        out.push(tr.value() / n as f64);
    }
    out
}

struct PerMatching {
    adjacency: Vec<u32>,
    subtracted: Vec<f64>,
    unsubtracted: Vec<f64>,
}

fn per_matching(ds: &Arc<DegreeSequence>, m: &Matching, max_k: u32) -> Result<PerMatching> {
    let n = ds.n();
    let a = Arc::new(adjacency_counts(m));
    let mut adjacency = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            adjacency.push(a.get(i, j));
        }
    }
    let sub = LaplacianView::dense(Arc::clone(ds), Arc::clone(&a), true)?;
    let unsub = LaplacianView::dense(Arc::clone(ds), a, false)?;
    Ok(PerMatching { adjacency, subtracted: power_traces(&sub, max_k), unsubtracted: power_traces(&unsub, max_k) })
}

/// Equal-weight averages over all `(D-1)!!` matchings. Requires `D <= 14`
/// and `max_k <= 8`.
pub fn exact_stats(ds: &DegreeSequence, max_k: u32) -> Result<ExactStats> {
    if max_k > MAX_ORACLE_K {
        return Err(Error::InvalidParameter(format!("max_k must be at most {MAX_ORACLE_K}, got {max_k}")));
    }
    let matchings = enumerate_matchings(ds)?;
    let shared = Arc::new(ds.clone());
    // Matchings sharing the partner of half-edge 0 are contiguous in canonical
    // order; each such block is one parallel task.
    let mut blocks: Vec<&[Matching]> = Vec::new();
    let mut start = 0;
    for i in 1..=matchings.len() {
        if i == matchings.len() || matchings[i].partner(0) != matchings[start].partner(0) {
            blocks.push(&matchings[start..i]);
            start = i;
        }
    }
    let per_block: Vec<Vec<PerMatching>> = blocks
        .par_iter()
        .map(|block| block.iter().map(|m| per_matching(&shared, m, max_k)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let results: Vec<PerMatching> = per_block.into_iter().flatten().collect();

    let count = results.len() as u128;
    let n = ds.n();
    let mut adjacency = Vec::with_capacity(n * (n + 1) / 2);
    let mut idx = 0;
    for i in 0..n {
        for j in i..n {
            let (s1, s2) = results.iter().fold((0u128, 0u128), |(s1, s2), r| {
                let a = u128::from(r.adjacency[idx]);
                (s1 + a, s2 + a * a)
            });
            let mean = Ratio::new(s1, count);
            let second = Ratio::new(s2, count);
            let variance = second.checked_sub(mean.mul(mean)).expect("variance is non-negative");
            adjacency.push(AdjacencyStat { i, j, mean, variance });
            idx += 1;
        }
    }
    let average = |pick: &dyn Fn(&PerMatching) -> f64| {
        let s: CompensatedSum = results.iter().map(pick).collect();
        s.value() / count as f64
    };
    let mut moments_subtracted = BTreeMap::new();
    let mut moments_unsubtracted = BTreeMap::new();
    for k in 1..=max_k {
        let i = (k - 1) as usize;
        moments_subtracted.insert(k, average(&|r| r.subtracted[i]));
        moments_unsubtracted.insert(k, average(&|r| r.unsubtracted[i]));
    }
    Ok(ExactStats {
        degrees: ds.degrees().to_vec(),
        max_k,
        matching_count: results.len() as u64,
        adjacency,
        moments_subtracted,
        moments_unsubtracted,
    })
}

/// Largest `n` for which [`monte_carlo_moment`] uses dense matrix powers.
const DENSE_POWER_LIMIT: usize = 64;

/// Mean and standard error of `(1/n) Tr(M^k)` (rank-one mean subtracted)
/// over `samples` matchings; sample `i` uses `derive(seed, "monte_carlo", i)`.
pub fn monte_carlo_moment(ds: &DegreeSequence, k: u32, samples: usize, seed: u64) -> Result<TraceEstimate> {
    if k == 0 || samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "monte_carlo_moment needs k >= 1 and samples >= 2, got k={k}, samples={samples}"
        )));
    }
    let shared = Arc::new(ds.clone());
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let m = sample_matching_shared(Arc::clone(&shared), seed::derive(seed, "monte_carlo", i as u64));
            let a = Arc::new(adjacency_counts(&m));
            if ds.n() <= DENSE_POWER_LIMIT {
                let view = LaplacianView::dense(Arc::clone(&shared), a, true)?;
                Ok(power_traces(&view, k)[(k - 1) as usize])
            } else {
                trace_moment(&LaplacianView::operator(Arc::clone(&shared), a, true)?, k)
            }
        })
        .collect::<Result<_>>()?;
    let (estimate, std_error) = mean_and_std_error(&values);
    Ok(TraceEstimate { estimate, std_error, probes: samples })
}
