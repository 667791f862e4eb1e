//! Configuration-model sampling: uniform perfect matchings of half-edges,
//! exhaustive enumeration for tiny instances, and adjacency multiplicities.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::seed;

/// Largest total degree accepted by [`enumerate_matchings`]; `13!! = 135_135`.
pub const ENUMERATION_CAP: u64 = 14;
/// Largest total degree accepted by [`uniformity_chisquare`].
pub const CHISQUARE_CAP: u64 = 10;

const UNMATCHED: usize = usize::MAX;

/// A half-edge identified globally and by its `(owner, slot)` position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfEdgeIndex {
    pub global_id: usize,
    pub owner: usize,
    pub local_slot: usize,
}

/// Vertex `i` owns the contiguous ids `[offset(i), offset(i + 1))`.
#[derive(Debug, Clone)]
pub struct HalfEdgeLayout {
    offsets: Vec<usize>,
    owners: Vec<u32>,
}

impl HalfEdgeLayout {
    pub fn new(ds: &DegreeSequence) -> Self {
        let mut offsets = Vec::with_capacity(ds.n() + 1);
        let mut owners = Vec::with_capacity(ds.total() as usize);
        offsets.push(0);
        for (v, &d) in ds.degrees().iter().enumerate() {
            owners.extend(std::iter::repeat(v as u32).take(d as usize));
            offsets.push(owners.len());
        }
        Self { offsets, owners }
    }

    pub fn total(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, id: usize) -> usize {
        self.owners[id] as usize
    }

    pub fn range(&self, vertex: usize) -> std::ops::Range<usize> {
        self.offsets[vertex]..self.offsets[vertex + 1]
    }

    pub fn index(&self, id: usize) -> HalfEdgeIndex {
        let owner = self.owner(id);
        HalfEdgeIndex {
            global_id: id,
            owner,
            local_slot: id - self.offsets[owner],
        }
    }

    pub fn global_id(&self, owner: usize, local_slot: usize) -> usize {
        debug_assert!(local_slot < self.offsets[owner + 1] - self.offsets[owner]);
        self.offsets[owner] + local_slot
    }
}

/// A perfect pairing of the `D` half-edges of a degree sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    partner: Vec<usize>,
    degree_sequence: Arc<DegreeSequence>,
}

impl Matching {
    /// Validates that `partner` is a fixed-point-free involution on `[0, D)`.
    pub fn new(degree_sequence: Arc<DegreeSequence>, partner: Vec<usize>) -> Result<Self> {
        let total = degree_sequence.total() as usize;
        if partner.len() != total {
            return Err(Error::DimensionMismatch { expected: total, actual: partner.len() });
        }
        for (a, &b) in partner.iter().enumerate() {
            if b >= total || b == a || partner[b] != a {
                return Err(Error::InvalidParameter(format!(
                    "partner array is not a fixed-point-free involution at half-edge {a}"
                )));
            }
        }
        Ok(Self { partner, degree_sequence })
    }

    pub fn from_pairs(
        degree_sequence: Arc<DegreeSequence>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let total = degree_sequence.total() as usize;
        let mut partner = vec![UNMATCHED; total];
        for (a, b) in pairs {
            if a >= total || b >= total {
                return Err(Error::InvalidParameter(format!("half-edge pair ({a}, {b}) out of range")));
            }
            if partner[a] != UNMATCHED || partner[b] != UNMATCHED {
                return Err(Error::InvalidParameter(format!("half-edge pair ({a}, {b}) reuses a half-edge")));
            }
            partner[a] = b;
            partner[b] = a;
        }
        Self::new(degree_sequence, partner)
    }

    pub fn partner(&self, id: usize) -> usize {
        self.partner[id]
    }

    pub fn partners(&self) -> &[usize] {
        &self.partner
    }

    pub fn degree_sequence(&self) -> &DegreeSequence {
        &self.degree_sequence
    }

    pub fn shared_degree_sequence(&self) -> Arc<DegreeSequence> {
        Arc::clone(&self.degree_sequence)
    }

    /// Pairs `(a, b)` with `a < b`, ascending in `a`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner.iter().enumerate().filter(|&(a, &b)| a < b).map(|(a, &b)| (a, b))
    }

    /// `D/2` lines `"a b"`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.pairs() {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    pub fn from_text(degree_sequence: Arc<DegreeSequence>, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    message: format!("expected \"a b\", got {line:?}"),
                })
            };
            let mut toks = line.split_whitespace();
            let a = parse(toks.next())?;
            let b = parse(toks.next())?;
            pairs.push((a, b));
        }
        Self::from_pairs(degree_sequence, pairs)
    }
}

/// Pairs the given (ascending) half-edge ids: repeatedly take the smallest
/// unused id and pair it with a uniform choice among the other unused ids.
/// The resulting pairing is uniform over all perfect matchings of `ids`.
pub(crate) fn pair_sequentially<R: Rng + ?Sized>(ids: &[usize], rng: &mut R, partner: &mut [usize]) {
    debug_assert!(ids.len() % 2 == 0);
    debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
    let mut pool: Vec<usize> = ids.to_vec();
    // Position of each id in `pool`, keyed by its rank in `ids`.
    let mut slot: Vec<usize> = (0..ids.len()).collect();
    let rank_of = |id: usize| ids.binary_search(&id).expect("id belongs to the pool");
    let remove = |pool: &mut Vec<usize>, slot: &mut Vec<usize>, rank: usize| {
        let at = slot[rank];
        let last = *pool.last().expect("pool is non-empty");
        pool.swap_remove(at);
        if at < pool.len() {
            slot[rank_of(last)] = at;
        }
        slot[rank] = UNMATCHED;
    };
    let mut cursor = 0;
    while !pool.is_empty() {
        while slot[cursor] == UNMATCHED {
            cursor += 1;
        }
        let a = ids[cursor];
        remove(&mut pool, &mut slot, cursor);
        let b = pool[rng.random_range(0..pool.len())];
        remove(&mut pool, &mut slot, rank_of(b));
        partner[a] = b;
        partner[b] = a;
    }
}

fn matching_rng(seed: u64) -> seed::StreamRng {
    seed::stream(seed, "matching", 0)
}

/// Samples a uniformly random perfect matching; deterministic in `seed`.
pub fn sample_matching(ds: &DegreeSequence, seed: u64) -> Matching {
    sample_matching_shared(Arc::new(ds.clone()), seed)
}

pub fn sample_matching_shared(ds: Arc<DegreeSequence>, seed: u64) -> Matching {
    let total = ds.total() as usize;
    let ids: Vec<usize> = (0..total).collect();
    let mut partner = vec![UNMATCHED; total];
    pair_sequentially(&ids, &mut matching_rng(seed), &mut partner);
    Matching { partner, degree_sequence: ds }
}

/// Uniform pairing of `residual` ids (ascending) on top of fixed pairs; the
/// random stream is the one [`sample_matching`] uses for the same seed.
pub(crate) fn complete_matching(
    ds: Arc<DegreeSequence>,
    fixed: &[(usize, usize)],
    residual: &[usize],
    seed: u64,
) -> Matching {
    let mut partner = vec![UNMATCHED; ds.total() as usize];
    for &(a, b) in fixed {
        partner[a] = b;
        partner[b] = a;
    }
    pair_sequentially(residual, &mut matching_rng(seed), &mut partner);
    Matching { partner, degree_sequence: ds }
}

/// Which sampler [`uniformity_chisquare_with`] exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Uniform,
    /// Negative control: half-edge 0 is always paired with half-edge 1, the
    /// rest uniformly. Not uniform whenever `D >= 4`.
    BiasedFirstPair,
}

fn sample_with(ds: &Arc<DegreeSequence>, sampler: Sampler, seed: u64) -> Matching {
    match sampler {
        Sampler::Uniform => sample_matching_shared(Arc::clone(ds), seed),
        Sampler::BiasedFirstPair => {
            let total = ds.total() as usize;
            let rest: Vec<usize> = (2..total).collect();
            complete_matching(Arc::clone(ds), &[(0, 1)], &rest, seed)
        }
    }
}

pub(crate) fn double_factorial_odd(total: u64) -> u64 {
    (1..total).step_by(2).product::<u64>().max(1)
}

/// Visits every perfect matching of `[0, total)` in canonical order: the
/// smallest unmatched id is paired with each larger unmatched id in turn.
pub fn for_each_matching(total: usize, mut visit: impl FnMut(&[usize])) {
    fn recurse(partner: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
        let Some(a) = partner.iter().position(|&p| p == UNMATCHED) else {
            visit(partner);
            return;
        };
        for b in a + 1..partner.len() {
            if partner[b] == UNMATCHED {
                partner[a] = b;
                partner[b] = a;
                recurse(partner, visit);
                partner[a] = UNMATCHED;
                partner[b] = UNMATCHED;
            }
        }
    }
    let mut partner = vec![UNMATCHED; total];
    recurse(&mut partner, &mut visit);
}

fn check_enumerable(ds: &DegreeSequence, cap: u64) -> Result<()> {
    if ds.total() > cap {
        return Err(Error::EnumerationCap { total: ds.total(), cap });
    }
    Ok(())
}

/// Every perfect matching exactly once, in canonical order. Requires `D <= 14`.
pub fn enumerate_matchings(ds: &DegreeSequence) -> Result<Vec<Matching>> {
    check_enumerable(ds, ENUMERATION_CAP)?;
    let shared = Arc::new(ds.clone());
    let mut out = Vec::with_capacity(double_factorial_odd(ds.total()) as usize);
    for_each_matching(ds.total() as usize, |p| {
        out.push(Matching { partner: p.to_vec(), degree_sequence: Arc::clone(&shared) });
    });
    Ok(out)
}

/// Adjacency multiplicities of a multigraph. `A_ii` is twice the number of
/// self-loops at `i`, so every row sums to the vertex degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multigraph {
    n: usize,
    /// `(i, j, A_ij)` with `i <= j`, sorted, no zero multiplicities.
    entries: Vec<(usize, usize, u32)>,
}

impl Multigraph {
    pub fn from_entries(n: usize, mut entries: Vec<(usize, usize, u32)>) -> Result<Self> {
        for e in &mut entries {
            if e.0 > e.1 {
                *e = (e.1, e.0, e.2);
            }
            if e.1 >= n {
                return Err(Error::DimensionMismatch { expected: n, actual: e.1 + 1 });
            }
        }
        entries.retain(|e| e.2 > 0);
        entries.sort_unstable();
        for w in entries.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(Error::InvalidParameter(format!("duplicate entry ({}, {})", w[0].0, w[0].1)));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        let key = (i.min(j), i.max(j));
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map(|at| self.entries[at].2)
            .unwrap_or(0)
    }

    /// Upper-triangle entries `(i, j, A_ij)`, `i <= j`, lexicographic.
    pub fn entries(&self) -> &[(usize, usize, u32)] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.n];
        for &(i, j, a) in &self.entries {
            sums[i] += u64::from(a);
            if i != j {
                sums[j] += u64::from(a);
            }
        }
        sums
    }

    /// Full symmetric adjacency in compressed-row form.
    pub fn to_rows(&self) -> SparseRows {
        let mut counts = vec![0usize; self.n + 1];
        for &(i, j, _) in &self.entries {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for v in 0..self.n {
            counts[v + 1] += counts[v];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let mut cols = vec![0usize; row_ptr[self.n]];
        let mut vals = vec![0u32; row_ptr[self.n]];
        for &(i, j, a) in &self.entries {
            cols[fill[i]] = j;
            vals[fill[i]] = a;
            fill[i] += 1;
            if i != j {
                cols[fill[j]] = i;
                vals[fill[j]] = a;
                fill[j] += 1;
            }
        }
        SparseRows { row_ptr, cols, vals }
    }

    /// `"i j multiplicity"` lines, `i <= j`, lexicographic.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &(i, j, a) in &self.entries {
            let _ = writeln!(out, "{i} {j} {a}");
        }
        out
    }
}

/// Compressed sparse rows; each row's columns are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRows {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<u32>,
}

impl SparseRows {
    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }
}

/// `A_ij` (i != j) counts pairs joining a half-edge of `i` to one of `j`;
/// `A_ii` counts each self-loop twice.
pub fn adjacency_counts(m: &Matching) -> Multigraph {
    let layout = HalfEdgeLayout::new(m.degree_sequence());
    let mut edges: Vec<(usize, usize)> = m
        .pairs()
        .map(|(a, b)| {
            let (i, j) = (layout.owner(a), layout.owner(b));
            (i.min(j), i.max(j))
        })
        .collect();
    edges.sort_unstable();
    let mut entries: Vec<(usize, usize, u32)> = Vec::with_capacity(edges.len());
    for (i, j) in edges {
        let weight = if i == j { 2 } else { 1 };
        match entries.last_mut() {
            Some(last) if (last.0, last.1) == (i, j) => last.2 += weight,
            _ => entries.push((i, j, weight)),
        }
    }
    Multigraph { n: m.degree_sequence().n(), entries }
}

/// Chi-square goodness of fit of sampled matchings against the uniform law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Observed count per matching, in canonical enumeration order.
    pub counts: Vec<u64>,
}

/// Pearson statistic and p-value for `counts` against equal expected counts.
pub fn chisquare_uniform(counts: &[u64]) -> ChiSquareResult {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / k as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    let df = k.saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).expect("df > 0").sf(statistic)
    };
    ChiSquareResult { statistic, degrees_of_freedom: df, p_value, counts: counts.to_vec() }
}

/// Canonical index of every matching of a small instance.
pub(crate) fn canonical_index(total: usize) -> HashMap<Vec<usize>, usize> {
    let mut index = HashMap::new();
    for_each_matching(total, |p| {
        let next = index.len();
        index.insert(p.to_vec(), next);
    });
    index
}

/// Tallies `samples` draws of `draw(i)` into canonical-order counts.
/// Counts of `draw(0), ..., draw(samples - 1)` per matching, in canonical order.
pub fn tally_matchings(
    ds: &DegreeSequence,
    samples: usize,
    draw: impl Fn(usize) -> Matching + Sync,
) -> Result<Vec<u64>> {
    check_enumerable(ds, CHISQUARE_CAP)?;
    let index = canonical_index(ds.total() as usize);
    let hits: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|i| index[draw(i).partners()])
        .collect();
    let mut counts = vec![0u64; index.len()];
    for h in hits {
        counts[h] += 1;
    }
    Ok(counts)
}

pub fn uniformity_chisquare(ds: &DegreeSequence, samples: usize, seed: u64) -> Result<ChiSquareResult> {
    uniformity_chisquare_with(ds, samples, seed, Sampler::Uniform)
}

pub fn uniformity_chisquare_with(
    ds: &DegreeSequence,
    samples: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<ChiSquareResult> {
    let shared = Arc::new(ds.clone());
    let counts = tally_matchings(ds, samples, |i| {
        sample_with(&shared, sampler, seed::derive(seed, "uniformity", i as u64))
    })?;
    Ok(chisquare_uniform(&counts))
}
