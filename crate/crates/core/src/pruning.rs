//! Light-vertex pruning.
//!
//! While some vertex has between 1 and `C sqrt(D/n)` (exclusive) unused
//! half-edges, the smallest-index unused half-edge among such vertices is
//! paired with a uniformly chosen unused half-edge. The number of light
//! half-edges `S_t` performs a birth-death walk; a simpler chain `S~_t`
//! dominates it and bounds how long pruning can last.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::confmodel::{chisquare_uniform, complete_matching, tally_matchings, ChiSquareResult, HalfEdgeLayout, Matching};
use crate::degseq::DegreeSequence;
use crate::error::{Error, Result};
use crate::seed;

/// Relative slack when comparing counts to real-valued bounds, so that a count
/// sitting exactly on a bound is not rejected by rounding in the bound itself.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepAction {
    Init,
    /// Partner was a light half-edge: `S` drops by 2.
    Light,
    /// Partner's vertex had exactly `ceil(threshold)` unused half-edges and turned light.
    Upsurge,
    /// Any other partner: `S` drops by 1.
    Heavy,
}

impl StepAction {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Init => "init",
            Self::Light => "light",
            Self::Upsurge => "upsurge",
            Self::Heavy => "heavy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    /// Light half-edges after step `t`.
    pub s: u64,
    /// Vertices with exactly `ceil(threshold)` unused half-edges after step `t`.
    pub d: u64,
    pub action: StepAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub degree_sequence: Arc<DegreeSequence>,
    pub c: f64,
    pub threshold: f64,
    /// `(light half-edge, partner)` in the order they were matched.
    pub forced_matches: Vec<(usize, usize)>,
    pub residual_degrees: Vec<u32>,
    /// `#{i : d_i > 0, residual_i = 0}`.
    pub removed_vertex_count: usize,
    /// `#{i : 0 < residual_i < d_i}`; reported separately, not counted as removed.
    pub reduced_vertex_count: usize,
    pub removed_edge_count: usize,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Counts and parameters of a run, without the per-step data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneSummary {
    pub n: usize,
    pub total_degree: u64,
    pub c: f64,
    pub threshold: f64,
    pub steps: usize,
    pub initial_light_half_edges: u64,
    pub removed_vertex_count: usize,
    pub reduced_vertex_count: usize,
    pub removed_edge_count: usize,
    pub residual_total: u64,
    pub epsilon: Option<f64>,
    pub step_cap: Option<f64>,
    pub cap_exceeded: Option<bool>,
    pub vertices_ok: Option<bool>,
    pub edges_ok: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub vertices_ok: bool,
    pub edges_ok: bool,
    pub cap_exceeded: bool,
}

impl PruneOutcome {
    pub fn steps(&self) -> usize {
        self.forced_matches.len()
    }

    /// `3 eps C sqrt(nD)`.
    pub fn step_cap(&self, epsilon: f64) -> f64 {
        let ds = &self.degree_sequence;
        3.0 * epsilon * self.c * (ds.n() as f64 * ds.total() as f64).sqrt()
    }

    /// Whether the run took more steps than `3 eps C sqrt(nD)`.
    pub fn cap_exceeded(&self, epsilon: f64) -> bool {
        self.steps() as f64 > self.step_cap(epsilon)
    }

    pub fn summary(&self, epsilon: Option<f64>) -> PruneSummary {
        let ds = &self.degree_sequence;
        let check = epsilon.map(|eps| bound_check(self, eps, self.c));
        PruneSummary {
            n: ds.n(),
            total_degree: ds.total(),
            c: self.c,
            threshold: self.threshold,
            steps: self.steps(),
            initial_light_half_edges: self.trajectory[0].s,
            removed_vertex_count: self.removed_vertex_count,
            reduced_vertex_count: self.reduced_vertex_count,
            removed_edge_count: self.removed_edge_count,
            residual_total: self.residual_degrees.iter().map(|&d| u64::from(d)).sum(),
            epsilon,
            step_cap: epsilon.map(|eps| self.step_cap(eps)),
            cap_exceeded: check.map(|c| c.cap_exceeded),
            vertices_ok: check.map(|c| c.vertices_ok),
            edges_ok: check.map(|c| c.edges_ok),
        }
    }

    /// CSV `t,S_t,D_t,action`.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("t,S_t,D_t,action\n");
        for p in &self.trajectory {
            let _ = writeln!(out, "{},{},{},{}", p.t, p.s, p.d, p.action.as_str());
        }
        out
    }

    /// Unused half-edge ids, ascending.
    pub fn residual_half_edges(&self) -> Vec<usize> {
        let mut used = vec![false; self.degree_sequence.total() as usize];
        for &(a, b) in &self.forced_matches {
            used[a] = true;
            used[b] = true;
        }
        used.iter().enumerate().filter(|(_, &u)| !u).map(|(i, _)| i).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Light,
    Upsurge,
    Heavy,
}

/// Mutable pruning state over the half-edges of one degree sequence.
struct Pruner {
    layout: HalfEdgeLayout,
    threshold: f64,
    ceil: u32,
    unused: Vec<u32>,
    used: Vec<bool>,
    cursor: Vec<usize>,
    pool: Vec<usize>,
    pool_pos: Vec<usize>,
    light: BTreeSet<usize>,
    light_half_edges: u64,
    at_ceil: Vec<usize>,
    at_ceil_pos: Vec<usize>,
}

const ABSENT: usize = usize::MAX;

impl Pruner {
    fn new(ds: &DegreeSequence, c: f64) -> Self {
        let layout = HalfEdgeLayout::new(ds);
        let total = layout.total();
        let threshold = c * ds.sqrt_mean_degree();
        let ceil = threshold.ceil().min(f64::from(u32::MAX)) as u32;
        let mut p = Self {
            threshold,
            ceil,
            unused: ds.degrees().to_vec(),
            used: vec![false; total],
            cursor: (0..ds.n()).map(|v| layout.range(v).start).collect(),
            pool: (0..total).collect(),
            pool_pos: (0..total).collect(),
            light: BTreeSet::new(),
            light_half_edges: 0,
            at_ceil: Vec::new(),
            at_ceil_pos: vec![ABSENT; ds.n()],
            layout,
        };
        for v in 0..ds.n() {
            let u = p.unused[v];
            if p.is_light(u) {
                p.light.insert(v);
                p.light_half_edges += u64::from(u);
            }
            if u == p.ceil {
                p.ceil_insert(v);
            }
        }
        p
    }

    fn is_light(&self, unused: u32) -> bool {
        unused > 0 && f64::from(unused) < self.threshold
    }

    fn ceil_insert(&mut self, v: usize) {
        self.at_ceil_pos[v] = self.at_ceil.len();
        self.at_ceil.push(v);
    }

    fn ceil_remove(&mut self, v: usize) {
        let i = self.at_ceil_pos[v];
        self.at_ceil.swap_remove(i);
        if let Some(&moved) = self.at_ceil.get(i) {
            self.at_ceil_pos[moved] = i;
        }
        self.at_ceil_pos[v] = ABSENT;
    }

    fn remove(&mut self, h: usize) {
        debug_assert!(!self.used[h]);
        let i = self.pool_pos[h];
        self.pool.swap_remove(i);
        if let Some(&moved) = self.pool.get(i) {
            self.pool_pos[moved] = i;
        }
        self.used[h] = true;

        let v = self.layout.owner(h);
        let old = self.unused[v];
        let new = old - 1;
        self.unused[v] = new;
        match (self.is_light(old), self.is_light(new)) {
            (true, true) => self.light_half_edges -= 1,
            (true, false) => {
                self.light_half_edges -= 1;
                self.light.remove(&v);
            }
            (false, true) => {
                self.light_half_edges += u64::from(new);
                self.light.insert(v);
            }
            (false, false) => {}
        }
        if old == self.ceil {
            self.ceil_remove(v);
        }
        if new == self.ceil {
            self.ceil_insert(v);
        }
    }

    fn first_unused(&mut self, v: usize) -> usize {
        while self.used[self.cursor[v]] {
            self.cursor[v] += 1;
        }
        self.cursor[v]
    }

    fn category_of(&self, h: usize) -> Category {
        let u = self.unused[self.layout.owner(h)];
        if self.is_light(u) {
            Category::Light
        } else if u == self.ceil {
            Category::Upsurge
        } else {
            Category::Heavy
        }
    }

    /// Removes the smallest-index light half-edge, or `None` if none is left.
    fn take_light(&mut self) -> Option<usize> {
        let v = *self.light.first()?;
        let h = self.first_unused(v);
        self.remove(h);
        Some(h)
    }

    fn point(&self, t: usize, action: StepAction) -> TrajectoryPoint {
        TrajectoryPoint { t, s: self.light_half_edges, d: self.at_ceil.len() as u64, action }
    }

    /// The `k`-th unused half-edge of `v` in index order.
    fn nth_unused_of(&self, v: usize, k: usize) -> usize {
        self.layout.range(v).filter(|&h| !self.used[h]).nth(k).expect("slot within unused count")
    }

    fn into_outcome(
        self,
        ds: Arc<DegreeSequence>,
        c: f64,
        forced_matches: Vec<(usize, usize)>,
        trajectory: Vec<TrajectoryPoint>,
    ) -> PruneOutcome {
        let removed_vertex_count = self.unused.iter().filter(|&&u| u == 0).count();
        let reduced_vertex_count = self
            .unused
            .iter()
            .zip(ds.degrees())
            .filter(|(&u, &d)| u > 0 && u < d)
            .count();
        PruneOutcome {
            c,
            threshold: self.threshold,
            removed_edge_count: forced_matches.len(),
            forced_matches,
            residual_degrees: self.unused,
            removed_vertex_count,
            reduced_vertex_count,
            trajectory,
            degree_sequence: ds,
        }
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("C must be positive and finite, got {c}")));
    }
    Ok(())
}

/// Runs pruning to completion. The generator is `seed::stream(seed, "prune", 0)`.
pub fn prune(ds: Arc<DegreeSequence>, c: f64, seed: u64) -> Result<PruneOutcome> {
    check_c(c)?;
    let mut rng = seed::stream(seed, "prune", 0);
    let mut p = Pruner::new(&ds, c);
    let mut forced = Vec::new();
    let mut trajectory = vec![p.point(0, StepAction::Init)];
    while let Some(h) = p.take_light() {
        let partner = p.pool[rng.random_range(0..p.pool.len())];
        let action = match p.category_of(partner) {
            Category::Light => StepAction::Light,
            Category::Upsurge => StepAction::Upsurge,
            Category::Heavy => StepAction::Heavy,
        };
        p.remove(partner);
        forced.push((h, partner));
        trajectory.push(p.point(forced.len(), action));
    }
    Ok(p.into_outcome(ds, c, forced, trajectory))
}

/// Matches the residual half-edges uniformly and adds the forced pairs.
///
/// The residual ids are paired with the same seed-derived stream as
/// [`crate::confmodel::sample_matching`], so a run with no forced pairs gives
/// exactly `sample_matching(ds, seed)`.
pub fn complete_after_prune(outcome: &PruneOutcome, seed: u64) -> Matching {
    let residual = outcome.residual_half_edges();
    complete_matching(Arc::clone(&outcome.degree_sequence), &outcome.forced_matches, &residual, seed)
}

/// Chi-square uniformity of prune-then-complete matchings over all matchings
/// of a small `ds`. Trial `i` prunes with `derive(s_i, "prune", 0)` and
/// completes with `derive(s_i, "complete", 0)`, where `s_i = derive(seed, "trial", i)`.
pub fn composed_uniformity_chisquare(
    ds: &Arc<DegreeSequence>,
    c: f64,
    samples: usize,
    seed: u64,
) -> Result<ChiSquareResult> {
    check_c(c)?;
    let counts = tally_matchings(ds, samples, |i| {
        let s = seed::derive(seed, "trial", i as u64);
        let out = prune(Arc::clone(ds), c, seed::derive(s, "prune", 0)).expect("C already checked");
        complete_after_prune(&out, seed::derive(s, "complete", 0))
    })?;
    Ok(chisquare_uniform(&counts))
}

/// Removal bounds: at most `2 eps n` vertices and `4 eps C sqrt(nD)` edges.
pub fn bound_check(outcome: &PruneOutcome, epsilon: f64, c: f64) -> BoundCheck {
    let ds = &outcome.degree_sequence;
    let n = ds.n() as f64;
    let vertex_bound = 2.0 * epsilon * n;
    let edge_bound = 4.0 * epsilon * c * (n * ds.total() as f64).sqrt();
    BoundCheck {
        vertices_ok: outcome.removed_vertex_count as f64 <= vertex_bound * (1.0 + BOUND_SLACK),
        edges_ok: outcome.removed_edge_count as f64 <= edge_bound * (1.0 + BOUND_SLACK),
        cap_exceeded: outcome.cap_exceeded(epsilon),
    }
}

/// Law of the next increment of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    /// Increments `[-2, ceil(threshold) - 2, -1]`.
    pub values: [f64; 3],
    /// Matching probabilities, summing to 1.
    pub probabilities: [f64; 3],
    /// Step number `t` about to be taken.
    pub t: u64,
}

/// Increment law of `S` from a state given by the unused counts.
///
/// With `S` light half-edges, `D_t` vertices at exactly `ceil(threshold)` and
/// `R = D - 2t + 1` candidates once the light half-edge has been removed:
/// `P(-2) = (S - 1)/R`, `P(ceil - 2) = D_t ceil / R`, and the complement.
pub fn step_distribution(ds: &DegreeSequence, unused: &[u32], c: f64) -> Result<StepDistribution> {
    check_c(c)?;
    if unused.len() != ds.n() {
        return Err(Error::DimensionMismatch { expected: ds.n(), actual: unused.len() });
    }
    if let Some(v) = unused.iter().zip(ds.degrees()).position(|(u, d)| u > d) {
        return Err(Error::InvalidParameter(format!("vertex {v} has more unused half-edges than its degree")));
    }
    let remaining: u64 = unused.iter().map(|&u| u64::from(u)).sum();
    if (ds.total() - remaining) % 2 != 0 {
        return Err(Error::InvalidParameter("an odd number of half-edges has been used".into()));
    }
    let threshold = c * ds.sqrt_mean_degree();
    let ceil = threshold.ceil();
    let light: u64 = unused
        .iter()
        .filter(|&&u| u > 0 && f64::from(u) < threshold)
        .map(|&u| u64::from(u))
        .sum();
    if light == 0 {
        return Err(Error::NoLightVertex);
    }
    let at_ceil = unused.iter().filter(|&&u| f64::from(u) == ceil).count() as f64;
    let r = (remaining - 1) as f64;
    let p_light = (light - 1) as f64 / r;
    let p_up = at_ceil * ceil / r;
    Ok(StepDistribution {
        values: [-2.0, ceil - 2.0, -1.0],
        probabilities: [p_light, p_up, 1.0 - p_light - p_up],
        t: (ds.total() - remaining) / 2 + 1,
    })
}

/// A run of the dominating chain `S~_t = S~_0 + sum X~_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominatingChain {
    pub initial: f64,
    pub upsurge_size: f64,
    pub upsurge_probability: f64,
    pub cap: usize,
    /// `S~_0, S~_1, ..., S~_tau`.
    pub trajectory: Vec<f64>,
    /// First `t` with `S~_t <= 0`, or `cap` if that does not happen earlier.
    pub tau: usize,
    pub hit_zero: bool,
    /// `K eps C^2 >= 0.1`: the parameters are outside the regime where the
    /// chain is expected to stop quickly.
    pub contract_violated: bool,
}

/// Parameters `(S~_0, upsurge size, upsurge probability, cap)` of the chain for
/// `ds`: `eps C sqrt(nD)`, `C sqrt(D/n) - 1`, `4 eps n C sqrt(D/n) / D` and
/// `floor(3 eps C sqrt(nD))`.
pub fn dominating_parameters(ds: &DegreeSequence, epsilon: f64, c: f64) -> (f64, f64, f64, usize) {
    let n = ds.n() as f64;
    let d = ds.total() as f64;
    let threshold = c * ds.sqrt_mean_degree();
    let initial = epsilon * c * (n * d).sqrt();
    (initial, threshold - 1.0, 4.0 * epsilon * n * threshold / d, (3.0 * initial).floor() as usize)
}

pub fn simulate_dominating_chain<R: Rng + ?Sized>(
    initial: f64,
    upsurge_size: f64,
    upsurge_probability: f64,
    cap: usize,
    rng: &mut R,
) -> (Vec<f64>, usize, bool) {
    let mut s = initial;
    let mut trajectory = vec![s];
    if s <= 0.0 {
        return (trajectory, 0, true);
    }
    for t in 1..=cap {
        s += if rng.random::<f64>() < upsurge_probability { upsurge_size } else { -1.0 };
        trajectory.push(s);
        if s <= 0.0 {
            return (trajectory, t, true);
        }
    }
    (trajectory, cap, false)
}

/// Simulates the dominating chain for `ds`; the generator is
/// `seed::stream(seed, "dominating", 0)`.
pub fn dominating_chain_sim(ds: &DegreeSequence, epsilon: f64, c: f64, k: f64, seed: u64) -> Result<DominatingChain> {
    check_c(c)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let (initial, upsurge_size, upsurge_probability, cap) = dominating_parameters(ds, epsilon, c);
    let mut rng = seed::stream(seed, "dominating", 0);
    let (trajectory, tau, hit_zero) =
        simulate_dominating_chain(initial, upsurge_size, upsurge_probability.min(1.0), cap, &mut rng);
    Ok(DominatingChain {
        initial,
        upsurge_size,
        upsurge_probability,
        cap,
        trajectory,
        tau,
        hit_zero,
        contract_violated: k * epsilon * c * c >= 0.1,
    })
}

/// A pruning run driven by the same uniforms as a dominating chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledRun {
    pub outcome: PruneOutcome,
    /// `S~_t` for `t = 0..=steps`.
    pub dominating: Vec<f64>,
    /// `S_t <= S~_t` at every step of the pruning run.
    pub dominated: bool,
}

/// Runs pruning where step `t` draws one uniform `U`: the partner is an upsurge
/// half-edge if `U < P(upsurge)`, a light one if `U` falls in the next
/// `P(light)`, and a heavy one otherwise, uniformly within its class. This is
/// the same law as [`prune`]. The dominating increment is an upsurge exactly
/// when `U < 4 eps n C sqrt(D/n) / D`.
pub fn coupled_prune(ds: Arc<DegreeSequence>, epsilon: f64, c: f64, seed: u64) -> Result<CoupledRun> {
    check_c(c)?;
    let (initial, upsurge_size, upsurge_probability, _) = dominating_parameters(&ds, epsilon, c);
    let mut rng = seed::stream(seed, "coupled", 0);
    let mut p = Pruner::new(&ds, c);
    let mut forced = Vec::new();
    let mut trajectory = vec![p.point(0, StepAction::Init)];
    let mut dominating = vec![initial];
    let mut dominated = (trajectory[0].s as f64) <= initial;
    let mut s_tilde = initial;
    while let Some(h) = p.take_light() {
        let r = p.pool.len();
        let n_up = p.at_ceil.len() * p.ceil as usize;
        let n_light = p.light_half_edges as usize;
        let j = rng.random_range(0..r);
        let u = (j as f64 + rng.random::<f64>()) / r as f64;
        let (partner, action) = if j < n_up {
            let v = p.at_ceil[j / p.ceil as usize];
            (p.nth_unused_of(v, j % p.ceil as usize), StepAction::Upsurge)
        } else if j < n_up + n_light {
            let mut k = (j - n_up) as u64;
            let mut chosen = None;
            for &v in &p.light {
                let u = u64::from(p.unused[v]);
                if k < u {
                    chosen = Some(p.nth_unused_of(v, k as usize));
                    break;
                }
                k -= u;
            }
            (chosen.expect("light index in range"), StepAction::Light)
        } else {
            let partner = loop {
                let cand = p.pool[rng.random_range(0..r)];
                if p.category_of(cand) == Category::Heavy {
                    break cand;
                }
            };
            (partner, StepAction::Heavy)
        };
        p.remove(partner);
        forced.push((h, partner));
        trajectory.push(p.point(forced.len(), action));
        s_tilde += if u < upsurge_probability { upsurge_size } else { -1.0 };
        dominating.push(s_tilde);
        dominated &= (p.light_half_edges as f64) <= s_tilde;
    }
    Ok(CoupledRun { outcome: p.into_outcome(ds, c, forced, trajectory), dominating, dominated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    use crate::confmodel::sample_matching_shared;
    use crate::degseq::make_regular;

    fn arc(degrees: Vec<u32>) -> Arc<DegreeSequence> {
        Arc::new(DegreeSequence::new(degrees).unwrap())
    }

    fn check_invariants(out: &PruneOutcome) {
        let ds = &out.degree_sequence;
        for &r in &out.residual_degrees {
            assert!(r == 0 || f64::from(r) >= out.threshold, "residual {r} vs {}", out.threshold);
        }
        let residual: u64 = out.residual_degrees.iter().map(|&r| u64::from(r)).sum();
        assert_eq!(residual, ds.total() - 2 * out.removed_edge_count as u64);
        assert!(out.steps() as u64 <= ds.total() / 2);
        assert_eq!(out.trajectory.len(), out.steps() + 1);
        assert_eq!(out.trajectory.last().unwrap().s, 0);
        assert!(out.trajectory[..out.steps()].iter().all(|p| p.s > 0));
        // Pairs are disjoint and the first half-edge of each was light.
        let mut seen = vec![false; ds.total() as usize];
        for &(a, b) in &out.forced_matches {
            assert!(!seen[a] && !seen[b] && a != b);
            seen[a] = true;
            seen[b] = true;
        }
        // Replaying the increments reproduces S.
        let ceil = out.threshold.ceil() as i64;
        for w in out.trajectory.windows(2) {
            let delta = w[1].s as i64 - w[0].s as i64;
            let expected = match w[1].action {
                StepAction::Light => -2,
                StepAction::Upsurge => ceil - 2,
                StepAction::Heavy => -1,
                StepAction::Init => unreachable!(),
            };
            assert_eq!(delta, expected, "at t = {}", w[1].t);
        }
    }

    #[test]
    fn nothing_to_prune() {
        let out = prune(arc(vec![5, 5, 6, 6]), 1.0, 0).unwrap();
        assert_eq!(out.steps(), 0);
        assert_eq!(out.residual_degrees, vec![5, 5, 6, 6]);
        assert_eq!(out.trajectory, vec![TrajectoryPoint { t: 0, s: 0, d: 0, action: StepAction::Init }]);
        let check = bound_check(&out, 0.01, 1.0);
        assert!(check.vertices_ok && check.edges_ok && !check.cap_exceeded);
    }

    #[test]
    fn two_light_vertices() {
        let out = prune(arc(vec![1, 1]), 2.0, 3).unwrap();
        assert_eq!(out.forced_matches, vec![(0, 1)]);
        assert_eq!(out.residual_degrees, vec![0, 0]);
        assert_eq!(out.removed_edge_count, 1);
        assert_eq!(out.removed_vertex_count, 2);
        assert_eq!(out.trajectory_csv(), "t,S_t,D_t,action\n0,2,0,init\n1,0,0,light\n");
        let m = complete_after_prune(&out, 11);
        assert_eq!(m.partners(), &[1, 0]);
    }

    #[test]
    fn rejects_bad_c() {
        assert!(prune(arc(vec![1, 1]), 0.0, 0).is_err());
        assert!(prune(arc(vec![1, 1]), f64::NAN, 0).is_err());
    }

    #[test]
    fn completion_without_pruning_is_the_sampler() {
        let ds = arc(vec![3, 4, 5, 2, 6]);
        for seed in 0..20 {
            let out = prune(Arc::clone(&ds), 0.1, seed).unwrap();
            assert_eq!(out.steps(), 0);
            assert_eq!(complete_after_prune(&out, seed), sample_matching_shared(Arc::clone(&ds), seed));
        }
    }

    #[test]
    fn composed_law_is_uniform_on_small_instance() {
        // C = 2 makes both vertices of [2, 2] light (2 < 2 sqrt(2)); C = 0.5 prunes nothing.
        for c in [2.0, 0.5] {
            let result = composed_uniformity_chisquare(&arc(vec![2, 2]), c, 30_000, 17).unwrap();
            assert!(result.p_value > 1e-3, "C = {c}: {:?}", result.counts);
        }
    }

    #[test]
    fn boundary_counts_pass() {
        // 100 vertices, 2 eps n = 4 with eps = 0.02.
        let mut degrees = vec![50u32; 96];
        degrees.extend([1, 1, 1, 1]);
        let out = prune(arc(degrees), 1.0, 4).unwrap();
        check_invariants(&out);
        assert!(out.removed_vertex_count <= 4);
        let mut fake = out.clone();
        fake.removed_vertex_count = 4;
        assert!(bound_check(&fake, 0.02, 1.0).vertices_ok);
        fake.removed_vertex_count = 5;
        assert!(!bound_check(&fake, 0.02, 1.0).vertices_ok);
    }

    #[test]
    fn mixed_sequence_respects_lemma_bounds() {
        // n - 1 copies of ceil(4 C sqrt(D/n)) plus eps n vertices of degree 1.
        let (n, c, eps) = (2000usize, 2.0f64, 0.01f64);
        let light = (eps * n as f64) as usize;
        let heavy = 64u32; // 4 * C * sqrt(64) = 64
        let mut degrees = vec![heavy; n - light];
        degrees.extend(vec![1u32; light]);
        let ds = arc(degrees);
        let mut ok = 0;
        for seed in 0..100 {
            let out = prune(Arc::clone(&ds), c, seed).unwrap();
            check_invariants(&out);
            let check = bound_check(&out, eps, c);
            if check.vertices_ok && check.edges_ok {
                ok += 1;
            }
        }
        assert!(ok >= 95, "{ok}/100");
    }

    #[test]
    fn summary_json_round_trip() {
        let out = prune(arc(vec![1, 1, 9, 9, 9, 9]), 1.0, 0).unwrap();
        let summary = out.summary(Some(0.1));
        let text = serde_json::to_string(&summary).unwrap();
        let back: PruneSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, summary);
        assert_eq!(summary.residual_total, out.residual_degrees.iter().map(|&d| u64::from(d)).sum::<u64>());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn invariants_hold(degrees in prop::collection::vec(1u32..30, 2..40), c in 0.2f64..3.0, seed in any::<u64>()) {
            let mut degrees = degrees;
            if degrees.iter().map(|&d| u64::from(d)).sum::<u64>() % 2 == 1 {
                degrees[0] += 1;
            }
            let out = prune(arc(degrees), c, seed).unwrap();
            check_invariants(&out);
        }
    }

    #[test]
    fn step_distribution_examples() {
        let ds = DegreeSequence::new(vec![1, 1, 1, 1]).unwrap();
        // All remaining half-edges are light: the partner must be light.
        let dist = step_distribution(&ds, &[1, 1, 1, 1], 2.0).unwrap();
        assert_eq!(dist.probabilities, [1.0, 0.0, 0.0]);
        assert_eq!(dist.t, 1);

        let ds = DegreeSequence::new(vec![10, 10]).unwrap();
        assert!(matches!(step_distribution(&ds, &[10, 10], 1.0), Err(Error::NoLightVertex)));
        assert!(step_distribution(&ds, &[10], 1.0).is_err());
    }

    #[test]
    fn step_distribution_sums_to_one_along_runs() {
        let mut degrees = vec![12u32; 40];
        degrees.extend([1, 2, 3, 4, 5, 9, 9, 9]);
        let ds = arc(degrees);
        for seed in 0..10 {
            let out = prune(Arc::clone(&ds), 1.5, seed).unwrap();
            let mut unused = ds.degrees().to_vec();
            let layout = HalfEdgeLayout::new(&ds);
            for &(a, b) in &out.forced_matches {
                let dist = step_distribution(&ds, &unused, 1.5).unwrap();
                let total: f64 = dist.probabilities.iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(dist.probabilities.iter().all(|&p| p >= 0.0));
                unused[layout.owner(a)] -= 1;
                unused[layout.owner(b)] -= 1;
            }
        }
    }

    #[test]
    fn step_distribution_matches_simulated_first_step() {
        // 2 light vertices, 3 at ceil(threshold), the rest heavy.
        let degrees = vec![1u32, 2, 4, 4, 4, 6, 7, 8, 8, 9, 9, 10];
        let ds = arc(degrees);
        let c = 3.5 / ds.sqrt_mean_degree();
        let dist = step_distribution(&ds, ds.degrees(), c).unwrap();
        assert_eq!(dist.values, [-2.0, 2.0, -1.0]);
        let trials = 100_000;
        let mut freq = [0usize; 3];
        for seed in 0..trials {
            let out = prune(Arc::clone(&ds), c, seed as u64).unwrap();
            let idx = match out.trajectory[1].action {
                StepAction::Light => 0,
                StepAction::Upsurge => 1,
                StepAction::Heavy => 2,
                StepAction::Init => unreachable!(),
            };
            freq[idx] += 1;
        }
        for i in 0..3 {
            let p = dist.probabilities[i];
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let observed = freq[i] as f64 / trials as f64;
            assert!((observed - p).abs() <= 3.0 * sigma + 1e-12, "class {i}: {observed} vs {p}");
        }
    }

    #[test]
    fn dominating_chain_without_upsurges_is_deterministic() {
        let ds = make_regular(100, 16).unwrap();
        let chain = dominating_chain_sim(&ds, 0.0, 4.0, 10.0, 1).unwrap();
        assert_eq!(chain.initial, 0.0);
        assert_eq!(chain.tau, 0);
        let mut rng = seed::stream(0, "test", 0);
        let (traj, tau, hit) = simulate_dominating_chain(25.0, 7.0, 0.0, 100, &mut rng);
        assert_eq!(tau, 25);
        assert!(hit);
        assert_eq!(traj, (0..=25).rev().map(f64::from).collect::<Vec<_>>());
        let (_, tau, hit) = simulate_dominating_chain(25.0, 7.0, 0.0, 10, &mut rng);
        assert_eq!((tau, hit), (10, false));
    }

    #[test]
    fn dominating_chain_stopping_time() {
        // Drift per step is 4 eps C^2 - 1. With eps = 1e-3 and C = 4 the chain
        // stops near S~_0 / 0.936, well inside 2 S~_0.
        let ds = make_regular(100_000, 64).unwrap();
        let c = 4.0;
        let mut within = 0;
        for seed in 0..100 {
            let chain = dominating_chain_sim(&ds, 1e-3, c, 5.0, seed).unwrap();
            assert!(!chain.contract_violated);
            if chain.hit_zero && chain.tau as f64 <= 2.0 * chain.initial {
                within += 1;
            }
        }
        assert!(within >= 90, "{within}/100");

        // With eps = 1e-2 the drift is only -0.36, so tau~ is about 2.8 S~_0.
        let mut within = 0;
        for seed in 0..100 {
            let chain = dominating_chain_sim(&ds, 1e-2, c, 10.0, seed).unwrap();
            assert!(chain.contract_violated);
            if chain.hit_zero && chain.tau as f64 <= 2.0 * chain.initial {
                within += 1;
            }
        }
        assert!(within <= 5, "{within}/100");
    }

    #[test]
    fn coupled_runs_are_dominated() {
        // 40 light vertices, 30 at ceil(threshold), heavy vertices elsewhere.
        let n = 4000;
        let mut degrees = vec![2u32; 40];
        degrees.extend(vec![16u32; 30]);
        degrees.extend(vec![64u32; n - 70]);
        let ds = arc(degrees);
        let (eps, c) = (0.02, 2.0);
        assert_eq!((c * ds.sqrt_mean_degree()).ceil(), 16.0);
        let mut dominated = 0;
        for seed in 0..100 {
            let run = coupled_prune(Arc::clone(&ds), eps, c, seed).unwrap();
            check_invariants(&run.outcome);
            assert_eq!(run.dominating.len(), run.outcome.trajectory.len());
            if run.dominated {
                dominated += 1;
            }
        }
        assert!(dominated >= 99, "{dominated}/100");
    }

    #[test]
    fn coupled_first_step_has_prune_law() {
        let degrees = vec![1u32, 2, 4, 4, 4, 6, 7, 8, 8, 9, 9, 10];
        let ds = arc(degrees);
        let c = 3.5 / ds.sqrt_mean_degree();
        let dist = step_distribution(&ds, ds.degrees(), c).unwrap();
        let trials = 50_000;
        let mut partner_counts = vec![0usize; ds.total() as usize];
        let mut ups = 0usize;
        for seed in 0..trials {
            let run = coupled_prune(Arc::clone(&ds), 0.1, c, seed as u64).unwrap();
            partner_counts[run.outcome.forced_matches[0].1] += 1;
            if run.outcome.trajectory[1].action == StepAction::Upsurge {
                ups += 1;
            }
        }
        let p = dist.probabilities[1];
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((ups as f64 / trials as f64 - p).abs() <= 3.0 * sigma);
        // The first light half-edge is id 0; every other half-edge is an equally likely partner.
        assert_eq!(partner_counts[0], 0);
        let counts: Vec<u64> = partner_counts[1..].iter().map(|&c| c as u64).collect();
        assert!(chisquare_uniform(&counts).p_value > 1e-4);
    }
}
