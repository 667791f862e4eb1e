//! Acceptance checks. One line per criterion, nonzero exit if any fails.
//!
//! `cargo test -p cmspectra --test acceptance -- 3 7` runs only criteria 3 and 7.
//! Criterion 5 needs twenty dense eigensolves at n = 10^4 and dominates the
//! wall time (tens of minutes on one core).

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cmspectra::confmodel::{adjacency_counts, sample_matching_shared, uniformity_chisquare, uniformity_chisquare_with, Sampler};
use cmspectra::laplacian::LaplacianView;
use cmspectra::oracle::{exact_stats, monte_carlo_moment, Ratio};
use cmspectra::pruning::{bound_check, composed_uniformity_chisquare, prune};
use cmspectra::seed;
use cmspectra::spectra::{
    eigenvalues_dense, empirical_moment, ks_distance, ks_two_sample, ks_two_sample_tol, stochastic_moment, trace_moment,
    ReferenceDistribution,
};
use cmspectra::{condition_report, make_regular, make_two_valued, DegreeSequence};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, budget_secs: u64) -> bool {
    elapsed <= Duration::from_secs(budget_secs)
}

fn ds(degrees: Vec<u32>) -> DegreeSequence {
    DegreeSequence::new(degrees).expect("valid degree sequence")
}

fn graph(ds: &Arc<DegreeSequence>, graph_seed: u64) -> Arc<cmspectra::Multigraph> {
    Arc::new(adjacency_counts(&sample_matching_shared(Arc::clone(ds), graph_seed)))
}

fn dense_eigs(ds: &Arc<DegreeSequence>, a: &Arc<cmspectra::Multigraph>, subtract: bool) -> Vec<f64> {
    let view = LaplacianView::dense_with_cap(Arc::clone(ds), Arc::clone(a), subtract, ds.n()).unwrap();
    eigenvalues_dense(&view).unwrap()
}

fn same_ratio(a: Ratio, b: Ratio) -> bool {
    a.num * b.den == b.num * a.den
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    // All ordered sequences of positive degrees with even total at most 10.
    fn walk(prefix: &mut Vec<u32>, left: u32, out: &mut Vec<Vec<u32>>) {
        if !prefix.is_empty() && prefix.iter().sum::<u32>() % 2 == 0 {
            out.push(prefix.clone());
        }
        for d in 1..=left {
            prefix.push(d);
            walk(prefix, left - d, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    walk(&mut Vec::new(), 10, &mut all);
    let mut mismatches = 0usize;
    let mut pairs = 0usize;
    for degrees in &all {
        let seq = ds(degrees.clone());
        let stats = exact_stats(&seq, 1).unwrap();
        let denom = u128::from(seq.total()) - 1;
        for i in 0..seq.n() {
            for j in 0..seq.n() {
                if i == j {
                    continue;
                }
                pairs += 1;
                let want = Ratio::new(u128::from(degrees[i]) * u128::from(degrees[j]), denom);
                if !same_ratio(stats.mean(i, j), want) {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && within_budget(elapsed, 5),
        format!("{} sequences, {pairs} off-diagonal pairs, {mismatches} mismatches, {elapsed:.2?} (budget 5s)", all.len()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let seq = ds(vec![2, 2]);
    let passing = (0..100u64)
        .filter(|&s| uniformity_chisquare(&seq, 30_000, s).unwrap().p_value > 1e-3)
        .count();
    let control = uniformity_chisquare_with(&seq, 30_000, 0, Sampler::BiasedFirstPair).unwrap();
    let elapsed = start.elapsed();
    outcome(
        passing >= 99 && control.p_value < 1e-6 && within_budget(elapsed, 10),
        format!(
            "{passing}/100 seeds p > 1e-3, biased control p = {:.3e}, {elapsed:.2?} (budget 10s)",
            control.p_value
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let seq = ds(vec![2, 2, 2]);
    let exact = exact_stats(&seq, 4).unwrap();
    let mut per_k = Vec::new();
    let mut pass = true;
    for k in 1..=4u32 {
        let target = exact.moment(k, true).unwrap();
        let hits = (0..100u64)
            .filter(|&s| {
                let est = monte_carlo_moment(&seq, k, 10_000, s).unwrap();
                (est.estimate - target).abs() <= 3.0 * est.std_error
            })
            .count();
        pass &= hits >= 99;
        per_k.push(format!("k={k}: {hits}/100"));
    }
    let elapsed = start.elapsed();
    outcome(
        pass && within_budget(elapsed, 30),
        format!("{}, {elapsed:.2?} (budget 30s)", per_k.join(", ")),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let seq = Arc::new(make_regular(10_000, 100).unwrap());
    let targets = [(2u32, 1.0, 0.05), (3, 0.0, 0.05), (4, 2.0, 0.15)];
    let mut good = 0;
    let mut worst = 0.0f64;
    for s in 0..10u64 {
        let a = graph(&seq, seed::derive(s, "graph", 0));
        let view = LaplacianView::operator(Arc::clone(&seq), a, true).unwrap();
        let ok = targets.iter().all(|&(k, target, tol)| {
            let est = stochastic_moment(&view, k, 200, s).unwrap();
            let err = (est.estimate - target).abs();
            worst = worst.max(err - tol);
            err <= tol + 3.0 * est.std_error
        });
        good += usize::from(ok);
    }
    outcome(
        good >= 9,
        format!(
            "{good}/10 seeds within tolerance + 3 SE, worst excess over bare tolerance {worst:.4}, {:.2?}",
            start.elapsed()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let n = 10_000;
    let mut good = 0;
    let mut bad = 0;
    let mut rows = Vec::new();
    for s in 0..10u64 {
        let ks = |d1: u32, d2: u32| {
            let seq = Arc::new(make_two_valued(n, d1, d2, seed::derive(s, "degrees", 0)).unwrap().sequence);
            let a = graph(&seq, seed::derive(s, "graph", 0));
            ks_distance(&dense_eigs(&seq, &a, true), &ReferenceDistribution::Semicircle).unwrap()
        };
        let dense = ks(100, 500);
        let sparse = ks(10, 200);
        let ok = dense <= 0.05 && sparse >= 2.0 * dense;
        rows.push(format!("{dense:.4}/{sparse:.4}"));
        if ok {
            good += 1;
        } else {
            bad += 1;
        }
        // Stop once the 9/10 verdict is settled either way.
        if good >= 9 || bad >= 2 {
            break;
        }
    }
    outcome(
        good >= 9,
        format!(
            "{good} passing of {} seeds evaluated (KS dense/sparse: {}), {:.2?}",
            good + bad,
            rows.join(" "),
            start.elapsed()
        ),
    )
}

/// `light` vertices of small degree, the rest heavy enough that the degree
/// floor at (16, 0.01) holds.
fn mixed_sequence(n: usize, light: usize, trial: u64) -> DegreeSequence {
    let mut rng = seed::stream(trial, "acceptance_degrees", 0);
    let mut degrees: Vec<u32> = (0..n)
        .map(|v| if v < light { rng.random_range(1..=70) } else { rng.random_range(300..=340) })
        .collect();
    if degrees.iter().map(|&d| u64::from(d)).sum::<u64>() % 2 == 1 {
        degrees[n - 1] += 1;
    }
    ds(degrees)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (n, eps, c) = (10_000usize, 0.01, 4.0);
    let mut families: Vec<(&str, Box<dyn Fn(u64) -> DegreeSequence>)> = Vec::new();
    families.push(("mixed", Box::new(move |t| mixed_sequence(n, 99, t))));
    families.push((
        "ones",
        Box::new(move |_| {
            let mut d = vec![256u32; n - 100];
            d.extend(std::iter::repeat_n(1, 100));
            ds(d)
        }),
    ));
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, make) in &families {
        let mut dichotomy_violations = 0;
        let mut bounds_ok = 0;
        let mut hypothesis_ok = true;
        for t in 0..100u64 {
            let seq = make(t);
            hypothesis_ok &= condition_report(&seq, 16.0, eps).epsilon_bound_holds;
            let out = prune(Arc::new(seq), c, t).unwrap();
            dichotomy_violations += out
                .residual_degrees
                .iter()
                .filter(|&&r| r != 0 && f64::from(r) < out.threshold)
                .count();
            let check = bound_check(&out, eps, c);
            bounds_ok += usize::from(check.vertices_ok && check.edges_ok);
        }
        pass &= hypothesis_ok && dichotomy_violations == 0 && bounds_ok >= 95;
        parts.push(format!(
            "{name}: hypothesis {hypothesis_ok}, {dichotomy_violations} residual violations, bounds {bounds_ok}/100"
        ));
    }
    let elapsed = start.elapsed();
    outcome(
        pass && within_budget(elapsed, 60),
        format!("{}, {elapsed:.2?} (budget 60s)", parts.join("; ")),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let seq = Arc::new(ds(vec![2, 2]));
    let passing = (0..100u64)
        .filter(|&s| composed_uniformity_chisquare(&seq, 2.0, 30_000, s).unwrap().p_value > 1e-3)
        .count();
    outcome(passing >= 99, format!("{passing}/100 seeds p > 1e-3, {:.2?}", start.elapsed()))
}

fn fourth_moment_variance(n: usize) -> f64 {
    let d = 2 * (n as f64).sqrt().ceil() as u32;
    let seq = Arc::new(make_regular(n, d).unwrap());
    let values: Vec<f64> = (0..50u64)
        .map(|s| {
            let a = graph(&seq, seed::derive(s, "graph", 0));
            trace_moment(&LaplacianView::operator(Arc::clone(&seq), a, true).unwrap(), 4).unwrap()
        })
        .collect();
    cmspectra::numeric::sample_variance(&values)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let small = fourth_moment_variance(400);
    let large = fourth_moment_variance(1600);
    outcome(
        large < small,
        format!("var m4: n=400 {small:.3e}, n=1600 {large:.3e}, {:.2?}", start.elapsed()),
    )
}

const EIG_RESOLUTION: f64 = 1e-9;

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let n = 2000;
    let bound = 1.0 / n as f64;
    let mut worst = 0.0f64;
    let mut raw_worst = 0.0f64;
    let mut failures = 0;
    for s in 0..10u64 {
        let seq = Arc::new(make_two_valued(n, 10, 200, seed::derive(s, "degrees", 0)).unwrap().sequence);
        let a = graph(&seq, seed::derive(s, "graph", 0));
        let (sub, unsub) = (dense_eigs(&seq, &a, true), dense_eigs(&seq, &a, false));
        raw_worst = raw_worst.max(ks_two_sample(&sub, &unsub).unwrap());
        // Away from the Perron direction the two spectra coincide exactly, so
        // compare them at a resolution far above solver rounding and far below
        // the eigenvalue spacing.
        let ks = ks_two_sample_tol(&sub, &unsub, EIG_RESOLUTION).unwrap();
        worst = worst.max(ks);
        failures += usize::from(ks > bound + 1e-12);
    }
    outcome(
        failures == 0,
        format!(
            "max KS {worst:.2e} at resolution {EIG_RESOLUTION:e} (unresolved {raw_worst:.2e}) vs 1/n = {bound:.2e} over 10 seeds, {:.2?}",
            start.elapsed()
        ),
    )
}

/// Fixed before the first run; not tuned.
const PINNED_SEEDS: std::ops::Range<u64> = 0..100;

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let seq = Arc::new(make_regular(200, 20).unwrap());
    let mut hits = 0;
    let mut worst = 0.0f64;
    for s in PINNED_SEEDS {
        let a = graph(&seq, seed::derive(s, "graph", 0));
        let exact = empirical_moment(&dense_eigs(&seq, &a, true), 4);
        let view = LaplacianView::operator(Arc::clone(&seq), a, true).unwrap();
        let est = stochastic_moment(&view, 4, 400, s).unwrap();
        let z = (est.estimate - exact).abs() / est.std_error;
        worst = worst.max(z);
        hits += usize::from(z <= 3.0);
    }
    outcome(
        hits == PINNED_SEEDS.count(),
        format!("{hits}/100 seeds within 3 SE (max |z| = {worst:.2}), {:.2?}", start.elapsed()),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "exact mean identity", criterion_1),
        (2, "sampler uniformity", criterion_2),
        (3, "oracle vs Monte Carlo", criterion_3),
        (4, "semicircle moments", criterion_4),
        (5, "dense vs sparse two-valued contrast", criterion_5),
        (6, "pruning postcondition and bounds", criterion_6),
        (7, "law preservation", criterion_7),
        (8, "concentration trend", criterion_8),
        (9, "rank-1 subtraction", criterion_9),
        (10, "stochastic trace", criterion_10),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let result = run();
        println!("criterion {id:>2} {}: {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failed += usize::from(!result.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
