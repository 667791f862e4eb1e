use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use cmspectra::confmodel::{adjacency_counts, sample_matching_shared};
use cmspectra::degseq::{
    condition_report, degree_moment_diagnostic, make_regular, make_two_valued, DegreeSequence, SequenceMeta,
};
use cmspectra::laplacian::LaplacianView;
use cmspectra::oracle::{exact_stats, monte_carlo_moment, ExactStats};
use cmspectra::pruning::{bound_check, prune};
use cmspectra::seed;
use cmspectra::spectra::{
    eigenvalues_dense, ks_distance, moment_table_csv, stochastic_moment, wasserstein1, SpectralSummary,
};
use rayon::prelude::*;

use crate::config::{ConfigMode, DegreeKind, ExperimentConfig, SweepParameter};
use crate::report::{Check, Distances, MomentRow, OracleReport, OracleRow, RunReport, SequenceInfo, SweepCell};
use crate::CliError;

type Timings = BTreeMap<String, f64>;

/// Builds the degree sequence a config describes.
pub fn degree_sequence(config: &ExperimentConfig) -> Result<(DegreeSequence, SequenceMeta), CliError> {
    let meta = |generator: &str| SequenceMeta { generator: generator.into(), seed: None, parity_fixup: None };
    Ok(match config.degree_spec {
        DegreeKind::Regular => (make_regular(config.n.unwrap_or(0), config.d.unwrap_or(0))?, meta("regular")),
        DegreeKind::TwoValued => {
            let g = make_two_valued(
                config.n.unwrap_or(0),
                config.d1.unwrap_or(0),
                config.d2.unwrap_or(0),
                config.seed,
            )?;
            (g.sequence, g.meta)
        }
        DegreeKind::List => (DegreeSequence::new(config.degrees.clone().unwrap_or_default())?, meta("list")),
        DegreeKind::File => {
            let path = config.degree_file.as_ref().expect("validated");
            let ds = DegreeSequence::read_file(path)
                .map_err(|e| CliError::Validation(format!("field `degree_file` ({}): {e}", path.display())))?;
            (ds, meta("file"))
        }
    })
}

struct Run<'a> {
    command: &'a str,
    config: &'a ExperimentConfig,
    hash: String,
    out: &'a Path,
    files: BTreeMap<String, String>,
    timings: Timings,
}

impl<'a> Run<'a> {
    fn new(command: &'a str, config: &'a ExperimentConfig, out: &'a Path) -> Self {
        Self { command, config, hash: config.hash(), out, files: BTreeMap::new(), timings: Timings::new() }
    }

    fn file_name(&self, suffix: &str) -> String {
        format!("{}-{}.{suffix}", self.command, self.hash)
    }

    fn write(&mut self, role: &str, suffix: &str, contents: &str) -> Result<(), CliError> {
        let name = self.file_name(suffix);
        let path = self.out.join(&name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
        self.files.insert(role.into(), name);
        Ok(())
    }

    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = f();
        self.timings.insert(label.into(), start.elapsed().as_secs_f64());
        value
    }

    fn report(&self, ds: &DegreeSequence, meta: SequenceMeta) -> RunReport {
        RunReport {
            command: self.command.into(),
            library_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: self.hash.clone(),
            seed: self.config.seed,
            config: self.config.clone(),
            degree_sequence: SequenceInfo {
                n: ds.n(),
                total_degree: ds.total(),
                min_degree: ds.min_degree(),
                max_degree: ds.degrees().iter().copied().max().unwrap_or(0),
                generator: meta.generator,
                parity_fixup: meta.parity_fixup,
            },
            condition: condition_report(ds, self.config.c, self.config.epsilon),
            files: self.files.clone(),
            distances: None,
            moments: Vec::new(),
            prune: None,
            oracle: None,
            sweep: None,
            degree_moment_diagnostics: None,
            checks: Vec::new(),
        }
    }

    fn finish(mut self, mut report: RunReport) -> Result<RunReport, CliError> {
        let timings = serde_json::to_string_pretty(&self.timings).expect("timings serialize") + "\n";
        self.write("timings", "timings.json", &timings)?;
        self.files.insert("report".into(), self.file_name("report.json"));
        report.files = self.files.clone();
        let json = report.to_json();
        self.write("report", "report.json", &json)?;
        Ok(report)
    }
}

pub fn run_command(name: &str, config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    match name {
        "spectrum" => cmd_spectrum(config, out),
        "moments" => cmd_moments(config, out),
        "prune" => cmd_prune(config, out),
        "oracle" => cmd_oracle(config, out),
        "sweep" => cmd_sweep(config, out),
        "check-condition" => cmd_check_condition(config, out),
        other => Err(CliError::Validation(format!("unknown command {other}"))),
    }
}

fn sample_view(config: &ExperimentConfig, ds: Arc<DegreeSequence>) -> Result<LaplacianView, CliError> {
    let m = sample_matching_shared(Arc::clone(&ds), seed::derive(config.seed, "graph", 0));
    let a = Arc::new(adjacency_counts(&m));
    Ok(match config.mode {
        ConfigMode::Dense => LaplacianView::dense_with_cap(ds, a, config.subtract_rank1, config.dense_cap)?,
        ConfigMode::Operator => LaplacianView::operator(ds, a, config.subtract_rank1)?,
    })
}

fn moment_rows_from(moments: &BTreeMap<u32, f64>, config: &ExperimentConfig) -> Vec<MomentRow> {
    moments
        .iter()
        .map(|(&k, &m)| {
            let r = config.reference.moment(k);
            MomentRow { k, empirical: m, reference: r, abs_error: (m - r).abs(), std_error: None }
        })
        .collect()
}

fn stochastic_rows(view: &LaplacianView, config: &ExperimentConfig) -> Result<Vec<MomentRow>, CliError> {
    let probe_seed = seed::derive(config.seed, "probes", 0);
    let mut rows = Vec::new();
    for &k in &config.k_list {
        let r = config.reference.moment(k);
        let (estimate, std_error) = if k == 0 {
            (1.0, 0.0)
        } else {
            let e = stochastic_moment(view, k, config.probes, probe_seed)?;
            (e.estimate, e.std_error)
        };
        rows.push(MomentRow { k, empirical: estimate, reference: r, abs_error: (estimate - r).abs(), std_error: Some(std_error) });
    }
    Ok(rows)
}

fn moment_csv(rows: &[MomentRow]) -> String {
    let mut out = String::from("k,empirical,reference,abs_error\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.k, r.empirical, r.reference, r.abs_error));
    }
    out
}

fn moment_checks(rows: &[MomentRow], config: &ExperimentConfig) -> Vec<Check> {
    let Some(tol) = config.moment_tolerance else { return Vec::new() };
    rows.iter()
        .map(|r| {
            let allowed = tol + 3.0 * r.std_error.unwrap_or(0.0);
            Check {
                name: format!("moment_{}", r.k),
                passed: r.abs_error <= allowed,
                detail: format!("|{} - {}| = {} vs allowed {}", r.empirical, r.reference, r.abs_error, allowed),
            }
        })
        .collect()
}

struct SpectrumResult {
    distances: Option<Distances>,
    rows: Vec<MomentRow>,
}

fn spectrum_core(run: &mut Run, ds: Arc<DegreeSequence>) -> Result<SpectrumResult, CliError> {
    let config = run.config;
    let view = run.time("build", || sample_view(config, Arc::clone(&ds)))?;
    match config.mode {
        ConfigMode::Dense => {
            let eigs = run.time("eigensolve", || eigenvalues_dense(&view))?;
            let summary = SpectralSummary::new(eigs, &config.k_list, config.bins, (config.range[0], config.range[1]))?;
            let ks = ks_distance(&summary.eigenvalues, &config.reference)?;
            let w1 = if config.wasserstein { Some(wasserstein1(&summary.eigenvalues, &config.reference)?) } else { None };
            run.write("eigenvalues", "eigenvalues.txt", &summary.eigenvalues_text())?;
            run.write("histogram", "histogram.csv", &summary.histogram.to_csv())?;
            run.write("moments", "moments.csv", &moment_table_csv(&summary.moments, &config.reference))?;
            Ok(SpectrumResult {
                distances: Some(Distances { reference: config.reference, ks, wasserstein1: w1 }),
                rows: moment_rows_from(&summary.moments, config),
            })
        }
        ConfigMode::Operator => {
            let rows = run.time("stochastic_moments", || stochastic_rows(&view, config))?;
            run.write("moments", "moments.csv", &moment_csv(&rows))?;
            Ok(SpectrumResult { distances: None, rows })
        }
    }
}

fn ks_check(distances: &Option<Distances>, config: &ExperimentConfig) -> Option<Check> {
    let (max, d) = (config.ks_max?, distances.as_ref()?);
    Some(Check { name: "ks_max".into(), passed: d.ks <= max, detail: format!("KS {} vs max {max}", d.ks) })
}

pub fn cmd_spectrum(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut run = Run::new("spectrum", config, out);
    let (ds, meta) = degree_sequence(config)?;
    let ds = Arc::new(ds);
    let result = spectrum_core(&mut run, Arc::clone(&ds))?;
    let mut report = run.report(&ds, meta);
    report.checks.extend(ks_check(&result.distances, config));
    report.checks.extend(moment_checks(&result.rows, config));
    report.distances = result.distances;
    report.moments = result.rows;
    run.finish(report)
}

pub fn cmd_moments(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut run = Run::new("moments", config, out);
    let (ds, meta) = degree_sequence(config)?;
    let ds = Arc::new(ds);
    let view = run.time("build", || sample_view(config, Arc::clone(&ds)))?;
    let rows = match config.mode {
        ConfigMode::Dense => {
            let eigs = run.time("eigensolve", || eigenvalues_dense(&view))?;
            let moments = config.k_list.iter().map(|&k| (k, cmspectra::spectra::empirical_moment(&eigs, k))).collect();
            moment_rows_from(&moments, config)
        }
        ConfigMode::Operator => run.time("stochastic_moments", || stochastic_rows(&view, config))?,
    };
    run.write("moments", "moments.csv", &moment_csv(&rows))?;
    let mut report = run.report(&ds, meta);
    report.checks = moment_checks(&rows, config);
    report.moments = rows;
    run.finish(report)
}

pub fn cmd_prune(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut run = Run::new("prune", config, out);
    let (ds, meta) = degree_sequence(config)?;
    let ds = Arc::new(ds);
    let outcome = run.time("prune", || prune(Arc::clone(&ds), config.c, seed::derive(config.seed, "prune", 0)))?;
    let summary = outcome.summary(Some(config.epsilon));
    run.write("trajectory", "trajectory.csv", &outcome.trajectory_csv())?;
    run.write("summary", "summary.json", &(serde_json::to_string_pretty(&summary).expect("serializes") + "\n"))?;
    let check = bound_check(&outcome, config.epsilon, config.c);
    let dichotomy = outcome.residual_degrees.iter().all(|&r| r == 0 || f64::from(r) >= outcome.threshold);
    let mut report = run.report(&ds, meta);
    report.checks = vec![
        Check { name: "residual_dichotomy".into(), passed: dichotomy, detail: format!("threshold {}", outcome.threshold) },
        Check {
            name: "removed_vertices".into(),
            passed: check.vertices_ok,
            detail: format!("{} vs 2 eps n = {}", outcome.removed_vertex_count, 2.0 * config.epsilon * ds.n() as f64),
        },
        Check {
            name: "removed_edges".into(),
            passed: check.edges_ok,
            detail: format!(
                "{} vs 4 eps C sqrt(nD) = {}",
                outcome.removed_edge_count,
                4.0 * config.epsilon * config.c * (ds.n() as f64 * ds.total() as f64).sqrt()
            ),
        },
    ];
    report.prune = Some(summary);
    run.finish(report)
}

pub fn cmd_oracle(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut run = Run::new("oracle", config, out);
    let (ds, meta) = degree_sequence(config)?;
    let exact = run.time("enumerate", || exact_stats(&ds, config.max_k))?;
    let command = format!(
        "cmspectra oracle --degrees {} --max-k {}",
        ds.degrees().iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        config.max_k
    );
    run.write("golden", "golden.json", &exact.to_golden_json(&command))?;
    let mc_seed = seed::derive(config.seed, "oracle", 0);
    let mut rows = Vec::new();
    for &k in config.k_list.iter().filter(|&&k| k >= 1) {
        let Some(target) = exact.moment(k, true) else {
            return Err(CliError::Validation(format!("field `k_list`: k = {k} exceeds max_k = {}", config.max_k)));
        };
        let e = run.time(&format!("monte_carlo_k{k}"), || monte_carlo_moment(&ds, k, config.samples, mc_seed))?;
        rows.push(OracleRow {
            k,
            exact: target,
            monte_carlo: e.estimate,
            std_error: e.std_error,
            within_3se: (e.estimate - target).abs() <= 3.0 * e.std_error,
        });
    }
    let golden_max_deviation = match &config.golden {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            Some(golden_deviation(&ExactStats::from_golden_json(&text)?, &exact)?)
        }
        None => None,
    };
    let mut report = run.report(&ds, meta);
    report.checks = rows
        .iter()
        .map(|r| Check {
            name: format!("monte_carlo_k{}", r.k),
            passed: r.within_3se,
            detail: format!("exact {} vs {} +- {}", r.exact, r.monte_carlo, r.std_error),
        })
        .collect();
    if let Some(dev) = golden_max_deviation {
        report.checks.push(Check { name: "golden".into(), passed: dev <= 1e-12, detail: format!("max deviation {dev}") });
    }
    report.oracle = Some(OracleReport { matching_count: exact.matching_count, rows, golden_max_deviation });
    run.finish(report)
}

fn golden_deviation(golden: &ExactStats, exact: &ExactStats) -> Result<f64, CliError> {
    if golden.degrees != exact.degrees || golden.matching_count != exact.matching_count || golden.adjacency != exact.adjacency {
        return Ok(f64::INFINITY);
    }
    let mut dev = 0.0f64;
    for (map_g, map_e) in [
        (&golden.moments_subtracted, &exact.moments_subtracted),
        (&golden.moments_unsubtracted, &exact.moments_unsubtracted),
    ] {
        for (k, v) in map_e {
            match map_g.get(k) {
                Some(g) => dev = dev.max((g - v).abs()),
                None => return Ok(f64::INFINITY),
            }
        }
    }
    Ok(dev)
}

pub fn cmd_sweep(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Validation("field `sweep`: sweep needs a parameter grid".into()))?;
    if sweep.values.is_empty() {
        return Err(CliError::Validation("field `sweep.values`: empty parameter grid".into()));
    }
    let mut cell_configs = Vec::new();
    for &v in &sweep.values {
        let mut c = config.clone();
        c.sweep = None;
        let narrow = || u32::try_from(v).map_err(|_| CliError::Validation(format!("sweep value {v} too large")));
        match sweep.parameter {
            SweepParameter::N => c.n = Some(v as usize),
            SweepParameter::D => c.d = Some(narrow()?),
            SweepParameter::D1 => c.d1 = Some(narrow()?),
            SweepParameter::D2 => c.d2 = Some(narrow()?),
        }
        c.validate()?;
        cell_configs.push(c);
    }
    let start = Instant::now();
    let cells: Vec<RunReport> =
        cell_configs.par_iter().map(|c| cmd_spectrum(c, out)).collect::<Result<_, CliError>>()?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut run = Run::new("sweep", config, out);
    run.timings.insert("cells".into(), elapsed);
    let summaries: Vec<SweepCell> = sweep
        .values
        .iter()
        .zip(&cells)
        .map(|(&value, r)| SweepCell {
            value,
            config_hash: r.config_hash.clone(),
            ks: r.distances.as_ref().map(|d| d.ks),
            moments: r.moments.iter().map(|m| (m.k, m.empirical)).collect(),
        })
        .collect();
    let mut csv = String::from("value,config_hash,ks");
    for k in &config.k_list {
        csv.push_str(&format!(",m{k}"));
    }
    csv.push('\n');
    for cell in &summaries {
        csv.push_str(&format!("{},{},{}", cell.value, cell.config_hash, cell.ks.map_or(String::new(), |k| k.to_string())));
        for k in &config.k_list {
            csv.push_str(&format!(",{}", cell.moments.get(k).map_or(String::new(), |m| m.to_string())));
        }
        csv.push('\n');
    }
    run.write("aggregate", "aggregate.csv", &csv)?;

    let (ds, meta) = degree_sequence(&cell_configs[0])?;
    let mut report = run.report(&ds, meta);
    let ks: Vec<Option<f64>> = summaries.iter().map(|c| c.ks).collect();
    if ks.iter().all(Option::is_some) && ks.len() >= 2 {
        let ks: Vec<f64> = ks.into_iter().flatten().collect();
        report.checks.push(Check {
            name: "ks_decreasing".into(),
            passed: ks.windows(2).all(|w| w[1] < w[0]),
            detail: format!("{ks:?}"),
        });
    }
    for (cell, r) in summaries.iter().zip(&cells) {
        for c in &r.checks {
            report.checks.push(Check { name: format!("{}[{}]", c.name, cell.value), ..c.clone() });
        }
    }
    report.sweep = Some(summaries);
    run.finish(report)
}

pub fn cmd_check_condition(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let run = Run::new("check-condition", config, out);
    let (ds, meta) = degree_sequence(config)?;
    let mut report = run.report(&ds, meta);
    report.degree_moment_diagnostics = Some((1..=4).map(|m| (m, degree_moment_diagnostic(&ds, m))).collect());
    report.checks.push(Check {
        name: "epsilon_bound".into(),
        passed: report.condition.epsilon_bound_holds,
        detail: format!(
            "fraction below {} is {} vs epsilon {}",
            report.condition.threshold, report.condition.fraction_below, config.epsilon
        ),
    });
    run.finish(report)
}
