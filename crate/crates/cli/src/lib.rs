//! Experiment runner: reads a TOML config, applies flag overrides, runs one
//! subcommand and writes CSV/JSON outputs named after the config hash.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{ConfigMode, DegreeKind, ExperimentConfig, Sweep, SweepParameter};
pub use report::RunReport;

/// The only environment variable read: default output directory.
pub const OUTPUT_DIR_VAR: &str = "CMSPECTRA_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Library(#[from] cmspectra::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("acceptance check failed: {0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) | Self::Library(_) => 2,
            Self::Assertion(_) => 3,
            Self::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cmspectra", version, about = "Configuration-model spectra experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one graph, solve or estimate its spectrum, compare with the reference law.
    Spectrum(CommonArgs),
    /// Empirical moments against the reference moments.
    Moments(CommonArgs),
    /// Run light-vertex pruning and check the removal bounds.
    Prune(CommonArgs),
    /// Exact enumeration against Monte-Carlo for a tiny degree sequence.
    Oracle(CommonArgs),
    /// Run the spectrum command over a parameter grid.
    Sweep(CommonArgs),
    /// Degree-floor diagnostics at (C, epsilon).
    CheckCondition(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML experiment config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $CMSPECTRA_OUT, else ./cmspectra-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with status 3 when a configured threshold check fails.
    #[arg(long = "assert")]
    pub assert_thresholds: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub degree_spec: Option<KindArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub d1: Option<u32>,
    #[arg(long)]
    pub d2: Option<u32>,
    /// Comma-separated degrees; implies `--degree-spec list`.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<u32>>,
    /// Implies `--degree-spec file`.
    #[arg(long)]
    pub degree_file: Option<PathBuf>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "k", value_delimiter = ',')]
    pub k_list: Option<Vec<u32>>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub range: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub subtract_rank1: Option<bool>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub dense_cap: Option<usize>,
    #[arg(long)]
    pub wasserstein: Option<bool>,
    /// Kesten–McKay degree for the reference law (default: semicircle).
    #[arg(long)]
    pub kesten_mckay: Option<u32>,
    #[arg(long)]
    pub max_k: Option<u32>,
    #[arg(long)]
    pub ks_max: Option<f64>,
    #[arg(long)]
    pub moment_tolerance: Option<f64>,
    #[arg(long)]
    pub golden: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub sweep_parameter: Option<SweepArg>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_values: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum KindArg {
    Regular,
    #[value(name = "two_valued", alias = "two-valued")]
    TwoValued,
    List,
    File,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ModeArg {
    Dense,
    Operator,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SweepArg {
    N,
    D,
    D1,
    D2,
}

impl Overrides {
    fn kind(&self) -> Option<DegreeKind> {
        self.degree_spec
            .map(|k| match k {
                KindArg::Regular => DegreeKind::Regular,
                KindArg::TwoValued => DegreeKind::TwoValued,
                KindArg::List => DegreeKind::List,
                KindArg::File => DegreeKind::File,
            })
            .or(self.degrees.as_ref().map(|_| DegreeKind::List))
            .or(self.degree_file.as_ref().map(|_| DegreeKind::File))
    }

    /// Applies every flag that was given.
    pub fn apply(&self, c: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(k) = self.kind() {
            c.degree_spec = k;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone().into();
                }
            )*};
        }
        set!(n, d, d1, d2, degrees, degree_file, golden, ks_max, moment_tolerance);
        set!(c, epsilon, k_list, bins, samples, probes, seed, subtract_rank1, dense_cap, wasserstein, max_k);
        if let Some(r) = &self.range {
            c.range = [r[0], r[1]];
        }
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Dense => ConfigMode::Dense,
                ModeArg::Operator => ConfigMode::Operator,
            };
        }
        if let Some(d) = self.kesten_mckay {
            c.reference = cmspectra::spectra::ReferenceDistribution::kesten_mckay(d)?;
        }
        match (self.sweep_parameter, &self.sweep_values) {
            (None, None) => {}
            (p, v) => {
                let parameter = match p {
                    Some(SweepArg::N) => SweepParameter::N,
                    Some(SweepArg::D) => SweepParameter::D,
                    Some(SweepArg::D1) => SweepParameter::D1,
                    Some(SweepArg::D2) => SweepParameter::D2,
                    None => c.sweep.as_ref().map(|s| s.parameter).ok_or_else(|| {
                        CliError::Validation("--sweep-values needs --sweep-parameter".into())
                    })?,
                };
                let values = v.clone().or_else(|| c.sweep.as_ref().map(|s| s.values.clone())).unwrap_or_default();
                c.sweep = Some(Sweep { parameter, values });
            }
        }
        Ok(())
    }
}

/// Config from `--config` (or defaults) with flag overrides, validated.
pub fn resolve_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let kind = args.overrides.kind().ok_or_else(|| {
                CliError::Validation("no --config given and no degree sequence flags (--degree-spec, --degrees, --degree-file)".into())
            })?;
            ExperimentConfig::new(kind)
        }
    };
    args.overrides.apply(&mut config)?;
    config.validate()?;
    Ok(config)
}

pub fn output_dir(args: &CommonArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cmspectra-out"))
}

/// Runs one parsed command; returns the report written.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let (name, args) = match &cli.command {
        Command::Spectrum(a) => ("spectrum", a),
        Command::Moments(a) => ("moments", a),
        Command::Prune(a) => ("prune", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Sweep(a) => ("sweep", a),
        Command::CheckCondition(a) => ("check-condition", a),
    };
    let config = resolve_config(args)?;
    let out = output_dir(args);
    std::fs::create_dir_all(&out).map_err(|source| CliError::Io { path: out.clone(), source })?;
    let report = commands::run_command(name, &config, &out)?;
    if args.assert_thresholds {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if !failed.is_empty() {
            return Err(CliError::Assertion(failed.join(", ")));
        }
    }
    Ok(report)
}
