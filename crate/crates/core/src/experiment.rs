//! Named experiments and their CSV output.
//!
//! | name           | rows                                                        |
//! |----------------|-------------------------------------------------------------|
//! | `fig5`         | every configured scheme at `femto_count` FAPs               |
//! | `fig6`         | every configured scheme at every entry of `densities`       |
//! | `son-ablation` | dynamic re-use at `femto_count` FAPs with greedy, uniformly random and single shared edge slices |
//!
//! The CSV starts with `#` lines holding the tool version, experiment name,
//! config hash, seed and every config key, followed by a header row and one
//! row per (scheme, density).

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::outage::{density_sweep, SweepRow, SweepVariant};
use crate::son::EdgeAssignment;
use crate::spectrum::Scheme;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const CSV_COLUMNS: [&str; 7] = [
    "scheme",
    "density",
    "p_out_closed",
    "p_out_mc",
    "ci95",
    "n_trials",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig5,
    Fig6,
    SonAblation,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::Fig5, Experiment::Fig6, Experiment::SonAblation];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig5 => "fig5",
            Experiment::Fig6 => "fig6",
            Experiment::SonAblation => "son-ablation",
        }
    }

    fn grid(&self, config: &ExperimentConfig) -> (Vec<usize>, Vec<SweepVariant>) {
        match self {
            Experiment::Fig5 => (
                vec![config.femto_count],
                config
                    .schemes
                    .iter()
                    .copied()
                    .map(SweepVariant::new)
                    .collect(),
            ),
            Experiment::Fig6 => (
                config.densities.clone(),
                config
                    .schemes
                    .iter()
                    .copied()
                    .map(SweepVariant::new)
                    .collect(),
            ),
            Experiment::SonAblation => (
                vec![config.femto_count],
                [
                    EdgeAssignment::Greedy,
                    EdgeAssignment::UniformRandom,
                    EdgeAssignment::Shared,
                ]
                .into_iter()
                .map(|edges| SweepVariant {
                    scheme: Scheme::DynamicReuse,
                    edges,
                })
                .collect(),
            ),
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown experiment `{s}`, expected fig5, fig6 or son-ablation"
                ))
            })
    }
}

/// Validates `config` and runs `experiment` on the current rayon pool.
pub fn run(experiment: Experiment, config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let (densities, variants) = experiment.grid(config);
    density_sweep(
        &densities,
        &variants,
        &config.sweep_setup(),
        &config.outage(),
        &config.propagation(),
        config.seed,
    )
}

/// As [`run`], on a dedicated pool of `workers` threads. Results do not
/// depend on the worker count.
pub fn run_with_workers(
    experiment: Experiment,
    config: &ExperimentConfig,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| run(experiment, config))
}

pub fn write_csv<W: Write>(
    rows: &[SweepRow],
    experiment: Experiment,
    config: &ExperimentConfig,
    mut out: W,
) -> Result<()> {
    writeln!(out, "# tool = {TOOL_VERSION}")?;
    writeln!(out, "# experiment = {experiment}")?;
    writeln!(out, "# config_hash = {}", config.hash())?;
    writeln!(out, "# seed = {}", config.seed)?;
    for (k, v) in config.entries() {
        writeln!(out, "# config.{k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.density.to_string(),
            r.estimate.p_out_closed.to_string(),
            r.estimate.p_out_mc.to_string(),
            r.estimate.ci95_halfwidth.to_string(),
            r.estimate.n_trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the CSV to a temporary file next to `path` and renames it into
/// place, so `path` either holds a complete file or is left untouched.
pub fn write_csv_file(
    path: &Path,
    rows: &[SweepRow],
    experiment: Experiment,
    config: &ExperimentConfig,
) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    write_csv(
        rows,
        experiment,
        config,
        std::io::BufWriter::new(tmp.as_file_mut()),
    )?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Recovers the config from the `# config.key = value` lines of a result CSV.
pub fn config_from_csv(text: &str) -> Result<ExperimentConfig> {
    let body: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# config."))
        .map(|l| format!("{l}\n"))
        .collect();
    ExperimentConfig::parse(&body)
}
