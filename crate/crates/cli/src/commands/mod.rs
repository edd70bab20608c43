//! Command implementations and shared output plumbing.

mod basic;
mod model;
mod studies;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use windcast_core::evaluation::MetricsReport;

use crate::cli::{Cli, Command};
use crate::config::ExperimentConfig;

pub use studies::{denoise_study_once, missing_data_once, GapRow};

/// Runs one parsed command; any failure removes the command's partial
/// outputs before the error propagates.
pub fn run(cli: Cli) -> Result<()> {
    let mut guard = OutputGuard::new();
    let result = match cli.command {
        Command::Synth(args) => basic::synth(&args, &mut guard),
        Command::Preprocess(args) => basic::preprocess(&args, &mut guard),
        Command::Impute(args) => basic::impute(&args, &mut guard),
        Command::Convert(args) => basic::convert(&args, &mut guard),
        Command::Train(args) => model::train(&args, &mut guard),
        Command::Predict(args) => model::predict(&args, &mut guard),
        Command::Evaluate(args) => model::evaluate(&args, &mut guard),
        Command::AblateSlices(args) => studies::ablate_slices(&args, &mut guard),
        Command::MissingDataStudy(args) => studies::missing_data_study(&args, &mut guard),
        Command::DenoiseStudy(args) => studies::denoise_study(&args, &mut guard),
    };
    if result.is_ok() {
        guard.commit();
    }
    result
}

/// Tracks files written by a command so failures leave no partial outputs.
pub struct OutputGuard {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    fn new() -> Self {
        OutputGuard {
            paths: Vec::new(),
            committed: false,
        }
    }

    pub fn track(&mut self, path: PathBuf) -> PathBuf {
        self.paths.push(path.clone());
        path
    }

    pub fn track_all(&mut self, paths: Vec<PathBuf>) {
        self.paths.extend(paths);
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.paths {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}

pub(crate) fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

pub(crate) fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Renders an optional metric value; undefined cells signal the MAPE
/// division-by-zero case.
pub(crate) fn cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => "undefined".into(),
    }
}

pub(crate) const METRICS_HEADER: &str = "model,slices,mape_pct,mae,rmse";

pub(crate) struct MetricsRow {
    pub model: String,
    pub slices: usize,
    pub report: MetricsReport,
}

pub(crate) fn render_metrics_rows(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.model,
            row.slices,
            cell(row.report.mape_pct()),
            row.report.mae,
            row.report.rmse
        );
    }
    out
}

pub(crate) fn write_metrics_file(
    guard: &mut OutputGuard,
    dir: &Path,
    name: &str,
    rows: &[MetricsRow],
) -> Result<PathBuf> {
    ensure_out_dir(dir)?;
    let path = guard.track(dir.join(name));
    std::fs::write(&path, render_metrics_rows(rows))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
