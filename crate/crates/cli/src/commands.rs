//! The four subcommands; each writes its artifacts into an output directory.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use mapfilt_core::io::{read_json, read_series_csv, write_json, write_series_csv, write_series_csv_to, SeriesTable};
use mapfilt_core::privacy::{correlation_tables, nfd, BatchSummary, CorrelationTable};
use mapfilt_core::series::sample_acvf;
use mapfilt_core::sim::ModelFile;
use mapfilt_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::pipeline::{privatize, StageError};

/// Failure of a command, with the exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Stage(#[from] StageError),
}

impl CommandError {
    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        let numerical = match self {
            CommandError::Core(e) => e.is_numerical(),
            CommandError::Stage(e) => e.is_numerical(),
        };
        if numerical {
            2
        } else {
            1
        }
    }
}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Writes `acf.csv` (`channel,lag,original,privatized`) and
/// `ccf.csv` (`first,second,lag,original,privatized`).
pub fn write_correlation_csvs(out: &Path, tables: &[CorrelationTable]) -> Result<()> {
    let mut acf = csv::Writer::from_path(out.join("acf.csv")).map_err(Error::from)?;
    acf.write_record(["channel", "lag", "original", "privatized"])?;
    let mut ccf = csv::Writer::from_path(out.join("ccf.csv")).map_err(Error::from)?;
    ccf.write_record(["first", "second", "lag", "original", "privatized"])?;
    for t in tables {
        for ((lag, o), p) in t.lags.iter().zip(&t.original).zip(&t.privatized) {
            let (lag, o, p) = (lag.to_string(), o.to_string(), p.to_string());
            if t.kind == "acf" {
                acf.write_record([t.first.as_str(), &lag, &o, &p])?;
            } else {
                ccf.write_record([t.first.as_str(), t.second.as_str(), &lag, &o, &p])?;
            }
        }
    }
    acf.flush()?;
    ccf.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub privacy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: ModelFile,
    pub length: usize,
    pub burnin: usize,
    pub seed: u64,
    pub replicates: Vec<ManifestEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub privacy: Option<BatchSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rum: Option<BatchSummary>,
}

/// Seed of replicate `i`.
pub fn replicate_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Simulates `cfg.reps` replicates of the model; with `privatize_reps` each is
/// also run through the pipeline and the manifest summarizes privacy and utility.
pub fn simulate(
    model_path: &Path,
    cfg: &PipelineConfig,
    seed: u64,
    out: &Path,
    privatize_reps: bool,
) -> CommandResult<Manifest> {
    cfg.validate()?;
    let file: ModelFile = read_json(model_path)?;
    let model = file.clone().into_model()?;
    ensure_dir(out)?;
    let width = cfg.reps.to_string().len().max(3);
    let mut entries = Vec::with_capacity(cfg.reps);
    for i in 0..cfg.reps {
        let rep_seed = replicate_seed(seed, i);
        let series = model.simulate(cfg.length, rep_seed, cfg.burnin)?;
        let table = SeriesTable::indexed(series);
        let name = format!("rep_{i:0width$}.csv");
        write_series_csv(&out.join(&name), &table)?;
        let (privacy, rum) = if privatize_reps {
            let mut run_cfg = cfg.clone();
            run_cfg.optimizer.seed = rep_seed;
            let run = privatize(&table, &run_cfg)?;
            (Some(run.report.report.privacy), Some(run.report.report.rum))
        } else {
            (None, None)
        };
        log::info!("replicate {i} (seed {rep_seed}) written to {name}");
        entries.push(ManifestEntry {
            file: name,
            seed: rep_seed,
            privacy,
            rum,
        });
    }
    let collect = |f: fn(&ManifestEntry) -> Option<f64>| -> Option<BatchSummary> {
        let values: Option<Vec<f64>> = entries.iter().map(f).collect();
        values.and_then(|v| BatchSummary::from_values(&v))
    };
    let manifest = Manifest {
        model: file,
        length: cfg.length,
        burnin: cfg.burnin,
        seed,
        privacy: collect(|e| e.privacy),
        rum: collect(|e| e.rum),
        replicates: entries,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Output files of `privatize`.
pub fn privatize_outputs(out: &Path) -> [PathBuf; 5] {
    ["privatized.csv", "report.json", "filter.json", "acf.csv", "ccf.csv"].map(|f| out.join(f))
}

pub fn privatize_file(input: &Path, cfg: &PipelineConfig, out: &Path) -> CommandResult<crate::pipeline::Privatized> {
    let table = read_series_csv(input)?;
    let run = privatize(&table, cfg)?;
    ensure_dir(out)?;
    write_series_csv(&out.join("privatized.csv"), &run.y)?;
    write_json(&out.join("report.json"), &run.report)?;
    write_json(&out.join("filter.json"), &run.filter)?;
    write_correlation_csvs(out, &run.report.report.tables)?;
    Ok(run)
}

pub fn qwi_ingest(input: &Path, counties: &[String], measure: &str, out: &Path) -> CommandResult<SeriesTable> {
    let table = crate::qwi::ingest(File::open(input).map_err(Error::from)?, counties, measure)?;
    ensure_dir(out)?;
    let mut buf = Vec::new();
    write_series_csv_to(&mut buf, &table)?;
    fs::write(out.join("qwi_series.csv"), buf).map_err(Error::from)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rum: f64,
    pub nfd: f64,
    pub lag: usize,
    pub tables: Vec<CorrelationTable>,
}

/// Utility metrics of `y` against `x` (same shape) up to lag `lag`.
pub fn evaluate(x_path: &Path, y_path: &Path, lag: usize, out: &Path) -> CommandResult<Metrics> {
    let x: SeriesTable = read_series_csv(x_path)?;
    let y: SeriesTable = read_series_csv(y_path)?;
    if x.series.len() != y.series.len() || x.series.dim() != y.series.dim() {
        return Err(Error::Shape(format!(
            "x is {}x{} but y is {}x{}",
            x.series.len(),
            x.series.dim(),
            y.series.len(),
            y.series.dim()
        ))
        .into());
    }
    let lag = lag.min(x.series.len() - 1);
    let d = nfd(&sample_acvf(&x.series, lag)?, &sample_acvf(&y.series, lag)?)?;
    let metrics = Metrics {
        rum: 1.0 - d,
        nfd: d,
        lag,
        tables: correlation_tables(&x.series, &y.series, lag)?,
    };
    ensure_dir(out)?;
    write_json(&out.join("metrics.json"), &metrics)?;
    write_correlation_csvs(out, &metrics.tables)?;
    Ok(metrics)
}
