//! The privatization pipeline, stage by stage.

use std::fmt;

use mapfilt_core::allpass::{frf_to_coeffs, map_frf, verify_smap};
use mapfilt_core::factorize::{bauer_factorize, spectral_root_grid, RootGrid, VmaFactor};
use mapfilt_core::io::{FilterFile, SeriesTable};
use mapfilt_core::privacy::{optimize, privacy_report, CriterionContext, OptResult, PrivacyReport};
use mapfilt_core::series::{apply_filter, difference, forecast_extend, integrate, sample_acvf, MultiSeries};
use mapfilt_core::spectral::{
    conditional_spectrum, default_maxlag, flat_top_estimate, pd_truncate, spectrum_to_acvf, FreqGrid, SpectralGrid,
    SpectrumKind, TaperSpec,
};
use mapfilt_core::Error;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Differencing,
    SpectralEstimation,
    ConditionalSpectrum,
    Factorization,
    Optimization,
    FilterDesign,
    Filtering,
    Integration,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "configuration",
            Stage::Differencing => "differencing",
            Stage::SpectralEstimation => "spectral estimation",
            Stage::ConditionalSpectrum => "conditional spectrum",
            Stage::Factorization => "spectral factorization",
            Stage::Optimization => "optimization",
            Stage::FilterDesign => "filter design",
            Stage::Filtering => "filtering",
            Stage::Integration => "integration",
            Stage::Report => "report",
        })
    }
}

/// A core error tagged with the pipeline stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("{stage} failed: {source}{}", hint(*.stage, .source))]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

fn hint(stage: Stage, err: &Error) -> &'static str {
    match (stage, err) {
        (Stage::Differencing, Error::InvalidLength(_)) => {
            " (hint: the series is too short for the differencing orders)"
        }
        (Stage::ConditionalSpectrum, Error::Conditioning { .. }) => {
            " (hint: auxiliary channels are nearly collinear; drop one or raise taper.eps)"
        }
        (Stage::Factorization, _) => " (hint: raise taper.eps, maxlag or toeplitz_size)",
        (Stage::Optimization, _) => " (hint: the spectral estimate may be ill-conditioned; raise taper.eps)",
        (Stage::FilterDesign, Error::SymmetryViolation { .. }) => " (hint: use a larger grid_size)",
        _ => "",
    }
}

impl StageError {
    pub fn is_numerical(&self) -> bool {
        self.source.is_numerical()
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for mapfilt_core::Result<T> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Spectral quantities estimated from a centered series.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub maxlag: usize,
    pub taper: TaperSpec,
    /// True when the eigenvalue floor changed the raw lag-window estimate.
    pub floored: bool,
    pub joint: SpectralGrid,
    pub s_x: SpectralGrid,
    pub factor: VmaFactor,
    pub roots: RootGrid,
    pub ctx: CriterionContext,
}

/// Estimates the criterion context of a centered series whose first `nx`
/// channels are confidential.
pub fn estimate(w: &MultiSeries, cfg: &PipelineConfig) -> Result<Estimate, StageError> {
    let len = w.len();
    let nx = cfg.nx;
    let defaults = TaperSpec::for_length(len);
    let taper = TaperSpec::new(
        cfg.taper.bandwidth.unwrap_or(defaults.bandwidth),
        cfg.taper.eps.unwrap_or(defaults.eps),
    )
    .at(Stage::Config)?;
    let maxlag = cfg.maxlag.unwrap_or_else(|| default_maxlag(len)).min(len - 1);
    let grid = FreqGrid::new(cfg.grid_size).at(Stage::Config)?;

    let acvf = sample_acvf(w, maxlag).at(Stage::SpectralEstimation)?;
    let raw = flat_top_estimate(&acvf, &grid, &taper).at(Stage::SpectralEstimation)?;
    let floored = raw.min_eigenvalue() < taper.eps;
    let joint = pd_truncate(&raw, taper.eps);
    let s_cond = conditional_spectrum(&joint, nx).at(Stage::ConditionalSpectrum)?;
    let channels: Vec<usize> = (0..nx).collect();
    let s_x = joint
        .select(&channels, SpectrumKind::Marginal)
        .at(Stage::Factorization)?;

    let factor = factorize_grid(&s_x, maxlag, cfg.toeplitz_size).at(Stage::Factorization)?;
    let roots = spectral_root_grid(&factor, &grid).at(Stage::Factorization)?;
    let ctx = CriterionContext::new(s_cond, roots.clone()).at(Stage::Optimization)?;
    Ok(Estimate {
        maxlag,
        taper,
        floored,
        joint,
        s_x,
        factor,
        roots,
        ctx,
    })
}

/// Factors a grid spectrum through its implied autocovariances, starting at
/// order `q` and doubling while the truncated spectrum is not positive definite.
pub fn factorize_grid(s: &SpectralGrid, q: usize, toeplitz: Option<usize>) -> mapfilt_core::Result<VmaFactor> {
    let limit = s.len() / 2;
    let mut q = q.clamp(1, limit);
    loop {
        let acvf = spectrum_to_acvf(s, q)?;
        let m = toeplitz.unwrap_or_else(|| (40 * q).min(2000)).max(5 * q);
        match bauer_factorize(&acvf, m, s.grid()) {
            Err(Error::Conditioning { .. } | Error::NotPositiveDefinite { .. }) if q < limit => {
                log::info!(
                    "order {q} truncation is not positive definite; retrying with {}",
                    (2 * q).min(limit)
                );
                q = (2 * q).min(limit);
            }
            other => return other,
        }
    }
}

/// Run diagnostics that accompany the privacy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub length: usize,
    pub maxlag: usize,
    pub bandwidth: usize,
    pub eps: f64,
    pub floored: bool,
    pub grid_size: usize,
    pub factor_order: usize,
    pub factor_rel_error: f64,
    pub halfwidth: usize,
    pub tail_norm: f64,
    pub extension_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub report: PrivacyReport,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct Privatized {
    /// Released confidential channels on the original scale and time labels.
    pub y: SeriesTable,
    pub report: RunReport,
    pub filter: FilterFile,
    pub opt: OptResult,
    pub estimate: Estimate,
    /// Differenced confidential channels, before and after filtering.
    pub detrended_x: MultiSeries,
    pub detrended_y: MultiSeries,
}

/// Runs the full pipeline on `table`, releasing its first `cfg.nx` channels.
pub fn privatize(table: &SeriesTable, cfg: &PipelineConfig) -> Result<Privatized, StageError> {
    cfg.validate().at(Stage::Config)?;
    cfg.validate_partition(table.series.dim()).at(Stage::Config)?;
    let nx = cfg.nx;
    let channels: Vec<usize> = (0..nx).collect();

    let (w, state) = difference(&table.series, &cfg.diff).at(Stage::Differencing)?;
    let mean = w.mean();
    let wc = w.shifted(&mean).at(Stage::Differencing)?;
    let est = estimate(&wc, cfg)?;

    let opt = optimize(&est.ctx, cfg.order, &cfg.optimizer).at(Stage::Optimization)?;
    let frf = map_frf(&opt.theta_opt, &est.roots).at(Stage::FilterDesign)?;
    let smap_error = verify_smap(&frf, &est.s_x).at(Stage::FilterDesign)?;
    let filter = frf_to_coeffs(&frf, cfg.tail_tol).at(Stage::FilterDesign)?;

    let x = wc.select(&channels).at(Stage::Filtering)?;
    let acvf_x = sample_acvf(&x, est.maxlag).at(Stage::Filtering)?;
    let ext = forecast_extend(&x, &acvf_x, filter.halfwidth()).at(Stage::Filtering)?;
    let y_centered = apply_filter(&ext.series, &filter).at(Stage::Filtering)?;

    let mean_x = mean.rows(0, nx).into_owned();
    let y_diff = y_centered.shifted(&(-mean_x)).at(Stage::Integration)?;
    let state_x = state.select(&channels).at(Stage::Integration)?;
    let y = integrate(&y_diff, &state_x, &cfg.diff).at(Stage::Integration)?;

    let mut report = privacy_report(&x, &y_centered, &opt, smap_error, cfg.report_lag).at(Stage::Report)?;
    if cfg.timings {
        report.runtime_secs = Some(opt.wall_time.as_secs_f64());
    }
    let diagnostics = Diagnostics {
        length: table.series.len(),
        maxlag: est.maxlag,
        bandwidth: est.taper.bandwidth,
        eps: est.taper.eps,
        floored: est.floored,
        grid_size: cfg.grid_size,
        factor_order: est.factor.q(),
        factor_rel_error: est.factor.recon_rel_error(),
        halfwidth: filter.halfwidth(),
        tail_norm: filter.tail_norm(),
        extension_fallback: ext.fallback,
    };
    let filter_file = FilterFile::new(&filter, &opt.theta_opt, smap_error);
    Ok(Privatized {
        y: SeriesTable {
            times: table.times.clone(),
            series: y,
        },
        report: RunReport { report, diagnostics },
        filter: filter_file,
        opt,
        estimate: est,
        detrended_x: x,
        detrended_y: y_centered,
    })
}
