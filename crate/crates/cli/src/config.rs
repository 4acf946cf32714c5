//! Run configuration: one JSON document, every field optional.

use std::path::Path;

use mapfilt_core::privacy::OptOptions;
use mapfilt_core::series::DiffSpec;
use mapfilt_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Flat-top taper overrides; unset fields use `ℓ = ceil(T^{1/3})` and `ε = 1/T`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaperConfig {
    pub bandwidth: Option<usize>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub diff: DiffSpec,
    pub taper: TaperConfig,
    /// Autocovariance lag budget `L`; defaults to `ceil(2 T^{1/3})`.
    pub maxlag: Option<usize>,
    /// Frequency grid size `N` (even, at least 8).
    pub grid_size: usize,
    /// Cepstral order `r`.
    pub order: usize,
    pub optimizer: OptOptions,
    /// Number of leading channels that are confidential; the rest are auxiliary.
    pub nx: usize,
    /// Block Toeplitz size for the factorization; defaults to `min(40q, 2000)`.
    pub toeplitz_size: Option<usize>,
    /// Coefficients below this norm are dropped from the filter tails.
    pub tail_tol: f64,
    /// Maximum lag of the utility metric and the correlation tables.
    pub report_lag: usize,
    /// Include wall-clock timings in reports (makes reruns differ).
    pub timings: bool,
    /// Replicate length and count for `simulate`.
    pub length: usize,
    pub reps: usize,
    pub burnin: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            diff: DiffSpec::default(),
            taper: TaperConfig::default(),
            maxlag: None,
            grid_size: 512,
            order: 1,
            optimizer: OptOptions::default(),
            nx: 2,
            toeplitz_size: None,
            tail_tol: 1e-8,
            report_lag: 20,
            timings: false,
            length: 2000,
            reps: 1,
            burnin: mapfilt_core::sim::DEFAULT_BURNIN,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Range checks that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        self.diff.validate()?;
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.grid_size < 8 || !self.grid_size.is_multiple_of(2) {
            return bad(format!("grid_size must be even and at least 8, got {}", self.grid_size));
        }
        if self.nx == 0 {
            return bad("nx must be at least 1".into());
        }
        if self.taper.bandwidth == Some(0) {
            return bad("taper.bandwidth must be at least 1".into());
        }
        if self.taper.eps.is_some_and(|e| !(e > 0.0)) {
            return bad("taper.eps must be positive".into());
        }
        if self.maxlag == Some(0) {
            return bad("maxlag must be at least 1".into());
        }
        if !(self.tail_tol > 0.0) {
            return bad("tail_tol must be positive".into());
        }
        if !(self.optimizer.tol > 0.0) || !(self.optimizer.fd_step > 0.0) {
            return bad("optimizer.tol and optimizer.fd_step must be positive".into());
        }
        if self.reps == 0 || self.length < 2 {
            return bad("reps must be at least 1 and length at least 2".into());
        }
        Ok(())
    }

    /// Checks `1 <= nx < channels` for an input with `channels` columns.
    pub fn validate_partition(&self, channels: usize) -> Result<()> {
        if self.nx == 0 || self.nx >= channels {
            return Err(Error::InvalidArgument(format!(
                "nx = {} must leave at least one auxiliary channel among the {channels} inputs",
                self.nx
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg: PipelineConfig =
            serde_json::from_str(r#"{"diff": {"seasonal": 1, "period": 4}, "optimizer": {"restarts": 2}}"#).unwrap();
        assert_eq!(cfg.diff, DiffSpec::new(0, 1, 4).unwrap());
        assert_eq!(cfg.optimizer.restarts, 2);
        assert_eq!(cfg.optimizer.max_iter, 500);
        assert_eq!(cfg.grid_size, 512);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"grid": 512}"#).is_err());
    }

    #[test]
    fn ranges_are_checked() {
        let cfg = PipelineConfig {
            grid_size: 10 + 1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = PipelineConfig {
            nx: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(PipelineConfig::default().validate_partition(2).is_err());
        PipelineConfig::default().validate_partition(3).unwrap();
    }
}
