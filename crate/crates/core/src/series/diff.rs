use serde::{Deserialize, Serialize};

use super::MultiSeries;
use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::scalar::Real;

/// Differencing operator `(1 - B)^d (1 - B^s)^D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSpec {
    /// Nonseasonal order `d`.
    #[serde(default)]
    pub d: usize,
    /// Seasonal order `D`.
    #[serde(default)]
    pub seasonal: usize,
    /// Seasonal period `s`.
    #[serde(default = "one")]
    pub period: usize,
}

fn one() -> usize {
    1
}

impl Default for DiffSpec {
    fn default() -> Self {
        DiffSpec {
            d: 0,
            seasonal: 0,
            period: 1,
        }
    }
}

impl DiffSpec {
    pub fn new(d: usize, seasonal: usize, period: usize) -> Result<Self> {
        let spec = DiffSpec { d, seasonal, period };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidArgument("seasonal period must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of observations consumed: `d + D s`.
    pub fn consumed(&self) -> usize {
        self.d + self.seasonal * self.period
    }

    /// Lags of the elementary `(1 - B^lag)` stages, in application order.
    fn stage_lags(&self) -> Vec<usize> {
        std::iter::repeat_n(1, self.d)
            .chain(std::iter::repeat_n(self.period, self.seasonal))
            .collect()
    }
}

/// Initial observations consumed by each differencing stage.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffState<T: Real = f64> {
    stages: Vec<(usize, RMat<T>)>,
    dim: usize,
}

impl<T: Real> DiffState<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of stored rows, `d + D s`.
    pub fn stored(&self) -> usize {
        self.stages.iter().map(|(lag, _)| lag).sum()
    }

    /// Restricts the state to a subset of channels.
    pub fn select(&self, channels: &[usize]) -> Result<Self> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.dim) {
            return Err(Error::Shape(format!(
                "channel {bad} out of range for dimension {}",
                self.dim
            )));
        }
        Ok(DiffState {
            stages: self
                .stages
                .iter()
                .map(|(lag, m)| (*lag, m.select_columns(channels)))
                .collect(),
            dim: channels.len(),
        })
    }
}

/// Applies `spec` channelwise, returning the differenced series and the consumed initial values.
pub fn difference<T: Real>(x: &MultiSeries<T>, spec: &DiffSpec) -> Result<(MultiSeries<T>, DiffState<T>)> {
    spec.validate()?;
    let consumed = spec.consumed();
    if x.len() <= consumed {
        return Err(Error::InvalidLength(format!(
            "series of length {} is too short for differencing that consumes {consumed} observations",
            x.len()
        )));
    }
    let remaining = x.len() - consumed;
    if remaining < 2 * x.dim() {
        return Err(Error::InvalidLength(format!(
            "differenced length {remaining} is below twice the dimension {}",
            x.dim()
        )));
    }
    let mut current = x.values().clone();
    let mut stages = Vec::new();
    for lag in spec.stage_lags() {
        let len = current.nrows();
        stages.push((lag, current.rows(0, lag).into_owned()));
        current = current.rows(lag, len - lag) - current.rows(0, len - lag);
    }
    let state = DiffState { stages, dim: x.dim() };
    Ok((x.with_values(current)?, state))
}

/// Exact left inverse of [`difference`].
pub fn integrate<T: Real>(y: &MultiSeries<T>, state: &DiffState<T>, spec: &DiffSpec) -> Result<MultiSeries<T>> {
    let lags: Vec<usize> = state.stages.iter().map(|(lag, _)| *lag).collect();
    if lags != spec.stage_lags() {
        return Err(Error::Shape(format!(
            "differencing state with stage lags {lags:?} does not match {spec:?}"
        )));
    }
    if state.dim != y.dim() {
        return Err(Error::Shape(format!(
            "differencing state has {} channels, series has {}",
            state.dim,
            y.dim()
        )));
    }
    let mut current = y.values().clone();
    for (lag, initial) in state.stages.iter().rev() {
        let len = current.nrows() + lag;
        let mut out = RMat::zeros(len, y.dim());
        out.rows_mut(0, *lag).copy_from(initial);
        out.rows_mut(*lag, current.nrows()).copy_from(&current);
        for t in *lag..len {
            for j in 0..y.dim() {
                let prev = out[(t - lag, j)];
                out[(t, j)] += prev;
            }
        }
        current = out;
    }
    y.with_values(current)
}
