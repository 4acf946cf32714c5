//! Multivariate series data model and time-domain operations.

mod diff;
mod filter;
mod forecast;

pub use diff::{difference, integrate, DiffSpec, DiffState};
pub use filter::{apply_filter, MapFilter};
pub use forecast::{forecast_extend, forecast_extend_with_order, yule_walker, Extension};

use std::collections::HashSet;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, RMat};
use crate::scalar::{from_usize, lit, Real};

/// A length-`T`, dimension-`n` real series; row `t` is the observation at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries<T: Real = f64> {
    values: RMat<T>,
    names: Vec<String>,
    period: Option<usize>,
}

impl<T: Real> MultiSeries<T> {
    pub fn new(values: RMat<T>, names: Vec<String>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidLength(format!(
                "series must have at least one row and one column, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if names.len() != values.ncols() {
            return Err(Error::Shape(format!(
                "{} channel names for {} channels",
                names.len(),
                values.ncols()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate channel name `{dup}`")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at time {} channel {}",
                pos % values.nrows(),
                pos / values.nrows()
            )));
        }
        Ok(MultiSeries {
            values,
            names,
            period: None,
        })
    }

    /// Series with generated channel names `x1..xn`.
    pub fn from_values(values: RMat<T>) -> Result<Self> {
        let names = default_names("x", values.ncols());
        Self::new(values, names)
    }

    pub fn with_period(mut self, period: Option<usize>) -> Self {
        self.period = period;
        self
    }

    /// Same channel metadata, new values (possibly a different length).
    pub fn with_values(&self, values: RMat<T>) -> Result<Self> {
        Ok(Self::new(values, self.names.clone())?.with_period(self.period))
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &RMat<T> {
        &self.values
    }

    pub fn into_values(self) -> RMat<T> {
        self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn row(&self, t: usize) -> DVector<T> {
        self.values.row(t).transpose()
    }

    pub fn mean(&self) -> DVector<T> {
        let n = from_usize::<T>(self.len());
        DVector::from_fn(self.dim(), |j, _| self.values.column(j).sum() / n)
    }

    /// Keeps the listed channels, in the given order.
    pub fn select(&self, channels: &[usize]) -> Result<Self> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::Shape(format!(
                "channel {bad} out of range for dimension {}",
                self.dim()
            )));
        }
        let values = self.values.select_columns(channels);
        let names = channels.iter().map(|&c| self.names[c].clone()).collect();
        Ok(Self::new(values, names)?.with_period(self.period))
    }

    /// Subtracts `offset` from every row.
    pub fn shifted(&self, offset: &DVector<T>) -> Result<Self> {
        let mut v = self.values.clone();
        for mut row in v.row_iter_mut() {
            row -= offset.transpose();
        }
        self.with_values(v)
    }
}

pub fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Matrix autocovariance sequence `Γ(0..L)`; `Γ(-h)` is `Γ(h)'`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcvfSeq<T: Real = f64> {
    gamma: Vec<RMat<T>>,
}

impl<T: Real> AcvfSeq<T> {
    pub fn new(gamma: Vec<RMat<T>>) -> Result<Self> {
        let first = gamma
            .first()
            .ok_or_else(|| Error::InvalidLength("autocovariance sequence needs Γ(0)".into()))?;
        let n = first.nrows();
        if n == 0 || gamma.iter().any(|g| g.nrows() != n || g.ncols() != n) {
            return Err(Error::Shape(
                "autocovariances must be equal-size square matrices".into(),
            ));
        }
        if gamma.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidArgument("non-finite autocovariance".into()));
        }
        if !is_symmetric(first, lit(1e-10)) {
            return Err(Error::InvalidArgument("Γ(0) must be symmetric".into()));
        }
        Ok(AcvfSeq { gamma })
    }

    pub fn dim(&self) -> usize {
        self.gamma[0].nrows()
    }

    pub fn maxlag(&self) -> usize {
        self.gamma.len() - 1
    }

    /// `Γ(h)` for `0 <= h <= L`.
    pub fn gamma(&self, h: usize) -> &RMat<T> {
        &self.gamma[h]
    }

    pub fn gammas(&self) -> &[RMat<T>] {
        &self.gamma
    }

    /// `Γ(h)` for any `|h| <= L`, transposing for negative lags.
    pub fn at(&self, h: isize) -> RMat<T> {
        let g = &self.gamma[h.unsigned_abs()];
        if h < 0 {
            g.transpose()
        } else {
            g.clone()
        }
    }

    pub fn truncate(&self, maxlag: usize) -> Self {
        AcvfSeq {
            gamma: self.gamma[..=maxlag.min(self.maxlag())].to_vec(),
        }
    }

    /// Autocovariances of the time-reversed process.
    pub fn reversed(&self) -> Self {
        AcvfSeq {
            gamma: self.gamma.iter().map(|g| g.transpose()).collect(),
        }
    }

    /// Sub-block for the listed channels.
    pub fn select(&self, channels: &[usize]) -> Result<Self> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::Shape(format!(
                "channel {bad} out of range for dimension {}",
                self.dim()
            )));
        }
        let gamma = self
            .gamma
            .iter()
            .map(|g| g.select_rows(channels).select_columns(channels))
            .collect();
        Ok(AcvfSeq { gamma })
    }

    /// Lag-`h` correlation matrix `Γ_ij(h) / sqrt(Γ_ii(0) Γ_jj(0))`; zero where a variance vanishes.
    pub fn correlation(&self, h: isize) -> RMat<T> {
        let g0 = &self.gamma[0];
        let g = self.at(h);
        RMat::from_fn(self.dim(), self.dim(), |i, j| {
            let s = (g0[(i, i)] * g0[(j, j)]).sqrt();
            if s > T::zero() {
                g[(i, j)] / s
            } else {
                T::zero()
            }
        })
    }
}

/// Sample autocovariances with divisor `T` about the sample mean, lags `0..=maxlag`.
pub fn sample_acvf<T: Real>(x: &MultiSeries<T>, maxlag: usize) -> Result<AcvfSeq<T>> {
    let len = x.len();
    if maxlag >= len {
        return Err(Error::InvalidLag { lag: maxlag, len });
    }
    let n = x.dim();
    let mean = x.mean();
    let mut centered = x.values().clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let denom = from_usize::<T>(len);
    let gamma = (0..=maxlag)
        .map(|h| {
            let lead = centered.rows(h, len - h);
            let base = centered.rows(0, len - h);
            let mut g = lead.transpose() * base;
            g /= denom;
            g
        })
        .collect::<Vec<_>>();
    debug_assert!(gamma.iter().all(|g| g.nrows() == n));
    let mut gamma = gamma;
    gamma[0] = crate::linalg::symmetric_part(&gamma[0]);
    AcvfSeq::new(gamma)
}
