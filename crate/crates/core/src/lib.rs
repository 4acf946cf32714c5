//! Spectrum-preserving multivariate all-pass (S-MAP) filters for time series privacy.
//!
//! Filters are built from spectral roots of the confidential block and tuned to
//! leak as little linear information as possible beyond what the auxiliary
//! channels already reveal.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` / `*32`
//! aliases below name the common instantiations.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allpass;
pub mod error;
pub mod factorize;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod privacy;
pub mod scalar;
pub mod series;
pub mod sim;
pub mod spectral;

pub use allpass::{frf_to_coeffs, map_frf, unitary_at, verify_smap, CepstralParams};
pub use error::{Error, Result};
pub use factorize::{bauer_factorize, spectral_root_grid, RootGrid, VmaFactor};
pub use optim::{Bfgs, LocalSearch, SearchOptions};
pub use privacy::{
    mlip, nfd, optimize, privacy_report, rum, BatchSummary, CriterionContext, OptOptions, OptResult, PrivacyReport,
};
pub use scalar::Real;
pub use series::{
    apply_filter, difference, forecast_extend, integrate, sample_acvf, AcvfSeq, DiffSpec, DiffState, MapFilter,
    MultiSeries,
};
pub use sim::{ArchSpec, ModelFile, SimModel, VarModel, Varma11Model};
pub use spectral::{
    conditional_spectrum, flat_top_estimate, pd_truncate, FreqGrid, SpectralGrid, SpectrumKind, TaperSpec,
};

pub type Series64 = MultiSeries<f64>;
pub type Series32 = MultiSeries<f32>;
pub type Acvf64 = AcvfSeq<f64>;
pub type Acvf32 = AcvfSeq<f32>;
pub type Spectrum64 = SpectralGrid<f64>;
pub type Spectrum32 = SpectralGrid<f32>;
pub type Filter64 = MapFilter<f64>;
pub type Filter32 = MapFilter<f32>;
pub type Params64 = CepstralParams<f64>;
pub type Params32 = CepstralParams<f32>;
pub type Context64 = CriterionContext<f64>;
pub type Context32 = CriterionContext<f32>;
