//! Batch front end for the S-MAP privacy pipeline: configuration, the staged
//! pipeline, QWI ingestion and the `mapfilt` subcommands.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod qwi;

pub use config::PipelineConfig;
pub use pipeline::{estimate, privatize, Estimate, Privatized, Stage, StageError};
