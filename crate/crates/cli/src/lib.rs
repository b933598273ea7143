//! IO, settings, and pipeline orchestration around `stldtw-core`.
//!
//! The library side of the `stldtw` binary: long-format CSV ingestion and
//! canonical serialization, a single JSON settings file, and the batch
//! pipeline that chains validation, standardization, imputation,
//! decomposition, and the ranking analyses into CSV reports plus a JSON
//! run manifest.

pub mod error;
pub mod panel_csv;
pub mod pipeline;
pub mod settings;

pub use error::CliError;

pub type Result<T> = std::result::Result<T, CliError>;
