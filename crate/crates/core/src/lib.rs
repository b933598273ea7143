//! Decomposition-aware similarity analysis for annual panel data.
//!
//! The crate compares time series by splitting each one into trend and
//! seasonal components (STL, Cleveland et al. 1990), measuring the
//! components separately with dynamic time warping, and combining the two
//! costs with configurable weights. On top of that sit the panel-level
//! analyses: ranking every indicator of a country by similarity to a
//! target indicator, aggregating ranks by topic group, and comparing
//! countries through DTW over their rank sequences.
//!
//! Everything here is pure computation over `alloc` collections; file
//! formats, settings, and the command-line front end live in the
//! companion `stldtw-cli` crate.
//!
//! Module map:
//!
//! - [`panel`] — country × indicator × year value cube with topic metadata
//!   and missingness tracking
//! - [`impute`] — per-indicator standardization and autoencoder completion
//!   of missing cells under a masked reconstruction loss
//! - [`loess`] / [`stl`] — locally weighted regression and seasonal-trend
//!   decomposition
//! - [`dtw`] — exact dynamic-programming DTW, windowed DTW, and the
//!   multiresolution FastDTW approximation (Salvador & Chan 2007)
//! - [`similarity`] — the weighted trend/seasonal composite distance
//! - [`ranking`] — indicator rankings, group aggregates, rank-sequence
//!   comparison, and descriptive statistics

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod dtw;
pub mod error;
pub mod impute;
pub mod loess;
mod math;
pub mod panel;
pub mod ranking;
pub mod rng;
pub mod similarity;
pub mod stl;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
