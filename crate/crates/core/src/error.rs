//! Crate error type.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors produced by the analysis kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An operation received an empty sequence.
    EmptySequence(&'static str),
    /// A non-finite value reached a numeric kernel.
    NonFinite(&'static str),
    /// A smoother or moving-average window is invalid (even, too small, ...).
    BadWindow(String),
    /// A weights vector is invalid (wrong length, negative, non-finite).
    BadWeights(String),
    /// A DTW search window failed validation.
    BadSearchWindow(String),
    /// A coarse warping path handed to window expansion is malformed.
    BadWarpingPath(String),
    /// A configuration value is out of range.
    BadConfig(String),
    /// Series too short for the requested decomposition.
    SeriesTooShort { len: usize, min: usize },
    /// Series period does not match the configured period.
    PeriodMismatch { series: usize, config: usize },
    /// Country code absent from the panel axes.
    UnknownCountry(String),
    /// Indicator code absent from the panel axes.
    UnknownIndicator(String),
    /// Two observations for the same key carry different values.
    ConflictingObservation {
        country: String,
        indicator: String,
        year: i32,
    },
    /// An indicator appears under two different topics.
    ConflictingTopic { indicator: String, topic: String },
    /// Observation year outside the configured bounds.
    YearOutOfBounds { year: i32, min: i32, max: i32 },
    /// Topic not present in the strict taxonomy.
    UnknownTopic { indicator: String, topic: String },
    /// Indicator has no topic-group mapping; group analyses need one.
    UnmappedIndicator(String),
    /// A vector or matrix dimension does not match the model.
    DimensionMismatch { expected: usize, got: usize },
    /// The observation mask has no observed cells.
    EmptyMask,
    /// An indicator has no observed cells at all and cannot be imputed.
    NoObservedCells(String),
    /// Training produced a non-finite loss.
    TrainingDiverged { epoch: usize, learning_rate: f64 },
    /// A requested key is missing from a decomposition map.
    MissingKey { country: String, indicator: String },
    /// A ranking table does not cover the canonical indicator list.
    CoverageMismatch { missing: Vec<String> },
    /// Rank sequences being compared have different lengths.
    LengthMismatch { expected: usize, got: usize },
    /// A series contains missing values where a complete one is required.
    MissingValues {
        country: String,
        indicator: String,
        year: i32,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySequence(what) => write!(f, "{what}: empty sequence"),
            Error::NonFinite(what) => write!(f, "{what}: non-finite value"),
            Error::BadWindow(msg) => write!(f, "invalid window: {msg}"),
            Error::BadWeights(msg) => write!(f, "invalid weights: {msg}"),
            Error::BadSearchWindow(msg) => write!(f, "invalid search window: {msg}"),
            Error::BadWarpingPath(msg) => write!(f, "invalid warping path: {msg}"),
            Error::BadConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::SeriesTooShort { len, min } => {
                write!(f, "series of length {len} is shorter than the minimum {min}")
            }
            Error::PeriodMismatch { series, config } => write!(
                f,
                "series period {series} does not match configured period {config}"
            ),
            Error::UnknownCountry(c) => write!(f, "unknown country {c:?}"),
            Error::UnknownIndicator(i) => write!(f, "unknown indicator {i:?}"),
            Error::ConflictingObservation {
                country,
                indicator,
                year,
            } => write!(
                f,
                "conflicting values for ({country}, {indicator}, {year})"
            ),
            Error::ConflictingTopic { indicator, topic } => write!(
                f,
                "indicator {indicator:?} reported under conflicting topic {topic:?}"
            ),
            Error::YearOutOfBounds { year, min, max } => {
                write!(f, "year {year} outside configured bounds {min}..={max}")
            }
            Error::UnknownTopic { indicator, topic } => write!(
                f,
                "indicator {indicator:?} has topic {topic:?} not present in the strict taxonomy"
            ),
            Error::UnmappedIndicator(i) => {
                write!(f, "indicator {i:?} has no topic-group mapping")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptyMask => write!(f, "mask contains no observed cells"),
            Error::NoObservedCells(i) => {
                write!(f, "indicator {i:?} has no observed cells")
            }
            Error::TrainingDiverged {
                epoch,
                learning_rate,
            } => write!(
                f,
                "non-finite loss at epoch {epoch} (learning rate {learning_rate})"
            ),
            Error::MissingKey { country, indicator } => {
                write!(f, "no decomposition for ({country}, {indicator})")
            }
            Error::CoverageMismatch { missing } => {
                write!(f, "ranking does not cover canonical indicators: {missing:?}")
            }
            Error::LengthMismatch { expected, got } => {
                write!(f, "sequence length mismatch: expected {expected}, got {got}")
            }
            Error::MissingValues {
                country,
                indicator,
                year,
            } => write!(
                f,
                "series ({country}, {indicator}) has a missing value at year {year}"
            ),
        }
    }
}

impl core::error::Error for Error {}
