//! Error type shared by every core operation.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        /// 1-based data row index (the header is not counted).
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("input is not valid UTF-8: {0}")]
    EncodingError(String),
    #[error(
        "spreadsheet files are not supported; export the sheet as CSV and upload that instead"
    )]
    UnsupportedFormat,
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("column {0} has an empty name")]
    EmptyColumnName(usize),
    #[error("column `{name}` has {found} cells, table has {expected} rows")]
    LengthMismatch {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("column `{0}` requested more than once")]
    DuplicateSelection(String),
    #[error("column `{0}` is not numeric")]
    NonNumericColumn(String),
    #[error("column `{0}` has no non-missing values")]
    AllMissing(String),

    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("nothing to draw")]
    EmptyData,

    #[error("series has a gap: no observation at {0}")]
    GapInSeries(String),
    #[error("series has more than one observation at {0}")]
    DuplicateTimestamp(String),
    #[error("series value missing at {0}")]
    MissingValueInSeries(String),
    #[error("unsupported frequency {0}; expected 1, 4 or 12")]
    UnsupportedFrequency(u32),
    #[error("invalid time index: {0}")]
    InvalidTimeIndex(String),
    #[error("series has zero variance")]
    ConstantSeries,
    #[error("lag {lag} out of range for a series of length {n}")]
    LagOutOfRange { lag: usize, n: usize },
    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("too few observations: need {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("likelihood optimisation did not converge")]
    NonConvergence,
    #[error("no stationary and invertible starting point could be found")]
    NonInvertibleStart,
    #[error("forecast horizon {0} out of range")]
    HorizonOutOfRange(usize),
    #[error("invalid interval level {0}; must lie strictly between 0 and 1")]
    InvalidLevel(f64),
}

impl Error {
    /// Machine-readable code used by the HTTP API and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "empty_input",
            Error::RaggedRows { .. } => "ragged_rows",
            Error::EncodingError(_) => "encoding_error",
            Error::UnsupportedFormat => "unsupported_format",
            Error::MalformedCsv(_) => "malformed_csv",
            Error::DuplicateColumn(_) => "duplicate_column",
            Error::EmptyColumnName(_) => "empty_column_name",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::UnknownColumn(_) => "unknown_column",
            Error::TypeMismatch(_) => "type_mismatch",
            Error::DuplicateSelection(_) => "duplicate_selection",
            Error::NonNumericColumn(_) => "non_numeric_column",
            Error::AllMissing(_) => "all_missing",
            Error::ZeroBins => "zero_bins",
            Error::EmptyData => "empty_data",
            Error::GapInSeries(_) => "gap_in_series",
            Error::DuplicateTimestamp(_) => "duplicate_timestamp",
            Error::MissingValueInSeries(_) => "missing_value_in_series",
            Error::UnsupportedFrequency(_) => "unsupported_frequency",
            Error::InvalidTimeIndex(_) => "invalid_time_index",
            Error::ConstantSeries => "constant_series",
            Error::LagOutOfRange { .. } => "lag_out_of_range",
            Error::SeriesTooShort { .. } => "series_too_short",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::TooFewObservations { .. } => "too_few_observations",
            Error::NonConvergence => "non_convergence",
            Error::NonInvertibleStart => "non_invertible_start",
            Error::HorizonOutOfRange(_) => "horizon_out_of_range",
            Error::InvalidLevel(_) => "invalid_level",
        }
    }
}
