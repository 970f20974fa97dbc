use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::ModelSpec;

/// Which partition an error or cluster refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Rows,
    Columns,
    ColumnsMu,
    ColumnsSigma,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::Rows => "rows",
            Axis::Columns => "columns",
            Axis::ColumnsMu => "columns (means)",
            Axis::ColumnsSigma => "columns (variances)",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    DimensionMismatch {
        axis: Axis,
        expected: usize,
        found: usize,
    },

    #[error("data matrix must have at least one row and one column (got {n}x{p})")]
    EmptyData { n: usize, p: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid model spec {spec}: {reason}")]
    InvalidSpec { spec: ModelSpec, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("label {label} out of range for {axis} with {clusters} clusters")]
    LabelOutOfRange {
        axis: Axis,
        label: usize,
        clusters: usize,
    },

    #[error("cluster {index} on {axis} is empty")]
    EmptyCluster { axis: Axis, index: usize },

    #[error("degenerate fit for {spec}: {reason}; try a smaller spec")]
    DegenerateFit { spec: ModelSpec, reason: String },

    #[error("posterior for {axis} entity {index} has no finite mass")]
    DegeneratePosterior { axis: Axis, index: usize },

    #[error("partitions have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("adjusted Rand index needs at least two items (got {0})")]
    TooFewItems(usize),

    #[error("label alignment needs {required} permutations, above the cap of {cap}; compare at a reduced spec")]
    PermutationCap { required: u128, cap: u128 },

    #[error("parameter specs differ: {left} vs {right}")]
    SpecMismatch { left: ModelSpec, right: ModelSpec },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::EmptyData { .. } => "empty_data",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidSpec { .. } => "invalid_spec",
            Error::InvalidParams(_) => "invalid_params",
            Error::Domain(_) => "domain",
            Error::LabelOutOfRange { .. } => "label_out_of_range",
            Error::EmptyCluster { .. } => "empty_cluster",
            Error::DegenerateFit { .. } => "degenerate_fit",
            Error::DegeneratePosterior { .. } => "degenerate_posterior",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::TooFewItems(_) => "too_few_items",
            Error::PermutationCap { .. } => "permutation_cap",
            Error::SpecMismatch { .. } => "spec_mismatch",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
