//! Command-line front end for `blockmix`.

pub mod args;
pub mod data;
pub mod layout;
pub mod output;
pub mod reproduce;
pub mod run;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {col} (line {line}): '{value}' is not a number")]
    NonNumeric {
        row: usize,
        col: usize,
        line: u64,
        value: String,
    },

    #[error("input has no data rows")]
    EmptyInput,

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] blockmix::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
            CliError::RaggedRow { .. } => "ragged_row",
            CliError::NonNumeric { .. } => "non_numeric",
            CliError::EmptyInput => "empty_input",
            CliError::Usage(_) => "usage",
            CliError::Model(e) => e.kind(),
        }
    }

    /// `{"error": {"kind": ..., "message": ..., ...location}}`
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            line: Option<u64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            row: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            column: Option<usize>,
        }
        let (line, row, column) = match self {
            CliError::RaggedRow { line, .. } => (Some(*line), None, None),
            CliError::NonNumeric { row, col, line, .. } => (Some(*line), Some(*row), Some(*col)),
            _ => (None, None, None),
        };
        serde_json::json!({ "error": Body { kind: self.kind(), message: self.to_string(), line, row, column } })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io {
            path: String::new(),
            message: e.to_string(),
        }
    }
}
