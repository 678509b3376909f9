use std::path::PathBuf;

use thiserror::Error;

/// A document that parsed as JSON but does not fit its schema. `field` is a
/// path such as `h["3"]` or `i[2].pair`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("field `{field}`: {message}")]
pub struct SchemaError {
    pub field: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        SchemaError { field: field.into(), message: message.to_string() }
    }
}

/// Everything that makes a run end with exit status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    /// Syntax or shape error; serde_json reports line, column and field.
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: {source}", path.display())]
    Schema { path: PathBuf, source: SchemaError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hsforce::Error),
}
