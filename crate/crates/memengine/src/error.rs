//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An observation carried no modality signal and no context tokens,
    /// so no anchor can be derived.
    #[error("encoding degenerate: observation has no signals and no context tokens")]
    EncodingDegenerate,

    /// Timestamps must strictly increase within one engine instance.
    #[error("ordering violation: turn {attempted} does not follow {previous}")]
    OrderingViolation { previous: u64, attempted: u64 },

    /// Aggregation over an empty working-memory window.
    #[error("empty working-memory window")]
    EmptyWindow,

    /// A referenced long-term record id does not exist.
    #[error("missing record: id {0}")]
    MissingRecord(u64),

    /// A snapshot or journal file failed to parse.
    #[error("snapshot corrupt at byte offset {offset}: {detail}")]
    SnapshotCorrupt { offset: usize, detail: String },

    /// A persisted file carries an unsupported format version.
    #[error("version mismatch: found {found}, expected {expected}")]
    Version { found: String, expected: String },

    /// Prediction and truth streams have different lengths.
    #[error("alignment error: {left} predictions vs {right} truths")]
    Alignment { left: usize, right: usize },

    /// Invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
