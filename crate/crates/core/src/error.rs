use std::path::PathBuf;

use thiserror::Error;

/// A system description that violates its own invariants.
#[derive(Debug, Error, PartialEq)]
#[error("invalid system spec: {0}")]
pub struct SpecError(pub String);

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("bundle file {path} not found")]
    Missing { path: PathBuf },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not a bundle file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported bundle version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("bundle payload truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("bundle checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("malformed bundle: {0}")]
    Malformed(String),
    #[error("edge count must be at least 1")]
    EmptyBundle,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("could not place obstacles after {attempts} rejection attempts")]
    Infeasible { attempts: usize },
    #[error("invalid world: {0}")]
    Invalid(String),
    #[error("scenario file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Configuration problems detected before a planner starts.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("bundle system {bundle} does not match world system {world}")]
    SystemMismatch { bundle: String, world: String },
    #[error("invalid planner config: {0}")]
    Invalid(String),
    #[error("start state is in collision")]
    StartInCollision,
}

/// Benchmark harness errors. `Usage` marks bad command-line input.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed results file: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
