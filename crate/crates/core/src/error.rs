use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Variants fall into three families that the CLI turns into exit codes:
/// validation problems with taxonomies, mappings, directives and configs
/// (see [`Error::is_validation`]), problems with data files and models, and
/// internal faults.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: indentation jumps from depth {from} to {to}")]
    Indent { line: usize, from: usize, to: usize },
    #[error("line {line}: odd indentation ({spaces} spaces)")]
    OddIndent { line: usize, spaces: usize },
    #[error("duplicate sibling {name:?} under {parent}")]
    DuplicateSibling { parent: String, name: String },
    #[error("line {line}: empty node name")]
    EmptyName { line: usize },
    #[error("line {line}: node name {name:?} contains a character outside [A-Za-z0-9_+-]")]
    BadChar { line: usize, name: String },
    #[error("unknown taxonomy path {0}")]
    UnknownPath(String),
    #[error("moving {subject} under {target} would create a cycle")]
    CycleCreated { subject: String, target: String },
    #[error("level-0 node {0} cannot be moved or removed")]
    RootEdit(String),
    #[error("line {line}: {msg}")]
    Directive { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Mapping { line: usize, msg: String },
    #[error("mapping target {0} is not a node of the bound taxonomy")]
    MappingUnbound(String),
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("vector length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-hate pool holds {available} records, {needed} needed")]
    PoolTooSmall { needed: usize, available: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("model was trained on a different taxonomy")]
    FingerprintMismatch,
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("no gold-positive records for {0}")]
    EmptySupport(String),
    #[error("artifacts carry different stamps ({0} vs {1})")]
    StampMismatch(String, String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Indent { .. }
                | Error::OddIndent { .. }
                | Error::DuplicateSibling { .. }
                | Error::EmptyName { .. }
                | Error::BadChar { .. }
                | Error::UnknownPath(_)
                | Error::CycleCreated { .. }
                | Error::RootEdit(_)
                | Error::Directive { .. }
                | Error::Mapping { .. }
                | Error::MappingUnbound(_)
                | Error::Config(_)
        )
    }

    /// Process exit code: 2 validation, 3 data, 4 internal.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            2
        } else if matches!(self, Error::Internal(_)) {
            4
        } else {
            3
        }
    }
}
