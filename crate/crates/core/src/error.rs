use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage names, used to tag errors raised while running the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Config,
    Load,
    Proximity,
    Validate,
    Partition,
    Ordered,
    Rank,
    Cluster,
    Fca,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Proximity => "proximity",
            Stage::Validate => "validate",
            Stage::Partition => "partition",
            Stage::Ordered => "ordered",
            Stage::Rank => "rank",
            Stage::Cluster => "cluster",
            Stage::Fca => "fca",
            Stage::Report => "report",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("header mismatch: {0}")]
    Header(String),

    #[error("row {row} ({object}): missing cell for column {column}")]
    MissingCell {
        row: usize,
        object: String,
        column: String,
    },

    #[error("row {row} ({object}), column {column}: `{token}` is not a number")]
    NotNumeric {
        row: usize,
        object: String,
        column: String,
        token: String,
    },

    #[error("row {row} ({object}), column {column}: value {value} outside [1, {range_max}]")]
    OutOfRange {
        row: usize,
        object: String,
        column: String,
        value: f64,
        range_max: f64,
    },

    #[error("duplicate object label `{0}`")]
    DuplicateObject(String),

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("attribute `{0}` is not numeric")]
    NotNumericAttribute(String),

    #[error("invalid attribute spec `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },

    #[error("empty attribute subset")]
    EmptyAttributeSet,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("cut parameters ({alpha}, {beta}) outside J")]
    InvalidCut { alpha: f64, beta: f64 },

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("ladder for `{attribute}` has {labels} labels but the partition has {blocks} blocks")]
    LadderTooShort {
        attribute: String,
        labels: usize,
        blocks: usize,
    },

    #[error("label `{label}` not in ladder for `{attribute}`")]
    UnknownLabel { attribute: String, label: String },

    #[error("invalid rank ranges: {0}")]
    InvalidRanges(String),

    #[error("empty object scope")]
    EmptyScope,

    #[error("proximity validation failed with {0} violation(s); rerun with --force to proceed")]
    ValidationFailed(usize),

    #[error("override `{stage}`: {reason}")]
    Override { stage: String, reason: String },

    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            tagged @ Error::Stage { .. } => tagged,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// The stage this error was raised in, if it has been tagged.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
