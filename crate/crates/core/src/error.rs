use thiserror::Error;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags, bad option values, malformed experiment config.
    Usage,
    /// Input data failed to parse or validate.
    Data,
    /// A measure or statistic is mathematically undefined on this input.
    Computation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no nodes")]
    EmptyGraph,

    #[error("partition references unknown node label '{label}' (line {line})")]
    UnknownNodeLabel { label: String, line: usize },

    #[error("unassigned node: '{label}' has no community")]
    UnassignedNode { label: String },

    #[error("partition contains no communities")]
    EmptyPartition,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("modularity undefined: graph has no edges")]
    ModularityUndefined,

    #[error("mixing parameter undefined: graph has no edges")]
    MixingUndefined,

    #[error("epidemic threshold undefined: <k^2> <= <k>")]
    ThresholdUndefined,

    #[error("{measure} undefined: community {community} has no {link_kind} links")]
    MeasureUndefined {
        measure: &'static str,
        community: usize,
        link_kind: &'static str,
    },

    #[error("tau undefined: all values tied in {which}")]
    TauUndefined { which: &'static str },

    #[error("zero variance in {which}")]
    ZeroVariance { which: String },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("input length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value in {which}")]
    NonFinite { which: &'static str },

    #[error("SIR step cap of {cap} exceeded")]
    StepCapExceeded { cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) => ErrorKind::Usage,
            Error::Parse { .. }
            | Error::EmptyGraph
            | Error::UnknownNodeLabel { .. }
            | Error::UnassignedNode { .. }
            | Error::EmptyPartition
            | Error::Io(_) => ErrorKind::Data,
            Error::ModularityUndefined
            | Error::MixingUndefined
            | Error::ThresholdUndefined
            | Error::MeasureUndefined { .. }
            | Error::TauUndefined { .. }
            | Error::ZeroVariance { .. }
            | Error::TooFewObservations { .. }
            | Error::LengthMismatch { .. }
            | Error::NonFinite { .. }
            | Error::StepCapExceeded { .. } => ErrorKind::Computation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
