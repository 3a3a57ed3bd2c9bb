use thiserror::Error;

/// Errors raised by the toolkit. The CLI maps them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A floor of `C * eta` could not be decided at the current precision.
    #[error("precision escalation required: {0}")]
    PrecisionEscalation(String),

    /// The lattice bound is too weak for the height lemma; retry with a larger `C`.
    #[error("increase C: {0}")]
    IncreaseC(String),

    /// A reduction cell failed after every allowed `C` escalation.
    #[error("reduction retries exhausted after {retries} attempts: {cell}")]
    RetriesExhausted { cell: String, retries: u32 },

    /// A certified numerical step could not be completed.
    #[error("certification failed: {0}")]
    Certification(String),

    /// A mathematical invariant was violated by a computed result.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// A pipeline stage failed; `source` carries the underlying error.
    #[error("stage {stage}: {source}")]
    Stage { stage: String, source: Box<Error> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// The innermost error, looking through stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Error {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
