use thiserror::Error;

/// Errors raised by the graph, group and space constructions.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input: unknown vertex, bad word, bad file.
    #[error("invalid input: {0}")]
    Input(String),

    /// Well-formed input outside an operation's domain (disconnected graph,
    /// unreachable pair, empty sphere).
    #[error("domain error: {0}")]
    Domain(String),

    /// A group family / subgroup configuration for which membership is not decidable here.
    #[error("unsupported group configuration: {0}")]
    Unsupported(String),

    /// An exhaustive search refused to run because it would exceed its budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A structural invariant failed; indicates a bug rather than bad data.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
