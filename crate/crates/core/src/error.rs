//! Error type shared by the whole crate.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by
//! failure class rather than by module so callers can match on what went
//! wrong, not where.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An exact integer computation exceeded its carrier type.
    #[error("overflow in {op}: {detail}")]
    Overflow { op: &'static str, detail: String },

    /// A vertex id at or beyond the declared vertex count.
    #[error("vertex {id} out of range for {num_vertices} vertices")]
    VertexOutOfRange { id: u32, num_vertices: u32 },

    /// An edge or vertex set violating its canonical-form invariant.
    #[error("invalid {what}: {detail}")]
    InvalidSet { what: &'static str, detail: String },

    /// Enumeration or sampling would exceed the configured work budget.
    #[error("{stage} needs {required} units, budget is {budget}")]
    BudgetExceeded {
        stage: &'static str,
        required: u128,
        budget: u128,
    },

    /// A statistic normalized by an expectation that is zero.
    #[error("zero expected count: {context}")]
    ZeroExpectation { context: String },

    /// The operation requires a rank-1 weight model.
    #[error("{op} requires a rank-1 weight model")]
    NotRank1 { op: &'static str },

    /// A malformed record in an input file.
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: PathBuf,
        line: u64,
        detail: String,
    },

    /// A structurally invalid configuration.
    #[error("invalid config: {detail}")]
    InvalidConfig { detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid_config(detail: impl Into<String>) -> Self {
        Error::InvalidConfig {
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
