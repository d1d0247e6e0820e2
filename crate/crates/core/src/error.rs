use thiserror::Error;

/// Largest total Hilbert-space dimension accepted anywhere in the crate.
pub const MAX_TOTAL_DIM: usize = 4096;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout error: {0}")]
    Layout(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation's input contract was violated (e.g. non-Hermitian input).
    #[error("contract violated: {0}")]
    Contract(String),

    /// A constructed value failed one of its type invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("capacity exceeded: requested dimension {requested}, cap is {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("refusing vacuous witness: bound {0} is not below 1")]
    VacuousWitness(f64),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn layout(msg: impl Into<String>) -> Self {
        Error::Layout(msg.into())
    }

    /// True for errors caused by bad caller input rather than capacity or I/O.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            Error::Layout(_)
                | Error::Argument(_)
                | Error::Contract(_)
                | Error::Invariant(_)
                | Error::VacuousWitness(_)
                | Error::Bracket(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_capacity(requested: usize) -> Result<()> {
    if requested > MAX_TOTAL_DIM {
        Err(Error::Capacity {
            requested,
            cap: MAX_TOTAL_DIM,
        })
    } else {
        Ok(())
    }
}
