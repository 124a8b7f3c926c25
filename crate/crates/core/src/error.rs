use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("site {site} out of range for L = {l}")]
    Index { site: usize, l: usize },

    #[error("numerical integrity violated: {0}")]
    Integrity(String),

    #[error("measurement branch forbidden: {0}")]
    BranchForbidden(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("trajectory {traj_id} failed at step {step}: {source}")]
    Trajectory {
        traj_id: u64,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that signal corrupted numerics rather than bad input.
    pub fn is_integrity(&self) -> bool {
        match self {
            Error::Integrity(_) | Error::BranchForbidden(_) | Error::Numeric(_) => true,
            Error::Trajectory { source, .. } => source.is_integrity(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
