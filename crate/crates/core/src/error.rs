use thiserror::Error;

use crate::optimizer::Region;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unstable queue: total arrival rate {load} is not below service rate {mu}")]
    Unstable { load: f64, mu: f64 },

    #[error("degenerate bracket [{lo}, {hi}]")]
    DegenerateBracket { lo: f64, hi: f64 },

    #[error("no sign change of the cubic on ({lo}, {hi})")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("cubic changes sign {sign_changes} times on ({lo}, {hi}); expected a unique root")]
    AmbiguousRoot { lo: f64, hi: f64, sign_changes: usize },

    #[error("operation requires {expected}, but S_p falls in region {region}")]
    RegionMismatch { region: Region, expected: &'static str },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("simulation needs at least one replication")]
    NoReplications,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
