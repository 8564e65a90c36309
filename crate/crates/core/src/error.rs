use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Eta-quotient prefactor q^(sum d_i e_i / 24) must be q, q^2, ...
    #[error("eta product has leading power {0}/24, not a positive integer")]
    EtaLeadingPower(u64),

    #[error("coefficient file {path}: {reason}")]
    CoefficientFile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A Dirichlet-series tail refused to fall below the requested tolerance.
    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    /// Rejection sampling starved; carries the observed acceptance rate.
    #[error("excised sampling accepted {accepted} of {attempts} draws, below the requested count")]
    RejectionStarved { accepted: usize, attempts: usize },

    /// An evaluation wants more coefficients than the family was loaded with.
    #[error("evaluation needs {need} coefficients, family holds {have}")]
    CoefficientsExhausted { need: usize, have: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
