use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is undefined for a deterministic law")]
    UnsupportedForDeterministic(&'static str),

    /// Both laws are deterministic with the same value, so `P{U = p} > 0`.
    #[error("uptime and processing time are the same atom ({0}); tie probability is positive")]
    AtomCollision(f64),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("job never completes (q=1)")]
    NeverCompletes,

    #[error("conditional moment {0} is undefined for this scenario")]
    UndefinedMoment(&'static str),

    #[error("inconsistent moments: E[R^2] - E[R]^2 = {0} is materially negative")]
    InconsistentMoments(f64),

    #[error("{failed} of {total} paths exceeded the attempt cap of {max_attempts}")]
    AttemptCapExceeded {
        failed: u64,
        total: u64,
        max_attempts: u64,
    },
}
