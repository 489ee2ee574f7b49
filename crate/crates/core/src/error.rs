use thiserror::Error;

/// Errors raised by the library operations.
///
/// Garsia rejections are not errors; see [`crate::algebraic::Rejection`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("polynomial is not monic (leading coefficient {0})")]
    NotMonic(String),
    #[error("root enclosures could not be certified at {0} bits")]
    PrecisionUnreachable(u32),
    #[error("x = {x} lies outside [0, {c}]")]
    Domain { x: String, c: String },
    #[error("node budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("psi vanishes at n = {0}")]
    ZeroPsi(u32),
    #[error("no psi-good prefix found within a depth budget of {0}")]
    BudgetExhaustedNoMilestone(u32),
    #[error("incompatible density supports: {0}")]
    IncompatibleSupport(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "PARSE_ERROR",
            Error::NotMonic(_) => "NOT_MONIC",
            Error::PrecisionUnreachable(_) => "PRECISION_UNREACHABLE",
            Error::Domain { .. } => "DOMAIN",
            Error::BudgetExceeded(_) => "BUDGET_EXCEEDED",
            Error::ZeroPsi(_) => "ZERO_PSI",
            Error::BudgetExhaustedNoMilestone(_) => "BUDGET_EXHAUSTED_NO_MILESTONE",
            Error::IncompatibleSupport(_) => "INCOMPATIBLE_SUPPORT",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::BudgetExceeded(_) | Error::BudgetExhaustedNoMilestone(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
