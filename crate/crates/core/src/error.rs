use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate matrix: |det| = {0:e}")]
    DegenerateMatrix(f64),
    #[error("nested horoballs")]
    NestedHoroballs,
    #[error("point is not on the horosphere (off by {0:e})")]
    OffHorosphere(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("Newton iteration did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },
    #[error("development inconsistent (residual {0:e})")]
    DevelopmentInconsistent(f64),
    #[error("no cusp cross-section: cusp {0} is filled")]
    FilledCusp(usize),
    #[error("enumeration did not stabilise within budget ({0})")]
    BudgetExceeded(String),
    #[error("increase depth: {0}")]
    IncreaseDepth(String),
    #[error("diagram is not verified")]
    Unverified,
    #[error("surface misses this cusp lift")]
    MissesCusp,
    #[error("zero slope")]
    ZeroSlope,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
