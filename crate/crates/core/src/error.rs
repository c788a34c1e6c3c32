use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// The two hypotheses have identical densities, so no detection
    /// threshold separates them.
    #[error("the bit-0 and bit-1 densities are identical; no threshold exists")]
    NoCrossing,

    #[error("no sign change of the log-likelihood ratio after {0} bracket expansions")]
    BracketFailure(usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("test statistic requested for an empty frame")]
    EmptyFrame,

    #[error("malformed frame dump: {0}")]
    FrameFormat(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParam(_) => 2,
            Error::Domain { .. }
            | Error::NoCrossing
            | Error::BracketFailure(_)
            | Error::EmptyFrame => 3,
            Error::FrameFormat(_) | Error::Csv(_) | Error::Io(_) => 4,
        }
    }
}
