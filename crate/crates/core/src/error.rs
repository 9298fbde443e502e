use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument fell outside its admissible range.
    Domain {
        what: &'static str,
        value: f64,
    },
    /// `F(u) = F(ℓ)`: conditioning on a null interval.
    DegenerateInterval {
        lower: f64,
        upper: f64,
    },
    /// The user already left the platform.
    Abandoned,
    /// Negative residual budget; there is no action to take.
    Absorbed,
    /// No exploration user survived, so nothing can be estimated.
    NoData,
    /// Hard feedback always reveals a signal.
    MissingHardFeedback,
    /// Too few usable points for a fit.
    InsufficientData {
        needed: usize,
        got: usize,
    },
    InvalidInput(&'static str),
    InvalidConfig(alloc::vec::Vec<crate::model::ConfigIssue>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of range: {value}"),
            Error::DegenerateInterval { lower, upper } => {
                write!(f, "interval [{lower}, {upper}] carries no probability mass")
            }
            Error::Abandoned => f.write_str("user has abandoned the platform"),
            Error::Absorbed => f.write_str("residual budget is negative; user is gone"),
            Error::NoData => {
                f.write_str("no surviving exploration users; enlarge the exploration set or beta")
            }
            Error::MissingHardFeedback => {
                f.write_str("hard feedback model cannot produce an empty signal")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} usable points, got {got}")
            }
            Error::InvalidInput(msg) => f.write_str(msg),
            Error::InvalidConfig(issues) => {
                f.write_str("invalid configuration:")?;
                for issue in issues {
                    write!(f, " {issue};")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for Error {}
