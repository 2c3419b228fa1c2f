use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
///
/// The variants mirror how the CLI maps failures onto exit codes: bad
/// configuration and usage are input errors, the rest are runtime failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent alphabets, invalid distributions, unknown variables.
    Config(String),
    /// Arguments outside an operation's precondition.
    Usage(String),
    /// A non-finite or otherwise unusable numeric value.
    Numeric(String),
    /// No candidate satisfies the distortion constraint.
    Infeasible(String),
    /// A harness could not set up its experiment (e.g. no typical sequence).
    Diagnostic(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Usage(m) => write!(f, "usage error: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::Infeasible(m) => write!(f, "infeasible: {m}"),
            Error::Diagnostic(m) => write!(f, "diagnostic: {m}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::Error::Config(alloc::format!($($arg)*)) };
}
macro_rules! usage_err {
    ($($arg:tt)*) => { $crate::Error::Usage(alloc::format!($($arg)*)) };
}
pub(crate) use config_err;
pub(crate) use usage_err;
