use core::fmt;

/// Failure modes shared by every operation in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// Construction parameters are malformed (degenerate grid, empty window, ...).
    Config(&'static str),
    /// Arguments violate an operation's preconditions (ordering, coverage, bounds).
    Domain(&'static str),
    /// A documented enumeration or depth limit was exceeded.
    Capacity(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Capacity(msg) => write!(f, "capacity error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
