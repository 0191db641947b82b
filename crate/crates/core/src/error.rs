use std::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined,
    /// e.g. evaluating a CPwL outside `[0, 1]` or composing with a function
    /// whose range leaves `[0, 1]`.
    #[error("domain error: {0}")]
    Domain(String),

    /// Layer shapes do not chain, widths disagree, or a special network does
    /// not have the source/collation layout.
    #[error("structure error: {0}")]
    Structure(String),

    /// A node or layer budget would be exceeded.
    #[error("resource error: {0}")]
    Resource(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A caller-declared contract (e.g. a Lipschitz bound) is violated.
    #[error("contract violated: {0}")]
    Contract(String),

    /// A CPwL invariant does not hold (unsorted or duplicate breakpoints, ...).
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A factor of a composition is constant.
    #[error("degenerate composition: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            message: message.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
