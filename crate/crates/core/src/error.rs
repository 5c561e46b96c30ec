#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parameter `{name}` out of range: {detail}")]
    Parameter { name: &'static str, detail: String },
    #[error("argument outside the domain of {function}: {detail}")]
    Domain { function: &'static str, detail: String },
    #[error("horizon exceeded: {0}")]
    Horizon(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Error {
    Error::Parameter { name, detail: detail.into() }
}

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { function, detail: detail.into() }
}

/// Parameter error unless `ok`; NaN inputs must fail the caller's comparison.
pub(crate) fn ensure(ok: bool, name: &'static str, detail: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(param(name, detail))
    }
}
