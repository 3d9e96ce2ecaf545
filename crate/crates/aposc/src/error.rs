use thiserror::Error;

/// Error taxonomy shared by the whole crate.
///
/// `Domain` is a bad argument, `Invariant` a violated internal contract,
/// `Resonance` a small or vanishing divisor (the offending mode is named),
/// `Membership` a multi-index whose support fits no declared set,
/// `Hypothesis` an unmet smallness or positivity requirement,
/// `Convergence` an iteration or quadrature that failed to settle.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("resonance at k = {k}: {detail}")]
    Resonance { k: String, detail: String },
    #[error("membership error: {0}")]
    Membership(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }
    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }
    pub fn membership(msg: impl Into<String>) -> Self {
        Error::Membership(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub fn resonance(k: impl std::fmt::Display, detail: impl Into<String>) -> Self {
        Error::Resonance {
            k: k.to_string(),
            detail: detail.into(),
        }
    }
}
