use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// F0/f0 decreases somewhere on the support, so the two-bidder FOC may have several roots.
    #[error("regularity violated: F/f decreases near v = {at}")]
    Regularity { at: f64 },

    #[error(
        "assumption on F violated for n = {n}: max of n*int_0^v F^(n-1) / v is {max_ratio} > 1"
    )]
    Assumption { n: usize, max_ratio: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
