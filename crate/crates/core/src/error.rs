use thiserror::Error;

/// Errors raised by the exact and floating-point routines in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("deck size must be at least {min}, got {n}")]
    DeckTooSmall { n: usize, min: usize },

    #[error("deck size {n} is outside the supported range {min}..={max}")]
    DeckOutOfRange { n: usize, min: usize, max: usize },

    #[error("eigen index {i} must be even")]
    OddIndex { i: usize },

    #[error("eigen index {i} must be below the deck size {n}")]
    IndexOutOfRange { i: usize, n: usize },

    #[error("coefficient order m={m} exceeds N={big_n}")]
    OrderExceedsN { m: usize, big_n: usize },

    #[error(
        "power k=0 is not available from the spectral expansion: M is singular, \
         so the expansion only reproduces M^k for k >= 1"
    )]
    ZeroPower,

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_deck(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DeckTooSmall { n, min: 2 });
    }
    Ok(())
}
