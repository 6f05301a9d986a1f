use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A ray left the paraxial regime (|angle| >= 0.1 rad) or became non-finite.
    #[error("paraxial guard violated: position {position:e} m, angle {angle:e} rad")]
    Paraxial { position: f64, angle: f64 },

    /// A small-parameter expansion was evaluated outside its validity range.
    #[error("expansion guard violated: {name}/r = {ratio:e} (must be < {limit})")]
    ExpansionGuard {
        name: &'static str,
        ratio: f64,
        limit: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid cavity configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot compose an empty list of transfer matrices")]
    EmptyComposition,

    #[error("histograms have different binning")]
    BinningMismatch,

    #[error("histogram does not cover the requested range: {0}")]
    RangeInsufficient(String),

    #[error("degenerate growth series: {0}")]
    DegenerateSeries(String),

    #[error("mixing angle undefined: Q_M = 0 and Q_gamma = Q_a")]
    DegenerateMixing,

    #[error("no root in bracket: {0}")]
    NoRoot(String),
}

impl Error {
    /// True for numerical guard violations as opposed to bad inputs.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::Paraxial { .. } | Error::ExpansionGuard { .. })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
