use thiserror::Error;

/// Errors raised by the time-scale kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("invalid time scale: {0}")]
    InvalidTimeScale(String),

    #[error("point {0} does not belong to the time scale")]
    NotInTimeScale(f64),

    #[error("time scale is not regular: {0}")]
    NotRegular(String),

    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("point {at} is outside {set}")]
    OutsideKappa { at: f64, set: &'static str },

    #[error("no neighborhood available to differentiate at dense point {0}")]
    NoNeighborhood(f64),

    #[error("{what} is not finite at t = {at}")]
    NonFinite { at: f64, what: &'static str },

    #[error("integration bounds must be finite, got [{lo}, {hi}]")]
    Unbounded { lo: f64, hi: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    #[error("span contains a dense part starting at {0}")]
    DenseSpan(f64),

    #[error("span reaches the accumulation point {0} in infinitely many steps")]
    AccumulationInSpan(f64),

    #[error("coefficient is not {kind} at t = {at} (factor {factor})")]
    NotRegressive { at: f64, kind: &'static str, factor: f64 },

    #[error("logarithm argument {arg} is not positive (z = {z}, h = {h})")]
    LogDomain { z: f64, h: f64, arg: f64 },

    #[error("combined exponential needs positive exponentials, got {value} at t = {at}")]
    NegativeBase { at: f64, value: f64 },

    #[error("{0} requires alpha strictly between 0 and 1")]
    DegenerateAlpha(&'static str),

    #[error("point {0} is not two-sided scattered")]
    NotScattered(f64),

    #[error(
        "transition-matrix product diverges at accumulation point {at}: \
         b = {b} >= 1 (alpha = {alpha} <= {threshold_label} = {threshold}; \
         convergence requires alpha > {threshold_label})"
    )]
    Divergent {
        at: f64,
        alpha: f64,
        b: f64,
        threshold: f64,
        threshold_label: &'static str,
    },

    #[error("infinite product or series exceeded the cap of {0} factors")]
    FactorCap(usize),

    #[error("target {target} lies before the anchor {t0}; backward solutions are not supported")]
    Backward { target: f64, t0: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
