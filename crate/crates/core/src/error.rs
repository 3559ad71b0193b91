use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid topology size {size}: {reason}")]
    InvalidSize { size: usize, reason: &'static str },
    #[error("node {node} is not part of a topology with {count} nodes")]
    UnknownNode { node: usize, count: usize },
    #[error("source and destination coincide (node {0})")]
    EmptyRequest(usize),
    #[error("probability {0} is outside (0, 1]")]
    Probability(f64),
    #[error("expected value diverges for a zero success probability")]
    Divergent,
    #[error("{name} = {value} is outside {min}..={max}")]
    OutOfRange { name: &'static str, value: usize, min: usize, max: usize },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("closed-form evaluations disagree: {exact} vs {series}")]
    NumericalMismatch { exact: f64, series: f64 },
}

/// Validates a success probability in (0, 1].
pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p == 0.0 {
        return Err(Error::Divergent);
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Probability(p));
    }
    Ok(())
}
