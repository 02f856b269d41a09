use thiserror::Error;

/// Errors produced by the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} outside [{min}, {max}]")]
    Domain { what: &'static str, value: f64, min: f64, max: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
    #[error("numeric failure in {context}: rate {rate:e}")]
    Numeric { context: &'static str, rate: f64 },
    #[error("row {row} out of range (rows = {rows})")]
    RowRange { row: usize, rows: usize },
    #[error("data width {got} does not match {expected}")]
    Width { got: usize, expected: usize },
    #[error("calibration failed: {reason} (residual {residual})")]
    Calibration { reason: &'static str, residual: f64 },
    #[error("configuration error: {0}")]
    Config(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        return Err(Error::Domain { what, value, min, max });
    }
    Ok(())
}
