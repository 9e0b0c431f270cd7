use thiserror::Error;

use crate::expr::ExprError;

/// Problems in a JSON specification document. `key` is the dotted path of
/// the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("`{key}`: {message}")]
pub struct SpecError {
    pub key: String,
    pub message: String,
}

impl SpecError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError {
            key: key.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid specification: {0}")]
    Spec(#[from] SpecError),
    #[error("curve is not regular at sample {sample} (zero differential)")]
    Irregular { sample: usize },
    #[error("singular angle at sample {sample}: |{what}| below threshold")]
    SingularAngle { sample: usize, what: &'static str },
    #[error("abscissa direction reverses between samples {sample} and {}; split the curve there", sample + 1)]
    OrientationFlip { sample: usize },
    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("degenerate frame at sample {sample}: development angle does not advance")]
    DegenerateFrame { sample: usize },
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("first fundamental form is degenerate (EG - F^2 = {0:e})")]
    DegenerateMetric(f64),
    #[error("gradient vanishes at ({}, {}, {})", .0[0], .0[1], .0[2])]
    VanishingGradient([f64; 3]),
    #[error("developability condition violated at parameter {param}: residual {residual:e}")]
    ConditionViolated { param: f64, residual: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
