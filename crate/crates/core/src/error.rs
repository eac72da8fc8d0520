use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("distance matrix is asymmetric: d({x},{y}) = {dxy} but d({y},{x}) = {dyx}")]
    Asymmetric { x: usize, y: usize, dxy: f64, dyx: f64 },

    #[error("distance d({x},{x}) = {value} is not zero")]
    NonzeroDiagonal { x: usize, value: f64 },

    #[error("invalid distance d({x},{y}) = {value}")]
    InvalidDistance { x: usize, y: usize, value: f64 },

    #[error("distance d({x},{y}) = {value} is below 1 (uniform discreteness)")]
    NotDiscrete { x: usize, y: usize, value: f64 },

    #[error("triangle inequality fails: d({x},{y}) = {dxy} > d({x},{z}) + d({z},{y}) = {via}")]
    Triangle { x: usize, y: usize, z: usize, dxy: f64, via: f64 },

    #[error("space is disconnected: point {point} is unreachable from point 0")]
    Disconnected { point: usize },

    #[error("invalid generator parameters: {0}")]
    Generator(String),

    #[error("empty subset")]
    EmptySubset,

    #[error("point index {index} out of range for space of {n} points")]
    OutOfRange { index: usize, n: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("operators are incompatible: {0}")]
    Incompatible(String),

    #[error("invalid exponent {0}")]
    Exponent(String),

    #[error("exhaustive search refused for {n} points (limit {limit}); use bounds mode")]
    TooLarge { n: usize, limit: usize },

    #[error("contraction precondition violated: {factor} * {norm} = {product} >= 1")]
    NotContraction { factor: f64, norm: f64, product: f64 },

    #[error("supports of members {first} and {second} {reason}")]
    Overlap { first: usize, second: usize, reason: String },

    #[error("exponent mismatch: partition has p = {partition}, operator has p = {operator}")]
    ExponentMismatch { partition: String, operator: String },

    #[error("unsupported exponent {p} for {what}")]
    UnsupportedExponent { p: String, what: &'static str },

    #[error("space is not a grid")]
    NotGrid,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("singular system")]
    Singular,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
