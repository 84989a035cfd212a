use thiserror::Error;

/// Errors raised by the svlab core routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite state{} (x = {x}, y = {y})", locate(*.path, *.step))]
    NonFiniteState { path: Option<usize>, step: Option<usize>, x: f64, y: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("unsupported moment: {0}")]
    UnsupportedMoment(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("frequency grid too coarse: |phi| = {edge_modulus:e} at the grid edge")]
    GridTooCoarse { edge_modulus: f64 },

    #[error("invalid price series: {0}")]
    InvalidSeries(String),

    #[error("sample outside the support of the {family} family: {detail}")]
    DomainError { family: &'static str, detail: String },

    #[error("objective is not finite at the starting simplex")]
    NonFiniteStart,

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

fn locate(path: Option<usize>, step: Option<usize>) -> String {
    match (path, step) {
        (Some(p), Some(s)) => format!(" on path {p} at step {s}"),
        (None, Some(s)) => format!(" at step {s}"),
        _ => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
