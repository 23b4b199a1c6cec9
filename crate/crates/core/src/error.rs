use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("plane has no function-graph form w = au + bv + c")]
    VerticalPlane,
    #[error("sphere boundaries coincide")]
    ConcentricEqual,
    #[error("beta must lie in (0, 2], got {0}")]
    InvalidBeta(f64),
    #[error("input point set is empty")]
    EmptyInput,
    #[error("balls of a spherical polytope must share one radius")]
    MixedRadii,
    #[error("point violates a ball of the family by more than the tolerance")]
    NotMember,
    #[error("arrangement stays degenerate after perturbation")]
    DegenerateArrangement,
    #[error("cell adjacency graph is disconnected")]
    DisconnectedAdjacency,
    #[error("no valid cutting found after {0} attempts")]
    CuttingFailure(usize),
    #[error("life-span [{start}, {end}) exceeds {len} leaves")]
    SpanOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("curves of points {a} and {b} meet {count} times on the searched surface")]
    IntersectionBoundViolated { a: usize, b: usize, count: usize },
    #[error("radius {r} exceeds the enclosing radius {r0}")]
    InvalidRadius { r: f64, r0: f64 },
    #[error("circle does not meet the third sphere")]
    NoIntersection,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instance contains no points")]
    EmptyInstance,
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
