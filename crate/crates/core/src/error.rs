use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate sum near a level line at z = {re} + {im}i")]
    Degenerate { re: f64, im: f64 },

    #[error("division degenerate: g(z) numerically zero at z = {re} + {im}i")]
    DivisionDegenerate { re: f64, im: f64 },

    #[error("overflow while evaluating at z = {re} + {im}i")]
    Overflow { re: f64, im: f64 },

    #[error("point lies on the curve (distance {distance:e})")]
    OnCurve { distance: f64 },

    #[error("curve is not closed")]
    NotClosed,

    #[error("no preimage seeds found in the window")]
    NoSeeds,

    #[error("resolution too coarse: component {id} has only {cells} cells")]
    ResolutionTooCoarse { id: usize, cells: usize },

    #[error("component {id} touches the window boundary")]
    TouchesBoundary { id: usize },

    #[error("epsilon {0} outside (0, 1/8]")]
    EpsilonRange(f64),

    #[error("undersampled: an arc spans only {samples} samples")]
    Undersampled { samples: usize },

    #[error("arc carries no measure")]
    ZeroMass,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

