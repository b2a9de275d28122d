use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for a chain of {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("a two-qubit gate needs two distinct sites, got ({0}, {0})")]
    CoincidentSites(usize),

    #[error("gate matrix is not unitary: max |U^dag U - I| = {deviation:e}")]
    NonUnitary { deviation: f64 },

    #[error("both measurement outcomes on site {site} have probability below 1e-14 (p0 = {p0:e}, p1 = {p1:e})")]
    CorruptState { site: usize, p0: f64, p1: f64 },

    #[error("forced outcome {outcome} on site {site} has vanishing probability {probability:e}")]
    ImpossibleOutcome {
        site: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("cannot keep {requested} sites; dense reduced matrices are capped at {max}")]
    TooManySites { requested: usize, max: usize },

    #[error("kept sites must be distinct, site {0} appears twice")]
    DuplicateSite(usize),

    #[error("{criterion} needs a {expected}-spin density matrix, got {actual} spins")]
    WrongSpinCount {
        criterion: &'static str,
        expected: &'static str,
        actual: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid position spec {spec:?}: {reason}")]
    PositionSpec { spec: String, reason: String },

    #[error("empty target list")]
    EmptyTargets,

    #[error("too many targets ({0}); the exact Steiner search handles at most 8")]
    TooManyTargets(usize),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("no rows for observable {observable} at x = {x}")]
    NoRows { observable: String, x: usize },

    #[error("fit needs at least 2 usable points, got {0}")]
    InsufficientPoints(usize),

    #[error("non-positive mean {mean} at abscissa {x}; log fit impossible")]
    NonPositiveMean { x: f64, mean: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed data in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::CorruptState { .. }
            | Error::ImpossibleOutcome { .. }
            | Error::NonUnitary { .. } => 4,
            _ => 2,
        }
    }
}
