use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("window [{lo}, {hi}] does not contain the origin")]
    WindowExcludesOrigin { lo: i64, hi: i64 },
    #[error("empty window [{lo}, {hi}]")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("walk leaves the scenery window at time {time} (site {site})")]
    WalkExitsWindow { time: i64, site: i64 },
    #[error("observation at time 0 is {observed}, origin color is {expected}")]
    ColorMismatchAtOrigin { observed: u8, expected: u8 },
    #[error("value {0} is not a bit")]
    InvalidBit(i64),
    #[error("positions {index} and {} are not nearest neighbors", index + 1)]
    NotNearestNeighbor { index: usize },
    #[error("interval ({x1}, {x2}) has length not a multiple of 3")]
    IntervalNotMultipleOf3 { x1: i64, x2: i64 },
    #[error("word lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("crossing ({t1}, {t2}) does not decompose into a crossing of S over a crossing of R")]
    DecompositionViolated { t1: i64, t2: i64 },
    #[error("no crossing of (0, {0}) within the horizon")]
    NoFirstCrossing(i64),
    #[error("no 2 is followed by a 3 in the marker sequence")]
    NoMarkerPair,
    #[error("only {completed} of {trials} trials completed")]
    InsufficientCompletedTrials { completed: usize, trials: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
