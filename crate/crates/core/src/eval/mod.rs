//! Retrieval metrics, per-language reports, parameter sweeps and the
//! brute-force ranking oracle.

mod evaluate;
mod oracle;
mod recall;
mod sweep;

use std::path::PathBuf;

use thiserror::Error;

use crate::atomizer::AtomizerError;
use crate::decoder::{DecodeError, TrainError};

pub use evaluate::{attach_qrels, evaluate, EvalReport, LanguageRow, QueryOutcome, RankedHit, Timing, AVERAGE_LABEL};
pub use oracle::{brute_force_rank, DEFAULT_GUARD};
pub use recall::{hit_at_k, recall_at_k};
pub use sweep::{sweep, SweepInputs, SweepParameter, SweepPoint, SweepResult, SweepScorer};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty query set")]
    EmptyQuerySet,
    #[error("query {0:?} has no relevant documents")]
    MissingQrels(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("beam width {width} is smaller than the largest reported cutoff {required}")]
    WidthTooSmall { width: usize, required: usize },
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error("no keyword file of width m = {0}")]
    MissingKeywordWidth(usize),
    #[error("index has {count} distinct docids, above the enumeration guard of {guard}")]
    GuardExceeded { count: usize, guard: usize },
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Atomizer(#[from] AtomizerError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Format(String),
}

pub type Result<T, E = EvalError> = std::result::Result<T, E>;
