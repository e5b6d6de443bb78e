//! Trie-constrained multi-step decoding of atom-sequence docids.
//!
//! At every step the candidate set is the set of children of the decoded
//! prefix in the docid trie, the scorer is consulted on exactly those
//! candidates, and its raw scores are renormalized over them in log space.

mod distribution;
pub mod external;
mod scorer;
mod search;
mod statistical;
mod trie;

use thiserror::Error;

use crate::atomizer::AtomId;

pub use distribution::{step_distribution, validate_scores, StepDistribution};
pub use external::{Endpoint, ExternalScorer, ProtocolError, PROTOCOL_VERSION};
pub use scorer::{Instrumented, Scorer, TableScorer, UniformScorer};
pub use search::{decode_beam, decode_greedy, DecodeEntry, DecodeResult, DecodeStats, RankedDocument};
pub use statistical::{extract_terms, train_statistical_scorer, StatisticalScorer, TrainError};
pub use trie::PrefixTrie;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("scorer returned {actual} scores for {expected} candidates")]
    WrongLength { expected: usize, actual: usize },
    #[error("scorer returned negative score {value} at index {index}")]
    Negative { index: usize, value: f64 },
    #[error("scorer returned a non-finite score at index {index}")]
    NonFinite { index: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("cannot build a trie from an empty docid set")]
    EmptyIndex,
    #[error("docid of {doc_key:?} has length {actual}, expected {expected}")]
    LengthMismatch {
        doc_key: String,
        expected: usize,
        actual: usize,
    },
    #[error("unreachable prefix {0:?}")]
    UnreachablePrefix(Vec<AtomId>),
    #[error("prefix of length {0} is already a complete docid")]
    CompletePrefix(usize),
    #[error("no candidates to score")]
    NoCandidates,
    #[error("beam width must be at least 1")]
    InvalidWidth,
    #[error("scorer failure: {0}")]
    Scorer(#[from] ScorerError),
}

pub type Result<T, E = DecodeError> = std::result::Result<T, E>;
