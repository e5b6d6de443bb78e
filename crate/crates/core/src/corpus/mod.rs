//! Corpus, keyword, embedding, query and training-pair ingestion, plus the
//! deterministic synthetic benchmark generator.

mod load;
mod synth;
mod types;

use std::path::PathBuf;

use thiserror::Error;

pub use load::{
    canonicalize_keyword, load_corpus, load_embeddings, load_keywords, load_qrels, load_queries,
    load_training_pairs, write_jsonl,
};
pub use synth::{generate_synthetic_corpus, KeywordGroup, SynthCorpus, SynthSpec};
pub use types::{
    Document, EmbeddingLoad, EmbeddingMap, KeywordEmbedding, KeywordRecord, QueryRecord,
    TrainingPair,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed record: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: duplicate key {key:?}", path.display())]
    DuplicateKey {
        path: PathBuf,
        key: String,
        line: usize,
    },
    #[error("{}: empty {what}", path.display())]
    Empty { path: PathBuf, what: &'static str },
    #[error("no keyword record for document {doc_key:?}")]
    MissingKeywords { doc_key: String },
    #[error("document {doc_key:?}: expected {expected} keywords, found {actual}")]
    KeywordCount {
        doc_key: String,
        expected: usize,
        actual: usize,
    },
    #[error("document {doc_key:?}: keyword {position} is empty")]
    EmptyKeyword { doc_key: String, position: usize },
    #[error("line {line}: keyword record for unknown document {doc_key:?}")]
    UnknownDocument { doc_key: String, line: usize },
    #[error("missing embeddings for {} keyword(s): {}", keywords.len(), keywords.join(", "))]
    MissingEmbeddings { keywords: Vec<String> },
    #[error("embedding for {keyword:?} has dimension {actual}, expected {expected}")]
    DimensionMismatch {
        keyword: String,
        expected: usize,
        actual: usize,
    },
    #[error("embedding for {keyword:?} has a non-finite component at index {index}")]
    NonFinite { keyword: String, index: usize },
    #[error("embedding for {keyword:?} is the zero vector")]
    ZeroVector { keyword: String },
    #[error("invalid synthetic corpus parameters: {0}")]
    InvalidSynthSpec(String),
    #[error("synthetic embeddings violate the cosine bounds after {attempts} attempts")]
    InfeasibleGeometry { attempts: usize },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;
