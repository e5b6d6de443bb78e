//! Shared atom vocabulary: threshold clustering of keyword embeddings and
//! fixed-length atom-sequence document identifiers.

mod cluster;
mod docid;
mod index;
mod keywords;
mod similarity;
mod space;

use std::path::PathBuf;

use thiserror::Error;

pub use cluster::{cluster_keywords, Atom, AtomVocabulary};
pub use docid::{assign_docids, AtomDocId, AtomId, CollisionGroup, CollisionMode, CollisionReport, DocIdAssignment};
pub use index::{Index, IndexFile, FORMAT_VERSION};
pub use keywords::GlobalKeywordSet;
pub use similarity::{cosine, cosine_with_norms, norm};
pub use space::{docid_space_report, SpaceReport, TokenCounter, WhitespaceTokenCounter};

#[derive(Debug, Error)]
pub enum AtomizerError {
    #[error("no keyword records")]
    EmptyInput,
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("no embedding for keyword {0:?}")]
    MissingEmbedding(String),
    #[error("invalid similarity threshold {0} (must be finite and >= 0)")]
    InvalidTheta(f64),
    #[error("document {doc_key:?}: keyword {keyword:?} is not in the atom vocabulary")]
    UnknownKeyword { doc_key: String, keyword: String },
    #[error("docid collisions in strict mode: {}", format_groups(.0))]
    Collision(Vec<Vec<String>>),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed index file: {0}")]
    Format(String),
    #[error("index format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

fn format_groups(groups: &[Vec<String>]) -> String {
    groups.iter().map(|g| format!("[{}]", g.join(", "))).collect::<Vec<_>>().join(" ")
}

pub type Result<T, E = AtomizerError> = std::result::Result<T, E>;
