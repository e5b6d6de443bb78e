//! The persisted index: atom table plus the doc_key → atom-sequence map.
//! The prefix trie is not stored; it is rebuilt from the docids on load.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cluster::{cluster_keywords, Atom, AtomVocabulary};
use super::docid::{assign_docids, AtomDocId, AtomId, CollisionMode, CollisionReport};
use super::keywords::GlobalKeywordSet;
use super::space::{docid_space_report, SpaceReport, TokenCounter};
use super::{AtomizerError, Result};
use crate::corpus::{EmbeddingMap, KeywordRecord};
use crate::jsonl;
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFile {
    pub format_version: u32,
    pub m: usize,
    pub theta: f64,
    pub n_docs: usize,
    pub atoms: Vec<Atom>,
    pub docids: BTreeMap<String, Vec<AtomId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    m: usize,
    vocab: AtomVocabulary,
    docids: BTreeMap<String, AtomDocId>,
}

impl Index {
    pub fn new(m: usize, vocab: AtomVocabulary, docids: BTreeMap<String, AtomDocId>) -> Result<Self> {
        if docids.is_empty() {
            return Err(AtomizerError::EmptyInput);
        }
        for d in docids.values() {
            if d.atoms.len() != m {
                return Err(AtomizerError::Inconsistent(format!("docid of {:?} has length {}, expected {m}", d.doc_key, d.atoms.len())));
            }
            if let Some(a) = d.atoms.iter().find(|a| a.index() >= vocab.len()) {
                return Err(AtomizerError::Inconsistent(format!("docid of {:?} references unknown atom {a}", d.doc_key)));
            }
        }
        Ok(Self { m, vocab, docids })
    }

    /// Cluster, assign docids and assemble the index in one go.
    pub fn build<T: Scalar>(
        records: &[KeywordRecord],
        emb: &EmbeddingMap<T>,
        theta: T,
        mode: CollisionMode,
    ) -> Result<(Self, CollisionReport)> {
        let gks = GlobalKeywordSet::build(records)?;
        let vocab = cluster_keywords(&gks, emb, theta)?;
        let assigned = assign_docids(records, &vocab, mode)?;
        let m = records[0].keywords.len();
        Ok((Self::new(m, vocab, assigned.docids)?, assigned.collisions))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vocab(&self) -> &AtomVocabulary {
        &self.vocab
    }

    pub fn docids(&self) -> &BTreeMap<String, AtomDocId> {
        &self.docids
    }

    pub fn len(&self) -> usize {
        self.docids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docids.is_empty()
    }

    pub fn space_report(&self, records: &[KeywordRecord], counter: &dyn TokenCounter) -> Result<SpaceReport> {
        let gks = GlobalKeywordSet::build(records)?;
        docid_space_report(records, &self.docids, &self.vocab, &gks, counter)
    }

    pub fn to_file(&self) -> IndexFile {
        IndexFile {
            format_version: FORMAT_VERSION,
            m: self.m,
            theta: self.vocab.theta(),
            n_docs: self.docids.len(),
            atoms: self.vocab.atoms().to_vec(),
            docids: self.docids.iter().map(|(k, d)| (k.clone(), d.atoms.clone())).collect(),
        }
    }

    pub fn from_file(file: IndexFile) -> Result<Self> {
        if file.format_version != FORMAT_VERSION {
            return Err(AtomizerError::VersionMismatch {
                found: file.format_version,
                expected: FORMAT_VERSION,
            });
        }
        if file.n_docs != file.docids.len() {
            return Err(AtomizerError::Format(format!("n_docs is {} but {} docids are stored", file.n_docs, file.docids.len())));
        }
        let vocab = AtomVocabulary::from_atoms(file.atoms, file.theta)?;
        let docids = file
            .docids
            .into_iter()
            .map(|(k, atoms)| (k.clone(), AtomDocId { doc_key: k, atoms }))
            .collect();
        Self::new(file.m, vocab, docids)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("index serialization is infallible") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // Check the version before the schema so older layouts get a clear error.
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| AtomizerError::Format(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| AtomizerError::Format("missing format_version".into()))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(AtomizerError::VersionMismatch {
                found: version.min(u64::from(u32::MAX)) as u32,
                expected: FORMAT_VERSION,
            });
        }
        let file: IndexFile = serde_json::from_value(value).map_err(|e| AtomizerError::Format(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_atomic(path, self.to_json().as_bytes()).map_err(|source| AtomizerError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| AtomizerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
