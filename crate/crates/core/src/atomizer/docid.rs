use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::cluster::AtomVocabulary;
use super::{AtomizerError, Result};
use crate::corpus::KeywordRecord;

/// Identifier of one keyword cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomId(pub u32);

impl AtomId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The atom sequence identifying one document; position `t` holds the atom
/// of the document's `t`-th keyword.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomDocId {
    pub doc_key: String,
    pub atoms: Vec<AtomId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionMode {
    /// A docid may denote several documents.
    #[default]
    Permissive,
    /// Any shared docid is an error.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionGroup {
    pub atoms: Vec<AtomId>,
    /// Ascending.
    pub doc_keys: Vec<String>,
}

/// Every atom sequence shared by two or more documents, ordered by sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CollisionReport {
    pub groups: Vec<CollisionGroup>,
}

impl CollisionReport {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of documents that share their docid with another document.
    pub fn colliding_documents(&self) -> usize {
        self.groups.iter().map(|g| g.doc_keys.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocIdAssignment {
    pub docids: BTreeMap<String, AtomDocId>,
    pub collisions: CollisionReport,
}

pub fn assign_docids(records: &[KeywordRecord], vocab: &AtomVocabulary, mode: CollisionMode) -> Result<DocIdAssignment> {
    let mut docids = BTreeMap::new();
    let mut by_sequence: BTreeMap<Vec<AtomId>, Vec<String>> = BTreeMap::new();
    for rec in records {
        let atoms = rec
            .keywords
            .iter()
            .map(|k| {
                vocab.atom_of(k).ok_or_else(|| AtomizerError::UnknownKeyword {
                    doc_key: rec.doc_key.clone(),
                    keyword: k.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        by_sequence.entry(atoms.clone()).or_default().push(rec.doc_key.clone());
        docids.insert(
            rec.doc_key.clone(),
            AtomDocId {
                doc_key: rec.doc_key.clone(),
                atoms,
            },
        );
    }
    let groups: Vec<CollisionGroup> = by_sequence
        .into_iter()
        .filter(|(_, keys)| keys.len() > 1)
        .map(|(atoms, mut doc_keys)| {
            doc_keys.sort();
            CollisionGroup { atoms, doc_keys }
        })
        .collect();
    if mode == CollisionMode::Strict && !groups.is_empty() {
        return Err(AtomizerError::Collision(groups.into_iter().map(|g| g.doc_keys).collect()));
    }
    Ok(DocIdAssignment {
        docids,
        collisions: CollisionReport { groups },
    })
}
