use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::types::*;
use super::{CorpusError, Result};
use crate::jsonl::{self, LenientNumber};
use crate::scalar::Scalar;

/// NFC normalization plus surrounding-whitespace trim. Case is preserved.
pub fn canonicalize_keyword(raw: &str) -> String {
    raw.nfc().collect::<String>().trim().to_string()
}

fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    jsonl::read_lines(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CorpusError::Malformed {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Malformed {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines(path)? {
        let doc: Document = parse(path, line, &text)?;
        if doc.doc_key.is_empty() {
            return Err(malformed(path, line, "empty document id"));
        }
        if doc.lang.is_empty() {
            return Err(malformed(path, line, "empty language tag"));
        }
        if !seen.insert(doc.doc_key.clone()) {
            return Err(CorpusError::DuplicateKey {
                path: path.to_path_buf(),
                key: doc.doc_key,
                line,
            });
        }
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(CorpusError::Empty {
            path: path.to_path_buf(),
            what: "corpus",
        });
    }
    Ok(docs)
}

/// Returns one record per corpus document, in corpus order.
pub fn load_keywords(path: &Path, corpus: &[Document], m: usize) -> Result<Vec<KeywordRecord>> {
    let known: HashSet<&str> = corpus.iter().map(|d| d.doc_key.as_str()).collect();
    let mut by_key: HashMap<String, KeywordRecord> = HashMap::new();
    for (line, text) in lines(path)? {
        let raw: KeywordRecord = parse(path, line, &text)?;
        if !known.contains(raw.doc_key.as_str()) {
            return Err(CorpusError::UnknownDocument {
                doc_key: raw.doc_key,
                line,
            });
        }
        if raw.keywords.len() != m {
            return Err(CorpusError::KeywordCount {
                doc_key: raw.doc_key,
                expected: m,
                actual: raw.keywords.len(),
            });
        }
        let mut keywords = Vec::with_capacity(m);
        for (i, k) in raw.keywords.iter().enumerate() {
            let k = canonicalize_keyword(k);
            if k.is_empty() {
                return Err(CorpusError::EmptyKeyword {
                    doc_key: raw.doc_key,
                    position: i + 1,
                });
            }
            keywords.push(k);
        }
        if by_key.contains_key(&raw.doc_key) {
            return Err(CorpusError::DuplicateKey {
                path: path.to_path_buf(),
                key: raw.doc_key,
                line,
            });
        }
        by_key.insert(
            raw.doc_key.clone(),
            KeywordRecord {
                doc_key: raw.doc_key,
                keywords,
            },
        );
    }
    corpus
        .iter()
        .map(|d| {
            by_key.remove(&d.doc_key).ok_or_else(|| CorpusError::MissingKeywords {
                doc_key: d.doc_key.clone(),
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct RawEmbedding {
    keyword: String,
    vector: Vec<LenientNumber>,
}

/// Loads every embedding in the file. Keywords outside `required` are kept
/// and listed in [`EmbeddingLoad::extra`].
pub fn load_embeddings<T: Scalar>(path: &Path, required: &BTreeSet<String>) -> Result<EmbeddingLoad<T>> {
    let mut map: Option<EmbeddingMap<T>> = None;
    for (line, text) in lines(path)? {
        let raw: RawEmbedding = jsonl::parse_lenient(&text).map_err(|e| malformed(path, line, e.to_string()))?;
        let keyword = canonicalize_keyword(&raw.keyword);
        if keyword.is_empty() {
            return Err(malformed(path, line, "empty keyword"));
        }
        let dim = map.as_ref().map_or(raw.vector.len(), |m| m.dim());
        if raw.vector.len() != dim || dim == 0 {
            return Err(CorpusError::DimensionMismatch {
                keyword,
                expected: dim,
                actual: raw.vector.len(),
            });
        }
        let mut vector = Vec::with_capacity(dim);
        for (index, LenientNumber(v)) in raw.vector.into_iter().enumerate() {
            let x = T::from_f64_lossy(v);
            if !x.is_finite() {
                return Err(CorpusError::NonFinite { keyword, index });
            }
            vector.push(x);
        }
        let norm_sq: T = vector.iter().map(|&x| x * x).sum();
        if !(norm_sq > T::zero()) {
            return Err(CorpusError::ZeroVector { keyword });
        }
        let map = map.get_or_insert_with(|| EmbeddingMap::new(dim));
        if map.contains(&keyword) {
            return Err(CorpusError::DuplicateKey {
                path: path.to_path_buf(),
                key: keyword,
                line,
            });
        }
        map.insert(keyword, vector);
    }
    let embeddings = map.ok_or_else(|| CorpusError::Empty {
        path: path.to_path_buf(),
        what: "embedding file",
    })?;
    let missing: Vec<String> = required.iter().filter(|k| !embeddings.contains(k)).cloned().collect();
    if !missing.is_empty() {
        return Err(CorpusError::MissingEmbeddings { keywords: missing });
    }
    let mut extra: Vec<String> = embeddings
        .to_records()
        .into_iter()
        .map(|e| e.keyword)
        .filter(|k| !required.contains(k))
        .collect();
    extra.sort();
    Ok(EmbeddingLoad { embeddings, extra })
}

pub fn load_queries(path: &Path) -> Result<Vec<QueryRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines(path)? {
        let q: QueryRecord = parse(path, line, &text)?;
        if !seen.insert(q.query_key.clone()) {
            return Err(CorpusError::DuplicateKey {
                path: path.to_path_buf(),
                key: q.query_key,
                line,
            });
        }
        out.push(q);
    }
    Ok(out)
}

pub fn load_training_pairs(path: &Path) -> Result<Vec<TrainingPair>> {
    lines(path)?
        .into_iter()
        .map(|(line, text)| parse(path, line, &text))
        .collect()
}

/// Two-column qrels: `query_key doc_key` per line, whitespace separated.
pub fn load_qrels(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut qrels: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (line, text) in lines(path)? {
        let cols: Vec<&str> = text.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(malformed(path, line, format!("expected 2 columns, found {}", cols.len())));
        }
        qrels.entry(cols[0].to_string()).or_default().insert(cols[1].to_string());
    }
    Ok(qrels)
}

/// Write records as JSON lines, atomically.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    jsonl::write_atomic(path, jsonl::to_jsonl(items).as_bytes()).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}
