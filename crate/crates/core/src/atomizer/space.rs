use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::cluster::AtomVocabulary;
use super::docid::AtomDocId;
use super::keywords::GlobalKeywordSet;
use super::{AtomizerError, Result};
use crate::corpus::KeywordRecord;

/// Counts identifier tokens for a keyword surface form.
pub trait TokenCounter {
    fn count(&self, keyword: &str) -> usize;
}

/// Whitespace-delimited units.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenCounter;

impl TokenCounter for WhitespaceTokenCounter {
    fn count(&self, keyword: &str) -> usize {
        keyword.split_whitespace().count()
    }
}

impl<F: Fn(&str) -> usize> TokenCounter for F {
    fn count(&self, keyword: &str) -> usize {
        self(keyword)
    }
}

/// Size of the identifier space before and after clustering. Search spaces
/// are natural logarithms (`m·ln N` and `m·ln C`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub documents: usize,
    pub keywords: usize,
    pub atoms: usize,
    pub m: usize,
    pub compression_ratio: f64,
    pub distinct_docids: usize,
    pub ln_naive_space: f64,
    pub ln_compressed_space: f64,
    pub baseline_tokens: usize,
    pub compressed_tokens: usize,
    pub token_reduction: f64,
}

pub fn docid_space_report(
    records: &[KeywordRecord],
    docids: &BTreeMap<String, AtomDocId>,
    vocab: &AtomVocabulary,
    gks: &GlobalKeywordSet,
    counter: &dyn TokenCounter,
) -> Result<SpaceReport> {
    let inconsistent = |m: String| Err(AtomizerError::Inconsistent(m));
    if records.is_empty() {
        return Err(AtomizerError::EmptyInput);
    }
    if records.len() != docids.len() {
        return inconsistent(format!("{} keyword records but {} docids", records.len(), docids.len()));
    }
    if vocab.keyword_count() != gks.len() {
        return inconsistent(format!("vocabulary covers {} keywords, keyword set has {}", vocab.keyword_count(), gks.len()));
    }
    let m = records[0].keywords.len();
    let mut baseline_tokens = 0;
    for rec in records {
        match docids.get(&rec.doc_key) {
            Some(d) if d.atoms.len() == m && rec.keywords.len() == m => {}
            _ => return inconsistent(format!("document {:?} has no docid of length {m}", rec.doc_key)),
        }
        baseline_tokens += rec.keywords.iter().map(|k| counter.count(k)).sum::<usize>();
    }
    let distinct: HashSet<&Vec<_>> = docids.values().map(|d| &d.atoms).collect();
    let n_docs = records.len();
    let compressed_tokens = n_docs * m;
    Ok(SpaceReport {
        documents: n_docs,
        keywords: gks.len(),
        atoms: vocab.len(),
        m,
        compression_ratio: vocab.len() as f64 / gks.len() as f64,
        distinct_docids: distinct.len(),
        ln_naive_space: m as f64 * (n_docs as f64).ln(),
        ln_compressed_space: m as f64 * (vocab.len() as f64).ln(),
        baseline_tokens,
        compressed_tokens,
        token_reduction: if baseline_tokens == 0 { 0.0 } else { 1.0 - compressed_tokens as f64 / baseline_tokens as f64 },
    })
}
