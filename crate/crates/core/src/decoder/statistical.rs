//! Count-based scorer learned from (query, target document) pairs.
//!
//! For each docid position it keeps additive-smoothed co-occurrence counts
//! between query terms and the target's atom at that position, and a prior
//! equal to the empirical frequency of each atom at that position among the
//! training targets. The position-1 prior is what steers the first step
//! toward globally frequent atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Scorer, ScorerError};
use crate::atomizer::{AtomDocId, AtomId, AtomVocabulary};
use crate::corpus::TrainingPair;
use crate::jsonl;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no training pairs")]
    NoPairs,
    #[error("smoothing alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("training pair {index} targets unknown document {doc_key:?}")]
    UnresolvableTarget { index: usize, doc_key: String },
    #[error("document {doc_key:?} references atom {atom} outside the vocabulary")]
    UnknownAtom { doc_key: String, atom: AtomId },
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scorer file: {0}")]
    Format(String),
}

/// Lowercased whitespace tokens plus the character trigrams of each token.
pub fn extract_terms(text: &str) -> Vec<String> {
    let mut terms = Vec::new();
    for token in text.split_whitespace() {
        let token = token.to_lowercase();
        let chars: Vec<char> = token.chars().collect();
        for w in chars.windows(3) {
            let mut g = String::from("#");
            g.extend(w);
            terms.push(g);
        }
        terms.push(token);
    }
    terms
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct PositionModel {
    /// Training targets with atom `a` at this position.
    targets: BTreeMap<AtomId, u64>,
    /// Total term occurrences co-occurring with atom `a`.
    term_totals: BTreeMap<AtomId, u64>,
    counts: BTreeMap<String, BTreeMap<AtomId, u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticalScorer {
    alpha: f64,
    pairs: u64,
    vocabulary: BTreeSet<String>,
    positions: Vec<PositionModel>,
}

pub fn train_statistical_scorer(
    pairs: &[TrainingPair],
    docids: &BTreeMap<String, AtomDocId>,
    vocab: &AtomVocabulary,
    alpha: f64,
) -> Result<StatisticalScorer, TrainError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(TrainError::InvalidAlpha(alpha));
    }
    if pairs.is_empty() {
        return Err(TrainError::NoPairs);
    }
    let m = docids.values().next().map_or(0, |d| d.atoms.len());
    let mut positions = vec![PositionModel::default(); m];
    let mut vocabulary = BTreeSet::new();
    for (index, pair) in pairs.iter().enumerate() {
        let target = docids.get(&pair.target_doc_key).ok_or_else(|| TrainError::UnresolvableTarget {
            index,
            doc_key: pair.target_doc_key.clone(),
        })?;
        if let Some(&atom) = target.atoms.iter().find(|a| a.index() >= vocab.len()) {
            return Err(TrainError::UnknownAtom {
                doc_key: target.doc_key.clone(),
                atom,
            });
        }
        let terms = extract_terms(&pair.query_text);
        for (pos, &atom) in positions.iter_mut().zip(&target.atoms) {
            *pos.targets.entry(atom).or_default() += 1;
            *pos.term_totals.entry(atom).or_default() += terms.len() as u64;
            for t in &terms {
                *pos.counts.entry(t.clone()).or_default().entry(atom).or_default() += 1;
            }
        }
        vocabulary.extend(terms);
    }
    Ok(StatisticalScorer {
        alpha,
        pairs: pairs.len() as u64,
        vocabulary,
        positions,
    })
}

impl StatisticalScorer {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Unnormalized `ln prior_t(a) + Σ ln((count(term,a,t)+α)/(count(a,t)+αV))`
    /// for every candidate. Query terms never seen in training are skipped.
    pub fn log_scores<T: Scalar>(&self, query: &str, position: usize, candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        let pos = self
            .positions
            .get(position)
            .ok_or_else(|| ScorerError::Other(format!("position {position} is beyond the trained docid length")))?;
        let f = |v: f64| T::from_f64_lossy(v);
        let alpha = f(self.alpha);
        let alpha_v = f(self.alpha * self.vocabulary.len() as f64);
        let mut query_terms: BTreeMap<String, u64> = BTreeMap::new();
        for t in extract_terms(query) {
            if self.vocabulary.contains(&t) {
                *query_terms.entry(t).or_default() += 1;
            }
        }
        let pairs = f(self.pairs as f64);
        Ok(candidates
            .iter()
            .map(|a| {
                let prior = f(pos.targets.get(a).copied().unwrap_or(0) as f64) / pairs;
                let denom = (f(pos.term_totals.get(a).copied().unwrap_or(0) as f64) + alpha_v).ln();
                let mut acc = prior.ln();
                for (term, &mult) in &query_terms {
                    let c = pos.counts.get(term).and_then(|m| m.get(a)).copied().unwrap_or(0);
                    acc = acc + f(mult as f64) * ((f(c as f64) + alpha).ln() - denom);
                }
                acc
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scorer serialization is infallible") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        serde_json::from_str(text).map_err(|e| TrainError::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        jsonl::write_atomic(path, self.to_json().as_bytes()).map_err(|source| TrainError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let text = std::fs::read_to_string(path).map_err(|source| TrainError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

impl<T: Scalar> Scorer<T> for StatisticalScorer {
    /// Scores are rescaled so the best candidate gets 1, which keeps long
    /// queries clear of underflow without changing the normalized step
    /// distribution.
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        let logs: Vec<T> = self.log_scores(query, prefix.len(), candidates)?;
        let max = logs.iter().copied().fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            return Ok(vec![T::zero(); candidates.len()]);
        }
        Ok(logs.into_iter().map(|l| (l - max).exp()).collect())
    }
}
