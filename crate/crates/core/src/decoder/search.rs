use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::distribution::step_distribution;
use super::trie::PrefixTrie;
use super::{DecodeError, Result, Scorer};
use crate::atomizer::AtomId;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeEntry<T> {
    pub atoms: Vec<AtomId>,
    pub log_prob: T,
    /// Documents carrying this docid, ascending.
    pub doc_keys: Vec<String>,
}

/// Per-decode instrumentation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeStats {
    pub scorer_calls: usize,
    pub max_candidates: usize,
    pub candidates_scored: usize,
}

impl DecodeStats {
    fn record(&mut self, n: usize) {
        self.scorer_calls += 1;
        self.max_candidates = self.max_candidates.max(n);
        self.candidates_scored += n;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult<T> {
    /// Ranked by log-probability, ties by atom sequence.
    pub entries: Vec<DecodeEntry<T>>,
    pub width: usize,
    pub steps: usize,
    pub stats: DecodeStats,
}

/// One ranking slot after expanding shared docids into their documents.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDocument<T> {
    pub doc_key: String,
    pub atoms: Vec<AtomId>,
    pub log_prob: T,
}

impl<T: Scalar> DecodeResult<T> {
    pub fn best(&self) -> Option<&DecodeEntry<T>> {
        self.entries.first()
    }

    /// Each docid expands into consecutive slots, one per document.
    pub fn ranked_documents(&self) -> Vec<RankedDocument<T>> {
        self.entries
            .iter()
            .flat_map(|e| {
                e.doc_keys.iter().map(move |k| RankedDocument {
                    doc_key: k.clone(),
                    atoms: e.atoms.clone(),
                    log_prob: e.log_prob,
                })
            })
            .collect()
    }
}

pub(crate) fn rank_order<T: Scalar>(a: (&[AtomId], T), b: (&[AtomId], T)) -> Ordering {
    b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(b.0))
}

/// Greedy decoding: `m` steps of candidate set → step distribution → argmax.
///
/// The choice is made on the running log-probability (constant offset per
/// step) so that it agrees bit-for-bit with a width-1 beam.
pub fn decode_greedy<T: Scalar, S: Scorer<T> + ?Sized>(trie: &PrefixTrie, scorer: &S, query: &str) -> Result<DecodeResult<T>> {
    let mut prefix = Vec::with_capacity(trie.m());
    let mut total = T::zero();
    let mut stats = DecodeStats::default();
    for _ in 0..trie.m() {
        let candidates = trie.candidate_atoms(&prefix)?;
        stats.record(candidates.len());
        let dist = step_distribution(scorer, query, &prefix, &candidates)?;
        let mut best = 0;
        let mut best_total = total + dist.log_probabilities[0];
        for i in 1..dist.len() {
            let t = total + dist.log_probabilities[i];
            // Candidates are ascending, so a strict comparison keeps the lowest atom on ties.
            if t > best_total {
                best = i;
                best_total = t;
            }
        }
        total = best_total;
        prefix.push(dist.candidates[best]);
    }
    let doc_keys = trie.resolve(&prefix);
    Ok(DecodeResult {
        entries: vec![DecodeEntry {
            atoms: prefix,
            log_prob: total,
            doc_keys,
        }],
        width: 1,
        steps: trie.m(),
        stats,
    })
}

/// Beam search over the trie. Every live hypothesis expands over its own
/// constrained candidate set; the best `width` by cumulative log-probability
/// survive each step.
pub fn decode_beam<T: Scalar, S: Scorer<T> + ?Sized>(
    trie: &PrefixTrie,
    scorer: &S,
    query: &str,
    width: usize,
) -> Result<DecodeResult<T>> {
    if width == 0 {
        return Err(DecodeError::InvalidWidth);
    }
    let mut stats = DecodeStats::default();
    let mut beams: Vec<(Vec<AtomId>, T)> = vec![(Vec::new(), T::zero())];
    for _ in 0..trie.m() {
        let mut expanded = Vec::new();
        for (prefix, total) in &beams {
            let candidates = trie.candidate_atoms(prefix)?;
            stats.record(candidates.len());
            let dist = step_distribution(scorer, query, prefix, &candidates)?;
            for (&atom, &lp) in dist.candidates.iter().zip(&dist.log_probabilities) {
                let mut seq = prefix.clone();
                seq.push(atom);
                expanded.push((seq, *total + lp));
            }
        }
        expanded.sort_by(|a, b| rank_order((&a.0, a.1), (&b.0, b.1)));
        expanded.truncate(width);
        beams = expanded;
    }
    let entries = beams
        .into_iter()
        .map(|(atoms, log_prob)| DecodeEntry {
            doc_keys: trie.resolve(&atoms),
            atoms,
            log_prob,
        })
        .collect();
    Ok(DecodeResult {
        entries,
        width,
        steps: trie.m(),
        stats,
    })
}
