use std::collections::{BTreeMap, BTreeSet};

use super::{EvalError, Result};

/// Whether any relevant document appears among the first `k` ranked keys.
pub fn hit_at_k(ranked: &[String], relevant: &BTreeSet<String>, k: usize) -> bool {
    ranked.iter().take(k).any(|d| relevant.contains(d))
}

/// Fraction of queries with at least one relevant document in the top `k`.
pub fn recall_at_k(
    results: &BTreeMap<String, Vec<String>>,
    qrels: &BTreeMap<String, BTreeSet<String>>,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    if results.is_empty() {
        return Err(EvalError::EmptyQuerySet);
    }
    let mut hits = 0usize;
    for (query, ranked) in results {
        let relevant = qrels
            .get(query)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| EvalError::MissingQrels(query.clone()))?;
        if hit_at_k(ranked, relevant, k) {
            hits += 1;
        }
    }
    Ok(hits as f64 / results.len() as f64)
}
