use super::{EvalError, Result};
use crate::atomizer::AtomId;
use crate::decoder::{step_distribution, PrefixTrie, Scorer};
use crate::scalar::Scalar;

pub const DEFAULT_GUARD: usize = 10_000;

/// Scores every docid of the trie by the product of its constrained step
/// probabilities and ranks them by log-probability, ties by atom sequence.
///
/// Each prefix is scored once; the per-docid sums are accumulated in step
/// order so they reproduce beam search totals exactly.
pub fn brute_force_rank<T: Scalar, S: Scorer<T> + ?Sized>(
    trie: &PrefixTrie,
    scorer: &S,
    query: &str,
    guard: usize,
) -> Result<Vec<(Vec<AtomId>, T)>> {
    let count = trie.distinct_docids();
    if count > guard {
        return Err(EvalError::GuardExceeded { count, guard });
    }
    let mut out = Vec::with_capacity(count);
    let mut stack: Vec<(Vec<AtomId>, T)> = vec![(Vec::new(), T::zero())];
    while let Some((prefix, total)) = stack.pop() {
        if prefix.len() == trie.m() {
            out.push((prefix, total));
            continue;
        }
        let candidates = trie.candidate_atoms(&prefix)?;
        let dist = step_distribution(scorer, query, &prefix, &candidates)?;
        for (&atom, &lp) in dist.candidates.iter().zip(&dist.log_probabilities) {
            let mut next = prefix.clone();
            next.push(atom);
            stack.push((next, total + lp));
        }
    }
    out.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(out)
}
