use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::ScorerError;
use crate::atomizer::AtomId;
use crate::scalar::Scalar;

/// Raw, unnormalized preference for each candidate atom given the query and
/// the decoded prefix. Scores must be nonnegative and finite and come back in
/// candidate order; an all-zero response is treated as uniform.
pub trait Scorer<T: Scalar>: Send + Sync {
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError>;
}

impl<T: Scalar, S: Scorer<T> + ?Sized> Scorer<T> for &S {
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        (**self).score(query, prefix, candidates)
    }
}

impl<T: Scalar, S: Scorer<T> + ?Sized> Scorer<T> for Box<S> {
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        (**self).score(query, prefix, candidates)
    }
}

impl<T: Scalar, S: Scorer<T> + ?Sized> Scorer<T> for Arc<S> {
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        (**self).score(query, prefix, candidates)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScorer;

impl<T: Scalar> Scorer<T> for UniformScorer {
    fn score(&self, _query: &str, _prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        Ok(vec![T::one(); candidates.len()])
    }
}

/// Fixed scores per (prefix, atom), ignoring the query. Unlisted entries get
/// `default`.
#[derive(Debug, Clone)]
pub struct TableScorer<T> {
    table: HashMap<(Vec<AtomId>, AtomId), T>,
    default: T,
}

impl<T: Scalar> TableScorer<T> {
    pub fn new(default: T) -> Self {
        Self {
            table: HashMap::new(),
            default,
        }
    }

    pub fn set(&mut self, prefix: &[AtomId], atom: AtomId, score: T) -> &mut Self {
        self.table.insert((prefix.to_vec(), atom), score);
        self
    }

    pub fn with(mut self, prefix: &[AtomId], atom: AtomId, score: T) -> Self {
        self.set(prefix, atom, score);
        self
    }
}

impl<T: Scalar> Scorer<T> for TableScorer<T> {
    fn score(&self, _query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        let key_prefix = prefix.to_vec();
        Ok(candidates
            .iter()
            .map(|&a| self.table.get(&(key_prefix.clone(), a)).copied().unwrap_or(self.default))
            .collect())
    }
}

/// Wraps a scorer and counts calls and candidate-set sizes.
#[derive(Debug, Default)]
pub struct Instrumented<S> {
    inner: S,
    calls: AtomicUsize,
    max_candidates: AtomicUsize,
    candidates_scored: AtomicUsize,
}

impl<S> Instrumented<S> {
    pub fn new(inner: S) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
            max_candidates: AtomicUsize::new(0),
            candidates_scored: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn max_candidates(&self) -> usize {
        self.max_candidates.load(Ordering::Relaxed)
    }

    pub fn candidates_scored(&self) -> usize {
        self.candidates_scored.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
        self.max_candidates.store(0, Ordering::Relaxed);
        self.candidates_scored.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<T: Scalar, S: Scorer<T>> Scorer<T> for Instrumented<S> {
    fn score(&self, query: &str, prefix: &[AtomId], candidates: &[AtomId]) -> Result<Vec<T>, ScorerError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.max_candidates.fetch_max(candidates.len(), Ordering::Relaxed);
        self.candidates_scored.fetch_add(candidates.len(), Ordering::Relaxed);
        self.inner.score(query, prefix, candidates)
    }
}
