use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::recall::hit_at_k;
use super::{EvalError, Result};
use crate::atomizer::AtomId;
use crate::corpus::QueryRecord;
use crate::decoder::{decode_beam, PrefixTrie, Scorer};
use crate::jsonl;
use crate::scalar::Scalar;

/// Label of the cross-language average row.
pub const AVERAGE_LABEL: &str = "AVG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRow {
    pub lang: String,
    pub queries: usize,
    pub failures: usize,
    pub recall_at_1: f64,
    pub recall_at_10: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recall_at_100: Option<f64>,
}

/// Wall-clock decode time per query, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub mean_seconds: f64,
    pub median_seconds: f64,
    pub max_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub doc_key: String,
    pub atoms: Vec<AtomId>,
    #[serde(with = "jsonl::log_prob")]
    pub log_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub lang: String,
    pub relevant: Vec<String>,
    pub ranked: Vec<RankedHit>,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QueryOutcome {
    pub fn ranked_keys(&self) -> Vec<String> {
        self.ranked.iter().map(|h| h.doc_key.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub width: usize,
    pub query_count: usize,
    pub failures: usize,
    /// One row per query language, sorted by language tag.
    pub rows: Vec<LanguageRow>,
    /// Unweighted mean over `rows`.
    pub average: LanguageRow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    /// Query key → full ranked list, so every aggregate can be recomputed.
    pub raw: BTreeMap<String, QueryOutcome>,
}

impl EvalReport {
    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| EvalError::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        jsonl::write_atomic(path, self.to_json().as_bytes()).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// Adds relevance judgments from a separate qrels map to the query records.
pub fn attach_qrels(queries: &mut [QueryRecord], qrels: &BTreeMap<String, BTreeSet<String>>) {
    for q in queries {
        if let Some(extra) = qrels.get(&q.query_key) {
            let mut all: BTreeSet<String> = q.relevant_doc_keys.drain(..).collect();
            all.extend(extra.iter().cloned());
            q.relevant_doc_keys = all.into_iter().collect();
        }
    }
}

/// Beam-decodes every query and reports recall per query language.
///
/// A query whose decode fails counts as a miss and is listed with its error.
/// Queries run in parallel; the report is assembled in query-key order.
pub fn evaluate<T: Scalar, S: Scorer<T> + ?Sized>(
    trie: &PrefixTrie,
    scorer: &S,
    queries: &[QueryRecord],
    width: usize,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(EvalError::EmptyQuerySet);
    }
    if width < 10 {
        return Err(EvalError::WidthTooSmall { width, required: 10 });
    }
    let mut seen = BTreeSet::new();
    for q in queries {
        if q.relevant_doc_keys.is_empty() {
            return Err(EvalError::MissingQrels(q.query_key.clone()));
        }
        if !seen.insert(q.query_key.as_str()) {
            return Err(EvalError::Format(format!("duplicate query key {:?}", q.query_key)));
        }
    }

    let decoded: Vec<(String, QueryOutcome, f64)> = queries
        .par_iter()
        .map(|q| {
            let start = Instant::now();
            let result = decode_beam::<T, S>(trie, scorer, &q.text, width);
            let seconds = start.elapsed().as_secs_f64();
            let mut relevant = q.relevant_doc_keys.clone();
            relevant.sort();
            relevant.dedup();
            let outcome = match result {
                Ok(r) => QueryOutcome {
                    lang: q.lang.clone(),
                    relevant,
                    steps: r.steps,
                    ranked: r
                        .ranked_documents()
                        .into_iter()
                        .map(|d| RankedHit {
                            doc_key: d.doc_key,
                            atoms: d.atoms,
                            log_prob: d.log_prob.to_f64_lossy(),
                        })
                        .collect(),
                    error: None,
                },
                Err(e) => {
                    log::warn!("query {}: {e}", q.query_key);
                    QueryOutcome {
                        lang: q.lang.clone(),
                        relevant,
                        ranked: Vec::new(),
                        steps: 0,
                        error: Some(e.to_string()),
                    }
                }
            };
            (q.query_key.clone(), outcome, seconds)
        })
        .collect();

    let mut times: Vec<f64> = decoded.iter().map(|d| d.2).collect();
    let raw: BTreeMap<String, QueryOutcome> = decoded.into_iter().map(|(k, o, _)| (k, o)).collect();

    let with_100 = width >= 100;
    let mut by_lang: BTreeMap<&str, Vec<&QueryOutcome>> = BTreeMap::new();
    for o in raw.values() {
        by_lang.entry(o.lang.as_str()).or_default().push(o);
    }
    let rows: Vec<LanguageRow> = by_lang
        .into_iter()
        .map(|(lang, outcomes)| {
            let n = outcomes.len() as f64;
            let recall = |k: usize| {
                outcomes
                    .iter()
                    .filter(|o| {
                        let relevant: BTreeSet<String> = o.relevant.iter().cloned().collect();
                        hit_at_k(&o.ranked_keys(), &relevant, k)
                    })
                    .count() as f64
                    / n
            };
            LanguageRow {
                lang: lang.to_string(),
                queries: outcomes.len(),
                failures: outcomes.iter().filter(|o| o.error.is_some()).count(),
                recall_at_1: recall(1),
                recall_at_10: recall(10),
                recall_at_100: with_100.then(|| recall(100)),
            }
        })
        .collect();

    let mean = |f: &dyn Fn(&LanguageRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let average = LanguageRow {
        lang: AVERAGE_LABEL.to_string(),
        queries: raw.len(),
        failures: rows.iter().map(|r| r.failures).sum(),
        recall_at_1: mean(&|r| r.recall_at_1),
        recall_at_10: mean(&|r| r.recall_at_10),
        recall_at_100: with_100.then(|| mean(&|r| r.recall_at_100.unwrap_or(0.0))),
    };

    times.sort_by(f64::total_cmp);
    let total: f64 = times.iter().sum();
    let timing = Timing {
        total_seconds: total,
        mean_seconds: total / times.len() as f64,
        median_seconds: times[times.len() / 2],
        max_seconds: *times.last().expect("nonempty"),
    };

    Ok(EvalReport {
        width,
        query_count: raw.len(),
        failures: average.failures,
        rows,
        average,
        timing: Some(timing),
        raw,
    })
}
