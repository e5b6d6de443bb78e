use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate, EvalReport};
use super::{EvalError, Result};
use crate::atomizer::{CollisionMode, Index};
use crate::corpus::{EmbeddingMap, KeywordRecord, QueryRecord, TrainingPair};
use crate::decoder::{train_statistical_scorer, PrefixTrie, Scorer, UniformScorer};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Theta,
    M,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::Theta => "theta",
            SweepParameter::M => "m",
        })
    }
}

/// How each grid point obtains its scorer.
pub enum SweepScorer<'a, T> {
    Uniform,
    /// Retrained against every rebuilt index.
    Statistical { pairs: &'a [TrainingPair], alpha: f64 },
    /// Used unchanged at every point.
    Fixed(&'a dyn Scorer<T>),
}

pub struct SweepInputs<'a, T> {
    /// Keyword records keyed by their width m.
    pub keywords: &'a BTreeMap<usize, Vec<KeywordRecord>>,
    pub embeddings: &'a EmbeddingMap<T>,
    pub queries: &'a [QueryRecord],
    pub theta: f64,
    pub m: usize,
    pub mode: CollisionMode,
    pub width: usize,
    pub scorer: SweepScorer<'a, T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub theta: f64,
    pub m: usize,
    pub atoms: usize,
    pub keywords: usize,
    pub compression_ratio: f64,
    pub distinct_docids: usize,
    pub collision_groups: usize,
    pub min_steps: usize,
    pub max_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_seconds: Option<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn without_timing(mut self) -> Self {
        for p in &mut self.points {
            p.build_seconds = None;
            p.decode_seconds = None;
            p.report.timing = None;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serialization is infallible") + "\n"
    }
}

fn validate_grid(parameter: SweepParameter, grid: &[f64], keywords: &BTreeMap<usize, Vec<KeywordRecord>>) -> Result<()> {
    if grid.is_empty() {
        return Err(EvalError::InvalidGrid("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(EvalError::InvalidGrid("values must be strictly increasing".into()));
    }
    for &v in grid {
        match parameter {
            SweepParameter::Theta if !(v.is_finite() && v >= 0.0) => {
                return Err(EvalError::InvalidGrid(format!("theta {v} must be finite and nonnegative")));
            }
            SweepParameter::M if !(v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64) => {
                return Err(EvalError::InvalidGrid(format!("m {v} must be a positive integer")));
            }
            SweepParameter::M if !keywords.contains_key(&(v as usize)) => {
                return Err(EvalError::MissingKeywordWidth(v as usize));
            }
            _ => {}
        }
    }
    Ok(())
}

/// Rebuilds the index at every grid value of `parameter` and evaluates it.
pub fn sweep<T: Scalar>(parameter: SweepParameter, grid: &[f64], inputs: &SweepInputs<'_, T>) -> Result<SweepResult> {
    validate_grid(parameter, grid, inputs.keywords)?;
    let mut points = Vec::with_capacity(grid.len());
    for &value in grid {
        let (theta, m) = match parameter {
            SweepParameter::Theta => (value, inputs.m),
            SweepParameter::M => (inputs.theta, value as usize),
        };
        let records = inputs.keywords.get(&m).ok_or(EvalError::MissingKeywordWidth(m))?;
        let build_start = Instant::now();
        let (index, collisions) = Index::build(records, inputs.embeddings, T::from_f64_lossy(theta), inputs.mode)?;
        let trie = PrefixTrie::from_index(&index).map_err(EvalError::Decode)?;
        let build_seconds = build_start.elapsed().as_secs_f64();

        let report = match &inputs.scorer {
            SweepScorer::Uniform => evaluate::<T, _>(&trie, &UniformScorer, inputs.queries, inputs.width)?,
            SweepScorer::Statistical { pairs, alpha } => {
                let scorer = train_statistical_scorer(pairs, index.docids(), index.vocab(), *alpha)?;
                evaluate::<T, _>(&trie, &scorer, inputs.queries, inputs.width)?
            }
            SweepScorer::Fixed(s) => evaluate::<T, _>(&trie, *s, inputs.queries, inputs.width)?,
        };
        let steps = report.raw.values().filter(|o| o.error.is_none()).map(|o| o.steps);
        let min_steps = steps.clone().min().unwrap_or(0);
        let max_steps = steps.max().unwrap_or(0);
        log::info!(
            "{parameter}={value}: C={} distinct={} R@10={:.4}",
            index.vocab().len(),
            trie.distinct_docids(),
            report.average.recall_at_10
        );
        points.push(SweepPoint {
            value,
            theta,
            m,
            atoms: index.vocab().len(),
            keywords: index.vocab().keyword_count(),
            compression_ratio: index.vocab().len() as f64 / index.vocab().keyword_count() as f64,
            distinct_docids: trie.distinct_docids(),
            collision_groups: collisions.len(),
            min_steps,
            max_steps,
            build_seconds: Some(build_seconds),
            decode_seconds: report.timing.as_ref().map(|t| t.total_seconds),
            report,
        });
    }
    Ok(SweepResult {
        parameter,
        grid: grid.to_vec(),
        points,
    })
}
