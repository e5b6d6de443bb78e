//! Deterministic cross-lingual benchmark generator.
//!
//! Every concept owns `m` keyword slots; each slot has one surface form per
//! language. The surface forms of one slot share an embedding direction (a
//! unit "slot direction" rotated slightly per language), so a correct
//! clustering recovers exactly one atom per concept-slot pair.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::types::*;
use super::{write_jsonl, CorpusError, Result};
use crate::atomizer::cosine;
use crate::scalar::Scalar;

const MAX_ATTEMPTS: usize = 1000;
const FILLERS_PER_LANGUAGE: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub concepts: usize,
    pub languages: Vec<String>,
    pub docs_per_cell: usize,
    pub m: usize,
    pub dim: usize,
    pub intra_min: f64,
    pub inter_max: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            concepts: 3,
            languages: ["en", "de", "fr", "vi"].iter().map(|s| s.to_string()).collect(),
            docs_per_cell: 5,
            m: 3,
            dim: 16,
            intra_min: 0.95,
            inter_max: 0.30,
            seed: 7,
        }
    }
}

/// Ground truth for one concept slot: `keywords[l]` is the surface form in
/// `languages[l]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordGroup {
    pub concept: usize,
    pub slot: usize,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus<T> {
    pub spec: SynthSpec,
    pub documents: Vec<Document>,
    pub keywords: Vec<KeywordRecord>,
    pub embeddings: Vec<KeywordEmbedding<T>>,
    pub queries: Vec<QueryRecord>,
    pub training_pairs: Vec<TrainingPair>,
    pub groups: Vec<KeywordGroup>,
}

impl<T: Scalar> SynthCorpus<T> {
    pub fn embedding_map(&self) -> EmbeddingMap<T> {
        EmbeddingMap::from_embeddings(self.spec.dim, self.embeddings.iter().cloned())
    }

    /// Concept index of a generated document key.
    pub fn concept_of(&self, doc_key: &str) -> Option<usize> {
        doc_key.strip_prefix('c')?.split('-').next()?.parse().ok()
    }

    /// Writes `corpus.jsonl`, `keywords.jsonl`, `embeddings.jsonl`,
    /// `queries.jsonl` and `training.jsonl` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()>
    where
        T: Serialize,
    {
        write_jsonl(&dir.join("corpus.jsonl"), &self.documents)?;
        write_jsonl(&dir.join("keywords.jsonl"), &self.keywords)?;
        write_jsonl(&dir.join("embeddings.jsonl"), &self.embeddings)?;
        write_jsonl(&dir.join("queries.jsonl"), &self.queries)?;
        write_jsonl(&dir.join("training.jsonl"), &self.training_pairs)?;
        Ok(())
    }
}

fn validate(spec: &SynthSpec) -> Result<()> {
    let bad = |msg: &str| Err(CorpusError::InvalidSynthSpec(msg.to_string()));
    if spec.concepts == 0 || spec.docs_per_cell == 0 || spec.m == 0 || spec.dim == 0 {
        return bad("concept, document, keyword and dimension counts must be positive");
    }
    if spec.languages.is_empty() {
        return bad("at least one language is required");
    }
    let distinct: HashSet<&String> = spec.languages.iter().collect();
    if distinct.len() != spec.languages.len() || spec.languages.iter().any(|l| l.is_empty()) {
        return bad("languages must be distinct and nonempty");
    }
    if !(spec.intra_min.is_finite() && spec.inter_max.is_finite())
        || spec.intra_min > 1.0
        || spec.inter_max < -1.0
    {
        return bad("cosine bounds must lie in [-1, 1]");
    }
    if spec.intra_min <= spec.inter_max {
        return bad("intra-concept minimum must exceed the inter-concept maximum");
    }
    let groups = spec.concepts * spec.m;
    if groups > 1 && spec.inter_max < 0.0 {
        return bad("a negative inter-concept maximum is not constructible");
    }
    Ok(())
}

pub fn generate_synthetic_corpus<T: Scalar>(spec: &SynthSpec) -> Result<SynthCorpus<T>> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let langs = &spec.languages;
    let n_lang = langs.len();

    let mut used = HashSet::new();
    let mut groups = Vec::with_capacity(spec.concepts * spec.m);
    for concept in 0..spec.concepts {
        for slot in 0..spec.m {
            let keywords = (0..n_lang).map(|_| fresh_word(&mut rng, &mut used)).collect();
            groups.push(KeywordGroup { concept, slot, keywords });
        }
    }
    let fillers: Vec<Vec<String>> = (0..n_lang)
        .map(|_| (0..FILLERS_PER_LANGUAGE).map(|_| fresh_word(&mut rng, &mut used)).collect())
        .collect();

    let vectors = build_vectors::<T>(spec, groups.len(), n_lang)?;
    let mut embeddings = Vec::with_capacity(groups.len() * n_lang);
    for (g, group) in groups.iter().enumerate() {
        for (l, kw) in group.keywords.iter().enumerate() {
            embeddings.push(KeywordEmbedding {
                keyword: kw.clone(),
                vector: vectors[g * n_lang + l].clone(),
            });
        }
    }

    let cell_keywords = |c: usize, l: usize| -> Vec<String> {
        (0..spec.m).map(|s| groups[c * spec.m + s].keywords[l].clone()).collect()
    };
    let doc_key = |c: usize, l: usize, i: usize| format!("c{c:03}-{}-{i:03}", langs[l]);

    let mut documents = Vec::new();
    let mut keywords = Vec::new();
    let mut training_pairs = Vec::new();
    for c in 0..spec.concepts {
        for l in 0..n_lang {
            let kws = cell_keywords(c, l);
            for i in 0..spec.docs_per_cell {
                let key = doc_key(c, l, i);
                let lead: Vec<&str> = fillers[l].choose_multiple(&mut rng, 2).map(String::as_str).collect();
                documents.push(Document {
                    doc_key: key.clone(),
                    lang: langs[l].clone(),
                    text: format!("{} {}.", lead.join(" "), kws.join(" ")),
                    title: None,
                });
                keywords.push(KeywordRecord {
                    doc_key: key.clone(),
                    keywords: kws.clone(),
                });
                let mut words: Vec<String> = kws.clone();
                words.push(fillers[l].choose(&mut rng).unwrap().clone());
                words.shuffle(&mut rng);
                training_pairs.push(TrainingPair {
                    query_text: words.join(" "),
                    target_doc_key: key,
                });
            }
        }
    }

    let mut queries = Vec::new();
    for c in 0..spec.concepts {
        for l in 0..n_lang {
            let kws = cell_keywords(c, l);
            let take = rng.gen_range(1..=spec.m);
            let mut words: Vec<String> = kws.choose_multiple(&mut rng, take).cloned().collect();
            words.extend(fillers[l].choose_multiple(&mut rng, 2).cloned());
            words.shuffle(&mut rng);
            let relevant = (0..n_lang)
                .filter(|&o| o != l || n_lang == 1)
                .flat_map(|o| (0..spec.docs_per_cell).map(move |i| (o, i)))
                .map(|(o, i)| doc_key(c, o, i))
                .collect();
            queries.push(QueryRecord {
                query_key: format!("q-c{c:03}-{}", langs[l]),
                lang: langs[l].clone(),
                text: words.join(" "),
                relevant_doc_keys: relevant,
            });
        }
    }

    Ok(SynthCorpus {
        spec: spec.clone(),
        documents,
        keywords,
        embeddings,
        queries,
        training_pairs,
        groups,
    })
}

fn fresh_word(rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> String {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
    loop {
        let syllables = rng.gen_range(2..=4);
        let word: String = (0..syllables)
            .map(|_| format!("{}{}", ONSETS[rng.gen_range(0..ONSETS.len())], VOWELS[rng.gen_range(0..VOWELS.len())]))
            .collect();
        if used.insert(word.clone()) {
            return word;
        }
    }
}

/// Returns `groups * variants` unit vectors, group-major.
fn build_vectors<T: Scalar>(spec: &SynthSpec, groups: usize, variants: usize) -> Result<Vec<Vec<T>>> {
    // cos(2φ) bounds the intra-group cosine from below and sin²(φ) bounds the
    // inter-group cosine from above when slot directions are orthonormal and
    // the rotations live in their orthogonal complement.
    let lower = spec.intra_min.max(1.0 - 2.0 * spec.inter_max).min(1.0);
    let cos_2phi = lower + (1.0 - lower) * 0.25;
    let phi = if variants > 1 { cos_2phi.clamp(-1.0, 1.0).acos() / 2.0 } else { 0.0 };
    let orthonormal = groups + usize::from(variants > 1) <= spec.dim;

    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(attempt as u64 + 1);
        let raw = if orthonormal {
            orthonormal_layout(&mut rng, spec.dim, groups, variants, phi)
        } else {
            random_layout(&mut rng, spec.dim, groups, variants, phi)
        };
        let Some(raw) = raw else { continue };
        let vectors: Vec<Vec<T>> = raw
            .iter()
            .map(|v| v.iter().map(|&x| T::from_f64_lossy(x)).collect())
            .collect();
        if satisfies_bounds(&vectors, variants, spec.intra_min, spec.inter_max) {
            return Ok(vectors);
        }
    }
    Err(CorpusError::InfeasibleGeometry { attempts: MAX_ATTEMPTS })
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n < 1e-9 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

fn rotate(u: &[f64], w: &[f64], phi: f64) -> Vec<f64> {
    let (s, c) = phi.sin_cos();
    let mut v: Vec<f64> = u.iter().zip(w).map(|(a, b)| c * a + s * b).collect();
    normalize(&mut v);
    v
}

fn orthonormal_layout(rng: &mut ChaCha8Rng, dim: usize, groups: usize, variants: usize, phi: f64) -> Option<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let mut v = gaussian(rng, dim);
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        if !normalize(&mut v) {
            return None;
        }
        basis.push(v);
    }
    let (slots, complement) = basis.split_at(groups);
    let mut out = Vec::with_capacity(groups * variants);
    for u in slots {
        for _ in 0..variants {
            if variants == 1 {
                out.push(u.clone());
                continue;
            }
            let mut w = vec![0.0; dim];
            for c in complement {
                let z: f64 = rng.sample(StandardNormal);
                w.iter_mut().zip(c).for_each(|(x, y)| *x += z * y);
            }
            if !normalize(&mut w) {
                return None;
            }
            out.push(rotate(u, &w, phi));
        }
    }
    Some(out)
}

fn random_layout(rng: &mut ChaCha8Rng, dim: usize, groups: usize, variants: usize, phi: f64) -> Option<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(groups * variants);
    for _ in 0..groups {
        let mut u = gaussian(rng, dim);
        if !normalize(&mut u) {
            return None;
        }
        for _ in 0..variants {
            if variants == 1 || dim == 1 {
                out.push(u.clone());
                continue;
            }
            let mut w = gaussian(rng, dim);
            let d: f64 = w.iter().zip(&u).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(&u).for_each(|(x, y)| *x -= d * y);
            if !normalize(&mut w) {
                return None;
            }
            out.push(rotate(&u, &w, phi));
        }
    }
    Some(out)
}

fn satisfies_bounds<T: Scalar>(vectors: &[Vec<T>], variants: usize, intra_min: f64, inter_max: f64) -> bool {
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            let Ok(c) = cosine(&vectors[i], &vectors[j]) else { return false };
            let c = c.to_f64_lossy();
            let same = i / variants == j / variants;
            if (same && c < intra_min) || (!same && c > inter_max) {
                return false;
            }
        }
    }
    true
}
