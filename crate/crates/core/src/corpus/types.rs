use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A corpus record. Serialized as `{"id", "lang", "text", "title"?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    #[serde(rename = "id")]
    pub doc_key: String,
    pub lang: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

/// The ordered keyword list extracted for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRecord {
    #[serde(rename = "id")]
    pub doc_key: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordEmbedding<T> {
    pub keyword: String,
    pub vector: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    #[serde(rename = "id")]
    pub query_key: String,
    pub lang: String,
    pub text: String,
    #[serde(rename = "relevant", default, skip_serializing_if = "Vec::is_empty")]
    pub relevant_doc_keys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    #[serde(rename = "query")]
    pub query_text: String,
    #[serde(rename = "doc")]
    pub target_doc_key: String,
}

/// Keyword → vector lookup with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMap<T> {
    dim: usize,
    vectors: HashMap<String, Vec<T>>,
}

impl<T: Scalar> EmbeddingMap<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Build from embeddings that are already validated; panics on a
    /// dimension mismatch.
    pub fn from_embeddings<I: IntoIterator<Item = KeywordEmbedding<T>>>(dim: usize, items: I) -> Self {
        let mut map = Self::new(dim);
        for e in items {
            assert_eq!(e.vector.len(), dim, "embedding dimension mismatch for {:?}", e.keyword);
            map.vectors.insert(e.keyword, e.vector);
        }
        map
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, keyword: &str) -> Option<&[T]> {
        self.vectors.get(keyword).map(Vec::as_slice)
    }

    pub fn contains(&self, keyword: &str) -> bool {
        self.vectors.contains_key(keyword)
    }

    pub(crate) fn insert(&mut self, keyword: String, vector: Vec<T>) -> Option<Vec<T>> {
        self.vectors.insert(keyword, vector)
    }

    /// Records sorted by keyword.
    pub fn to_records(&self) -> Vec<KeywordEmbedding<T>> {
        let sorted: BTreeMap<&String, &Vec<T>> = self.vectors.iter().collect();
        sorted
            .into_iter()
            .map(|(k, v)| KeywordEmbedding {
                keyword: k.clone(),
                vector: v.clone(),
            })
            .collect()
    }
}

/// Result of [`load_embeddings`](super::load_embeddings): the map plus the
/// keywords that were present in the file but not required.
#[derive(Debug, Clone)]
pub struct EmbeddingLoad<T> {
    pub embeddings: EmbeddingMap<T>,
    pub extra: Vec<String>,
}
