use std::collections::HashMap;

use super::{AtomizerError, Result};
use crate::corpus::KeywordRecord;

/// The distinct keywords of a corpus, most frequent first (ties in
/// codepoint order), with their occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalKeywordSet {
    keywords: Vec<String>,
    frequency: HashMap<String, usize>,
}

impl GlobalKeywordSet {
    pub fn build(records: &[KeywordRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(AtomizerError::EmptyInput);
        }
        let mut frequency: HashMap<String, usize> = HashMap::new();
        for kw in records.iter().flat_map(|r| &r.keywords) {
            *frequency.entry(kw.clone()).or_default() += 1;
        }
        let mut keywords: Vec<String> = frequency.keys().cloned().collect();
        // `str` ordering is byte-wise UTF-8, which matches codepoint order.
        keywords.sort_by(|a, b| frequency[b].cmp(&frequency[a]).then_with(|| a.cmp(b)));
        Ok(Self { keywords, frequency })
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn frequency(&self, keyword: &str) -> usize {
        self.frequency.get(keyword).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    pub fn total_occurrences(&self) -> usize {
        self.frequency.values().sum()
    }
}
