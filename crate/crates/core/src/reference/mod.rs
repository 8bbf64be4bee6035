//! Article corpus index with two-stage citation retrieval.
//!
//! Retrieval scores documents against the answer text with BM25; re-ranking
//! blends the normalized BM25 score with title overlap and recency.

mod index;
mod rank;

#[cfg(test)]
mod tests;

use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use index::{index_corpus, CorpusIndex, DocMeta, IndexError, Posting};
pub use rank::{
    attach_references, rerank, retrieve, retrieve_n, select_citations, BadWeights, RerankWeights,
    ReferenceConfig, DEFAULT_RETRIEVE_N,
};

/// A dated article. `published` serializes as `YYYY-MM-DD`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleDoc {
    pub doc_id: String,
    pub title: String,
    pub body: String,
    pub published: NaiveDate,
    pub section: String,
    pub url: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageScores {
    pub bm25: f64,
    pub title_overlap: f64,
    pub recency: f64,
}

/// One retrieved article. Hit lists are sorted by `score` descending with
/// consecutive ranks from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceHit {
    pub doc_id: String,
    pub score: f64,
    pub stage_scores: StageScores,
    pub rank: u32,
    pub title: String,
    pub url: String,
    pub published: NaiveDate,
}

/// Lowercase, split on non-alphanumeric characters, drop tokens shorter
/// than two characters. No stemming and no stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some())
        .map(|t| t.to_lowercase())
        .collect()
}
