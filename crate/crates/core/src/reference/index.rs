use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{tokenize, ArticleDoc};
use crate::hash::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_id: String,
    pub title: String,
    pub url: String,
    pub section: String,
    pub published: NaiveDate,
    /// Token count of title and body together.
    pub length: u32,
    pub title_terms: BTreeSet<String>,
}

/// `doc` indexes [`CorpusIndex::docs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Immutable inverted index. Documents are stored in `doc_id` order and
/// each posting list is sorted by document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub docs: Vec<DocMeta>,
    pub postings: BTreeMap<String, Vec<Posting>>,
    pub avg_doc_length: f64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexError {
    DuplicateDocId(String),
}

impl fmt::Display for IndexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexError::DuplicateDocId(id) => write!(f, "duplicate doc_id {id:?}"),
        }
    }
}

impl CorpusIndex {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn doc(&self, doc_id: &str) -> Option<&DocMeta> {
        self.docs
            .binary_search_by(|d| d.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.docs[i])
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Build the index. The fingerprint covers every field of every document.
pub fn index_corpus(docs: &[ArticleDoc]) -> Result<CorpusIndex, IndexError> {
    let mut order: Vec<&ArticleDoc> = docs.iter().collect();
    order.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    if let Some(w) = order.windows(2).find(|w| w[0].doc_id == w[1].doc_id) {
        return Err(IndexError::DuplicateDocId(w[0].doc_id.clone()));
    }

    let mut metas = Vec::with_capacity(order.len());
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut total_len: u64 = 0;
    let mut hashed = Vec::new();
    for (i, d) in order.iter().enumerate() {
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        let title_tokens = tokenize(&d.title);
        let body_tokens = tokenize(&d.body);
        let length = (title_tokens.len() + body_tokens.len()) as u32;
        for t in title_tokens.iter().chain(&body_tokens) {
            *tf.entry(t.clone()).or_default() += 1;
        }
        for (term, n) in tf {
            postings.entry(term).or_default().push(Posting { doc: i as u32, tf: n });
        }
        total_len += u64::from(length);
        for field in [&d.doc_id, &d.title, &d.body, &d.section, &d.url] {
            hashed.extend_from_slice(&(field.len() as u64).to_le_bytes());
            hashed.extend_from_slice(field.as_bytes());
        }
        hashed.extend_from_slice(d.published.to_string().as_bytes());
        metas.push(DocMeta {
            doc_id: d.doc_id.clone(),
            title: d.title.clone(),
            url: d.url.clone(),
            section: d.section.clone(),
            published: d.published,
            length,
            title_terms: title_tokens.into_iter().collect(),
        });
    }
    let avg_doc_length = if metas.is_empty() {
        0.0
    } else {
        total_len as f64 / metas.len() as f64
    };
    Ok(CorpusIndex {
        docs: metas,
        postings,
        avg_doc_length,
        fingerprint: sha256_hex(&hashed),
    })
}
