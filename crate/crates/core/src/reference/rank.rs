use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{tokenize, CorpusIndex, ReferenceHit, StageScores};
use crate::respond::{Answer, AnswerKind};

pub const DEFAULT_RETRIEVE_N: usize = 50;
const K1: f64 = 1.2;
const B: f64 = 0.75;

/// Blend weights for re-ranking. The three weights sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RerankWeights {
    pub bm25: f64,
    pub title: f64,
    pub recency: f64,
    pub half_life_days: f64,
}

impl Default for RerankWeights {
    fn default() -> Self {
        RerankWeights {
            bm25: 0.6,
            title: 0.3,
            recency: 0.1,
            half_life_days: 365.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadWeights {
    pub sum: f64,
}

impl fmt::Display for BadWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "re-rank weights sum to {} instead of 1", self.sum)
    }
}

impl RerankWeights {
    pub fn check(&self) -> Result<(), BadWeights> {
        let sum = self.bm25 + self.title + self.recency;
        let parts_ok = [self.bm25, self.title, self.recency].iter().all(|w| *w >= 0.0);
        if (sum - 1.0).abs() <= 1e-9 && parts_ok && self.half_life_days > 0.0 {
            Ok(())
        } else {
            Err(BadWeights { sum })
        }
    }
}

/// Citation settings shared by the engine and the service.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceConfig {
    pub retrieve_n: usize,
    pub weights: RerankWeights,
    pub threshold: f64,
    pub max_citations: usize,
    /// Append the question to the retrieval text.
    pub question_boost: bool,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            retrieve_n: DEFAULT_RETRIEVE_N,
            weights: RerankWeights::default(),
            threshold: 0.2,
            max_citations: 3,
            question_boost: false,
        }
    }
}

impl ReferenceConfig {
    pub fn retrieval_text(&self, answer: &str, question: &str) -> String {
        let mut s = String::from(answer);
        if self.question_boost {
            s.push('\n');
            s.push_str(question);
        }
        s
    }
}

/// [`retrieve_n`] with the default depth of 50.
pub fn retrieve(index: &CorpusIndex, answer_text: &str) -> Vec<ReferenceHit> {
    retrieve_n(index, answer_text, DEFAULT_RETRIEVE_N)
}

/// Top `n` documents by BM25 over the distinct answer terms, ties by
/// `doc_id` ascending. `score` is BM25 divided by the batch maximum.
pub fn retrieve_n(index: &CorpusIndex, answer_text: &str, n: usize) -> Vec<ReferenceHit> {
    let terms: BTreeSet<String> = tokenize(answer_text).into_iter().collect();
    let count = index.doc_count();
    let mut scores = alloc::vec![0.0f64; count];
    let mut touched = alloc::vec![false; count];
    let big_n = count as f64;
    for term in &terms {
        let postings = index.postings(term);
        if postings.is_empty() {
            continue;
        }
        let df = postings.len() as f64;
        let idf = libm::log(1.0 + (big_n - df + 0.5) / (df + 0.5));
        for p in postings {
            let d = p.doc as usize;
            let tf = f64::from(p.tf);
            let dl = f64::from(index.docs[d].length);
            let norm = 1.0 - B + B * dl / index.avg_doc_length;
            scores[d] += idf * tf * (K1 + 1.0) / (tf + K1 * norm);
            touched[d] = true;
        }
    }
    // Documents are stored in doc_id order, so a stable sort breaks ties.
    let mut order: Vec<usize> = (0..count).filter(|&d| touched[d]).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order.truncate(n);
    let max = order.first().map_or(0.0, |&d| scores[d]);
    order
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let meta = &index.docs[d];
            ReferenceHit {
                doc_id: meta.doc_id.clone(),
                score: if max > 0.0 { scores[d] / max } else { 0.0 },
                stage_scores: StageScores {
                    bm25: scores[d],
                    title_overlap: 0.0,
                    recency: 0.0,
                },
                rank: i as u32 + 1,
                title: meta.title.clone(),
                url: meta.url.clone(),
                published: meta.published,
            }
        })
        .collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Re-score hits by the weighted blend and re-sort them. The output is a
/// permutation of the input.
pub fn rerank(
    hits: Vec<ReferenceHit>,
    answer_text: &str,
    ref_date: NaiveDate,
    weights: &RerankWeights,
) -> Result<Vec<ReferenceHit>, BadWeights> {
    weights.check()?;
    let answer_terms: BTreeSet<String> = tokenize(answer_text).into_iter().collect();
    let max_bm25 = hits.iter().map(|h| h.stage_scores.bm25).fold(0.0, f64::max);
    let mut out: Vec<ReferenceHit> = hits
        .into_iter()
        .map(|mut h| {
            let title_terms: BTreeSet<String> = tokenize(&h.title).into_iter().collect();
            let age_days = (ref_date - h.published).num_days().max(0) as f64;
            let bm25_norm = if max_bm25 > 0.0 { h.stage_scores.bm25 / max_bm25 } else { 0.0 };
            h.stage_scores.title_overlap = jaccard(&answer_terms, &title_terms);
            h.stage_scores.recency = libm::exp(-core::f64::consts::LN_2 * age_days / weights.half_life_days);
            h.score = weights.bm25 * bm25_norm
                + weights.title * h.stage_scores.title_overlap
                + weights.recency * h.stage_scores.recency;
            h
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
    for (i, h) in out.iter_mut().enumerate() {
        h.rank = i as u32 + 1;
    }
    Ok(out)
}

/// Hits scoring at least `threshold`, at most `max_citations` of them.
pub fn select_citations(hits: &[ReferenceHit], threshold: f64, max_citations: usize) -> Vec<ReferenceHit> {
    hits.iter()
        .filter(|h| h.score >= threshold)
        .take(max_citations)
        .cloned()
        .collect()
}

/// Attach citations from one index snapshot. Persona and rejection answers
/// never carry citations.
pub fn attach_references(
    mut answer: Answer,
    hits: &[ReferenceHit],
    index_fingerprint: &str,
    threshold: f64,
    max_citations: usize,
) -> Answer {
    answer.citations = match answer.kind {
        AnswerKind::Persona | AnswerKind::Rejection => Vec::new(),
        _ => select_citations(hits, threshold, max_citations),
    };
    answer.provenance.index_fingerprint = Some(index_fingerprint.into());
    answer
}
