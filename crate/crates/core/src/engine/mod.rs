//! The answering pipeline: input gate, parse, boundary, execute, render,
//! output gate, references.
//!
//! [`Engine::prepare`] runs everything up to and including the output gate;
//! [`Engine::finish`] retrieves and attaches citations. Streaming callers
//! emit the prepared text before calling `finish`.

#[cfg(test)]
mod tests;

use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::exec::{execute, Clock, ExecError, ExecutionResult, SandboxLimits};
use crate::guardrails::{Decision, Guardrails};
use crate::metrics::Dataset;
use crate::query::{parse_query, DiagnosticKind, Grammar, Intent, ParseDiagnostics, QueryPlan};
use crate::reference::{attach_references, rerank, retrieve_n, CorpusIndex, ReferenceConfig};
use crate::respond::{
    latest_reference_plan, render_answer, render_persona, render_rejection, render_trend, Answer, AnswerKind,
    RejectionInput, ResponseTemplates,
};
use crate::trends::{series_for_topic, summarize_trend};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub limits: SandboxLimits,
    pub reference: ReferenceConfig,
    pub templates: ResponseTemplates,
    pub grammar: Grammar,
}

/// Work counters, for observing which stages ran.
#[derive(Debug, Default)]
pub struct EngineStats {
    executions: AtomicUsize,
    retrievals: AtomicUsize,
}

impl EngineStats {
    pub fn executions(&self) -> usize {
        self.executions.load(Ordering::Relaxed)
    }

    pub fn retrievals(&self) -> usize {
        self.retrievals.load(Ordering::Relaxed)
    }
}

/// An answer whose text has passed the output gate but which has no
/// citations yet.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub answer: Answer,
    pub question: String,
    pub ref_date: NaiveDate,
    /// The input gate refused the question.
    pub input_rejected: bool,
    pub plan: Option<QueryPlan>,
}

impl Prepared {
    /// Whether [`Engine::finish`] will run retrieval.
    pub fn wants_references(&self) -> bool {
        !matches!(self.answer.kind, AnswerKind::Persona | AnswerKind::Rejection)
    }
}

/// Immutable snapshot of everything needed to answer questions.
#[derive(Debug)]
pub struct Engine {
    dataset: Dataset,
    index: CorpusIndex,
    guardrails: Guardrails,
    config: EngineConfig,
    stats: EngineStats,
}

impl Engine {
    pub fn new(dataset: Dataset, index: CorpusIndex, guardrails: Guardrails, config: EngineConfig) -> Engine {
        Engine {
            dataset,
            index,
            guardrails,
            config,
            stats: EngineStats::default(),
        }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn index(&self) -> &CorpusIndex {
        &self.index
    }

    pub fn guardrails(&self) -> &Guardrails {
        &self.guardrails
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    /// Full pipeline without streaming.
    pub fn answer(&self, question: &str, ref_date: NaiveDate, clock: &dyn Clock) -> Prepared {
        let prepared = self.prepare(question, ref_date, clock);
        let answer = self.finish(&prepared);
        Prepared { answer, ..prepared }
    }

    fn stamp(&self, mut answer: Answer) -> Answer {
        answer.provenance.dataset_fingerprint = Some(self.dataset.fingerprint().into());
        answer.provenance.index_fingerprint = Some(self.index.fingerprint.clone());
        answer
    }

    fn run(&self, plan: &QueryPlan, clock: &dyn Clock) -> Result<ExecutionResult, ExecError> {
        self.stats.executions.fetch_add(1, Ordering::Relaxed);
        execute(plan, &self.dataset, self.config.limits, clock)
    }

    /// Everything up to the output gate.
    pub fn prepare(&self, question: &str, ref_date: NaiveDate, clock: &dyn Clock) -> Prepared {
        let t = &self.config.templates;
        let done = |answer: Answer, input_rejected: bool, plan: Option<QueryPlan>| Prepared {
            answer: self.stamp(answer),
            question: question.into(),
            ref_date,
            input_rejected,
            plan,
        };
        let verdict = self.guardrails.gate_input(question);
        if !verdict.is_pass() {
            return done(render_rejection(RejectionInput::Guardrail(&verdict), t), true, None);
        }
        let plan = match parse_query(question, self.dataset.catalog(), ref_date, &self.config.grammar) {
            Ok(p) => p,
            Err(d) => return done(render_rejection(RejectionInput::Diagnostics(&d), t), false, None),
        };
        let answer = match plan.intent {
            Intent::Persona => render_persona(&plan, t),
            Intent::Trend => match plan.topic.as_ref().map(|topic| series_for_topic(&self.index, topic)) {
                Some(Ok(series)) => {
                    let summary = summarize_trend(&series).ok();
                    render_trend(&plan, series, summary, t)
                }
                Some(Err(e)) => {
                    let d = ParseDiagnostics {
                        kind: DiagnosticKind::OutOfGrammar,
                        message: alloc::format!("{e}"),
                        suggestions: Vec::new(),
                    };
                    render_rejection(RejectionInput::Diagnostics(&d), t)
                }
                None => render_rejection(
                    RejectionInput::Execution {
                        plan: &plan,
                        error: &ExecError::InvalidPlan { reason: "trend plan without topic".into() },
                    },
                    t,
                ),
            },
            _ if plan.is_rejected() => {
                let latest = latest_reference_plan(&plan).and_then(|p| self.run(&p, clock).ok());
                render_rejection(RejectionInput::Boundary { plan: &plan, latest: latest.as_ref() }, t)
            }
            _ => match self.run(&plan, clock) {
                Ok(result) => render_answer(&plan, &result, t),
                Err(error) => render_rejection(RejectionInput::Execution { plan: &plan, error: &error }, t),
            },
        };
        let verdict = self.guardrails.gate_output(&answer.text);
        let answer = match verdict.decision {
            Decision::Pass | Decision::RejectInput => answer,
            Decision::BlockOutput => {
                let mut blocked = render_rejection(RejectionInput::OutputBlocked(&verdict), t);
                blocked.provenance.plan = answer.provenance.plan;
                blocked
            }
            Decision::RedactOutput => Answer {
                text: verdict.redacted.unwrap_or_default(),
                ..answer
            },
        };
        done(answer, false, Some(plan))
    }

    /// Retrieve, re-rank and attach citations from this engine's index.
    pub fn finish(&self, prepared: &Prepared) -> Answer {
        let answer = prepared.answer.clone();
        if !prepared.wants_references() {
            return answer;
        }
        self.stats.retrievals.fetch_add(1, Ordering::Relaxed);
        let cfg = &self.config.reference;
        let text = cfg.retrieval_text(&answer.text, &prepared.question);
        let hits = retrieve_n(&self.index, &text, cfg.retrieve_n);
        let hits = rerank(hits, &text, prepared.ref_date, &cfg.weights).unwrap_or_default();
        attach_references(answer, &hits, &self.index.fingerprint, cfg.threshold, cfg.max_citations)
    }
}

/// Split text into word-sized pieces whose concatenation is the text.
pub fn text_chunks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev_space = false;
    for (i, ch) in text.char_indices() {
        if !ch.is_whitespace() && prev_space {
            out.push(&text[start..i]);
            start = i;
        }
        prev_space = ch.is_whitespace();
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out
}
