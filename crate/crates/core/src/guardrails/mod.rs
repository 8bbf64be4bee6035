//! Input and output safety gates.
//!
//! Structured identifiers are found by regex detectors; harmful content by
//! phrase lexicons matched on word boundaries within a sentence.

mod lexicon;
mod pii;


use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use lexicon::{sentence_words, Category, CategoryLexicon, LexiconLoadError};
pub use pii::{
    luhn_valid, PiiDetector, PiiKind, PiiSpan, DEFAULT_GOVT_ID_PATTERN,
    DEFAULT_STREET_ADDRESS_PATTERN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Pass,
    RejectInput,
    BlockOutput,
    RedactOutput,
}

/// Gate outcome. `Pass` carries no categories and no spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailVerdict {
    pub decision: Decision,
    pub categories: BTreeSet<Category>,
    pub spans: Vec<PiiSpan>,
    /// The redacted text, for `RedactOutput` only.
    pub redacted: Option<String>,
}

impl GuardrailVerdict {
    pub fn pass() -> GuardrailVerdict {
        GuardrailVerdict {
            decision: Decision::Pass,
            categories: BTreeSet::new(),
            spans: Vec::new(),
            redacted: None,
        }
    }

    pub fn is_pass(&self) -> bool {
        self.decision == Decision::Pass
    }
}

/// Replace every span with `[REDACTED:<kind>]`. Spans must be sorted and
/// disjoint, as returned by [`PiiDetector::scan`].
pub fn redact(text: &str, spans: &[PiiSpan]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for s in spans {
        out.push_str(&text[at..s.byte_range[0]]);
        out.push_str("[REDACTED:");
        out.push_str(s.kind.as_str());
        out.push(']');
        at = s.byte_range[1];
    }
    out.push_str(&text[at..]);
    out
}

/// Loaded lexicon and detectors; immutable and shareable.
#[derive(Debug, Clone)]
pub struct Guardrails {
    lexicon: CategoryLexicon,
    detector: PiiDetector,
}

impl Guardrails {
    pub fn new(lexicon: CategoryLexicon) -> Result<Guardrails, LexiconLoadError> {
        let detector = lexicon
            .detector()
            .map_err(|message| LexiconLoadError { line: 0, message })?;
        Ok(Guardrails { lexicon, detector })
    }

    pub fn from_lexicon_text(text: &str) -> Result<Guardrails, LexiconLoadError> {
        Guardrails::new(CategoryLexicon::parse(text)?)
    }

    pub fn lexicon(&self) -> &CategoryLexicon {
        &self.lexicon
    }

    pub fn scan_pii(&self, text: &str) -> Vec<PiiSpan> {
        self.detector.scan(text)
    }

    pub fn classify_harmful(&self, text: &str) -> BTreeSet<Category> {
        self.lexicon.classify(text)
    }

    fn inspect(&self, text: &str) -> (BTreeSet<Category>, Vec<PiiSpan>) {
        let mut categories = self.classify_harmful(text);
        let spans = self.scan_pii(text);
        if !spans.is_empty() {
            categories.insert(Category::Pii);
        }
        (categories, spans)
    }

    /// Any identifier or harmful phrase rejects the prompt.
    pub fn gate_input(&self, text: &str) -> GuardrailVerdict {
        let (categories, spans) = self.inspect(text);
        if categories.is_empty() {
            return GuardrailVerdict::pass();
        }
        GuardrailVerdict {
            decision: Decision::RejectInput,
            categories,
            spans,
            redacted: None,
        }
    }

    /// Harmful text is blocked; text whose only problem is PII is redacted.
    pub fn gate_output(&self, text: &str) -> GuardrailVerdict {
        let (categories, spans) = self.inspect(text);
        if categories.is_empty() {
            return GuardrailVerdict::pass();
        }
        if categories.iter().any(|c| *c != Category::Pii) {
            return GuardrailVerdict {
                decision: Decision::BlockOutput,
                categories,
                spans,
                redacted: None,
            };
        }
        let redacted = redact(text, &spans);
        GuardrailVerdict {
            decision: Decision::RedactOutput,
            categories,
            spans,
            redacted: Some(redacted),
        }
    }
}
