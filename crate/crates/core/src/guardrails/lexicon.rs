use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::pii::{PiiDetector, DEFAULT_GOVT_ID_PATTERN, DEFAULT_STREET_ADDRESS_PATTERN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    HateSpeech,
    InsultsSexual,
    ThreatsMisconduct,
    Pii,
}

impl Category {
    pub const LEXICAL: [Category; 3] = [Category::HateSpeech, Category::InsultsSexual, Category::ThreatsMisconduct];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::HateSpeech => "hate_speech",
            Category::InsultsSexual => "insults_sexual",
            Category::ThreatsMisconduct => "threats_misconduct",
            Category::Pii => "pii",
        }
    }

    pub fn from_str(s: &str) -> Option<Category> {
        [Category::HateSpeech, Category::InsultsSexual, Category::ThreatsMisconduct, Category::Pii]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconLoadError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LexiconLoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lexicon line {}: {}", self.line, self.message)
    }
}

/// Words of `text` grouped by sentence: lowercase alphanumeric runs, with
/// `.`, `!`, `?`, `;` and newlines ending a sentence.
pub fn sentence_words(text: &str) -> Vec<Vec<String>> {
    text.split(['.', '!', '?', ';', '\n'])
        .map(|s| {
            s.split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty())
                .map(|w| w.to_lowercase())
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Phrase lists per category plus the configurable PII patterns.
#[derive(Debug, Clone)]
pub struct CategoryLexicon {
    /// First word to every (phrase words, category) starting with it.
    by_first: BTreeMap<String, Vec<(Vec<String>, Category)>>,
    phrase_count: usize,
    pub patterns: BTreeMap<String, String>,
}

impl CategoryLexicon {
    /// Parse the lexicon format:
    ///
    /// ```text
    /// # comment
    /// [threats_misconduct]
    /// some phrase
    /// [patterns]
    /// govt_id = <regex>
    /// ```
    pub fn parse(text: &str) -> Result<CategoryLexicon, LexiconLoadError> {
        let mut lex = CategoryLexicon {
            by_first: BTreeMap::new(),
            phrase_count: 0,
            patterns: BTreeMap::new(),
        };
        enum Section {
            None,
            Phrases(Category),
            Patterns,
        }
        let mut section = Section::None;
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let err = |message: String| LexiconLoadError { line: i + 1, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                section = match name {
                    "patterns" => Section::Patterns,
                    _ => match Category::from_str(name) {
                        Some(c) if c != Category::Pii => Section::Phrases(c),
                        _ => return Err(err(alloc::format!("unknown section [{name}]"))),
                    },
                };
                continue;
            }
            match section {
                Section::None => return Err(err("entry outside of any section".into())),
                Section::Patterns => {
                    let (name, pattern) = line
                        .split_once('=')
                        .ok_or_else(|| err("pattern entries look like `name = regex`".into()))?;
                    let name = name.trim();
                    if !matches!(name, "govt_id" | "street_address") {
                        return Err(err(alloc::format!("unknown pattern {name:?}")));
                    }
                    lex.patterns.insert(name.to_string(), pattern.trim().to_string());
                }
                Section::Phrases(c) => {
                    let words: Vec<String> = sentence_words(line).into_iter().flatten().collect();
                    if words.is_empty() {
                        return Err(err("phrase has no words".into()));
                    }
                    if seen.insert((words.clone(), c)) {
                        lex.phrase_count += 1;
                        lex.by_first.entry(words[0].clone()).or_default().push((words, c));
                    }
                }
            }
        }
        lex.detector().map_err(|message| LexiconLoadError { line: 0, message })?;
        Ok(lex)
    }

    pub fn phrase_count(&self) -> usize {
        self.phrase_count
    }

    /// PII detector using this lexicon's patterns, or the built-in ones.
    pub fn detector(&self) -> Result<PiiDetector, String> {
        let get = |k: &str, d: &'static str| self.patterns.get(k).map_or(d, String::as_str);
        PiiDetector::new(
            get("govt_id", DEFAULT_GOVT_ID_PATTERN),
            get("street_address", DEFAULT_STREET_ADDRESS_PATTERN),
        )
    }

    /// Categories with at least one phrase occurring as a contiguous word
    /// sequence inside a single sentence.
    pub fn classify(&self, text: &str) -> BTreeSet<Category> {
        let mut found = BTreeSet::new();
        for sentence in sentence_words(text) {
            for start in 0..sentence.len() {
                let Some(cands) = self.by_first.get(&sentence[start]) else { continue };
                for (words, c) in cands {
                    if sentence[start..].starts_with(words) {
                        found.insert(*c);
                    }
                }
            }
        }
        found
    }
}
