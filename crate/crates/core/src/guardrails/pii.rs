use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use regex_automata::meta::Regex;
use serde::{Deserialize, Serialize};

use crate::hash::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiiKind {
    Email,
    Phone,
    Ssn,
    CreditCard,
    GovtId,
    StreetAddress,
}

impl PiiKind {
    pub const ALL: [PiiKind; 6] = [
        PiiKind::Email,
        PiiKind::Phone,
        PiiKind::Ssn,
        PiiKind::CreditCard,
        PiiKind::GovtId,
        PiiKind::StreetAddress,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PiiKind::Email => "email",
            PiiKind::Phone => "phone",
            PiiKind::Ssn => "ssn",
            PiiKind::CreditCard => "credit_card",
            PiiKind::GovtId => "govt_id",
            PiiKind::StreetAddress => "street_address",
        }
    }

    pub fn from_str(s: &str) -> Option<PiiKind> {
        PiiKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// A detected identifier. Only a hash of the matched text is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiiSpan {
    pub kind: PiiKind,
    /// Byte offsets `[start, end)`.
    pub byte_range: [usize; 2],
    pub matched_text_hash: String,
}

impl PiiSpan {
    pub fn range(&self) -> Range<usize> {
        self.byte_range[0]..self.byte_range[1]
    }
}

pub const DEFAULT_GOVT_ID_PATTERN: &str = r"(?i)\b(?:passport|driver'?s licen[cs]e|medicare|medicaid|medical record|mrn|national id|tax id|itin|ein)(?:\s+(?:number|no\.?|num|id))?\s*[:#]?\s*[A-Z]{0,3}[0-9][0-9A-Z-]{4,}\b";
pub const DEFAULT_STREET_ADDRESS_PATTERN: &str = r"\b[0-9]{1,5}\s+(?:[A-Z][a-z]+\s+){1,3}(?:Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Dr|Court|Ct|Way|Place|Pl|Terrace|Parkway)\b\.?";

const EMAIL: &str = r"\b[A-Za-z0-9][A-Za-z0-9._%+-]*@[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?(?:\.[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?)*\.[A-Za-z]{2,24}\b";
const PHONE_E164: &str = r"\+[0-9](?:[ .-]?\(?[0-9]\)?){9,14}\b";
const PHONE_NANP: &str = r"(?:\b1[ .-])?(?:\([0-9]{3}\)\s?|\b[0-9]{3}[ .-])[0-9]{3}[ .-][0-9]{4}\b";
const SSN: &str = r"\b[0-9]{3}-[0-9]{2}-[0-9]{4}\b";
const CARD: &str = r"\b[0-9](?:[ -]?[0-9]){12,18}\b";

/// Regex-backed identifier detectors.
#[derive(Debug, Clone)]
pub struct PiiDetector {
    email: Regex,
    phone_e164: Regex,
    phone_nanp: Regex,
    ssn: Regex,
    card: Regex,
    govt_id: Regex,
    street_address: Regex,
}

impl Default for PiiDetector {
    fn default() -> Self {
        PiiDetector::new(DEFAULT_GOVT_ID_PATTERN, DEFAULT_STREET_ADDRESS_PATTERN)
            .expect("built-in patterns compile")
    }
}

fn digits(s: &str) -> Vec<u8> {
    s.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect()
}

/// Luhn checksum over a digit sequence.
pub fn luhn_valid(ds: &[u8]) -> bool {
    let mut sum = 0u32;
    for (i, &d) in ds.iter().rev().enumerate() {
        let mut v = u32::from(d);
        if i % 2 == 1 {
            v *= 2;
            if v > 9 {
                v -= 9;
            }
        }
        sum += v;
    }
    !ds.is_empty() && sum % 10 == 0
}

/// Part of a number with a decimal point or thousands separator.
fn in_numeric_context(text: &str, r: &Range<usize>) -> bool {
    let b = text.as_bytes();
    let before = r.start >= 2 && matches!(b[r.start - 1], b'.' | b',') && b[r.start - 2].is_ascii_digit();
    let after = r.end + 1 < b.len() && matches!(b[r.end], b'.' | b',') && b[r.end + 1].is_ascii_digit();
    before || after
}

impl PiiDetector {
    pub fn new(govt_id: &str, street_address: &str) -> Result<PiiDetector, String> {
        let compile = |p: &str| Regex::new(p).map_err(|e| alloc::format!("{e}"));
        Ok(PiiDetector {
            email: compile(EMAIL)?,
            phone_e164: compile(PHONE_E164)?,
            phone_nanp: compile(PHONE_NANP)?,
            ssn: compile(SSN)?,
            card: compile(CARD)?,
            govt_id: compile(govt_id)?,
            street_address: compile(street_address)?,
        })
    }

    /// Every identifier in `text`. Overlapping detections merge into one
    /// span covering their union, labelled with the longest detection's kind.
    pub fn scan(&self, text: &str) -> Vec<PiiSpan> {
        let mut raw: Vec<(Range<usize>, PiiKind)> = Vec::new();
        for m in self.email.find_iter(text) {
            raw.push((m.range(), PiiKind::Email));
        }
        for re in [&self.phone_e164, &self.phone_nanp] {
            for m in re.find_iter(text) {
                let n = digits(&text[m.range()]).len();
                if (10..=15).contains(&n) && !in_numeric_context(text, &m.range()) {
                    raw.push((m.range(), PiiKind::Phone));
                }
            }
        }
        for m in self.ssn.find_iter(text) {
            let area = &text[m.start()..m.start() + 3];
            if area != "000" && area != "666" && !area.starts_with('9') {
                raw.push((m.range(), PiiKind::Ssn));
            }
        }
        for m in self.card.find_iter(text) {
            if in_numeric_context(text, &m.range()) {
                continue;
            }
            if let Some(r) = card_within(text, m.range()) {
                raw.push((r, PiiKind::CreditCard));
            }
        }
        for m in self.govt_id.find_iter(text) {
            raw.push((m.range(), PiiKind::GovtId));
        }
        for m in self.street_address.find_iter(text) {
            raw.push((m.range(), PiiKind::StreetAddress));
        }
        merge(text, raw)
    }
}

/// Longest run of whole digit groups inside `r` holding 13 to 19 digits
/// that passes the Luhn check; earliest wins among equals.
fn card_within(text: &str, r: Range<usize>) -> Option<Range<usize>> {
    let mut groups: Vec<Range<usize>> = Vec::new();
    let bytes = text.as_bytes();
    let mut i = r.start;
    while i < r.end {
        if bytes[i].is_ascii_digit() {
            let s = i;
            while i < r.end && bytes[i].is_ascii_digit() {
                i += 1;
            }
            groups.push(s..i);
        } else {
            i += 1;
        }
    }
    let mut best: Option<Range<usize>> = None;
    for a in 0..groups.len() {
        for b in a..groups.len() {
            let span = groups[a].start..groups[b].end;
            let ds = digits(&text[span.clone()]);
            if !(13..=19).contains(&ds.len()) || !luhn_valid(&ds) {
                continue;
            }
            if best.as_ref().is_none_or(|x| span.len() > x.len()) {
                best = Some(span);
            }
        }
    }
    best
}

fn merge(text: &str, mut raw: Vec<(Range<usize>, PiiKind)>) -> Vec<PiiSpan> {
    raw.sort_by(|a, b| a.0.start.cmp(&b.0.start).then(b.0.end.cmp(&a.0.end)).then(a.1.cmp(&b.1)));
    let mut clusters: Vec<(Range<usize>, Range<usize>, PiiKind)> = Vec::new();
    for (r, kind) in raw {
        match clusters.last_mut() {
            Some((union, longest, k)) if r.start < union.end => {
                union.end = union.end.max(r.end);
                if r.len() > longest.len() {
                    *longest = r;
                    *k = kind;
                }
            }
            _ => clusters.push((r.clone(), r, kind)),
        }
    }
    clusters
        .into_iter()
        .map(|(union, _, kind)| PiiSpan {
            kind,
            matched_text_hash: sha256_hex(text[union.clone()].as_bytes()),
            byte_range: [union.start, union.end],
        })
        .collect()
}
