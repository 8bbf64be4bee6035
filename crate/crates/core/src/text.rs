//! Word-level lexer shared by the query grammar and the temporal parser.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    /// `'s` after a word.
    Possessive,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercased text.
    pub norm: String,
    pub kind: TokenKind,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn is(&self, word: &str) -> bool {
        self.norm == word
    }

    pub fn number(&self) -> Option<i64> {
        match self.kind {
            TokenKind::Number => self.norm.parse().ok(),
            _ => None,
        }
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Split text into lowercase words, digit runs, possessive markers and
/// single punctuation characters. Whitespace is dropped.
pub fn lex(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |(b, _)| *b);
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            out.push(Token {
                norm: text[start..end_of(j)].into(),
                kind: TokenKind::Number,
                start,
                end: end_of(j),
            });
            i = j;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_alphanumeric() {
                j += 1;
            }
            out.push(Token {
                norm: text[start..end_of(j)].to_lowercase(),
                kind: TokenKind::Word,
                start,
                end: end_of(j),
            });
            i = j;
            continue;
        }
        if is_apostrophe(c) {
            let next_is_s = chars.get(i + 1).is_some_and(|(_, n)| *n == 's' || *n == 'S');
            let after = chars.get(i + 2).map(|(_, n)| *n);
            let prev_word = out.last().is_some_and(|t: &Token| t.end == start && t.kind != TokenKind::Punct);
            if next_is_s && prev_word && !after.is_some_and(char::is_alphanumeric) {
                out.push(Token {
                    norm: "'s".into(),
                    kind: TokenKind::Possessive,
                    start,
                    end: end_of(i + 2),
                });
                i += 2;
                continue;
            }
            // A trailing apostrophe ("companies'") is also possessive.
            if prev_word && !chars.get(i + 1).is_some_and(|(_, n)| n.is_alphanumeric()) {
                out.push(Token {
                    norm: "'s".into(),
                    kind: TokenKind::Possessive,
                    start,
                    end: end_of(i + 1),
                });
                i += 1;
                continue;
            }
        }
        out.push(Token {
            norm: text[start..end_of(i + 1)].into(),
            kind: TokenKind::Punct,
            start,
            end: end_of(i + 1),
        });
        i += 1;
    }
    out
}

/// Lowercased word/number sequence of a phrase, used to match phrases
/// against lexed text.
pub fn phrase_tokens(phrase: &str) -> Vec<String> {
    lex(phrase).into_iter().map(|t| t.norm).collect()
}

/// Positions where `phrase` occurs as a contiguous token run.
pub fn find_phrase(tokens: &[Token], phrase: &[String]) -> Vec<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return Vec::new();
    }
    (0..=tokens.len() - phrase.len())
        .filter(|&i| phrase.iter().zip(&tokens[i..]).all(|(p, t)| *p == t.norm))
        .collect()
}

/// Small number words used in queries ("last five years").
pub fn number_word(word: &str) -> Option<u32> {
    const WORDS: [&str; 20] = [
        "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
        "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
        "nineteen", "twenty",
    ];
    WORDS.iter().position(|w| *w == word).map(|i| i as u32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norms(text: &str) -> Vec<String> {
        lex(text).into_iter().map(|t| t.norm).collect()
    }

    #[test]
    fn possessives_and_numbers() {
        assert_eq!(
            norms("What was Walmart's revenue in 2024?"),
            ["what", "was", "walmart", "'s", "revenue", "in", "2024", "?"]
        );
        assert_eq!(norms("Nvidia’s"), ["nvidia", "'s"]);
        assert_eq!(norms("AT&T"), ["at", "&", "t"]);
        assert_eq!(norms("2015-2020"), ["2015", "-", "2020"]);
        assert_eq!(norms("3M's"), ["3", "m", "'s"]);
    }

    #[test]
    fn byte_ranges_point_into_source() {
        let text = "Plot Apple’s revenue";
        for t in lex(text) {
            assert!(text.is_char_boundary(t.start) && text.is_char_boundary(t.end));
        }
    }

    #[test]
    fn phrase_search() {
        let toks = lex("the number of employees and the number of companies");
        assert_eq!(find_phrase(&toks, &phrase_tokens("number of")), [1, 6]);
    }
}
