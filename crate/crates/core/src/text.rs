//! Offset-anchored document model.
//!
//! A [`Document`] owns its source text and never rewrites it. Tokens,
//! sentences and mentions only point into the text. All public offsets are
//! Unicode scalar value (char) indices, half-open `[start, end)`; byte offsets
//! are kept privately so surfaces can be sliced without rescanning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A token: a maximal non-whitespace piece of the text plus the whitespace
/// that follows it up to the next token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    byte_start: usize,
    byte_end: usize,
    ws_end: usize,
}

impl Token {
    pub fn char_len(&self) -> usize {
        self.end - self.start
    }

    pub(crate) fn byte_range(&self) -> std::ops::Range<usize> {
        self.byte_start..self.byte_end
    }
}

/// Inclusive range of token indices forming one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub first_token: usize,
    pub last_token: usize,
}

/// A char span of the document text together with its surface string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

/// A detected abbreviation: short form and its long-form definition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbbreviationPair {
    pub short_form: MentionSpan,
    pub long_form: MentionSpan,
}

/// Immutable source text with its token and sentence structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    text: String,
    leading_ws: usize,
    tokens: Vec<Token>,
    sentences: Vec<SentenceSpan>,
}

impl Document {
    /// Builds a document from char-offset token spans, validating every
    /// structural invariant.
    pub fn from_spans(
        text: impl Into<String>,
        spans: &[(usize, usize)],
        sentences: Vec<SentenceSpan>,
    ) -> Result<Self> {
        let text = text.into();
        let mut tokens = Vec::with_capacity(spans.len());
        let mut chars = text.char_indices().enumerate().peekable();
        let mut char_pos = 0usize;
        let mut byte_pos = 0usize;

        // Advances the cursor to char offset `target`, requiring every
        // skipped char to satisfy `pred`. Returns the byte offset reached.
        let mut advance = |target: usize,
                           pred: &dyn Fn(char) -> bool,
                           what: &str|
         -> Result<usize> {
            while char_pos < target {
                match chars.next() {
                    Some((_, (b, c))) => {
                        if !pred(c) {
                            return Err(Error::InvalidDocument(format!(
                                "{what} contains {c:?} at char {char_pos}"
                            )));
                        }
                        char_pos += 1;
                        byte_pos = b + c.len_utf8();
                    }
                    None => {
                        return Err(Error::InvalidDocument(format!(
                            "span end {target} beyond text length {char_pos}"
                        )))
                    }
                }
            }
            Ok(byte_pos)
        };

        let mut prev_end = 0usize;
        for (i, &(start, end)) in spans.iter().enumerate() {
            if end <= start {
                return Err(Error::InvalidDocument(format!("token {i} is empty")));
            }
            if start < prev_end {
                return Err(Error::InvalidDocument(format!(
                    "token {i} overlaps or precedes the previous token"
                )));
            }
            let byte_start = advance(start, &char::is_whitespace, "inter-token gap")?;
            let byte_end = advance(end, &|c| !c.is_whitespace(), "token")?;
            tokens.push(Token {
                start,
                end,
                byte_start,
                byte_end,
                ws_end: byte_end,
            });
            prev_end = end;
        }
        let total = text.chars().count();
        advance(total, &char::is_whitespace, "trailing gap")?;

        let n = tokens.len();
        for i in 0..n {
            tokens[i].ws_end = if i + 1 < n {
                tokens[i + 1].byte_start
            } else {
                text.len()
            };
        }
        let leading_ws = tokens.first().map_or(text.len(), |t| t.byte_start);
        let doc = Document {
            text,
            leading_ws,
            tokens,
            sentences: Vec::new(),
        };
        doc.with_sentences(sentences)
    }

    /// Trusted constructor for the tokenizer, which produces byte ranges in
    /// order. Char offsets are derived in one pass.
    pub(crate) fn from_byte_ranges(text: String, ranges: Vec<(usize, usize)>) -> Self {
        let mut tokens = Vec::with_capacity(ranges.len());
        let mut char_pos = 0usize;
        let mut byte_pos = 0usize;
        for &(bs, be) in &ranges {
            char_pos += text[byte_pos..bs].chars().count();
            let start = char_pos;
            char_pos += text[bs..be].chars().count();
            byte_pos = be;
            tokens.push(Token {
                start,
                end: char_pos,
                byte_start: bs,
                byte_end: be,
                ws_end: be,
            });
        }
        let n = tokens.len();
        for i in 0..n {
            tokens[i].ws_end = if i + 1 < n {
                tokens[i + 1].byte_start
            } else {
                text.len()
            };
        }
        let leading_ws = tokens.first().map_or(text.len(), |t| t.byte_start);
        let doc = Document {
            text,
            leading_ws,
            tokens,
            sentences: Vec::new(),
        };
        debug_assert!(doc.check_invariants().is_ok());
        doc
    }

    /// Returns a copy of this document carrying `sentences`, which must
    /// partition the tokens in order.
    pub fn with_sentences(mut self, sentences: Vec<SentenceSpan>) -> Result<Self> {
        check_partition(&sentences, self.tokens.len())?;
        self.sentences = sentences;
        Ok(self)
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn sentences(&self) -> &[SentenceSpan] {
        &self.sentences
    }

    pub fn leading_ws(&self) -> &str {
        &self.text[..self.leading_ws]
    }

    pub fn surface(&self, token: usize) -> &str {
        let t = &self.tokens[token];
        &self.text[t.byte_start..t.byte_end]
    }

    pub fn trailing_ws(&self, token: usize) -> &str {
        let t = &self.tokens[token];
        &self.text[t.byte_end..t.ws_end]
    }

    /// Length of the text in chars.
    pub fn char_len(&self) -> usize {
        self.tokens.last().map_or_else(
            || self.text.chars().count(),
            |t| t.end + self.text[t.byte_end..].chars().count(),
        )
    }

    /// Char span `[start, end)` covered by a sentence.
    pub fn sentence_char_span(&self, s: &SentenceSpan) -> (usize, usize) {
        (self.tokens[s.first_token].start, self.tokens[s.last_token].end)
    }

    /// Text of a sentence, without its trailing whitespace.
    pub fn sentence_text(&self, s: &SentenceSpan) -> &str {
        let a = self.tokens[s.first_token].byte_start;
        let b = self.tokens[s.last_token].byte_end;
        &self.text[a..b]
    }

    pub(crate) fn sentence_byte_start(&self, s: &SentenceSpan) -> usize {
        self.tokens[s.first_token].byte_start
    }

    /// Converts a char offset into a byte offset.
    pub fn char_to_byte(&self, char_offset: usize) -> Option<usize> {
        let idx = self.tokens.partition_point(|t| t.start <= char_offset);
        let (mut chars, mut bytes) = match idx {
            0 => (0, 0),
            i => (self.tokens[i - 1].start, self.tokens[i - 1].byte_start),
        };
        for c in self.text[bytes..].chars() {
            if chars == char_offset {
                return Some(bytes);
            }
            chars += 1;
            bytes += c.len_utf8();
        }
        (chars == char_offset).then_some(bytes)
    }

    /// Converts a byte offset (on a char boundary) into a char offset.
    pub fn byte_to_char(&self, byte_offset: usize) -> Option<usize> {
        if byte_offset > self.text.len() || !self.text.is_char_boundary(byte_offset) {
            return None;
        }
        let idx = self.tokens.partition_point(|t| t.byte_start <= byte_offset);
        let (chars, bytes) = match idx {
            0 => (0, 0),
            i => (self.tokens[i - 1].start, self.tokens[i - 1].byte_start),
        };
        Some(chars + self.text[bytes..byte_offset].chars().count())
    }

    /// Slices the text by char offsets.
    pub fn char_slice(&self, start: usize, end: usize) -> Option<&str> {
        let a = self.char_to_byte(start)?;
        let b = self.char_to_byte(end)?;
        (a <= b).then(|| &self.text[a..b])
    }

    /// Builds a [`MentionSpan`] from char offsets.
    pub fn mention(&self, start: usize, end: usize) -> Result<MentionSpan> {
        if end <= start {
            return Err(Error::InvalidDocument(format!(
                "empty mention span [{start}, {end})"
            )));
        }
        let surface = self.char_slice(start, end).ok_or_else(|| {
            Error::InvalidDocument(format!("mention span [{start}, {end}) out of range"))
        })?;
        Ok(MentionSpan {
            start,
            end,
            surface: surface.to_string(),
        })
    }

    /// Verifies token and sentence invariants.
    pub fn check_invariants(&self) -> Result<()> {
        let mut prev_end = 0;
        for (i, t) in self.tokens.iter().enumerate() {
            if t.end <= t.start || t.start < prev_end {
                return Err(Error::InvalidDocument(format!("bad span at token {i}")));
            }
            let surface = &self.text[t.byte_range()];
            if surface.chars().count() != t.char_len() || surface.chars().any(char::is_whitespace)
            {
                return Err(Error::InvalidDocument(format!("bad surface at token {i}")));
            }
            if !self.trailing_ws(i).chars().all(char::is_whitespace) {
                return Err(Error::InvalidDocument(format!(
                    "non-whitespace gap after token {i}"
                )));
            }
            prev_end = t.end;
        }
        if !self.leading_ws().chars().all(char::is_whitespace) {
            return Err(Error::InvalidDocument("non-whitespace leading text".into()));
        }
        check_partition(&self.sentences, self.tokens.len())
    }
}

fn check_partition(sentences: &[SentenceSpan], n_tokens: usize) -> Result<()> {
    let mut next = 0usize;
    for (i, s) in sentences.iter().enumerate() {
        if s.first_token != next || s.last_token < s.first_token || s.last_token >= n_tokens {
            return Err(Error::InvalidDocument(format!(
                "sentence {i} ({}..={}) does not continue the partition at token {next}",
                s.first_token, s.last_token
            )));
        }
        next = s.last_token + 1;
    }
    if !sentences.is_empty() && next != n_tokens {
        return Err(Error::InvalidDocument(format!(
            "sentences cover {next} of {n_tokens} tokens"
        )));
    }
    Ok(())
}

/// Reassembles the original text from leading whitespace, token surfaces and
/// their trailing whitespace.
pub fn detokenize(doc: &Document) -> String {
    debug_assert!(doc.check_invariants().is_ok());
    let mut out = String::with_capacity(doc.text.len());
    out.push_str(doc.leading_ws());
    for i in 0..doc.tokens.len() {
        out.push_str(doc.surface(i));
        out.push_str(doc.trailing_ws(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_detokenizes_to_empty() {
        let doc = Document::from_spans("", &[], vec![]).unwrap();
        assert_eq!(detokenize(&doc), "");
        assert_eq!(doc.char_len(), 0);
    }

    #[test]
    fn whitespace_only_document_is_all_leading() {
        let doc = Document::from_spans(" \t\n", &[], vec![]).unwrap();
        assert_eq!(doc.leading_ws(), " \t\n");
        assert_eq!(detokenize(&doc), " \t\n");
    }

    #[test]
    fn double_space_is_kept_in_trailing_ws() {
        let doc = Document::from_spans("a  b", &[(0, 1), (3, 4)], vec![]).unwrap();
        assert_eq!(doc.trailing_ws(0), "  ");
        assert_eq!(doc.trailing_ws(1), "");
        assert_eq!(detokenize(&doc), "a  b");
    }

    #[test]
    fn char_offsets_over_non_ascii() {
        let text = "α-helix β2 ok";
        let doc = Document::from_spans(text, &[(0, 7), (8, 10), (11, 13)], vec![]).unwrap();
        assert_eq!(doc.surface(1), "β2");
        assert_eq!(doc.char_slice(2, 7), Some("helix"));
        assert_eq!(doc.char_to_byte(8), Some("α-helix ".len()));
        assert_eq!(doc.byte_to_char("α-helix β".len()), Some(9));
        assert_eq!(doc.char_len(), 13);
        assert_eq!(doc.char_to_byte(14), None);
    }

    #[test]
    fn rejects_bad_spans() {
        assert!(Document::from_spans("ab", &[(0, 0)], vec![]).is_err());
        assert!(Document::from_spans("ab", &[(0, 1)], vec![]).is_err()); // "b" left uncovered
        assert!(Document::from_spans("a b", &[(0, 2)], vec![]).is_err());
        assert!(Document::from_spans("ab", &[(0, 3)], vec![]).is_err());
        assert!(Document::from_spans("a b", &[(2, 3), (0, 1)], vec![]).is_err());
    }

    #[test]
    fn sentences_must_partition() {
        let spans = [(0, 1), (2, 3), (4, 5)];
        let ok = vec![
            SentenceSpan { first_token: 0, last_token: 1 },
            SentenceSpan { first_token: 2, last_token: 2 },
        ];
        assert!(Document::from_spans("a b c", &spans, ok).is_ok());
        let gap = vec![SentenceSpan { first_token: 0, last_token: 0 }];
        assert!(Document::from_spans("a b c", &spans, gap).is_err());
        let overlap = vec![
            SentenceSpan { first_token: 0, last_token: 1 },
            SentenceSpan { first_token: 1, last_token: 2 },
        ];
        assert!(Document::from_spans("a b c", &spans, overlap).is_err());
    }

    #[test]
    fn mention_surface_matches_slice() {
        let doc = Document::from_spans("heat shock", &[(0, 4), (5, 10)], vec![]).unwrap();
        let m = doc.mention(0, 10).unwrap();
        assert_eq!(m.surface, "heat shock");
        assert!(doc.mention(3, 3).is_err());
    }
}
