//! Schwartz–Hearst abbreviation detection.
//!
//! Candidates come from innermost parentheticals within one sentence. For
//! `long form (SF)` the short form is the parenthesised text and the long
//! form is searched in the words before the parenthesis; for `SF (long form)`
//! the roles are swapped. A long form is accepted when the short form's
//! letters and digits can be matched right to left inside it, with the first
//! short-form char landing on the start of a word. The shortest suffix that
//! matches is returned.

use std::collections::HashMap;

use crate::text::{AbbreviationPair, Document, MentionSpan};

/// Chars allowed in a short form.
pub const MIN_SHORT_FORM_CHARS: usize = 2;
pub const MAX_SHORT_FORM_CHARS: usize = 10;
pub const MAX_SHORT_FORM_WORDS: usize = 2;

/// Maximum number of long-form words (split at whitespace and hyphens) for a
/// short form with `n` letters and digits.
pub fn max_long_form_words(n: usize) -> usize {
    (n + 5).min(2 * n)
}

/// Short-form validity: 2..=10 chars, at most two words, at least one
/// letter, starting with a letter or digit.
pub fn is_valid_short_form(s: &str) -> bool {
    let n = s.chars().count();
    (MIN_SHORT_FORM_CHARS..=MAX_SHORT_FORM_CHARS).contains(&n)
        && s.split_whitespace().count() <= MAX_SHORT_FORM_WORDS
        && s.chars().any(char::is_alphabetic)
        && s.chars().next().is_some_and(char::is_alphanumeric)
}

fn fold(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

/// Right-to-left matcher. Returns the byte offset within `window` where the
/// shortest matching long form starts.
pub fn best_long_form_start(short: &str, window: &str) -> Option<usize> {
    let sf: Vec<char> = short.chars().collect();
    let lf: Vec<(usize, char)> = window.char_indices().collect();
    let mut s_idx = sf.len() as isize - 1;
    let mut l_idx = lf.len() as isize - 1;
    while s_idx >= 0 {
        let c = fold(sf[s_idx as usize]);
        if !c.is_alphanumeric() {
            s_idx -= 1;
            continue;
        }
        loop {
            if l_idx < 0 {
                return None;
            }
            let lc = fold(lf[l_idx as usize].1);
            let at_word_start = l_idx == 0 || !lf[l_idx as usize - 1].1.is_alphanumeric();
            if lc == c && (s_idx != 0 || at_word_start) {
                break;
            }
            l_idx -= 1;
        }
        l_idx -= 1;
        s_idx -= 1;
    }
    // Back up to the start of the whitespace-delimited word, then drop any
    // leading brackets or quotes.
    let mut start = (l_idx + 1) as usize;
    while start > 0 && !lf[start - 1].1.is_whitespace() {
        start -= 1;
    }
    while start < lf.len() && matches!(lf[start].1, '(' | '[' | '{' | '"' | '\'' | '“' | '‘') {
        start += 1;
    }
    lf.get(start).map(|&(b, _)| b)
}

fn long_form_word_count(s: &str) -> usize {
    s.split(|c: char| c.is_whitespace() || c == '-')
        .filter(|w| !w.is_empty())
        .count()
}

/// Post-match filters from the reference algorithm.
fn acceptable(short: &str, long: &str) -> bool {
    let sf_len = short.chars().count();
    let sf_alnum = short.chars().filter(|c| c.is_alphanumeric()).count();
    let words = long_form_word_count(long);
    long.chars().count() > sf_len
        && !long.contains(&format!("{short} "))
        && !long.ends_with(short)
        && words <= max_long_form_words(sf_alnum)
        && sf_alnum <= MAX_SHORT_FORM_CHARS
}

/// Byte ranges of innermost `(...)` pairs in `s`: `(open, close)`.
fn innermost_parens(s: &str) -> Vec<(usize, usize)> {
    let mut stack: Vec<(usize, bool)> = Vec::new();
    let mut out = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '(' => {
                if let Some(top) = stack.last_mut() {
                    top.1 = true;
                }
                stack.push((i, false));
            }
            ')' => {
                if let Some((open, has_child)) = stack.pop() {
                    if !has_child {
                        out.push((open, i));
                    }
                }
            }
            _ => {}
        }
    }
    out.sort_unstable();
    out
}

/// A match inside one sentence, as byte ranges relative to the sentence.
struct LocalPair {
    short: (usize, usize),
    long: (usize, usize),
}

fn trim_range(s: &str, start: usize, end: usize) -> (usize, usize) {
    let piece = &s[start..end];
    let lead = piece.len() - piece.trim_start().len();
    let trail = piece.len() - piece.trim_end().len();
    (start + lead, end - trail)
}

fn pairs_in_sentence(sent: &str) -> Vec<LocalPair> {
    let mut out = Vec::new();
    for (open, close) in innermost_parens(sent) {
        let inner_start = open + 1;
        let mut inner_end = close;
        let inner = &sent[inner_start..inner_end];
        if let Some(cut) = [", ", "; "].iter().filter_map(|d| inner.find(d)).min() {
            inner_end = inner_start + cut;
        }
        let (sf_start, sf_end) = trim_range(sent, inner_start, inner_end);
        let (pre_start, pre_end) = trim_range(sent, 0, open);
        if pre_start == pre_end {
            continue;
        }
        let sf = &sent[sf_start..sf_end];
        if is_valid_short_form(sf) {
            let window = &sent[pre_start..pre_end];
            if let Some(rel) = best_long_form_start(sf, window) {
                let long = &window[rel..];
                if acceptable(sf, long) {
                    out.push(LocalPair {
                        short: (sf_start, sf_end),
                        long: (pre_start + rel, pre_end),
                    });
                }
            }
            continue;
        }
        // Mirrored: "SF (long form)".
        let before = &sent[pre_start..pre_end];
        let word_start = before
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_whitespace())
            .map_or(0, |(i, c)| i + c.len_utf8());
        let sf = &before[word_start..];
        if !is_valid_short_form(sf) || !sf.chars().any(char::is_uppercase) {
            continue;
        }
        let (lf_start, lf_end) = trim_range(sent, inner_start, close);
        if lf_start == lf_end {
            continue;
        }
        let window = &sent[lf_start..lf_end];
        if let Some(rel) = best_long_form_start(sf, window) {
            let long = &window[rel..];
            if acceptable(sf, long) {
                out.push(LocalPair {
                    short: (pre_start + word_start, pre_end),
                    long: (lf_start + rel, lf_end),
                });
            }
        }
    }
    out
}

/// Detects abbreviation pairs sentence by sentence. A document without
/// sentences is treated as one sentence spanning all tokens.
pub fn find_abbreviations(doc: &Document) -> Vec<AbbreviationPair> {
    let n = doc.tokens().len();
    if n == 0 {
        return Vec::new();
    }
    let whole = [crate::text::SentenceSpan {
        first_token: 0,
        last_token: n - 1,
    }];
    let sentences = if doc.sentences().is_empty() {
        &whole[..]
    } else {
        doc.sentences()
    };
    let mut out = Vec::new();
    for s in sentences {
        let text = doc.sentence_text(s);
        if !text.contains('(') {
            continue;
        }
        let base = doc.sentence_byte_start(s);
        for local in pairs_in_sentence(text) {
            let span = |(a, b): (usize, usize)| -> MentionSpan {
                let start = doc.byte_to_char(base + a).expect("char boundary");
                let end = doc.byte_to_char(base + b).expect("char boundary");
                MentionSpan {
                    start,
                    end,
                    surface: text[a..b].to_string(),
                }
            };
            out.push(AbbreviationPair {
                short_form: span(local.short),
                long_form: span(local.long),
            });
        }
    }
    out
}

/// Short-form surface to long-form surface; the first definition of a short
/// form wins.
pub fn expansion_map(pairs: &[AbbreviationPair]) -> HashMap<String, String> {
    let mut map = HashMap::new();
    for p in pairs {
        map.entry(p.short_form.surface.clone())
            .or_insert_with(|| p.long_form.surface.clone());
    }
    map
}
