//! Rule-based, lossless tokenizer.
//!
//! Text is first cut at whitespace into chunks. Each chunk is then peeled
//! from the outside in: protected and special literals are emitted as-is,
//! prefixes come off the front, suffixes off the back, and whatever remains
//! is split at infix literals. Whitespace is never part of a token, and every
//! other char ends up in exactly one token, so the original text can always
//! be rebuilt from the token spans.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::Document;

/// The shipped rule table, also available as a file under `data/`.
pub const DEFAULT_RULES: &str = include_str!("../data/default.rules");

/// Single-char infixes that do not split when both neighbours are digits.
const NUMERIC_SEPARATORS: [&str; 4] = [",", ".", ":", "/"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizerRules {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    infixes: Vec<String>,
    protected: HashSet<String>,
    special: HashMap<String, Vec<String>>,
    /// Longest protected or special literal, in bytes.
    max_exception_len: usize,
}

impl TokenizerRules {
    /// Parses the line-oriented rules format. `origin` names the source in
    /// error messages.
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut rules = TokenizerRules::default();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (directive, rest) = line.split_once(char::is_whitespace).ok_or_else(|| {
                Error::parse(origin, line_no, format!("directive `{line}` has no literal"))
            })?;
            let rest = rest.trim();
            match directive {
                "PREFIX" => rules.prefixes.push(literal(rest, origin, line_no)?),
                "SUFFIX" => rules.suffixes.push(literal(rest, origin, line_no)?),
                "INFIX" => rules.infixes.push(literal(rest, origin, line_no)?),
                "PROTECT" => {
                    let lit = literal(rest, origin, line_no)?;
                    rules.max_exception_len = rules.max_exception_len.max(lit.len());
                    rules.protected.insert(lit);
                }
                "SPECIAL" => {
                    let (lit, pieces) = rest.split_once("=>").ok_or_else(|| {
                        Error::parse(origin, line_no, "SPECIAL needs `<literal> => <pieces>`")
                    })?;
                    let lit = literal(lit.trim(), origin, line_no)?;
                    let pieces: Vec<String> =
                        pieces.trim().split('|').map(|p| p.trim().to_string()).collect();
                    if pieces.iter().any(|p| p.is_empty()) {
                        return Err(Error::parse(origin, line_no, "empty SPECIAL piece"));
                    }
                    if pieces.concat() != lit {
                        return Err(Error::parse(
                            origin,
                            line_no,
                            format!("SPECIAL pieces do not spell `{lit}`"),
                        ));
                    }
                    rules.max_exception_len = rules.max_exception_len.max(lit.len());
                    rules.special.insert(lit, pieces);
                }
                other => {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        format!("unknown directive `{other}`"),
                    ))
                }
            }
        }
        Ok(rules)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source, &path.display().to_string())
    }

    pub fn is_protected(&self, s: &str) -> bool {
        self.protected.contains(s)
    }

    pub fn protected(&self) -> impl Iterator<Item = &str> {
        self.protected.iter().map(String::as_str)
    }

    fn exception(&self, s: &str) -> Option<Exception<'_>> {
        if s.len() > self.max_exception_len {
            return None;
        }
        if self.protected.contains(s) {
            return Some(Exception::Whole);
        }
        self.special.get(s).map(|p| Exception::Pieces(p))
    }

    fn match_prefix(&self, s: &str) -> Option<usize> {
        self.prefixes
            .iter()
            .find(|p| s.starts_with(p.as_str()))
            .map(String::len)
    }

    fn match_suffix(&self, s: &str) -> Option<usize> {
        self.suffixes
            .iter()
            .find(|p| s.ends_with(p.as_str()))
            .map(String::len)
    }

    /// First infix at byte `pos` of `s`, in rule order.
    fn match_infix(&self, s: &str, pos: usize) -> Option<usize> {
        let tail = &s[pos..];
        let lit = self.infixes.iter().find(|lit| tail.starts_with(lit.as_str()))?;
        if NUMERIC_SEPARATORS.contains(&lit.as_str()) {
            let before = s[..pos].chars().next_back();
            let after = tail[lit.len()..].chars().next();
            if before.is_some_and(|c| c.is_ascii_digit()) && after.is_some_and(|c| c.is_ascii_digit())
            {
                return None;
            }
        }
        Some(lit.len())
    }
}

enum Exception<'a> {
    Whole,
    Pieces(&'a [String]),
}

fn literal(s: &str, origin: &str, line: usize) -> Result<String> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::parse(
            origin,
            line,
            format!("literal `{s}` must be non-empty and free of whitespace"),
        ));
    }
    Ok(s.to_string())
}

/// The compiled-in rule table.
pub fn default_biomedical_rules() -> TokenizerRules {
    TokenizerRules::parse(DEFAULT_RULES, "<default rules>").expect("default rules are valid")
}

/// Tokenizes `text` into a lossless [`Document`] without sentences.
pub fn tokenize(text: &str, rules: &TokenizerRules) -> Document {
    let mut ranges = Vec::new();
    let mut chunk_start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(text, s, i, rules, &mut ranges);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        split_chunk(text, s, text.len(), rules, &mut ranges);
    }
    Document::from_byte_ranges(text.to_string(), ranges)
}

fn split_chunk(
    text: &str,
    mut start: usize,
    mut end: usize,
    rules: &TokenizerRules,
    out: &mut Vec<(usize, usize)>,
) {
    let mut suffixes = Vec::new();
    while start < end {
        let rest = &text[start..end];
        match rules.exception(rest) {
            Some(Exception::Whole) => {
                out.push((start, end));
                break;
            }
            Some(Exception::Pieces(pieces)) => {
                for p in pieces {
                    out.push((start, start + p.len()));
                    start += p.len();
                }
                break;
            }
            None => {}
        }
        if let Some(n) = rules.match_prefix(rest) {
            out.push((start, start + n));
            start += n;
            continue;
        }
        if let Some(n) = rules.match_suffix(rest) {
            suffixes.push((end - n, end));
            end -= n;
            continue;
        }
        split_infixes(text, start, end, rules, out);
        break;
    }
    out.extend(suffixes.into_iter().rev());
}

fn split_infixes(
    text: &str,
    start: usize,
    end: usize,
    rules: &TokenizerRules,
    out: &mut Vec<(usize, usize)>,
) {
    let core = &text[start..end];
    let mut piece_start = 0;
    let mut pos = 0;
    while pos < core.len() {
        if let Some(n) = rules.match_infix(core, pos) {
            if pos > piece_start {
                out.push((start + piece_start, start + pos));
            }
            out.push((start + pos, start + pos + n));
            pos += n;
            piece_start = pos;
        } else {
            pos += core[pos..].chars().next().map_or(1, char::len_utf8);
        }
    }
    if piece_start < core.len() {
        out.push((start + piece_start, end));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::detokenize;

    fn surfaces(text: &str) -> Vec<String> {
        let doc = tokenize(text, &default_biomedical_rules());
        (0..doc.tokens().len())
            .map(|i| doc.surface(i).to_string())
            .collect()
    }

    #[test]
    fn empty_input_has_no_tokens() {
        assert!(surfaces("").is_empty());
        assert!(surfaces("   ").is_empty());
    }

    #[test]
    fn decimal_comparison_splits_at_operator() {
        assert_eq!(surfaces("p<0.05"), ["p", "<", "0.05"]);
    }

    #[test]
    fn parenthesised_definition() {
        assert_eq!(
            surfaces("IL-2 (interleukin-2)."),
            ["IL-2", "(", "interleukin-2", ")", "."]
        );
    }

    #[test]
    fn protected_abbreviations_stay_whole() {
        assert_eq!(surfaces("(Fig."), ["(", "Fig."]);
        assert_eq!(surfaces("e.g.,"), ["e.g.", ","]);
        assert_eq!(surfaces("Smith et al."), ["Smith", "et", "al."]);
        assert_eq!(surfaces("3.5 vs. 2.1"), ["3.5", "vs.", "2.1"]);
    }

    #[test]
    fn hyphens_stay_slashes_split() {
        assert_eq!(surfaces("NF-kappa"), ["NF-kappa"]);
        assert_eq!(surfaces("mg/kg"), ["mg", "/", "kg"]);
        assert_eq!(surfaces("10-20%"), ["10-20", "%"]);
        assert_eq!(surfaces("1,000"), ["1,000"]);
    }

    #[test]
    fn citation_brackets() {
        assert_eq!(surfaces("[1,2]."), ["[", "1,2", "]", "."]);
        assert_eq!(
            surfaces("(Smith, 2002)"),
            ["(", "Smith", ",", "2002", ")"]
        );
    }

    #[test]
    fn special_case_expansion() {
        assert_eq!(surfaces("cannot"), ["can", "not"]);
    }

    #[test]
    fn non_ascii_offsets_are_chars() {
        let doc = tokenize("β-catenin (β-cat).", &default_biomedical_rules());
        let spans: Vec<_> = doc.tokens().iter().map(|t| (t.start, t.end)).collect();
        assert_eq!(spans, [(0, 9), (10, 11), (11, 16), (16, 17), (17, 18)]);
        assert_eq!(detokenize(&doc), "β-catenin (β-cat).");
    }

    #[test]
    fn earliest_infix_rule_wins() {
        let rules = TokenizerRules::parse("INFIX <\nINFIX <=\n", "t").unwrap();
        let doc = tokenize("a<=b", &rules);
        let s: Vec<_> = (0..doc.tokens().len()).map(|i| doc.surface(i)).collect();
        assert_eq!(s, ["a", "<", "=b"]);
        let rules = TokenizerRules::parse("INFIX <=\nINFIX <\n", "t").unwrap();
        let doc = tokenize("a<=b", &rules);
        let s: Vec<_> = (0..doc.tokens().len()).map(|i| doc.surface(i)).collect();
        assert_eq!(s, ["a", "<=", "b"]);
    }

    #[test]
    fn rules_file_errors_carry_line_numbers() {
        let err = TokenizerRules::parse("# c\nPREFIX (\nBOGUS x\n", "r.rules").unwrap_err();
        assert!(err.to_string().starts_with("r.rules:3:"), "{err}");
        assert!(TokenizerRules::parse("SPECIAL ab => a|c", "r").is_err());
        assert!(TokenizerRules::parse("PREFIX", "r").is_err());
    }

    #[test]
    fn pathological_single_token_terminates() {
        let long = ")".repeat(200_000) + &"a".repeat(200_000);
        let doc = tokenize(&long, &default_biomedical_rules());
        assert_eq!(detokenize(&doc), long);
    }
}
