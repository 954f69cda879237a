//! Rule-based sentence segmentation over token sequences.
//!
//! A boundary goes after a terminal punctuation token when all of these hold:
//! the token is not on the no-split list, no bracket opened earlier in the
//! sentence is still unclosed, and the next token passes the confirmation
//! test. Citations that directly follow the terminal token ("shown. [3]",
//! "shown. (Smith et al., 2002)") are attached to the sentence they follow,
//! so the boundary moves past them.

use std::collections::HashSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::text::{Document, SentenceSpan};
use crate::tokenizer::{default_biomedical_rules, tokenize, TokenizerRules};

pub const DEFAULT_SEGMENTER_CONFIG: &str = include_str!("../data/default.seg");

static BRACKET_CITATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[\s*\d+[a-z]?(?:\s*[-–—,;]\s*\d+[a-z]?)*\s*\]").unwrap()
});

static AUTHOR_YEAR_CITATION: LazyLock<Regex> = LazyLock::new(|| {
    let name = r"\p{Lu}[\p{L}'’\-]+";
    let year = r"(?:1[5-9]|20)\d\d[a-z]?";
    let item = format!(
        r"{name}(?:\s+et\s+al\.|\s+(?:and|&)\s+{name})?,?\s+{year}(?:\s*,\s*{year})*(?:,\s*pp?\.\s*\d+(?:[-–]\d+)?)?"
    );
    Regex::new(&format!(
        r"\(\s*(?:(?:see|e\.g\.,?|cf\.)\s+)?{item}(?:\s*;\s*{item})*\s*\)"
    ))
    .unwrap()
});

static SUPERSCRIPT_CITATION: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\p{L}[.,!?]?\d{1,3}(?:[,–-]\d{1,3})*(?:[\s.!?;:]|$)").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CitationKind {
    Bracket,
    AuthorYear,
    Superscript,
}

/// Finds citation-like substrings, returned as byte ranges of `text`.
pub fn find_citations(text: &str) -> Vec<(CitationKind, std::ops::Range<usize>)> {
    let mut out: Vec<_> = BRACKET_CITATION
        .find_iter(text)
        .map(|m| (CitationKind::Bracket, m.range()))
        .chain(
            AUTHOR_YEAR_CITATION
                .find_iter(text)
                .map(|m| (CitationKind::AuthorYear, m.range())),
        )
        .chain(
            SUPERSCRIPT_CITATION
                .find_iter(text)
                .map(|m| (CitationKind::Superscript, m.range())),
        )
        .collect();
    out.sort_by_key(|(_, r)| (r.start, r.end));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmenterConfig {
    pub no_split: HashSet<String>,
    pub cite_bracket: bool,
    pub cite_author_year: bool,
    pub require_confirmation: bool,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig::parse(DEFAULT_SEGMENTER_CONFIG, "<default segmenter config>")
            .expect("default segmenter config is valid")
    }
}

impl SegmenterConfig {
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let mut cfg = SegmenterConfig {
            no_split: HashSet::new(),
            cite_bracket: false,
            cite_author_year: false,
            require_confirmation: true,
        };
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some("NOSPLIT"), Some(tok), None) => {
                    cfg.no_split.insert(tok.to_string());
                }
                (Some("CITE_BRACKET"), None, _) => cfg.cite_bracket = true,
                (Some("CITE_AUTHOR_YEAR"), None, _) => cfg.cite_author_year = true,
                (Some("NO_CONFIRM"), None, _) => cfg.require_confirmation = false,
                _ => {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        format!("cannot parse directive `{line}`"),
                    ))
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&source, &path.display().to_string())
    }

    /// The same configuration with both citation families switched off.
    pub fn without_citations(&self) -> Self {
        SegmenterConfig {
            cite_bracket: false,
            cite_author_year: false,
            ..self.clone()
        }
    }
}

/// +1 for an opening bracket token, -1 for a closing one, 0 otherwise.
pub fn bracket_delta(surface: &str) -> i32 {
    match surface {
        "(" | "[" | "{" => 1,
        ")" | "]" | "}" => -1,
        _ => 0,
    }
}

fn is_terminal(surface: &str) -> bool {
    surface.ends_with('.')
        || (!surface.is_empty() && surface.chars().all(|c| matches!(c, '!' | '?')))
}

fn starts_statement(surface: &str) -> bool {
    surface
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
}

fn is_opener(surface: &str) -> bool {
    matches!(surface, "(" | "[" | "{" | "\"" | "“" | "‘" | "'")
}

/// Token ranges (inclusive) of the citations the config attaches.
fn citation_token_ranges(doc: &Document, cfg: &SegmenterConfig) -> Vec<(usize, usize)> {
    if !cfg.cite_bracket && !cfg.cite_author_year {
        return Vec::new();
    }
    let tokens = doc.tokens();
    let mut out = Vec::new();
    for (kind, range) in find_citations(doc.text()) {
        let wanted = match kind {
            CitationKind::Bracket => cfg.cite_bracket,
            CitationKind::AuthorYear => cfg.cite_author_year,
            CitationKind::Superscript => false,
        };
        if !wanted {
            continue;
        }
        let first = tokens.partition_point(|t| t.byte_range().start < range.start);
        let last = tokens.partition_point(|t| t.byte_range().end <= range.end);
        if first < last
            && tokens[first].byte_range().start == range.start
            && tokens[last - 1].byte_range().end == range.end
        {
            out.push((first, last - 1));
        }
    }
    out.sort_unstable();
    out.dedup_by_key(|r| r.0);
    out
}

/// Populates sentence spans. Documents without tokens get no sentences.
pub fn segment(doc: Document, cfg: &SegmenterConfig) -> Document {
    let n = doc.tokens().len();
    if n == 0 {
        return doc.with_sentences(Vec::new()).expect("empty partition");
    }
    let citations = citation_token_ranges(&doc, cfg);
    let citation_at = |i: usize| -> Option<usize> {
        citations
            .binary_search_by_key(&i, |r| r.0)
            .ok()
            .map(|j| citations[j].1)
    };
    let no_split = |i: usize| -> bool {
        let s = doc.surface(i);
        if cfg.no_split.contains(s) {
            return true;
        }
        // "Fig" "." split by custom rules still counts as "Fig."
        if s == "." && i > 0 && doc.trailing_ws(i - 1).is_empty() {
            let joined = format!("{}.", doc.surface(i - 1));
            return cfg.no_split.contains(&joined);
        }
        false
    };
    let confirms = |j: usize| -> bool {
        if !cfg.require_confirmation {
            return true;
        }
        let s = doc.surface(j);
        starts_statement(s) || (is_opener(s) && j + 1 < n && starts_statement(doc.surface(j + 1)))
    };

    let mut sentences = Vec::new();
    let mut first = 0usize;
    let mut depth = 0i32;
    let mut i = 0usize;
    while i < n {
        let s = doc.surface(i);
        depth = (depth + bracket_delta(s)).max(0);
        if depth == 0 && is_terminal(s) && !no_split(i) {
            let mut end = i;
            while let Some(last) = citation_at(end + 1) {
                end = last;
            }
            if end + 1 < n && confirms(end + 1) {
                sentences.push(SentenceSpan {
                    first_token: first,
                    last_token: end,
                });
                first = end + 1;
            }
            i = end + 1;
            continue;
        }
        i += 1;
    }
    sentences.push(SentenceSpan {
        first_token: first,
        last_token: n - 1,
    });
    doc.with_sentences(sentences)
        .expect("segmenter produces a partition")
}

/// Fraction of known-single sentences that stay in one piece, tokenized with
/// the default rules.
pub fn citation_split_rate<S: AsRef<str>>(sentences: &[S], cfg: &SegmenterConfig) -> Result<f64> {
    citation_split_rate_with(sentences, &default_biomedical_rules(), cfg)
}

pub fn citation_split_rate_with<S: AsRef<str>>(
    sentences: &[S],
    rules: &TokenizerRules,
    cfg: &SegmenterConfig,
) -> Result<f64> {
    if sentences.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    let intact = sentences
        .iter()
        .filter(|s| segment(tokenize(s.as_ref(), rules), cfg).sentences().len() == 1)
        .count();
    Ok(intact as f64 / sentences.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences_of(text: &str, cfg: &SegmenterConfig) -> Vec<String> {
        let doc = segment(tokenize(text, &default_biomedical_rules()), cfg);
        doc.sentences()
            .iter()
            .map(|s| doc.sentence_text(s).to_string())
            .collect()
    }

    #[test]
    fn two_plain_sentences() {
        let cfg = SegmenterConfig::default();
        assert_eq!(
            sentences_of("Mice were treated. Results improved.", &cfg),
            ["Mice were treated.", "Results improved."]
        );
    }

    #[test]
    fn author_year_citation_is_one_sentence() {
        let cfg = SegmenterConfig::default();
        let s = "This was shown previously (Smith et al., 2002).";
        assert_eq!(sentences_of(s, &cfg), [s]);
    }

    #[test]
    fn stoplist_and_decimals() {
        let cfg = SegmenterConfig::default();
        let s = "The level was 3.5 vs. 2.1 in controls.";
        assert_eq!(sentences_of(s, &cfg), [s]);
        let s = "As shown in Fig. 2 the effect was robust.";
        assert_eq!(sentences_of(s, &cfg), [s]);
    }

    #[test]
    fn citation_after_period_is_attached() {
        let cfg = SegmenterConfig::default();
        assert_eq!(
            sentences_of("A result was seen. [3] Then more.", &cfg),
            ["A result was seen. [3]", "Then more."]
        );
        assert_eq!(
            sentences_of("A result was seen. [3] Then more.", &cfg.without_citations()),
            ["A result was seen.", "[3] Then more."]
        );
        assert_eq!(
            sentences_of("Known. (Li and Wu, 1999; Smith, 2002a) Next one.", &cfg),
            ["Known. (Li and Wu, 1999; Smith, 2002a)", "Next one."]
        );
    }

    #[test]
    fn no_boundary_inside_brackets() {
        let cfg = SegmenterConfig::default();
        let s = "Levels rose (see above. The data agree) in all mice.";
        assert_eq!(sentences_of(s, &cfg), [s]);
    }

    #[test]
    fn unbalanced_closing_bracket_is_tolerated() {
        let cfg = SegmenterConfig::default();
        assert_eq!(
            sentences_of("a) First item. Second item.", &cfg),
            ["a) First item.", "Second item."]
        );
    }

    #[test]
    fn lowercase_continuation_needs_no_confirmation_flag() {
        let cfg = SegmenterConfig::default();
        assert_eq!(sentences_of("It was approx. ten.", &cfg).len(), 1);
        assert_eq!(sentences_of("Ends here. then more.", &cfg).len(), 1);
        let mut loose = cfg.clone();
        loose.require_confirmation = false;
        assert_eq!(sentences_of("Ends here. then more.", &loose).len(), 2);
    }

    #[test]
    fn split_period_still_matches_stoplist() {
        let rules = TokenizerRules::parse("SUFFIX .\n", "t").unwrap();
        let doc = segment(tokenize("See Fig. 3 here.", &rules), &SegmenterConfig::default());
        assert_eq!(doc.sentences().len(), 1);
    }

    #[test]
    fn citation_rate() {
        let cfg = SegmenterConfig::default();
        assert_eq!(citation_split_rate(&["A result [3]."], &cfg).unwrap(), 1.0);
        let adversarial = ["Expression was increased. [3]"];
        assert_eq!(citation_split_rate(&adversarial, &cfg).unwrap(), 1.0);
        assert!(citation_split_rate(&adversarial, &cfg.without_citations()).unwrap() < 1.0);
        let empty: [&str; 0] = [];
        assert!(matches!(
            citation_split_rate(&empty, &cfg),
            Err(Error::EmptyEvaluationSet)
        ));
    }

    #[test]
    fn config_parse_errors() {
        assert!(SegmenterConfig::parse("NOSPLIT\n", "c").is_err());
        assert!(SegmenterConfig::parse("CITE_BRACKET extra\n", "c").is_err());
        let cfg = SegmenterConfig::parse("NOSPLIT Fig.\nNO_CONFIRM\n", "c").unwrap();
        assert!(!cfg.require_confirmation && !cfg.cite_bracket);
    }

    #[test]
    fn finds_citation_kinds() {
        let kinds: Vec<_> = find_citations("in mice [1,2] and rats (Smith, 2002) or cells.12 ok")
            .into_iter()
            .map(|(k, _)| k)
            .collect();
        assert_eq!(
            kinds,
            [CitationKind::Bracket, CitationKind::AuthorYear, CitationKind::Superscript]
        );
    }
}
