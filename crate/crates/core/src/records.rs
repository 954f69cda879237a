//! JSON Lines document records shared by every pipeline stage.
//!
//! Offsets are char (Unicode scalar value) indices into `text`, never bytes.
//! Unknown fields are carried through untouched so stages compose via pipes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{AbbreviationPair, Document, SentenceSpan};

/// The only offset unit written or accepted.
pub const OFFSET_UNIT: &str = "char";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbbreviationRecord {
    pub short: Span,
    pub long: Span,
}

/// One line of the document stream.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub text: String,
    #[serde(default = "default_unit")]
    pub offsets: String,
    #[serde(default)]
    pub tokens: Vec<Span>,
    #[serde(default)]
    pub sentences: Vec<SentenceSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbreviations: Option<Vec<AbbreviationRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mentions: Option<Vec<Span>>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

fn default_unit() -> String {
    OFFSET_UNIT.to_string()
}

impl DocRecord {
    /// A record holding raw text only.
    pub fn from_text(text: impl Into<String>) -> Self {
        DocRecord {
            text: text.into(),
            offsets: default_unit(),
            ..Default::default()
        }
    }

    /// Parses one input line. A line starting with `{` must be a JSON record
    /// with a string `text` field; any other line is taken as raw text.
    pub fn parse_line(line: &str) -> Result<Self> {
        if !line.trim_start().starts_with('{') {
            return Ok(DocRecord::from_text(line));
        }
        let rec: DocRecord = serde_json::from_str(line)
            .map_err(|e| Error::InvalidDocument(format!("malformed record: {e}")))?;
        if rec.offsets != OFFSET_UNIT {
            return Err(Error::InvalidDocument(format!(
                "unsupported offset unit `{}`",
                rec.offsets
            )));
        }
        Ok(rec)
    }

    /// Rebuilds the validated document this record describes.
    pub fn to_document(&self) -> Result<Document> {
        let spans: Vec<(usize, usize)> = self.tokens.iter().map(|s| (s.start, s.end)).collect();
        Document::from_spans(self.text.clone(), &spans, self.sentences.clone())
    }

    /// Replaces text, tokens and sentences with those of `doc`, keeping
    /// other fields.
    pub fn set_document(&mut self, doc: &Document) {
        self.text = doc.text().to_string();
        self.offsets = default_unit();
        self.tokens = doc
            .tokens()
            .iter()
            .map(|t| Span {
                start: t.start,
                end: t.end,
            })
            .collect();
        self.sentences = doc.sentences().to_vec();
    }

    pub fn set_abbreviations(&mut self, pairs: &[AbbreviationPair]) {
        self.abbreviations = Some(
            pairs
                .iter()
                .map(|p| AbbreviationRecord {
                    short: Span {
                        start: p.short_form.start,
                        end: p.short_form.end,
                    },
                    long: Span {
                        start: p.long_form.start,
                        end: p.long_form.end,
                    },
                })
                .collect(),
        );
    }

    /// Resolves stored abbreviation spans against `doc`.
    pub fn abbreviation_pairs(&self, doc: &Document) -> Result<Option<Vec<AbbreviationPair>>> {
        let Some(recs) = &self.abbreviations else {
            return Ok(None);
        };
        recs.iter()
            .map(|r| {
                Ok(AbbreviationPair {
                    short_form: doc.mention(r.short.start, r.short.end)?,
                    long_form: doc.mention(r.long.start, r.long.end)?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document records always serialize")
    }
}
