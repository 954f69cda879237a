use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::kb::AliasTable;
use crate::linker::index::{AliasHit, AliasIndex, KParam};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub concept_id: String,
    pub alias: String,
    pub score: f64,
}

/// Why a candidate set came back empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// No gram of the query text is in the vocabulary.
    OutOfVocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateSet {
    pub mention: String,
    /// The text actually encoded, after abbreviation expansion.
    pub query_text: String,
    pub candidates: Vec<Candidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empty_reason: Option<EmptyReason>,
}

impl CandidateSet {
    pub fn concept_ids(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.concept_id.as_str())
    }

    pub fn contains(&self, concept_id: &str) -> bool {
        self.candidates.iter().any(|c| c.concept_id == concept_id)
    }
}

/// Retrieves the `k` nearest alias strings for a mention and expands each to
/// every concept it names. A concept reached through several aliases keeps
/// its best similarity, so the set may hold fewer or more than `k` concepts.
pub fn generate_candidates(
    index: &AliasIndex,
    alias_table: &AliasTable,
    mention: &str,
    k: KParam,
    expansion: Option<&HashMap<String, String>>,
) -> CandidateSet {
    let query_text = expansion
        .and_then(|m| m.get(mention))
        .map_or(mention, String::as_str);
    let query = index.encode(query_text);
    let mut out = CandidateSet {
        mention: mention.to_string(),
        query_text: query_text.to_string(),
        candidates: Vec::new(),
        empty_reason: None,
    };
    if query.is_zero() {
        out.empty_reason = Some(EmptyReason::OutOfVocabulary);
        return out;
    }
    out.candidates = expand_hits(index, alias_table, &index.nearest(&query, k));
    out
}

/// Expands ranked alias hits to concepts, keeping each concept's first (and
/// therefore best) hit.
pub fn expand_hits(index: &AliasIndex, alias_table: &AliasTable, hits: &[AliasHit]) -> Vec<Candidate> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for hit in hits {
        let alias = index.alias(hit.alias_id);
        for concept in alias_table.concepts(alias).into_iter().flatten() {
            if seen.insert(concept.as_str()) {
                out.push(Candidate {
                    concept_id: concept.clone(),
                    alias: alias.to_string(),
                    score: hit.score,
                });
            }
        }
    }
    out
}
