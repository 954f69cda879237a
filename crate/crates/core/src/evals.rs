//! Evaluation: gold-candidate recall@K, segmentation accuracy and the
//! synthetic citation corpus.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::AliasTable;
use crate::linker::{AliasIndex, KParam};
use crate::text::Document;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldMention {
    pub mention: String,
    #[serde(rename = "concept_id")]
    pub gold_concept_id: String,
}

impl GoldMention {
    pub fn new(mention: impl Into<String>, gold_concept_id: impl Into<String>) -> Result<Self> {
        let g = GoldMention {
            mention: mention.into(),
            gold_concept_id: gold_concept_id.into(),
        };
        if g.mention.is_empty() || g.gold_concept_id.is_empty() {
            return Err(Error::InvalidDocument(
                "gold mention and concept_id must be nonempty".into(),
            ));
        }
        Ok(g)
    }
}

/// Reads gold mentions, one `{"mention": .., "concept_id": ..}` object per
/// line. Blank lines are skipped.
pub fn read_gold_mentions<R: BufRead>(reader: R, origin: &str) -> Result<Vec<GoldMention>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let g: GoldMention =
            serde_json::from_str(&line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        out.push(
            GoldMention::new(g.mention, g.gold_concept_id)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

pub fn load_gold_mentions(path: &Path) -> Result<Vec<GoldMention>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_gold_mentions(std::io::BufReader::new(file), &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecallPoint {
    pub k: usize,
    pub recall: f64,
    pub mean_candidates: f64,
    pub max_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallCurve {
    pub n_mentions: usize,
    pub points: Vec<RecallPoint>,
}

impl RecallCurve {
    pub fn recall_at(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|p| p.k == k).map(|p| p.recall)
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[0].recall <= w[1].recall)
    }

    /// `k,recall,mean_candidates,max_candidates` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,recall,mean_candidates,max_candidates\n");
        for p in &self.points {
            s.push_str(&format!(
                "{},{:.6},{:.4},{}\n",
                p.k, p.recall, p.mean_candidates, p.max_candidates
            ));
        }
        s
    }
}

/// Parses a comma-separated k list such as `1,5,10,25`.
pub fn parse_k_list(s: &str) -> Result<Vec<KParam>> {
    let ks = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .and_then(KParam::new)
                .ok_or_else(|| Error::InvalidKList(format!("`{t}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_k_list(&ks)?;
    Ok(ks)
}

fn check_k_list(ks: &[KParam]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::InvalidKList("empty".into()));
    }
    if !ks.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidKList("values must be strictly increasing".into()));
    }
    Ok(())
}

/// Recall of the gold concept among generated candidates at each k.
///
/// Each mention is queried once at the largest k. Hits come back in a total
/// order, so the top-k hits for any smaller k are a prefix of that list and
/// the candidate set at k is the expansion of that prefix.
pub fn recall_at_k(
    index: &AliasIndex,
    alias_table: &AliasTable,
    gold: &[GoldMention],
    ks: &[KParam],
    expansion: Option<&HashMap<String, String>>,
) -> Result<RecallCurve> {
    check_k_list(ks)?;
    if gold.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    let k_max = *ks.last().unwrap();
    let per_mention: Vec<Vec<(bool, usize)>> = gold
        .par_iter()
        .map(|g| {
            let text = expansion
                .and_then(|m| m.get(&g.mention))
                .map_or(g.mention.as_str(), String::as_str);
            let hits = index.nearest(&index.encode(text), k_max);
            let mut seen: HashSet<&str> = HashSet::new();
            let mut found = false;
            let mut taken = 0;
            ks.iter()
                .map(|k| {
                    let upto = k.get().min(hits.len());
                    for hit in &hits[taken..upto] {
                        let alias = index.alias(hit.alias_id);
                        for c in alias_table.concepts(alias).into_iter().flatten() {
                            seen.insert(c.as_str());
                            found |= *c == g.gold_concept_id;
                        }
                    }
                    taken = upto;
                    (found, seen.len())
                })
                .collect()
        })
        .collect();

    let n = gold.len();
    let points = ks
        .iter()
        .enumerate()
        .map(|(j, k)| {
            let hits = per_mention.iter().filter(|m| m[j].0).count();
            let total: usize = per_mention.iter().map(|m| m[j].1).sum();
            RecallPoint {
                k: k.get(),
                recall: hits as f64 / n as f64,
                mean_candidates: total as f64 / n as f64,
                max_candidates: per_mention.iter().map(|m| m[j].1).max().unwrap_or(0),
            }
        })
        .collect();
    Ok(RecallCurve {
        n_mentions: n,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentationScores {
    pub sentence_acc: f64,
    pub abstract_acc: f64,
    pub n_docs: usize,
    pub n_gold_sentences: usize,
}

fn sentence_spans(doc: &Document) -> Vec<(usize, usize)> {
    doc.sentences()
        .iter()
        .map(|s| doc.sentence_char_span(s))
        .collect()
}

/// Compares predicted against gold sentence char spans. A gold sentence
/// counts when a predicted sentence has exactly its span; a document counts
/// when its span sets are equal.
pub fn segmentation_accuracy(pred: &[Document], gold: &[Document]) -> Result<SegmentationScores> {
    if pred.len() != gold.len() {
        return Err(Error::TextMismatch(pred.len().min(gold.len())));
    }
    if let Some(i) = (0..gold.len()).find(|&i| pred[i].text() != gold[i].text()) {
        return Err(Error::TextMismatch(i));
    }
    let (mut matched, mut total, mut exact_docs) = (0usize, 0usize, 0usize);
    for (p, g) in pred.iter().zip(gold) {
        let ps: HashSet<(usize, usize)> = sentence_spans(p).into_iter().collect();
        let gs = sentence_spans(g);
        total += gs.len();
        matched += gs.iter().filter(|s| ps.contains(s)).count();
        if ps.len() == gs.len() && gs.iter().all(|s| ps.contains(s)) {
            exact_docs += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyEvaluationSet);
    }
    Ok(SegmentationScores {
        sentence_acc: matched as f64 / total as f64,
        abstract_acc: exact_docs as f64 / gold.len() as f64,
        n_docs: gold.len(),
        n_gold_sentences: total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationFamily {
    /// `[12]`
    BracketSingle,
    /// `[3,4]`
    BracketList,
    /// `(Smith et al., 2002)`
    AuthorYear,
    /// numerals glued to the preceding word, `mice12.` or `mice.12`
    Superscript,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationPosition {
    BeforeFinalPunct,
    /// After the final period, where a naive segmenter sees a new sentence.
    AfterFinalPunct,
    MidSentence,
}

pub const CITATION_FAMILIES: [CitationFamily; 4] = [
    CitationFamily::BracketSingle,
    CitationFamily::BracketList,
    CitationFamily::AuthorYear,
    CitationFamily::Superscript,
];

pub const CITATION_POSITIONS: [CitationPosition; 3] = [
    CitationPosition::BeforeFinalPunct,
    CitationPosition::AfterFinalPunct,
    CitationPosition::MidSentence,
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CitationSentence {
    pub text: String,
    pub base: usize,
    pub family: CitationFamily,
    pub position: CitationPosition,
}

const SURNAMES: &[&str] = &[
    "Smith", "Chen", "Garcia", "Müller", "Tanaka", "Okafor", "Johansson", "Kim", "Patel",
    "Rossi", "O'Brien", "Nguyen",
];

/// Distinct (base sentence, family, position) variants available.
pub fn citation_capacity(n_base: usize) -> usize {
    n_base * CITATION_FAMILIES.len() * CITATION_POSITIONS.len()
}

fn citation_text(family: CitationFamily, rng: &mut ChaCha8Rng) -> String {
    match family {
        CitationFamily::BracketSingle => format!("[{}]", rng.random_range(1..80)),
        CitationFamily::BracketList => {
            let a = rng.random_range(1..60);
            if rng.random_bool(0.5) {
                format!("[{},{}]", a, a + rng.random_range(1..5))
            } else {
                format!("[{}-{}]", a, a + rng.random_range(2..6))
            }
        }
        CitationFamily::AuthorYear => {
            let name = SURNAMES[rng.random_range(0..SURNAMES.len())];
            let year = rng.random_range(1985..2020);
            match rng.random_range(0..3) {
                0 => format!("({name} et al., {year})"),
                1 => {
                    let other = SURNAMES[rng.random_range(0..SURNAMES.len())];
                    format!("({name} and {other}, {year})")
                }
                _ => format!("({name}, {year})"),
            }
        }
        CitationFamily::Superscript => {
            let a = rng.random_range(1..50);
            if rng.random_bool(0.5) {
                a.to_string()
            } else {
                format!("{},{}", a, a + 1)
            }
        }
    }
}

/// Inserts a citation into a single sentence. Sentences without final
/// punctuation get a period first.
fn inject(
    base: &str,
    family: CitationFamily,
    position: CitationPosition,
    rng: &mut ChaCha8Rng,
) -> String {
    let base = base.trim();
    let (body, punct) = match base.char_indices().last() {
        Some((i, c)) if matches!(c, '.' | '!' | '?') => (&base[..i], &base[i..]),
        _ => (base, "."),
    };
    let cite = citation_text(family, rng);
    let glued = family == CitationFamily::Superscript;
    match position {
        CitationPosition::BeforeFinalPunct if glued => format!("{body}{cite}{punct}"),
        CitationPosition::BeforeFinalPunct => format!("{body} {cite}{punct}"),
        CitationPosition::AfterFinalPunct if glued => format!("{body}{punct}{cite}"),
        CitationPosition::AfterFinalPunct => format!("{body}{punct} {cite}"),
        CitationPosition::MidSentence => {
            // After a word in the middle of the sentence, never the last one.
            let word_ends: Vec<usize> = body
                .char_indices()
                .filter(|&(i, c)| {
                    c == ' ' && i > 0 && body[..i].ends_with(|p: char| p.is_alphanumeric())
                })
                .map(|(i, _)| i)
                .collect();
            if word_ends.is_empty() {
                return inject(base, family, CitationPosition::BeforeFinalPunct, rng);
            }
            let at = word_ends[word_ends.len() / 2];
            let sep = if glued { "" } else { " " };
            format!("{}{sep}{cite}{}{punct}", &body[..at], &body[at..])
        }
    }
}

/// Deterministically builds `n` single sentences, each carrying one citation.
/// Every (base sentence, family, position) combination is used at most once.
pub fn make_citation_corpus_detailed<S: AsRef<str>>(
    base_sentences: &[S],
    seed: u64,
    n: usize,
) -> Result<Vec<CitationSentence>> {
    let capacity = citation_capacity(base_sentences.len());
    if n > capacity {
        return Err(Error::CorpusCapacity {
            requested: n,
            capacity,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slots: Vec<usize> = (0..capacity).collect();
    slots.shuffle(&mut rng);
    let per_base = CITATION_FAMILIES.len() * CITATION_POSITIONS.len();
    Ok(slots[..n]
        .iter()
        .map(|&slot| {
            let base = slot / per_base;
            let family = CITATION_FAMILIES[slot % per_base / CITATION_POSITIONS.len()];
            let position = CITATION_POSITIONS[slot % CITATION_POSITIONS.len()];
            CitationSentence {
                text: inject(base_sentences[base].as_ref(), family, position, &mut rng),
                base,
                family,
                position,
            }
        })
        .collect())
}

pub fn make_citation_corpus<S: AsRef<str>>(
    base_sentences: &[S],
    seed: u64,
    n: usize,
) -> Result<Vec<String>> {
    Ok(make_citation_corpus_detailed(base_sentences, seed, n)?
        .into_iter()
        .map(|s| s.text)
        .collect())
}

/// Nonempty trimmed lines of a base sentence file; `#` starts a comment line.
pub fn read_base_sentences<R: BufRead>(reader: R, origin: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push(t.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::{find_citations, segment, SegmenterConfig};
    use crate::tokenizer::{default_biomedical_rules, tokenize};

    const BASE: &[&str] = &[
        "Loss of the receptor impairs wound healing in mice.",
        "Serum levels were measured at baseline and after treatment.",
        "The kinase phosphorylates its substrate on two residues!",
    ];

    fn seg(text: &str) -> Document {
        segment(tokenize(text, &default_biomedical_rules()), &SegmenterConfig::default())
    }

    #[test]
    fn corpus_is_deterministic_and_bounded() {
        let a = make_citation_corpus(BASE, 13, 30).unwrap();
        assert_eq!(a, make_citation_corpus(BASE, 13, 30).unwrap());
        assert_ne!(a, make_citation_corpus(BASE, 14, 30).unwrap());
        assert_eq!(a.len(), 30);
        assert!(matches!(
            make_citation_corpus(BASE, 13, 37),
            Err(Error::CorpusCapacity {
                requested: 37,
                capacity: 36
            })
        ));
    }

    #[test]
    fn every_sentence_has_a_recognized_citation() {
        for s in make_citation_corpus(BASE, 1, 36).unwrap() {
            assert!(!find_citations(&s).is_empty(), "{s}");
        }
    }

    #[test]
    fn injection_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = inject("A b c d.", CitationFamily::BracketSingle, CitationPosition::AfterFinalPunct, &mut rng);
        assert!(s.starts_with("A b c d. ["), "{s}");
        let s = inject("A b c d", CitationFamily::Superscript, CitationPosition::BeforeFinalPunct, &mut rng);
        assert!(s.starts_with("A b c d") && s.ends_with('.') && s.as_bytes()[7].is_ascii_digit());
        let s = inject("A b c d.", CitationFamily::AuthorYear, CitationPosition::MidSentence, &mut rng);
        assert!(s.starts_with("A b (") && s.ends_with(") c d."), "{s}");
    }

    #[test]
    fn identical_segmentation_scores_one() {
        let docs = vec![seg("One here. Two here."), seg("Three.")];
        let s = segmentation_accuracy(&docs, &docs).unwrap();
        assert_eq!((s.sentence_acc, s.abstract_acc), (1.0, 1.0));
    }

    #[test]
    fn one_wrong_boundary_in_ten_docs() {
        let gold: Vec<Document> = (0..10).map(|i| seg(&format!("Doc {i} starts. It ends."))).collect();
        let mut pred = gold.clone();
        pred[3] = gold[3].clone().with_sentences(vec![crate::text::SentenceSpan {
            first_token: 0,
            last_token: gold[3].tokens().len() - 1,
        }])
        .unwrap();
        let s = segmentation_accuracy(&pred, &gold).unwrap();
        assert_eq!(s.abstract_acc, 0.9);
        assert_eq!(s.sentence_acc, 18.0 / 20.0);
    }

    #[test]
    fn text_mismatch_names_document() {
        let a = vec![seg("Same."), seg("Left.")];
        let b = vec![seg("Same."), seg("Right.")];
        assert!(matches!(segmentation_accuracy(&a, &b), Err(Error::TextMismatch(1))));
    }

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("1, 5,25").unwrap().len(), 3);
        assert!(parse_k_list("5,1").is_err());
        assert!(parse_k_list("0,1").is_err());
        assert!(parse_k_list("").is_err());
    }

    #[test]
    fn gold_reader_reports_line() {
        let src = "{\"mention\":\"a\",\"concept_id\":\"C1\"}\n\n{\"mention\":\"\",\"concept_id\":\"C2\"}\n";
        match read_gold_mentions(src.as_bytes(), "gold.jsonl") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
