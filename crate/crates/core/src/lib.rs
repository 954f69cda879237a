//! Biomedical text toolkit.
//!
//! Lossless rule-based tokenization, citation-aware sentence segmentation,
//! abbreviation detection and TF-IDF character 3-gram candidate generation
//! against a concept knowledge base, with evaluation and throughput tooling.

pub mod abbrev;
pub mod bench;
pub mod error;
pub mod evals;
pub mod kb;
pub mod linker;
pub mod records;
pub mod segmenter;
pub mod synth;
pub mod text;
pub mod tokenizer;

pub use error::{Error, Result};
pub use text::{detokenize, AbbreviationPair, Document, MentionSpan, SentenceSpan, Token};
pub use tokenizer::{default_biomedical_rules, tokenize, TokenizerRules};
pub use segmenter::{citation_split_rate, segment, SegmenterConfig};
pub use abbrev::{expansion_map, find_abbreviations};
pub use bench::{run_bench, BenchReport, Pipeline, Stage};
pub use evals::{
    make_citation_corpus, recall_at_k, segmentation_accuracy, GoldMention, RecallCurve,
    SegmentationScores,
};
pub use kb::{kb_stats, load_kb, normalize_alias, AliasTable, Concept, KbStats, KnowledgeBase};
pub use linker::{
    build_index, fit_vectorizer, generate_candidates, nearest_aliases, AliasIndex, Backend,
    CandidateSet, KParam, LshParams, NgramVectorizer, SparseVector,
};
