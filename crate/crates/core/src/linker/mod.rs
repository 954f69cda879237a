//! Candidate generation for entity linking.
//!
//! Alias strings are encoded as L2-normalized TF-IDF vectors over character
//! 3-grams (`tf × (ln((1 + N) / (1 + df)) + 1)`, grams kept only when at
//! least `min_df` aliases contain them). A mention is encoded the same way,
//! its `k` nearest aliases are retrieved by cosine, and every concept behind
//! those aliases becomes a candidate.

mod candidates;
mod format;
mod index;
pub mod ngrams;
mod vectorizer;

pub use candidates::{expand_hits, generate_candidates, Candidate, CandidateSet, EmptyReason};
pub use format::{read_index, write_index, FORMAT_VERSION, MAGIC};
pub use index::{build_index, nearest_aliases, AliasHit, AliasIndex, Backend, KParam, LshParams};
pub use ngrams::extract_3grams;
pub use vectorizer::{
    cosine, encode, fit_vectorizer, similarity_from_dot, smoothed_idf, GramStats, NgramVectorizer, SparseVector,
    DEFAULT_MIN_DF, UNIT_SNAP,
};
