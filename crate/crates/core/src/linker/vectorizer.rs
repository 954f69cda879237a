use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linker::ngrams::{for_each_gram, gram_counts, GramKey};

/// Default minimum document frequency for a gram to enter the vocabulary.
pub const DEFAULT_MIN_DF: usize = 10;

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs, which must be sorted by
    /// strictly increasing index.
    pub fn from_sorted(pairs: impl IntoIterator<Item = (u32, f64)>) -> Option<Self> {
        let (indices, values): (Vec<u32>, Vec<f64>) = pairs.into_iter().unzip();
        indices
            .windows(2)
            .all(|w| w[0] < w[1])
            .then_some(SparseVector { indices, values })
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / n)
    }

    /// Dot product, accumulated in increasing index order.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Dot products this close to 1 are reported as exactly 1.
pub const UNIT_SNAP: f64 = 1e-12;

/// Maps the dot product of two unit vectors to a similarity in `[0, 1]`.
/// Identical strings land within rounding error of 1 and report exactly 1.
pub fn similarity_from_dot(dot: f64) -> f64 {
    if dot >= 1.0 - UNIT_SNAP {
        1.0
    } else {
        dot.max(0.0)
    }
}

/// Cosine of two unit vectors.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    similarity_from_dot(a.dot(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramStats {
    pub key: GramKey,
    pub df: u32,
    pub idf: f64,
}

/// Smoothed inverse document frequency: `ln((1 + n) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Character 3-gram TF-IDF vectorizer. Gram `i` of the vocabulary is the
/// `i`-th smallest gram key.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramVectorizer {
    grams: Vec<GramStats>,
    lookup: HashMap<GramKey, u32>,
    n_training_docs: usize,
    min_df: usize,
}

impl NgramVectorizer {
    /// Fits on a corpus of alias strings; document frequency counts aliases
    /// containing a gram at least once.
    pub fn fit<S: AsRef<str>>(corpus: &[S], min_df: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: HashMap<GramKey, usize> = HashMap::new();
        let mut seen: Vec<GramKey> = Vec::new();
        for doc in corpus {
            seen.clear();
            for_each_gram(doc.as_ref(), |k| seen.push(k));
            seen.sort_unstable();
            seen.dedup();
            for &k in &seen {
                *df.entry(k).or_default() += 1;
            }
        }
        let n = corpus.len();
        let mut grams: Vec<GramStats> = df
            .into_iter()
            .filter(|&(_, d)| d >= min_df)
            .map(|(key, d)| GramStats {
                key,
                df: d as u32,
                idf: smoothed_idf(n, d),
            })
            .collect();
        if grams.is_empty() {
            return Err(Error::EmptyVocabulary(min_df));
        }
        grams.sort_unstable_by_key(|g| g.key);
        Self::from_parts(grams, n, min_df)
    }

    /// Reassembles a vectorizer, checking its invariants.
    pub fn from_parts(grams: Vec<GramStats>, n_training_docs: usize, min_df: usize) -> Result<Self> {
        if !grams.windows(2).all(|w| w[0].key < w[1].key) {
            return Err(Error::IndexFormat("vocabulary keys not strictly increasing".into()));
        }
        if let Some(g) = grams
            .iter()
            .find(|g| (g.df as usize) < min_df || !(g.idf > 0.0 && g.idf.is_finite()))
        {
            return Err(Error::IndexFormat(format!(
                "invalid vocabulary entry (df {}, idf {})",
                g.df, g.idf
            )));
        }
        let lookup = grams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.key, i as u32))
            .collect();
        Ok(NgramVectorizer {
            grams,
            lookup,
            n_training_docs,
            min_df,
        })
    }

    pub fn grams(&self) -> &[GramStats] {
        &self.grams
    }

    pub fn vocab_len(&self) -> usize {
        self.grams.len()
    }

    pub fn n_training_docs(&self) -> usize {
        self.n_training_docs
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn index_of(&self, key: GramKey) -> Option<u32> {
        self.lookup.get(&key).copied()
    }

    /// Raw term count × idf over in-vocabulary grams, before normalization.
    pub fn weigh(&self, s: &str) -> SparseVector {
        let mut pairs: Vec<(u32, f64)> = gram_counts(s)
            .into_iter()
            .filter_map(|(k, tf)| {
                let i = self.index_of(k)?;
                Some((i, tf as f64 * self.grams[i as usize].idf))
            })
            .collect();
        pairs.sort_unstable_by_key(|p| p.0);
        SparseVector::from_sorted(pairs).expect("distinct grams map to distinct indices")
    }

    /// L2-normalized TF-IDF vector; zero when no gram is in the vocabulary.
    pub fn encode(&self, s: &str) -> SparseVector {
        self.weigh(s).normalized()
    }
}

/// Fits a vectorizer on alias strings.
pub fn fit_vectorizer<S: AsRef<str>>(alias_corpus: &[S], min_df: usize) -> Result<NgramVectorizer> {
    NgramVectorizer::fit(alias_corpus, min_df)
}

/// Encodes `s` with `v`.
pub fn encode(v: &NgramVectorizer, s: &str) -> SparseVector {
    v.encode(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linker::ngrams::{gram_string, pack};

    #[test]
    fn single_alias_min_df_one_has_unit_idf() {
        let v = fit_vectorizer(&["lung"], 1).unwrap();
        assert_eq!(v.vocab_len(), 4);
        assert!(v.grams().iter().all(|g| g.idf == 1.0 && g.df == 1));
    }

    #[test]
    fn min_df_boundary() {
        // "zq" grams appear in 9 aliases, "xw" grams in 10, out of 20.
        let mut corpus: Vec<String> = Vec::new();
        for i in 0..20 {
            let mut s = format!("w{i}");
            if i < 9 {
                s.push_str(" zq");
            }
            if i >= 10 {
                s.push_str(" xw");
            }
            corpus.push(s);
        }
        let v = fit_vectorizer(&corpus, 10).unwrap();
        assert!(v.index_of(pack(' ', 'z', 'q')).is_none());
        let xw = v.index_of(pack(' ', 'x', 'w')).unwrap();
        assert_eq!(v.grams()[xw as usize].df, 10);
        assert!((v.grams()[xw as usize].idf - ((21.0f64 / 11.0).ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let empty: [&str; 0] = [];
        assert!(matches!(fit_vectorizer(&empty, 1), Err(Error::EmptyCorpus)));
        assert!(matches!(
            fit_vectorizer(&["ab", "cd"], 2),
            Err(Error::EmptyVocabulary(2))
        ));
    }

    #[test]
    fn encode_is_unit_or_zero() {
        let v = fit_vectorizer(&["lung cancer", "breast cancer", "cancer"], 1).unwrap();
        let e = v.encode("lung cancer");
        assert!((e.dot(&e) - 1.0).abs() < 1e-12);
        assert!(v.encode("qqq zzz").is_zero());
        assert!(v.encode("").is_zero());
    }

    #[test]
    fn disjoint_strings_have_zero_cosine() {
        let v = fit_vectorizer(&["abc", "xyz"], 1).unwrap();
        assert_eq!(cosine(&v.encode("abc"), &v.encode("xyz")), 0.0);
    }

    #[test]
    fn vocabulary_sorted_by_key() {
        let v = fit_vectorizer(&["cab", "abc"], 1).unwrap();
        let keys: Vec<_> = v.grams().iter().map(|g| g.key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(gram_string(keys[0]), " ab");
    }

    #[test]
    fn from_sorted_rejects_unsorted() {
        assert!(SparseVector::from_sorted([(2, 1.0), (1, 1.0)]).is_none());
        assert!(SparseVector::from_sorted([(1, 1.0), (1, 1.0)]).is_none());
    }
}
