//! Test-only brute-force reference implementations. Nothing here calls into
//! the library's vectorizer or index; strings and maps are used directly.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Padded per-word char 3-grams, recomputed from scratch.
pub fn grams(s: &str) -> Vec<String> {
    let lower = s.to_lowercase();
    let mut out = Vec::new();
    for word in lower.split_whitespace() {
        let padded: Vec<char> = format!(" {word} ").chars().collect();
        for i in 0..padded.len().saturating_sub(2) {
            out.push(padded[i..i + 3].iter().collect());
        }
    }
    out
}

pub struct BruteTfIdf {
    pub idf: BTreeMap<String, f64>,
}

impl BruteTfIdf {
    pub fn fit(corpus: &[&str], min_df: usize) -> Self {
        let n = corpus.len() as f64;
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            let distinct: BTreeSet<String> = grams(doc).into_iter().collect();
            for g in distinct {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let idf = df
            .into_iter()
            .filter(|(_, d)| *d >= min_df)
            .map(|(g, d)| (g, ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0))
            .collect();
        BruteTfIdf { idf }
    }

    pub fn vector(&self, s: &str) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for g in grams(s) {
            if self.idf.contains_key(&g) {
                *tf.entry(g).or_insert(0.0) += 1.0;
            }
        }
        let mut v: BTreeMap<String, f64> =
            tf.into_iter().map(|(g, t)| { let w = t * self.idf[&g]; (g, w) }).collect();
        let norm = v.values().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in v.values_mut() {
                *x /= norm;
            }
        }
        v
    }
}

pub fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut acc = 0.0;
    for (g, x) in a {
        if let Some(y) = b.get(g) {
            acc += x * y;
        }
    }
    // Same similarity definition as the library: within 1e-12 of 1 is 1.
    if acc >= 1.0 - 1e-12 {
        1.0
    } else {
        acc.max(0.0)
    }
}

/// Full scan: every alias scored, sorted by (cosine desc, alias asc), cut to k.
pub fn brute_top_k(
    aliases: &[(String, BTreeMap<String, f64>)],
    query: &BTreeMap<String, f64>,
    k: usize,
) -> Vec<(String, f64)> {
    if query.is_empty() {
        return Vec::new();
    }
    let mut scored: Vec<(String, f64)> = aliases
        .iter()
        .map(|(a, v)| (a.clone(), cosine(query, v)))
        .collect();
    scored.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then_with(|| x.0.cmp(&y.0)));
    scored.truncate(k);
    scored
}

/// Concepts behind the brute-force top-k aliases, best similarity first.
pub fn brute_candidates(
    top: &[(String, f64)],
    concepts_of: impl Fn(&str) -> Vec<String>,
) -> Vec<(String, f64)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (alias, score) in top {
        let mut ids = concepts_of(alias);
        ids.sort();
        for id in ids {
            if seen.insert(id.clone()) {
                out.push((id, *score));
            }
        }
    }
    out
}
