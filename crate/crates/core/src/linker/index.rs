//! Alias index with an exact inverted-index scorer and a random-hyperplane
//! LSH backend.

use std::collections::HashMap;
use std::num::NonZeroUsize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::linker::vectorizer::{cosine, similarity_from_dot, NgramVectorizer, SparseVector};

/// Number of nearest alias strings to retrieve; always at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KParam(NonZeroUsize);

impl KParam {
    pub fn new(k: usize) -> Option<Self> {
        NonZeroUsize::new(k).map(KParam)
    }

    pub fn get(self) -> usize {
        self.0.get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LshParams {
    /// Independent hash tables.
    pub tables: u32,
    /// Hyperplanes (signature bits) per table, at most 32.
    pub bits: u32,
    /// Buckets within this Hamming distance of the query signature are
    /// probed too.
    pub probe_radius: u32,
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        LshParams {
            tables: 16,
            bits: 12,
            probe_radius: 2,
            seed: 0x5eed_1a5b,
        }
    }
}

impl LshParams {
    fn validate(&self) -> Result<()> {
        if self.tables == 0 || self.tables > 1024 {
            return Err(Error::Backend(format!(
                "lsh: tables must be in 1..=1024, got {}",
                self.tables
            )));
        }
        if self.bits == 0 || self.bits > 32 {
            return Err(Error::Backend(format!(
                "lsh: bits must be in 1..=32, got {}",
                self.bits
            )));
        }
        if self.probe_radius > 2 || self.probe_radius > self.bits {
            return Err(Error::Backend(format!(
                "lsh: probe_radius must be at most min(2, bits), got {}",
                self.probe_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    Lsh(LshParams),
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Lsh(_) => "lsh",
        }
    }
}

/// One retrieved alias and its cosine similarity to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasHit {
    pub alias_id: u32,
    pub score: f64,
}

#[derive(Debug, Clone)]
struct LshTables {
    params: LshParams,
    /// `planes[g * tables * bits + t * bits + b]`
    planes: Vec<f32>,
    buckets: Vec<HashMap<u32, Vec<u32>>>,
}

impl LshTables {
    fn build(params: LshParams, vocab_len: usize, vectors: &[SparseVector]) -> Result<Self> {
        params.validate()?;
        let width = (params.tables * params.bits) as usize;
        let total = vocab_len.checked_mul(width).ok_or_else(|| {
            Error::Backend(format!("lsh: {vocab_len} grams x {width} planes overflows"))
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let planes: Vec<f32> = (0..total).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut tables = LshTables {
            params,
            planes,
            buckets: vec![HashMap::new(); params.tables as usize],
        };
        for (id, v) in vectors.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for (t, sig) in tables.signatures(v).into_iter().enumerate() {
                tables.buckets[t].entry(sig).or_default().push(id as u32);
            }
        }
        Ok(tables)
    }

    fn signatures(&self, v: &SparseVector) -> Vec<u32> {
        let tables = self.params.tables as usize;
        let bits = self.params.bits as usize;
        let width = tables * bits;
        let mut proj = vec![0f64; width];
        for (g, w) in v.iter() {
            let row = &self.planes[g as usize * width..(g as usize + 1) * width];
            for (p, &h) in proj.iter_mut().zip(row) {
                *p += w * h as f64;
            }
        }
        (0..tables)
            .map(|t| {
                proj[t * bits..(t + 1) * bits]
                    .iter()
                    .enumerate()
                    .fold(0u32, |sig, (b, &p)| if p > 0.0 { sig | (1 << b) } else { sig })
            })
            .collect()
    }

    /// Ids of aliases sharing a probed bucket with `v`, deduplicated.
    fn candidates(&self, v: &SparseVector, n_aliases: usize) -> Vec<u32> {
        let bits = self.params.bits;
        let mut seen = vec![false; n_aliases];
        let mut out = Vec::new();
        let mut take = |bucket: Option<&Vec<u32>>| {
            for &id in bucket.into_iter().flatten() {
                if !std::mem::replace(&mut seen[id as usize], true) {
                    out.push(id);
                }
            }
        };
        for (t, sig) in self.signatures(v).into_iter().enumerate() {
            let table = &self.buckets[t];
            take(table.get(&sig));
            if self.params.probe_radius >= 1 {
                for b in 0..bits {
                    take(table.get(&(sig ^ (1 << b))));
                }
            }
            if self.params.probe_radius >= 2 {
                for b1 in 0..bits {
                    for b2 in b1 + 1..bits {
                        take(table.get(&(sig ^ (1 << b1) ^ (1 << b2))));
                    }
                }
            }
        }
        out
    }
}

/// Searchable store of encoded alias vectors.
#[derive(Debug, Clone)]
pub struct AliasIndex {
    vectorizer: NgramVectorizer,
    aliases: Vec<String>,
    vectors: Vec<SparseVector>,
    concept_ids: Vec<String>,
    alias_concepts: Vec<Vec<u32>>,
    backend: Backend,
    postings: Vec<Vec<(u32, f64)>>,
    lex_rank: Vec<u32>,
    lex_order: Vec<u32>,
    lsh: Option<LshTables>,
}

impl AliasIndex {
    /// Assembles an index from its stored parts and builds the search
    /// structures.
    pub fn from_parts(
        vectorizer: NgramVectorizer,
        aliases: Vec<String>,
        vectors: Vec<SparseVector>,
        concept_ids: Vec<String>,
        alias_concepts: Vec<Vec<u32>>,
        backend: Backend,
    ) -> Result<Self> {
        if aliases.len() != vectors.len() || aliases.len() != alias_concepts.len() {
            return Err(Error::IndexFormat(format!(
                "{} aliases, {} vectors, {} concept lists",
                aliases.len(),
                vectors.len(),
                alias_concepts.len()
            )));
        }
        if aliases.len() > u32::MAX as usize {
            return Err(Error::IndexFormat("too many aliases".into()));
        }
        let vocab = vectorizer.vocab_len() as u32;
        if vectors
            .iter()
            .any(|v| v.indices().last().is_some_and(|&i| i >= vocab))
        {
            return Err(Error::IndexFormat("vector index beyond vocabulary".into()));
        }
        if alias_concepts
            .iter()
            .flatten()
            .any(|&c| c as usize >= concept_ids.len())
        {
            return Err(Error::IndexFormat("concept ordinal out of range".into()));
        }
        let mut lex_order: Vec<u32> = (0..aliases.len() as u32).collect();
        lex_order.sort_by(|&a, &b| aliases[a as usize].cmp(&aliases[b as usize]));
        if lex_order
            .windows(2)
            .any(|w| aliases[w[0] as usize] == aliases[w[1] as usize])
        {
            return Err(Error::IndexFormat("duplicate alias surface".into()));
        }
        let mut lex_rank = vec![0u32; aliases.len()];
        for (rank, &id) in lex_order.iter().enumerate() {
            lex_rank[id as usize] = rank as u32;
        }
        let mut postings = vec![Vec::new(); vectorizer.vocab_len()];
        for (id, v) in vectors.iter().enumerate() {
            for (g, w) in v.iter() {
                postings[g as usize].push((id as u32, w));
            }
        }
        let lsh = match backend {
            Backend::Exact => None,
            Backend::Lsh(params) => Some(LshTables::build(
                params,
                vectorizer.vocab_len(),
                &vectors,
            )?),
        };
        Ok(AliasIndex {
            vectorizer,
            aliases,
            vectors,
            concept_ids,
            alias_concepts,
            backend,
            postings,
            lex_rank,
            lex_order,
            lsh,
        })
    }

    pub fn vectorizer(&self) -> &NgramVectorizer {
        &self.vectorizer
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    pub fn aliases(&self) -> &[String] {
        &self.aliases
    }

    pub fn alias(&self, id: u32) -> &str {
        &self.aliases[id as usize]
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn vector(&self, id: u32) -> &SparseVector {
        &self.vectors[id as usize]
    }

    pub fn concept_ids(&self) -> &[String] {
        &self.concept_ids
    }

    pub fn alias_concept_ordinals(&self) -> &[Vec<u32>] {
        &self.alias_concepts
    }

    /// Concept ids stored for an alias.
    pub fn concepts_of(&self, id: u32) -> impl Iterator<Item = &str> {
        self.alias_concepts[id as usize]
            .iter()
            .map(|&c| self.concept_ids[c as usize].as_str())
    }

    /// Rebuilds the alias table from the stored alias → concept lists.
    pub fn alias_table(&self) -> crate::kb::AliasTable {
        let mut table = crate::kb::AliasTable::default();
        for (id, alias) in self.aliases.iter().enumerate() {
            for c in self.concepts_of(id as u32) {
                table.insert(alias, c);
            }
        }
        table
    }

    pub fn encode(&self, s: &str) -> SparseVector {
        self.vectorizer.encode(s)
    }

    /// Copy of this index searched with a different backend.
    pub fn with_backend(&self, backend: Backend) -> Result<Self> {
        AliasIndex::from_parts(
            self.vectorizer.clone(),
            self.aliases.clone(),
            self.vectors.clone(),
            self.concept_ids.clone(),
            self.alias_concepts.clone(),
            backend,
        )
    }

    /// Top-`k` aliases by cosine, ordered by similarity descending then alias
    /// ascending. A zero query returns nothing.
    pub fn nearest(&self, query: &SparseVector, k: KParam) -> Vec<AliasHit> {
        if query.is_zero() || self.aliases.is_empty() {
            return Vec::new();
        }
        match &self.lsh {
            None => self.nearest_exact(query, k.get()),
            Some(lsh) => {
                let scored = lsh
                    .candidates(query, self.aliases.len())
                    .into_iter()
                    .map(|id| (id, cosine(query, &self.vectors[id as usize])))
                    .collect();
                self.top_k(scored, k.get())
            }
        }
    }

    fn nearest_exact(&self, query: &SparseVector, k: usize) -> Vec<AliasHit> {
        let n = self.aliases.len();
        let mut scores = vec![0f64; n];
        let mut touched_flag = vec![false; n];
        let mut touched = Vec::new();
        for (g, qw) in query.iter() {
            for &(id, w) in &self.postings[g as usize] {
                let i = id as usize;
                scores[i] += qw * w;
                if !touched_flag[i] {
                    touched_flag[i] = true;
                    touched.push(id);
                }
            }
        }
        let scored: Vec<(u32, f64)> = touched
            .into_iter()
            .map(|id| (id, similarity_from_dot(scores[id as usize])))
            .collect();
        let mut hits = self.top_k(scored, k);
        if hits.len() < k {
            // Every remaining alias scores zero; they follow in alias order.
            hits.extend(
                self.lex_order
                    .iter()
                    .filter(|&&id| !touched_flag[id as usize])
                    .take(k - hits.len())
                    .map(|&id| AliasHit {
                        alias_id: id,
                        score: 0.0,
                    }),
            );
        }
        hits
    }

    fn top_k(&self, mut scored: Vec<(u32, f64)>, k: usize) -> Vec<AliasHit> {
        let order = |a: &(u32, f64), b: &(u32, f64)| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.lex_rank[a.0 as usize].cmp(&self.lex_rank[b.0 as usize]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(order);
        scored
            .into_iter()
            .map(|(alias_id, score)| AliasHit { alias_id, score })
            .collect()
    }
}

/// Builds an index over every distinct alias surface of `kb`.
pub fn build_index(
    kb: &KnowledgeBase,
    vectorizer: NgramVectorizer,
    backend: Backend,
) -> Result<AliasIndex> {
    let ordinal: HashMap<&str, u32> = kb
        .concepts()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.concept_id.as_str(), i as u32))
        .collect();
    let surfaces = kb.alias_surfaces();
    let alias_concepts = surfaces
        .iter()
        .map(|a| {
            kb.alias_table()
                .concepts(a)
                .into_iter()
                .flatten()
                .map(|id| ordinal[id.as_str()])
                .collect()
        })
        .collect();
    let vectors = surfaces.iter().map(|a| vectorizer.encode(a)).collect();
    AliasIndex::from_parts(
        vectorizer,
        surfaces.into_iter().map(str::to_string).collect(),
        vectors,
        kb.concepts().iter().map(|c| c.concept_id.clone()).collect(),
        alias_concepts,
        backend,
    )
}

/// Top-`k` nearest aliases as `(alias, cosine)` pairs.
pub fn nearest_aliases<'a>(
    index: &'a AliasIndex,
    query: &SparseVector,
    k: KParam,
) -> Vec<(&'a str, f64)> {
    index
        .nearest(query, k)
        .into_iter()
        .map(|h| (index.alias(h.alias_id), h.score))
        .collect()
}
