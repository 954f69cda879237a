//! Seeded synthetic data: knowledge bases, gold mentions and abstracts.
//!
//! Everything here is a pure function of its arguments, so tests and
//! benchmarks can regenerate identical data on any machine.

use std::collections::{BTreeSet, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kb::{normalize_alias, Concept, KnowledgeBase};

const SYLLABLES: &[&str] = &[
    "ab", "ac", "ad", "al", "am", "an", "ar", "as", "ba", "be", "bi", "bo", "ca", "ce", "ci",
    "co", "cy", "da", "de", "di", "do", "el", "en", "er", "fa", "fi", "ga", "ge", "gli", "he",
    "hy", "id", "il", "in", "ka", "ki", "la", "le", "li", "lo", "ly", "ma", "me", "mi", "mo",
    "my", "na", "ne", "ni", "no", "ob", "ol", "om", "on", "or", "os", "pa", "pe", "pi", "po",
    "ra", "re", "ri", "ro", "sa", "se", "si", "so", "ta", "te", "ti", "to", "tra", "tri", "ul",
    "um", "un", "ur", "va", "ve", "vi", "xa", "zo",
];

const ENDINGS: &[&str] = &[
    "itis", "oma", "osis", "ase", "in", "ide", "ogen", "ocyte", "emia", "pathy", "ine", "ol",
    "ate", "ene", "ium", "al", "ic", "ar",
];

const HEADS: &[&str] = &[
    "syndrome", "disease", "protein", "receptor", "kinase", "factor", "deficiency", "carcinoma",
    "disorder", "antigen", "inhibitor", "channel", "complex", "gene", "virus", "infection",
    "tumor", "lesion", "pathway", "enzyme",
];

const MODIFIERS: &[&str] = &[
    "acute", "chronic", "primary", "secondary", "familial", "juvenile", "malignant", "benign",
    "congenital", "hereditary", "atypical", "recurrent", "human", "mitochondrial", "nuclear",
    "type 1", "type 2", "early onset", "late onset", "severe",
];

const ORGANS: &[&str] = &[
    "lung", "breast", "liver", "kidney", "heart", "brain", "skin", "bone", "colon", "prostate",
    "pancreas", "thyroid", "retina", "muscle", "blood", "spleen",
];

fn coined_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(2..=3);
    let mut w: String = (0..n).map(|_| *SYLLABLES.choose(rng).unwrap()).collect();
    w.push_str(ENDINGS.choose(rng).unwrap());
    w
}

fn title_case(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn acronym(s: &str) -> String {
    s.split(|c: char| c.is_whitespace() || c == '-')
        .filter_map(|w| w.chars().next())
        .flat_map(char::to_uppercase)
        .collect()
}

/// A concept name and the alias variants it can produce.
struct ConceptSeed {
    modifier: Option<&'static str>,
    organ: Option<&'static str>,
    word: String,
    head: &'static str,
}

impl ConceptSeed {
    fn canonical(&self) -> String {
        let mut parts: Vec<&str> = Vec::new();
        parts.extend(self.modifier);
        parts.extend(self.organ);
        parts.push(&self.word);
        parts.push(self.head);
        parts.join(" ")
    }

    fn variants(&self, rng: &mut ChaCha8Rng) -> Vec<String> {
        let canon = self.canonical();
        let core = format!("{} {}", self.word, self.head);
        let mut v = vec![
            title_case(&canon),
            acronym(&canon),
            format!("{} of {}", self.head, self.word),
            format!("{}s", canon),
            core.clone(),
            format!("{}, {}", core, self.modifier.unwrap_or("unspecified")),
            self.word.clone(),
            format!("{}-{}", self.word, self.head),
            format!("{} {}", self.word, HEADS.choose(rng).unwrap()),
        ];
        if let Some(o) = self.organ {
            v.push(format!("{} {} of {}", self.word, self.head, o));
            v.push(format!("{o} {}", self.head));
        }
        v
    }
}

/// A synthetic KB with exactly `n_concepts` concepts and `n_aliases` distinct
/// alias surfaces (including canonical names). Some aliases, mostly
/// acronyms, are shared between concepts.
pub fn synthetic_kb(n_concepts: usize, n_aliases: usize, seed: u64) -> KnowledgeBase {
    assert!(
        n_aliases >= n_concepts,
        "every concept needs at least its canonical name"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut surfaces: HashSet<String> = HashSet::new();
    let mut concepts = Vec::with_capacity(n_concepts);
    let mut pools = Vec::with_capacity(n_concepts);

    for i in 0..n_concepts {
        let seed = loop {
            let s = ConceptSeed {
                modifier: rng.random_bool(0.5).then(|| *MODIFIERS.choose(&mut rng).unwrap()),
                organ: rng.random_bool(0.4).then(|| *ORGANS.choose(&mut rng).unwrap()),
                word: coined_word(&mut rng),
                head: HEADS.choose(&mut rng).unwrap(),
            };
            if !surfaces.contains(&s.canonical()) {
                break s;
            }
        };
        let canonical = seed.canonical();
        surfaces.insert(canonical.clone());
        let pool = seed.variants(&mut rng);
        concepts.push(Concept {
            concept_id: format!("S{:07}", i + 1),
            canonical_name: canonical.clone(),
            aliases: vec![canonical],
            types: vec![format!("T{:03}", 100 + rng.random_range(0..30))],
            definition: rng
                .random_bool(0.6)
                .then(|| format!("Synthetic concept {}.", i + 1)),
        });
        pools.push(pool);
    }

    // Hand out variants round-robin until the alias budget is used.
    let mut remaining = n_aliases - n_concepts;
    let mut round = 0;
    while remaining > 0 {
        let mut progressed = false;
        for (c, pool) in concepts.iter_mut().zip(&pools) {
            if remaining == 0 {
                break;
            }
            let Some(alias) = pool.get(round) else { continue };
            progressed = true;
            if alias.chars().count() < 2 || c.aliases.contains(alias) {
                continue;
            }
            // Already-used surfaces become shared aliases without using budget.
            if surfaces.contains(alias) {
                if rng.random_bool(0.5) {
                    c.aliases.push(alias.clone());
                }
                continue;
            }
            surfaces.insert(alias.clone());
            c.aliases.push(alias.clone());
            remaining -= 1;
        }
        round += 1;
        if !progressed {
            // Pools exhausted: coin fresh aliases.
            for c in concepts.iter_mut() {
                if remaining == 0 {
                    break;
                }
                let alias = format!("{} {}", coined_word(&mut rng), HEADS.choose(&mut rng).unwrap());
                if surfaces.insert(alias.clone()) {
                    c.aliases.push(alias);
                    remaining -= 1;
                }
            }
        }
    }
    KnowledgeBase::from_concepts(concepts).expect("synthetic concepts are valid")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticGold {
    pub mention: String,
    pub concept_id: String,
}

/// Noisy mentions of random concepts: a random alias with a typo, a dropped
/// word, a case change or nothing at all.
pub fn synthetic_gold(kb: &KnowledgeBase, n: usize, seed: u64) -> Vec<SyntheticGold> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = kb.concepts().choose(&mut rng).expect("non-empty KB");
        let alias = c.aliases.choose(&mut rng).unwrap();
        let mut chars: Vec<char> = alias.chars().collect();
        match rng.random_range(0..5) {
            0 if chars.len() > 4 => {
                let i = rng.random_range(1..chars.len() - 1);
                chars.swap(i, i + 1);
            }
            1 if chars.len() > 4 => {
                let i = rng.random_range(1..chars.len() - 1);
                chars.remove(i);
            }
            2 => {
                let words: Vec<&str> = alias.split_whitespace().collect();
                if words.len() > 1 {
                    let drop = rng.random_range(0..words.len());
                    let kept: Vec<&str> = words
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, w)| *w)
                        .collect();
                    chars = kept.join(" ").chars().collect();
                }
            }
            3 => chars = alias.to_uppercase().chars().collect(),
            _ => {}
        }
        let mention: String = chars.into_iter().collect();
        if normalize_alias(&mention).is_empty() {
            continue;
        }
        out.push(SyntheticGold {
            mention,
            concept_id: c.concept_id.clone(),
        });
    }
    out
}

/// A synthetic abstract with the char spans of the KB aliases it mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticAbstract {
    pub text: String,
    pub mentions: Vec<(usize, usize)>,
}

const OPENERS: &[&str] = &[
    "Background: {A} is a major cause of morbidity in adults.",
    "The role of {A} in disease progression remains unclear.",
    "We investigated whether {A} modulates {B} in vivo.",
    "Recent work has implicated {A} in the regulation of {B} [{N}].",
];

const MIDDLES: &[&str] = &[
    "Expression of {A} was increased 2.5-fold (p<0.05) compared with controls.",
    "Mice lacking {A} showed reduced levels of {B} (Smith et al., 2002).",
    "In total, {N} patients with {A} were enrolled between 2010 and 2015.",
    "Levels of {A} correlated with {B}, e.g. in the liver and kidney.",
    "Treatment with 10 mg/kg of the inhibitor reduced {A} by 35% vs. placebo.",
    "As shown in Fig. 2, {A} localizes to the nucleus in 70-80% of cells.",
    "These findings are consistent with previous reports [{N},{M}].",
    "Binding of {A} to {B} required an intact C-terminal domain.",
    "The mean age was 54.3 years (range 21-78), and 61% were women.",
    "Knockdown of {A} did not alter {B} in primary fibroblasts.",
    "Samples were analysed by qPCR, i.e. relative to GAPDH.",
];

const CLOSERS: &[&str] = &[
    "These results identify {A} as a potential therapeutic target.",
    "Our data suggest that {A} contributes to the pathogenesis of {B}.",
    "Further studies are needed to clarify how {A} affects {B}.",
];

/// Builds `n` abstracts of roughly `target_bytes` each, mentioning aliases
/// drawn from `kb`. Each abstract defines one abbreviation as
/// `long form (ACRONYM)`.
pub fn synthetic_abstracts(
    kb: &KnowledgeBase,
    n: usize,
    target_bytes: usize,
    seed: u64,
) -> Vec<SyntheticAbstract> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let multiword: Vec<&Concept> = kb
        .concepts()
        .iter()
        .filter(|c| c.canonical_name.split_whitespace().count() >= 2)
        .collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut text = String::new();
        let mut mentions = Vec::new();
        let mut char_len = 0usize;

        let mut push_sentence = |template: &str, rng: &mut ChaCha8Rng, text: &mut String| {
            if !text.is_empty() {
                text.push(' ');
                char_len += 1;
            }
            let mut rest = template;
            while let Some(open) = rest.find('{') {
                let close = open + rest[open..].find('}').unwrap();
                let lit = &rest[..open];
                text.push_str(lit);
                char_len += lit.chars().count();
                let fill = match &rest[open + 1..close] {
                    "N" | "M" => rng.random_range(1..60).to_string(),
                    _ => {
                        let c = kb.concepts().choose(rng).unwrap();
                        let alias = c.aliases.choose(rng).unwrap().clone();
                        mentions.push((char_len, char_len + alias.chars().count()));
                        alias
                    }
                };
                text.push_str(&fill);
                char_len += fill.chars().count();
                rest = &rest[close + 1..];
            }
            text.push_str(rest);
            char_len += rest.chars().count();
        };

        push_sentence(OPENERS.choose(&mut rng).unwrap(), &mut rng, &mut text);
        if let Some(c) = multiword.choose(&mut rng) {
            let long = c.canonical_name.clone();
            let short = acronym(&long);
            let template = format!("Here we focus on {long} ({short}) in a mouse model.");
            push_sentence(&template, &mut rng, &mut text);
        }
        while text.len() + 120 < target_bytes {
            push_sentence(MIDDLES.choose(&mut rng).unwrap(), &mut rng, &mut text);
        }
        push_sentence(CLOSERS.choose(&mut rng).unwrap(), &mut rng, &mut text);
        out.push(SyntheticAbstract { text, mentions });
    }
    out
}

/// Distinct concept ids across all aliases of `kb`.
pub fn concept_ids(kb: &KnowledgeBase) -> BTreeSet<&str> {
    kb.concepts().iter().map(|c| c.concept_id.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kb_has_requested_shape() {
        let kb = synthetic_kb(400, 1000, 7);
        assert_eq!(kb.concepts().len(), 400);
        assert_eq!(kb.alias_surfaces().len(), 1000);
        assert!(kb.stats().n_shared_aliases > 0);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(synthetic_kb(50, 120, 1), synthetic_kb(50, 120, 1));
        let kb = synthetic_kb(50, 120, 1);
        assert_eq!(synthetic_gold(&kb, 20, 3), synthetic_gold(&kb, 20, 3));
        assert_eq!(
            synthetic_abstracts(&kb, 3, 1500, 9),
            synthetic_abstracts(&kb, 3, 1500, 9)
        );
    }

    #[test]
    fn abstract_mentions_are_char_spans_of_aliases() {
        let kb = synthetic_kb(50, 120, 1);
        let surfaces: HashSet<&str> = kb.alias_surfaces().into_iter().collect();
        for a in synthetic_abstracts(&kb, 5, 1500, 2) {
            assert!(a.text.len() >= 1300 && a.text.len() <= 1800, "{}", a.text.len());
            let chars: Vec<char> = a.text.chars().collect();
            for &(s, e) in &a.mentions {
                let m: String = chars[s..e].iter().collect();
                assert!(surfaces.contains(m.as_str()), "{m}");
            }
        }
    }
}
