//! Concept knowledge base: JSONL ingestion, alias normalization and the
//! many-to-many alias table.
//!
//! One concept per line:
//! `{"concept_id": str, "canonical_name": str, "aliases": [str], "types": [str], "definition": str|null}`

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub concept_id: String,
    pub canonical_name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub types: Vec<String>,
    #[serde(default)]
    pub definition: Option<String>,
}

impl Concept {
    pub fn has_definition(&self) -> bool {
        self.definition.is_some()
    }
}

/// Normalized alias → concept ids sharing it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasTable {
    map: BTreeMap<String, BTreeSet<String>>,
}

impl AliasTable {
    pub fn insert(&mut self, alias: &str, concept_id: &str) {
        self.map
            .entry(normalize_alias(alias))
            .or_default()
            .insert(concept_id.to_string());
    }

    /// Concepts for an alias; the lookup key is normalized first.
    pub fn concepts(&self, alias: &str) -> Option<&BTreeSet<String>> {
        self.map.get(&normalize_alias(alias))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Lowercases, collapses whitespace runs to one space and trims.
pub fn normalize_alias(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    concepts: Vec<Concept>,
    alias_table: AliasTable,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KbStats {
    pub n_concepts: usize,
    pub n_aliases: usize,
    pub n_shared_aliases: usize,
    pub bytes_on_disk: u64,
}

impl KnowledgeBase {
    /// Builds a KB, rejecting duplicate ids and empty names. The canonical
    /// name is added to the aliases when no alias normalizes to it, and
    /// aliases that are exact duplicates are dropped.
    pub fn from_concepts(concepts: impl IntoIterator<Item = Concept>) -> Result<Self> {
        let mut kb = KnowledgeBase::default();
        let mut seen = HashSet::new();
        for c in concepts {
            kb.push(c, &mut seen, None)?;
        }
        Ok(kb)
    }

    fn push(
        &mut self,
        mut c: Concept,
        seen: &mut HashSet<String>,
        line: Option<(&str, usize)>,
    ) -> Result<()> {
        let fail = |msg: String| match line {
            Some((path, n)) => Error::parse(path, n, msg),
            None => Error::InvalidDocument(msg),
        };
        if c.concept_id.is_empty() {
            return Err(fail("empty concept_id".into()));
        }
        if c.canonical_name.trim().is_empty() {
            return Err(fail(format!("concept `{}` has an empty canonical_name", c.concept_id)));
        }
        if !seen.insert(c.concept_id.clone()) {
            return Err(Error::DuplicateConcept(c.concept_id));
        }
        let mut surfaces = HashSet::new();
        c.aliases.retain(|a| !a.trim().is_empty() && surfaces.insert(a.clone()));
        let canon = normalize_alias(&c.canonical_name);
        if !c.aliases.iter().any(|a| normalize_alias(a) == canon) {
            c.aliases.insert(0, c.canonical_name.clone());
        }
        for a in &c.aliases {
            self.alias_table.insert(a, &c.concept_id);
        }
        self.concepts.push(c);
        Ok(())
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn alias_table(&self) -> &AliasTable {
        &self.alias_table
    }

    /// Distinct alias surfaces in first-seen order.
    pub fn alias_surfaces(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.concepts
            .iter()
            .flat_map(|c| c.aliases.iter())
            .filter(|a| seen.insert(a.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for c in &self.concepts {
            serde_json::to_writer(&mut w, c)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Counts; `bytes_on_disk` is the size of the JSONL serialization.
    pub fn stats(&self) -> KbStats {
        let mut counter = ByteCounter(0);
        self.write_jsonl(&mut counter)
            .expect("counting writer never fails");
        KbStats {
            n_concepts: self.concepts.len(),
            n_aliases: self.alias_table.len(),
            n_shared_aliases: self.alias_table.map.values().filter(|s| s.len() > 1).count(),
            bytes_on_disk: counter.0,
        }
    }
}

struct ByteCounter(u64);

impl Write for ByteCounter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0 += buf.len() as u64;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Reads a KB from JSONL. Blank lines are skipped.
pub fn read_kb<R: BufRead>(reader: R, origin: &str) -> Result<KnowledgeBase> {
    let mut kb = KnowledgeBase::default();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let concept: Concept = serde_json::from_str(&line)
            .map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        kb.push(concept, &mut seen, Some((origin, line_no)))?;
    }
    Ok(kb)
}

pub fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_kb(BufReader::new(file), &path.display().to_string())
}

/// Concept statistics for a loaded KB.
pub fn kb_stats(kb: &KnowledgeBase) -> KbStats {
    kb.stats()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{"concept_id":"C0242379","canonical_name":"Lung Cancer","aliases":["Lung Cancer","cancer","lung carcinoma"],"types":["T191"],"definition":"A malignant lung neoplasm."}
{"concept_id":"C0006142","canonical_name":"Breast Cancer","aliases":["Breast Cancer","Cancer"],"types":["T191"],"definition":null}
{"concept_id":"C0018839","canonical_name":"Heat shock protein","aliases":["HSP"],"types":["T116"]}
"#;

    fn fixture() -> KnowledgeBase {
        read_kb(FIXTURE.as_bytes(), "fixture").unwrap()
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_alias("  Lung  Cancer "), "lung cancer");
        assert_eq!(normalize_alias("HSP"), "hsp");
        assert_eq!(normalize_alias("a\t\nB"), "a b");
        assert_eq!(normalize_alias(""), "");
    }

    #[test]
    fn shared_alias_maps_to_two_concepts() {
        let kb = fixture();
        let ids = kb.alias_table().concepts("cancer").unwrap();
        assert_eq!(ids.len(), 2);
        assert!(ids.contains("C0242379") && ids.contains("C0006142"));
    }

    #[test]
    fn canonical_name_becomes_alias() {
        let kb = fixture();
        let hsp = &kb.concepts()[2];
        assert_eq!(hsp.aliases, ["Heat shock protein", "HSP"]);
        assert!(kb.alias_table().concepts("heat shock PROTEIN").is_some());
    }

    #[test]
    fn stats() {
        assert_eq!(kb_stats(&KnowledgeBase::default()), KbStats::default());
        let s = kb_stats(&fixture());
        assert_eq!(s.n_concepts, 3);
        // lung cancer, cancer, lung carcinoma, breast cancer, heat shock protein, hsp
        assert_eq!(s.n_aliases, 6);
        assert_eq!(s.n_shared_aliases, 1);
        let mut buf = Vec::new();
        fixture().write_jsonl(&mut buf).unwrap();
        assert_eq!(s.bytes_on_disk, buf.len() as u64);
    }

    #[test]
    fn empty_input_is_empty_kb() {
        let kb = read_kb("".as_bytes(), "empty").unwrap();
        assert!(kb.concepts().is_empty() && kb.alias_table().is_empty());
    }

    #[test]
    fn duplicate_id_rejected() {
        let dup = format!("{FIXTURE}{}\n", FIXTURE.lines().next().unwrap());
        let err = read_kb(dup.as_bytes(), "dup").unwrap_err();
        assert!(matches!(err, Error::DuplicateConcept(ref id) if id == "C0242379"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let bad = format!("{}\n{{not json\n", FIXTURE.lines().next().unwrap());
        let err = read_kb(bad.as_bytes(), "bad.jsonl").unwrap_err();
        assert!(err.to_string().starts_with("bad.jsonl:2:"), "{err}");
    }

    #[test]
    fn save_load_fixed_point() {
        let kb = fixture();
        let mut buf = Vec::new();
        kb.write_jsonl(&mut buf).unwrap();
        let again = read_kb(buf.as_slice(), "buf").unwrap();
        assert_eq!(again, kb);
    }

    #[test]
    fn alias_table_covers_exactly_the_concepts() {
        let kb = fixture();
        let from_table: BTreeSet<&str> = kb
            .alias_table()
            .iter()
            .flat_map(|(_, ids)| ids.iter().map(String::as_str))
            .collect();
        let ids: BTreeSet<&str> = kb.concepts().iter().map(|c| c.concept_id.as_str()).collect();
        assert_eq!(from_table, ids);
    }
}
