//! Wall-clock throughput harness.
//!
//! Timing covers processing only; loading rules, configs and the index
//! happens before `run_bench` is called and is reported separately by the
//! caller through [`BenchReport::load_ms`].

use std::collections::BTreeSet;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::abbrev::{expansion_map, find_abbreviations};
use crate::error::{Error, Result};
use crate::kb::AliasTable;
use crate::linker::{generate_candidates, AliasIndex, KParam};
use crate::segmenter::{segment, SegmenterConfig};
use crate::tokenizer::{tokenize, TokenizerRules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Tokenize,
    Segment,
    Abbrev,
    Link,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Tokenize => "tokenize",
            Stage::Segment => "segment",
            Stage::Abbrev => "abbrev",
            Stage::Link => "link",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tokenize" => Ok(Stage::Tokenize),
            "segment" => Ok(Stage::Segment),
            "abbrev" => Ok(Stage::Abbrev),
            "link" => Ok(Stage::Link),
            other => Err(Error::Bench(format!(
                "unknown stage `{other}` (expected tokenize, segment, abbrev or link)"
            ))),
        }
    }
}

/// Parses `tokenize,segment,...`.
pub fn parse_stages(s: &str) -> Result<BTreeSet<Stage>> {
    let stages = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Stage::from_str)
        .collect::<Result<BTreeSet<_>>>()?;
    if stages.is_empty() {
        return Err(Error::Bench("no stages given".into()));
    }
    Ok(stages)
}

/// Everything the timed loop needs, loaded up front.
pub struct Pipeline<'a> {
    pub rules: &'a TokenizerRules,
    pub segmenter: &'a SegmenterConfig,
    pub index: Option<(&'a AliasIndex, &'a AliasTable)>,
    pub k: KParam,
}

/// Minimum length of a token queried as a mention by the link stage.
pub const MENTION_MIN_CHARS: usize = 4;

/// Runs the selected stages over one document. Tokenization always runs
/// since every later stage consumes tokens. The link stage has no NER in
/// front of it, so it queries every token of at least
/// [`MENTION_MIN_CHARS`] chars containing a letter, plus each detected short
/// form (expanded to its long form). Returns a count that keeps the work
/// observable.
pub fn process_document(text: &str, stages: &BTreeSet<Stage>, p: &Pipeline) -> usize {
    let mut doc = tokenize(text, p.rules);
    let mut work = doc.tokens().len();
    if stages.contains(&Stage::Segment) {
        doc = segment(doc, p.segmenter);
        work += doc.sentences().len();
    }
    let mut pairs = Vec::new();
    if stages.contains(&Stage::Abbrev) || stages.contains(&Stage::Link) {
        pairs = find_abbreviations(&doc);
        work += pairs.len();
    }
    if stages.contains(&Stage::Link) {
        let (index, table) = p.index.expect("checked by run_bench");
        let expansion = expansion_map(&pairs);
        for i in 0..doc.tokens().len() {
            let s = doc.surface(i);
            let is_mention = expansion.contains_key(s)
                || (s.chars().count() >= MENTION_MIN_CHARS && s.chars().any(char::is_alphabetic));
            if is_mention {
                let set = generate_candidates(index, table, s, p.k, Some(&expansion));
                work += set.candidates.len();
            }
        }
    }
    black_box(work)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub stages: Vec<&'static str>,
    pub n_docs: usize,
    pub n_sentences: usize,
    pub reps: usize,
    pub warmup: usize,
    pub workers: usize,
    /// Wall time of each timed repetition over the whole corpus.
    pub rep_wall_ms: Vec<f64>,
    pub total_wall_ms_median: f64,
    pub ms_per_abstract_median: f64,
    pub ms_per_abstract_mean: f64,
    pub ms_per_sentence_median: f64,
    /// User plus system CPU time of the process across all timed
    /// repetitions, divided by `reps`.
    pub cpu_ms_per_rep: Option<f64>,
    /// Time spent loading rules and index; filled in by the caller.
    pub load_ms: Option<f64>,
    pub hardware: String,
}

impl BenchReport {
    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("stages".into(), self.stages.join(",")),
            ("documents".into(), self.n_docs.to_string()),
            ("sentences".into(), self.n_sentences.to_string()),
            ("repetitions".into(), format!("{} (+{} warmup)", self.reps, self.warmup)),
            ("workers".into(), self.workers.to_string()),
            ("total wall (median)".into(), format!("{:.2} ms", self.total_wall_ms_median)),
            ("per abstract (median)".into(), format!("{:.3} ms", self.ms_per_abstract_median)),
            ("per abstract (mean)".into(), format!("{:.3} ms", self.ms_per_abstract_mean)),
            ("per sentence (median)".into(), format!("{:.3} ms", self.ms_per_sentence_median)),
        ];
        if let Some(cpu) = self.cpu_ms_per_rep {
            rows.push(("cpu per repetition".into(), format!("{cpu:.2} ms")));
        }
        if let Some(load) = self.load_ms {
            rows.push(("load (excluded)".into(), format!("{load:.2} ms")));
        }
        rows.push(("hardware".into(), self.hardware.clone()));
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn process_cpu_time() -> Option<Duration> {
    let mut usage = std::mem::MaybeUninit::<libc::rusage>::uninit();
    // SAFETY: getrusage writes a full rusage struct on success.
    let rc = unsafe { libc::getrusage(libc::RUSAGE_SELF, usage.as_mut_ptr()) };
    if rc != 0 {
        return None;
    }
    let u = unsafe { usage.assume_init() };
    let tv = |t: libc::timeval| Duration::new(t.tv_sec as u64, t.tv_usec as u32 * 1000);
    Some(tv(u.ru_utime) + tv(u.ru_stime))
}

/// One-line description of the machine.
pub fn hardware_note() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{cpu}, {threads} hardware threads, {}-{}",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

/// Times `reps` passes of the selected stages over `corpus` after `warmup`
/// untimed passes. `workers == 1` runs on the calling thread; more workers
/// time the parallel batch path on a dedicated pool.
pub fn run_bench<S: AsRef<str> + Sync>(
    corpus: &[S],
    stages: &BTreeSet<Stage>,
    reps: usize,
    warmup: usize,
    workers: usize,
    pipeline: &Pipeline,
) -> Result<BenchReport> {
    if corpus.is_empty() {
        return Err(Error::Bench("empty corpus".into()));
    }
    if stages.is_empty() {
        return Err(Error::Bench("no stages given".into()));
    }
    if reps == 0 {
        return Err(Error::Bench("reps must be at least 1".into()));
    }
    if workers == 0 {
        return Err(Error::Bench("workers must be at least 1".into()));
    }
    if stages.contains(&Stage::Link) && pipeline.index.is_none() {
        return Err(Error::Bench("the link stage needs an index".into()));
    }

    let n_sentences: usize = corpus
        .iter()
        .map(|d| segment(tokenize(d.as_ref(), pipeline.rules), pipeline.segmenter).sentences().len())
        .sum();

    let pool = if workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Bench(e.to_string()))?,
        )
    } else {
        None
    };
    let one_pass = || -> usize {
        match &pool {
            None => corpus
                .iter()
                .map(|d| process_document(d.as_ref(), stages, pipeline))
                .sum(),
            Some(pool) => pool.install(|| {
                corpus
                    .par_iter()
                    .map(|d| process_document(d.as_ref(), stages, pipeline))
                    .sum()
            }),
        }
    };

    for _ in 0..warmup {
        black_box(one_pass());
    }
    let cpu_start = process_cpu_time();
    let mut rep_wall_ms = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        black_box(one_pass());
        rep_wall_ms.push(t.elapsed().as_secs_f64() * 1e3);
    }
    let cpu_ms_per_rep = cpu_start
        .zip(process_cpu_time())
        .map(|(a, b)| (b - a).as_secs_f64() * 1e3 / reps as f64);

    let n = corpus.len() as f64;
    let total_median = median(&rep_wall_ms);
    let mean = rep_wall_ms.iter().sum::<f64>() / reps as f64;
    Ok(BenchReport {
        stages: stages.iter().map(|s| s.name()).collect(),
        n_docs: corpus.len(),
        n_sentences,
        reps,
        warmup,
        workers,
        total_wall_ms_median: total_median,
        ms_per_abstract_median: total_median / n,
        ms_per_abstract_mean: mean / n,
        ms_per_sentence_median: total_median / n_sentences.max(1) as f64,
        rep_wall_ms,
        cpu_ms_per_rep,
        load_ms: None,
        hardware: hardware_note(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::default_biomedical_rules;

    #[test]
    fn stage_parsing() {
        let s = parse_stages("segment,tokenize").unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), [Stage::Tokenize, Stage::Segment]);
        assert!(parse_stages("tokenize,parse").is_err());
        assert!(parse_stages("").is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn smoke_single_doc() {
        let rules = default_biomedical_rules();
        let seg = SegmenterConfig::default();
        let p = Pipeline {
            rules: &rules,
            segmenter: &seg,
            index: None,
            k: KParam::new(5).unwrap(),
        };
        let stages = parse_stages("tokenize").unwrap();
        let r = run_bench(&["Cells were lysed. Proteins were measured."], &stages, 1, 0, 1, &p).unwrap();
        assert_eq!(r.n_docs, 1);
        assert_eq!(r.n_sentences, 2);
        assert!(r.ms_per_abstract_median > 0.0);
        assert!(r.to_table().contains("per abstract"));
    }

    #[test]
    fn link_without_index_is_an_error() {
        let rules = default_biomedical_rules();
        let seg = SegmenterConfig::default();
        let p = Pipeline {
            rules: &rules,
            segmenter: &seg,
            index: None,
            k: KParam::new(5).unwrap(),
        };
        let stages = parse_stages("tokenize,link").unwrap();
        assert!(matches!(run_bench(&["x"], &stages, 1, 0, 1, &p), Err(Error::Bench(_))));
    }
}
