use bioling::bench::{parse_stages, run_bench, Pipeline};
use bioling::linker::{build_index, fit_vectorizer, Backend};
use bioling::synth::{synthetic_abstracts, synthetic_kb};
use bioling::{default_biomedical_rules, KParam, SegmenterConfig};

use std::sync::Mutex;

// Timing tests must not overlap with each other.
static SERIAL: Mutex<()> = Mutex::new(());

#[test]
fn doubling_the_corpus_roughly_doubles_the_time() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let kb = synthetic_kb(200, 500, 3);
    let docs: Vec<String> = synthetic_abstracts(&kb, 150, 1_500, 9)
        .into_iter()
        .map(|a| a.text)
        .collect();
    let doubled: Vec<String> = docs.iter().chain(&docs).cloned().collect();
    let rules = default_biomedical_rules();
    let seg = SegmenterConfig::default();
    let p = Pipeline {
        rules: &rules,
        segmenter: &seg,
        index: None,
        k: KParam::new(5).unwrap(),
    };
    let stages = parse_stages("tokenize,segment,abbrev").unwrap();
    // Fastest repetition is the least disturbed by other work on the machine;
    // alternating the two corpora spreads any disturbance over both.
    let fastest = |corpus: &[String]| {
        let r = run_bench(corpus, &stages, 3, 1, 1, &p).unwrap();
        r.rep_wall_ms.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let (mut single, mut double) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..4 {
        single = single.min(fastest(&docs));
        double = double.min(fastest(&doubled));
    }
    let ratio = double / single;
    assert!((1.5..=3.0).contains(&ratio), "ratio {ratio:.2}");
}

#[test]
fn parallel_path_reports_workers_and_cpu_time() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let kb = synthetic_kb(200, 500, 3);
    let index = build_index(&kb, fit_vectorizer(&kb.alias_surfaces(), 2).unwrap(), Backend::Exact).unwrap();
    let docs: Vec<String> = synthetic_abstracts(&kb, 40, 800, 1)
        .into_iter()
        .map(|a| a.text)
        .collect();
    let rules = default_biomedical_rules();
    let seg = SegmenterConfig::default();
    let p = Pipeline {
        rules: &rules,
        segmenter: &seg,
        index: Some((&index, kb.alias_table())),
        k: KParam::new(5).unwrap(),
    };
    let stages = parse_stages("tokenize,segment,abbrev,link").unwrap();
    let r = run_bench(&docs, &stages, 2, 0, 3, &p).unwrap();
    assert_eq!(r.workers, 3);
    assert_eq!(r.rep_wall_ms.len(), 2);
    assert!(r.cpu_ms_per_rep.is_some());
    assert!(r.n_sentences > r.n_docs);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["stages"], serde_json::json!(["tokenize", "segment", "abbrev", "link"]));
}
