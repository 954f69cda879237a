use std::time::Instant;

use proptest::prelude::*;

use bioling::segmenter::bracket_delta;
use bioling::{
    default_biomedical_rules, detokenize, find_abbreviations, segment, tokenize, Document,
    SegmenterConfig,
};

fn run(text: &str) -> Document {
    segment(tokenize(text, &default_biomedical_rules()), &SegmenterConfig::default())
}

const WORDS: &[&str] = &[
    "Mice", "were", "treated", "with", "IL-2", "(", ")", "[3]", "(Smith et al., 2002)", "e.g.",
    "Fig.", "2.5", "p<0.05", "cells.", "Results", "improved.", "Why?", "The", "protein", "[",
    "]", "β-catenin", "10%", "vs.", "!", "The end.", "Tumour", "growth", "was", "slowed.",
];

fn sentence_text() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(prop::sample::select(WORDS), 0..60),
        prop::collection::vec(prop::sample::select(&[" ", " ", "  ", "\n", ""][..]), 60),
    )
        .prop_map(|(words, seps)| {
            let mut s = String::new();
            for (w, sep) in words.iter().zip(seps) {
                s.push_str(w);
                s.push_str(sep);
            }
            s
        })
}

proptest! {
    #[test]
    fn tokenize_round_trips(s in any::<String>()) {
        let doc = tokenize(&s, &default_biomedical_rules());
        prop_assert_eq!(detokenize(&doc), s);
        prop_assert!(doc.check_invariants().is_ok());
    }

    #[test]
    fn tokens_hold_no_whitespace(s in "[ a-zA-Z0-9.,;:()\\[\\]%<>=/βα\t\n-]{0,80}") {
        let doc = tokenize(&s, &default_biomedical_rules());
        for i in 0..doc.tokens().len() {
            let t = doc.surface(i);
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(char::is_whitespace), "{:?}", t);
            prop_assert!(doc.trailing_ws(i).chars().all(char::is_whitespace));
        }
    }

    #[test]
    fn sentences_partition_the_tokens(s in sentence_text()) {
        let doc = run(&s);
        prop_assert!(doc.check_invariants().is_ok());
        let n = doc.tokens().len();
        let spans = doc.sentences();
        if n == 0 {
            prop_assert!(spans.is_empty());
        } else {
            prop_assert_eq!(spans[0].first_token, 0);
            prop_assert_eq!(spans.last().unwrap().last_token, n - 1);
            for w in spans.windows(2) {
                prop_assert_eq!(w[0].last_token + 1, w[1].first_token);
            }
        }
        prop_assert_eq!(detokenize(&doc), s);
    }

    #[test]
    fn no_boundary_inside_open_brackets(s in sentence_text()) {
        let doc = run(&s);
        let mut depth = 0i32;
        let mut ends = doc.sentences().iter().map(|s| s.last_token).peekable();
        for i in 0..doc.tokens().len() {
            depth = (depth + bracket_delta(doc.surface(i))).max(0);
            if ends.peek() == Some(&i) {
                ends.next();
                if i + 1 < doc.tokens().len() {
                    prop_assert_eq!(depth, 0, "boundary after token {} in {:?}", i, s);
                }
            }
        }
    }

    #[test]
    fn abbreviation_pairs_satisfy_the_matching_rules(
        long in prop::collection::vec("[a-z]{2,9}", 1..5),
        pre in prop::collection::vec("[a-z]{1,7}", 0..4),
        upper in any::<bool>(),
        mirrored in any::<bool>(),
    ) {
        let long_form = long.join(" ");
        let mut short: String = long.iter().map(|w| w.chars().next().unwrap()).collect();
        if upper {
            short = short.to_uppercase();
        }
        let text = if mirrored {
            format!("{} {short} ({long_form}) was seen.", pre.join(" "))
        } else {
            format!("{} {long_form} ({short}) was seen.", pre.join(" "))
        };
        let doc = run(text.trim_start());
        for p in find_abbreviations(&doc) {
            let sf = &p.short_form.surface;
            let lf = &p.long_form.surface;
            prop_assert_eq!(doc.char_slice(p.short_form.start, p.short_form.end), Some(sf.as_str()));
            prop_assert_eq!(doc.char_slice(p.long_form.start, p.long_form.end), Some(lf.as_str()));
            prop_assert!(independent_match(sf, lf), "{} / {}", sf, lf);
            prop_assert!(lf.chars().count() > sf.chars().count());
        }
    }
}

/// Greedy left-to-right check that the short form's letters and digits occur
/// in order in the long form, the first one at a word start.
fn independent_match(short: &str, long: &str) -> bool {
    let sf: Vec<char> = short
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric())
        .collect();
    let lf: Vec<char> = long.to_lowercase().chars().collect();
    let Some(&first) = sf.first() else { return false };
    (0..lf.len())
        .filter(|&i| lf[i] == first && (i == 0 || !lf[i - 1].is_alphanumeric()))
        .any(|start| {
            let mut rest = sf[1..].iter().peekable();
            for &c in &lf[start + 1..] {
                if rest.peek() == Some(&&c) {
                    rest.next();
                }
            }
            rest.peek().is_none()
        })
}

#[test]
fn tokenizer_time_grows_linearly() {
    let rules = default_biomedical_rules();
    let unit = "Expression of IL-2 (interleukin-2) rose 2.5-fold (p<0.05) in 1,000 mice [3]; e.g. Fig. 2. ";
    let small = unit.repeat(4_000);
    let large = small.repeat(2);
    let best = |text: &str| {
        (0..5)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(tokenize(text, &rules));
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    best(&small);
    let (a, b) = (best(&small), best(&large));
    assert!(b <= 2.5 * a, "2n took {b:.4}s, n took {a:.4}s");
}

#[test]
fn long_unbroken_runs_tokenize_quickly() {
    // A single whitespace-free run exercises the exception lookups.
    let s = "a.".repeat(50_000);
    let t = Instant::now();
    let doc = tokenize(&s, &default_biomedical_rules());
    assert_eq!(detokenize(&doc), s);
    assert!(t.elapsed().as_secs_f64() < 2.0);
}
