use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::num::NonZeroUsize;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use serde::Serialize;

use bioling::bench::{parse_stages, run_bench, Pipeline};
use bioling::evals::{
    load_gold_mentions, make_citation_corpus_detailed, parse_k_list, read_base_sentences,
    recall_at_k, segmentation_accuracy, CitationPosition,
};
use bioling::linker::{Candidate, EmptyReason};
use bioling::records::DocRecord;
use bioling::segmenter::citation_split_rate_with;
use bioling::{
    build_index, expansion_map, find_abbreviations, fit_vectorizer, generate_candidates, load_kb,
    segment, tokenize, AliasIndex, Backend, Document, KParam, LshParams, SegmenterConfig,
    TokenizerRules,
};

use crate::stream::{open_input, open_output, origin, process_lines, write_err};
use crate::{BackendName, BenchArgs, EvalCommand, Failure, IndexCommand, Io, KbCommand, RuleFiles};

fn load_rules(files: &RuleFiles) -> Result<(TokenizerRules, SegmenterConfig), Failure> {
    let rules = match &files.rules {
        Some(p) => TokenizerRules::from_file(p)?,
        None => bioling::default_biomedical_rules(),
    };
    let seg = match &files.seg_config {
        Some(p) => SegmenterConfig::from_file(p)?,
        None => SegmenterConfig::default(),
    };
    Ok((rules, seg))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {workers} workers: {e}")))
}

fn load_index(path: &Path) -> Result<AliasIndex, Failure> {
    let t = Instant::now();
    let index = AliasIndex::load(path)?;
    log::info!(
        "loaded {} ({} aliases, {} backend) in {:.1} ms",
        path.display(),
        index.len(),
        index.backend().name(),
        t.elapsed().as_secs_f64() * 1e3
    );
    Ok(index)
}

/// The document a record describes; records without tokens are tokenized.
fn document_of(rec: &DocRecord, rules: &TokenizerRules) -> Result<Document, String> {
    if rec.tokens.is_empty() {
        Ok(tokenize(&rec.text, rules))
    } else {
        rec.to_document().map_err(|e| e.to_string())
    }
}

/// Like [`document_of`], segmenting when the record has no sentences.
fn segmented_document_of(
    rec: &DocRecord,
    rules: &TokenizerRules,
    seg: &SegmenterConfig,
) -> Result<Document, String> {
    let doc = document_of(rec, rules)?;
    if doc.sentences().is_empty() {
        Ok(segment(doc, seg))
    } else {
        Ok(doc)
    }
}

fn parse(line: &str) -> Result<DocRecord, String> {
    DocRecord::parse_line(line).map_err(|e| e.to_string())
}

pub fn tokenize_cmd(files: &RuleFiles, io: &Io, workers: usize) -> Result<(), Failure> {
    let (rules, _) = load_rules(files)?;
    process_lines(&io.input, &io.output, &pool(workers)?, |_, line| {
        let mut rec = parse(line)?;
        let doc = tokenize(&rec.text, &rules);
        rec.set_document(&doc);
        Ok(vec![rec.to_json()])
    })
}

pub fn segment_cmd(files: &RuleFiles, io: &Io, workers: usize) -> Result<(), Failure> {
    let (rules, seg) = load_rules(files)?;
    process_lines(&io.input, &io.output, &pool(workers)?, |_, line| {
        let mut rec = parse(line)?;
        let doc = segment(document_of(&rec, &rules)?, &seg);
        rec.set_document(&doc);
        Ok(vec![rec.to_json()])
    })
}

pub fn abbrev(files: &RuleFiles, io: &Io, workers: usize) -> Result<(), Failure> {
    let (rules, seg) = load_rules(files)?;
    process_lines(&io.input, &io.output, &pool(workers)?, |_, line| {
        let mut rec = parse(line)?;
        let doc = segmented_document_of(&rec, &rules, &seg)?;
        let pairs = find_abbreviations(&doc);
        rec.set_document(&doc);
        rec.set_abbreviations(&pairs);
        Ok(vec![rec.to_json()])
    })
}

#[derive(Serialize)]
struct LinkRecord<'a> {
    line: usize,
    mention: &'a str,
    start: usize,
    end: usize,
    query_text: &'a str,
    candidates: &'a [Candidate],
    #[serde(skip_serializing_if = "Option::is_none")]
    empty_reason: Option<EmptyReason>,
}

pub fn link(
    index_path: &Path,
    k: NonZeroUsize,
    expand: bool,
    files: &RuleFiles,
    io: &Io,
    workers: usize,
) -> Result<(), Failure> {
    let index = load_index(index_path)?;
    let table = index.alias_table();
    let (rules, seg) = load_rules(files)?;
    let k = KParam::new(k.get()).expect("nonzero");
    let warned = AtomicBool::new(false);
    process_lines(&io.input, &io.output, &pool(workers)?, |n, line| {
        let rec = parse(line)?;
        let Some(mentions) = &rec.mentions else {
            if !warned.swap(true, Ordering::Relaxed) {
                log::warn!("line {n}: document has no `mentions` field; nothing to link");
            }
            return Ok(Vec::new());
        };
        let doc = document_of(&rec, &rules)?;
        let expansion: Option<HashMap<String, String>> = if expand {
            let pairs = match rec.abbreviation_pairs(&doc).map_err(|e| e.to_string())? {
                Some(p) => p,
                None => find_abbreviations(&segmented_document_of(&rec, &rules, &seg)?),
            };
            Some(expansion_map(&pairs))
        } else {
            None
        };
        mentions
            .iter()
            .map(|m| {
                let surface = doc.char_slice(m.start, m.end).ok_or_else(|| {
                    format!("mention span {}..{} is outside the text", m.start, m.end)
                })?;
                let set = generate_candidates(&index, &table, surface, k, expansion.as_ref());
                Ok(serde_json::to_string(&LinkRecord {
                    line: n,
                    mention: surface,
                    start: m.start,
                    end: m.end,
                    query_text: &set.query_text,
                    candidates: &set.candidates,
                    empty_reason: set.empty_reason,
                })
                .expect("link records serialize"))
            })
            .collect()
    })
}

fn print_stdout(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| write_err("-", e))
}

pub fn kb(cmd: KbCommand) -> Result<(), Failure> {
    match cmd {
        KbCommand::Validate { input } => {
            let kb = load_kb(&input)?;
            let s = kb.stats();
            print_stdout(&format!(
                "{}: ok, {} concepts, {} aliases ({} shared)\n",
                input.display(),
                s.n_concepts,
                s.n_aliases,
                s.n_shared_aliases
            ))
        }
        KbCommand::Stats { input } => {
            let kb = load_kb(&input)?;
            let json = serde_json::to_string_pretty(&kb.stats()).expect("stats serialize");
            print_stdout(&format!("{json}\n"))
        }
    }
}

pub fn index(cmd: IndexCommand) -> Result<(), Failure> {
    let IndexCommand::Build {
        kb,
        min_df,
        backend,
        lsh_tables,
        lsh_bits,
        lsh_probe_radius,
        lsh_seed,
        output,
    } = cmd;
    if min_df == 0 {
        return Err(Failure::Usage("--min-df must be at least 1".into()));
    }
    let backend = match backend {
        BackendName::Exact => Backend::Exact,
        BackendName::Lsh => {
            let d = LshParams::default();
            Backend::Lsh(LshParams {
                tables: lsh_tables.unwrap_or(d.tables),
                bits: lsh_bits.unwrap_or(d.bits),
                probe_radius: lsh_probe_radius.unwrap_or(d.probe_radius),
                seed: lsh_seed.unwrap_or(d.seed),
            })
        }
    };
    let t = Instant::now();
    let kb = load_kb(&kb)?;
    let vectorizer = fit_vectorizer(&kb.alias_surfaces(), min_df)?;
    let vocab = vectorizer.vocab_len();
    let index = build_index(&kb, vectorizer, backend).map_err(|e| match e {
        bioling::Error::Backend(m) => Failure::Usage(m),
        e => e.into(),
    })?;
    index.save(&output)?;
    log::info!(
        "wrote {}: {} aliases, {} concepts, {vocab} grams, {} backend, {:.1} s",
        output.display(),
        index.len(),
        kb.concepts().len(),
        backend.name(),
        t.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Reads core_text records, one document per nonblank line.
fn read_documents(path: &Path) -> Result<Vec<Document>, Failure> {
    let name = path.display().to_string();
    let reader = open_input(&name)?;
    let rules = bioling::default_biomedical_rules();
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Failure::Data(format!("{name}:{}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = parse(&line)
            .and_then(|rec| document_of(&rec, &rules))
            .map_err(|e| Failure::Data(format!("{name}:{}: {e}", i + 1)))?;
        docs.push(doc);
    }
    Ok(docs)
}

#[derive(Serialize)]
struct CitationReport {
    n: usize,
    seed: u64,
    intact_rate: f64,
    intact_rate_without_citation_rules: f64,
    adversarial_n: usize,
    adversarial_intact_rate: f64,
    adversarial_intact_rate_without_citation_rules: f64,
}

pub fn eval(cmd: EvalCommand, workers: usize) -> Result<(), Failure> {
    match cmd {
        EvalCommand::Recall {
            index,
            gold,
            k_list,
            output,
        } => {
            let ks = parse_k_list(&k_list)?;
            let index = load_index(&index)?;
            let gold = load_gold_mentions(&gold)?;
            let table = index.alias_table();
            let curve = pool(workers)?.install(|| recall_at_k(&index, &table, &gold, &ks, None))?;
            let mut out = open_output(&output)?;
            out.write_all(curve.to_csv().as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| write_err(&output, e))
        }
        EvalCommand::Segmentation { pred, gold } => {
            let p = read_documents(&pred)?;
            let g = read_documents(&gold)?;
            let scores = segmentation_accuracy(&p, &g).map_err(|e| match e {
                bioling::Error::TextMismatch(i) => Failure::Data(format!(
                    "document {} (0-based) differs between {} and {}",
                    i,
                    pred.display(),
                    gold.display()
                )),
                e => e.into(),
            })?;
            let json = serde_json::to_string_pretty(&scores).expect("scores serialize");
            print_stdout(&format!("{json}\n"))
        }
        EvalCommand::Citations {
            n,
            seed,
            base,
            rules,
            corpus_out,
        } => {
            let (tok_rules, seg) = load_rules(&rules)?;
            let name = base.display().to_string();
            let base_sentences = read_base_sentences(open_input(&name)?, &name)?;
            let corpus = make_citation_corpus_detailed(&base_sentences, seed, n)?;
            if let Some(path) = corpus_out {
                let p = path.display().to_string();
                let mut out = open_output(&p)?;
                for c in &corpus {
                    writeln!(out, "{}", c.text).map_err(|e| write_err(&p, e))?;
                }
                out.flush().map_err(|e| write_err(&p, e))?;
            }
            let texts: Vec<&str> = corpus.iter().map(|c| c.text.as_str()).collect();
            let adversarial: Vec<&str> = corpus
                .iter()
                .filter(|c| c.position == CitationPosition::AfterFinalPunct)
                .map(|c| c.text.as_str())
                .collect();
            let bare = seg.without_citations();
            let rate = |s: &[&str], cfg: &SegmenterConfig| -> Result<f64, Failure> {
                if s.is_empty() {
                    return Ok(f64::NAN);
                }
                Ok(citation_split_rate_with(s, &tok_rules, cfg)?)
            };
            let report = CitationReport {
                n: corpus.len(),
                seed,
                intact_rate: rate(&texts, &seg)?,
                intact_rate_without_citation_rules: rate(&texts, &bare)?,
                adversarial_n: adversarial.len(),
                adversarial_intact_rate: rate(&adversarial, &seg)?,
                adversarial_intact_rate_without_citation_rules: rate(&adversarial, &bare)?,
            };
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            print_stdout(&format!("{json}\n"))
        }
    }
}

pub fn bench(args: &BenchArgs, workers: usize) -> Result<(), Failure> {
    let stages = parse_stages(&args.stages).map_err(|e| Failure::Usage(e.to_string()))?;
    if stages.contains(&bioling::Stage::Link) && args.index.is_none() {
        return Err(Failure::Usage("the link stage needs --index".into()));
    }
    let reader = open_input(&args.input)?;
    let mut corpus = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let at = |e: String| Failure::Data(format!("{}:{}: {e}", origin(&args.input), i + 1));
        let line = line.map_err(|e| at(e.to_string()))?;
        if !line.trim().is_empty() {
            corpus.push(parse(&line).map_err(at)?.text);
        }
    }
    if corpus.is_empty() {
        return Err(Failure::Data(format!("{}: no abstracts", origin(&args.input))));
    }

    let load = Instant::now();
    let (rules, seg) = load_rules(&args.rules)?;
    let index = args.index.as_deref().map(load_index).transpose()?;
    let table = index.as_ref().map(AliasIndex::alias_table);
    let load_ms = load.elapsed().as_secs_f64() * 1e3;

    let pipeline = Pipeline {
        rules: &rules,
        segmenter: &seg,
        index: index.as_ref().zip(table.as_ref()),
        k: KParam::new(args.k.get()).expect("nonzero"),
    };
    let mut report = run_bench(&corpus, &stages, args.reps.get(), args.warmup, workers, &pipeline)?;
    report.load_ms = Some(load_ms);
    if args.json {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        print_stdout(&format!("{json}\n"))
    } else {
        print_stdout(&report.to_table())
    }
}
