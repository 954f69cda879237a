mod commands;
mod stream;

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// How a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag values: exit 1.
    Usage(String),
    /// Unreadable or malformed input: exit 2.
    Data(String),
    /// Downstream closed the pipe; stop quietly.
    BrokenPipe,
}

impl From<bioling::Error> for Failure {
    fn from(e: bioling::Error) -> Self {
        match e {
            bioling::Error::InvalidKList(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "bioling", version, about = "Biomedical text toolkit")]
struct Cli {
    /// Log level: off, error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,

    /// Worker threads for document batches.
    #[arg(long, global = true, default_value = "1")]
    workers: NonZeroUsize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Io {
    /// Input file, `-` for stdin.
    #[arg(long, default_value = "-")]
    pub input: String,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Args, Clone)]
pub struct RuleFiles {
    /// Tokenizer rule file; the built-in rules when absent.
    #[arg(long, env = "BIOLING_RULES")]
    pub rules: Option<PathBuf>,
    /// Segmenter configuration file; the built-in configuration when absent.
    #[arg(long, env = "BIOLING_SEG_CONFIG")]
    pub seg_config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize raw text or JSONL documents.
    Tokenize {
        #[command(flatten)]
        rules: RuleFiles,
        #[command(flatten)]
        io: Io,
    },
    /// Split documents into sentences.
    Segment {
        #[command(flatten)]
        rules: RuleFiles,
        #[command(flatten)]
        io: Io,
    },
    /// Detect abbreviation definitions.
    Abbrev {
        #[command(flatten)]
        rules: RuleFiles,
        #[command(flatten)]
        io: Io,
    },
    /// Inspect a concept knowledge base.
    #[command(subcommand)]
    Kb(KbCommand),
    /// Build alias indexes.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Generate candidate concepts for the `mentions` of each document.
    Link {
        #[arg(long)]
        index: PathBuf,
        /// Nearest alias strings retrieved per mention.
        #[arg(long, default_value = "30")]
        k: NonZeroUsize,
        /// Query with the mention as written, without expanding
        /// abbreviations to their long forms.
        #[arg(long)]
        no_abbrev: bool,
        #[command(flatten)]
        rules: RuleFiles,
        #[command(flatten)]
        io: Io,
    },
    /// Evaluation tools.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Time the pipeline over a corpus of abstracts.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
pub enum KbCommand {
    /// Check that a KB file parses and is consistent.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Print concept and alias counts as JSON.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BackendName {
    Exact,
    Lsh,
}

#[derive(Subcommand)]
pub enum IndexCommand {
    /// Fit the vectorizer on a KB's aliases and write the index.
    Build {
        #[arg(long)]
        kb: PathBuf,
        /// Minimum number of aliases a 3-gram must occur in.
        #[arg(long, default_value = "10")]
        min_df: usize,
        #[arg(long, value_enum, default_value = "exact")]
        backend: BackendName,
        /// LSH hash tables [default: 16].
        #[arg(long)]
        lsh_tables: Option<u32>,
        /// LSH hyperplanes per table [default: 12].
        #[arg(long)]
        lsh_bits: Option<u32>,
        /// Hamming radius of probed LSH buckets, 0 to 2 [default: 2].
        #[arg(long)]
        lsh_probe_radius: Option<u32>,
        /// Seed for the LSH hyperplanes.
        #[arg(long)]
        lsh_seed: Option<u64>,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum EvalCommand {
    /// Gold-concept recall of candidate generation as a CSV curve.
    Recall {
        #[arg(long)]
        index: PathBuf,
        /// JSONL of `{"mention": .., "concept_id": ..}`.
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "1,5,10,25,50,100")]
        k_list: String,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Sentence and abstract accuracy of predicted against gold segmentation.
    Segmentation {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
    },
    /// Build the synthetic citation corpus and report how often sentences
    /// stay whole.
    Citations {
        #[arg(long, default_value = "500")]
        n: usize,
        #[arg(long, default_value = "13")]
        seed: u64,
        /// Citation-free single sentences, one per line.
        #[arg(long)]
        base: PathBuf,
        #[command(flatten)]
        rules: RuleFiles,
        /// Also write the generated sentences here.
        #[arg(long)]
        corpus_out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct BenchArgs {
    /// Abstracts, one per line (raw text or JSONL records).
    #[arg(long)]
    pub input: String,
    #[arg(long, default_value = "tokenize,segment,abbrev")]
    pub stages: String,
    /// Index for the link stage.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long, default_value = "30")]
    pub k: NonZeroUsize,
    #[arg(long, default_value = "3")]
    pub reps: NonZeroUsize,
    #[arg(long, default_value = "1")]
    pub warmup: usize,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub rules: RuleFiles,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let workers = cli.workers.get();
    match cli.command {
        Command::Tokenize { rules, io } => commands::tokenize_cmd(&rules, &io, workers),
        Command::Segment { rules, io } => commands::segment_cmd(&rules, &io, workers),
        Command::Abbrev { rules, io } => commands::abbrev(&rules, &io, workers),
        Command::Kb(cmd) => commands::kb(cmd),
        Command::Index(cmd) => commands::index(cmd),
        Command::Link {
            index,
            k,
            no_abbrev,
            rules,
            io,
        } => commands::link(&index, k, !no_abbrev, &rules, &io, workers),
        Command::Eval(cmd) => commands::eval(cmd, workers),
        Command::Bench(args) => commands::bench(&args, workers),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) | Err(Failure::BrokenPipe) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Run `bioling --help` for usage.");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
