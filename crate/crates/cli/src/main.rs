//! Batch pipeline driver: raw text to vocabulary, co-occurrence statistics,
//! embeddings, relation vectors and evaluation tables, each stage a
//! subcommand reading the previous stage's artifacts.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigFlags, RunConfig};

#[derive(Parser)]
#[command(name = "relvec", version, about = "Corpus-to-vectors pipeline: PMI embeddings and global relation vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: ConfigFlags,
}

#[derive(Subcommand)]
enum Command {
    /// Segment, clean and encode raw text; writes vocab.tsv, corpus.enc, index.bin
    Preprocess {
        /// Raw UTF-8 text file
        #[arg(long)]
        input: PathBuf,
        /// Output directory for corpus artifacts
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Count distance-weighted pair co-occurrences
    CountPairs {
        #[arg(long)]
        corpus_dir: PathBuf,
        /// Output file (default: `<corpus-dir>/pairs.bin`)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export the counts as TSV
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Precompute per-slot triple marginals
    CountTriples {
        #[arg(long)]
        corpus_dir: PathBuf,
        /// Output file (default: `<corpus-dir>/triples.bin`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the embedding on pair statistics
    Train {
        #[arg(long)]
        corpus_dir: PathBuf,
        /// Pair counts file (default: `<corpus-dir>/pairs.bin`)
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Output model file (default: `<corpus-dir>/model.txt`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit relation vectors for a list of word pairs
    Relvec {
        #[arg(long)]
        corpus_dir: PathBuf,
        /// Model file (default: `<corpus-dir>/model.txt`)
        #[arg(long)]
        model: Option<PathBuf>,
        /// Triple marginals file (default: `<corpus-dir>/triples.bin`)
        #[arg(long)]
        triples: Option<PathBuf>,
        /// File with one "word1 word2" pair per line
        #[arg(long)]
        pairs_list: PathBuf,
        /// Output TSV (default: `<corpus-dir>/relvecs.tsv`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Relation-induction benchmark (10-fold CV, generated negatives)
    EvalInduction {
        #[arg(long)]
        corpus_dir: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        triples: Option<PathBuf>,
        /// Relation dataset (sectioned or TSV)
        #[arg(long)]
        dataset: PathBuf,
        /// diff | conc | avg | r1 | r2 | r3 | r4
        #[arg(long)]
        featurizer: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prototypicality-ranking benchmark (Spearman rho)
    EvalRanking {
        #[arg(long)]
        corpus_dir: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        triples: Option<PathBuf>,
        /// Ranked dataset TSV: relation, source, target, score
        #[arg(long)]
        dataset: PathBuf,
        /// diff | conc | avg | r1 | r2 | r3 | r4
        #[arg(long)]
        featurizer: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump SI measure values for one ordered pair as TSV
    MeasuresDump {
        #[arg(long)]
        corpus_dir: PathBuf,
        #[arg(long)]
        triples: Option<PathBuf>,
        /// Ordered pair as "word1,word2"
        #[arg(long)]
        pair: String,
        /// between | before | after
        #[arg(long, default_value = "between")]
        slot: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the brute-force oracle suites on built-in tiny corpora
    Selfcheck,
}

/// One-line machine-parsable failures: `error: <CODE>: <message>`.
#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Self::new("E_USAGE", msg)
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self::new("E_IO", msg)
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Self::new("E_FORMAT", msg)
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::new("E_CONFIG", msg)
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self::new("E_DATA", msg)
    }

    pub fn selfcheck(msg: impl Into<String>) -> Self {
        Self::new("E_SELFCHECK", msg)
    }

    pub fn from_io(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }

    pub fn code(&self) -> &'static str {
        self.code
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl From<relvec_core::files::FileError> for CliError {
    fn from(e: relvec_core::files::FileError) -> Self {
        use relvec_core::files::FileError::*;
        match e {
            Io(err) => CliError::io(err.to_string()),
            other => CliError::format(other.to_string()),
        }
    }
}

impl From<relvec_core::corpus::CorpusError> for CliError {
    fn from(e: relvec_core::corpus::CorpusError) -> Self {
        use relvec_core::corpus::CorpusError::*;
        match e {
            File(err) => err.into(),
            InvalidUtf8 { .. } => CliError::format(e.to_string()),
            InvalidMinCount(_) => CliError::config(e.to_string()),
            other => CliError::data(other.to_string()),
        }
    }
}

impl From<relvec_core::cooccur::CooccurError> for CliError {
    fn from(e: relvec_core::cooccur::CooccurError) -> Self {
        use relvec_core::cooccur::CooccurError::*;
        match e {
            File(err) => err.into(),
            Corpus(err) => err.into(),
            IdenticalPair(_) => CliError::data(e.to_string()),
        }
    }
}

impl From<relvec_core::measures::MeasureError> for CliError {
    fn from(e: relvec_core::measures::MeasureError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<relvec_core::trainer::TrainError> for CliError {
    fn from(e: relvec_core::trainer::TrainError) -> Self {
        use relvec_core::trainer::TrainError::*;
        match e {
            File(err) => err.into(),
            BadAlpha(_) => CliError::config(e.to_string()),
            other => CliError::data(other.to_string()),
        }
    }
}

impl From<relvec_core::relvec::RelvecError> for CliError {
    fn from(e: relvec_core::relvec::RelvecError) -> Self {
        use relvec_core::relvec::RelvecError::*;
        match e {
            File(err) => err.into(),
            Cooccur(err) => err.into(),
            Measure(err) => err.into(),
            other => CliError::data(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Preprocess { input, out_dir } => commands::preprocess(&cfg, &input, &out_dir),
        Command::CountPairs { corpus_dir, out, tsv } => commands::count_pairs(&cfg, &corpus_dir, out, tsv),
        Command::CountTriples { corpus_dir, out } => commands::count_triples(&cfg, &corpus_dir, out),
        Command::Train { corpus_dir, pairs, out } => commands::train(&cfg, &corpus_dir, pairs, out),
        Command::Relvec { corpus_dir, model, triples, pairs_list, out } => {
            commands::fit_relation_vectors(&cfg, &corpus_dir, model, triples, &pairs_list, out)
        }
        Command::EvalInduction { corpus_dir, model, triples, dataset, featurizer, out } => {
            commands::eval_induction(&cfg, &corpus_dir, model, triples, &dataset, &featurizer, out)
        }
        Command::EvalRanking { corpus_dir, model, triples, dataset, featurizer, out } => {
            commands::eval_ranking(&cfg, &corpus_dir, model, triples, &dataset, &featurizer, out)
        }
        Command::MeasuresDump { corpus_dir, triples, pair, slot, out } => {
            commands::measures_dump(&cfg, &corpus_dir, triples, &pair, &slot, out)
        }
        Command::Selfcheck => commands::selfcheck(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.code(), e.message());
            ExitCode::from(1)
        }
    }
}
