//! Stage implementations. Each stage reads the artifacts of earlier stages
//! by path, validates that their headers agree with the resolved
//! configuration, and writes its own artifact with the same config echo.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use relvec_core::cooccur::{self, PairStats, Slot, TripleStats};
use relvec_core::corpus::{self, InvertedIndex, SentenceStore, Vocabulary};
use relvec_core::eval::{self, InductionConfig, PairFeaturizer, RankingConfig};
use relvec_core::measures::{self, SiMeasure, SmoothingConfig};
use relvec_core::oracle;
use relvec_core::relvec::{self, AvgFeaturizer, ConcFeaturizer, DiffFeaturizer, RelationFeaturizer, RelvecConfig};
use relvec_core::trainer::{self, TrainConfig};

use crate::config::RunConfig;
use crate::CliError;

pub const VOCAB_FILE: &str = "vocab.tsv";
pub const CORPUS_FILE: &str = "corpus.enc";
pub const INDEX_FILE: &str = "index.bin";
pub const PAIRS_FILE: &str = "pairs.bin";
pub const TRIPLES_FILE: &str = "triples.bin";
pub const MODEL_FILE: &str = "model.txt";

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn preprocess(cfg: &RunConfig, input: &Path, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("{}: {e}", out_dir.display())))?;
    let bytes = corpus::read_to_bytes(input)?;
    let sentences = corpus::preprocess_bytes(&bytes, &corpus::PreprocessOptions::default())?;
    let vocab = Vocabulary::build(&sentences, cfg.min_count)?;
    let store = corpus::encode_corpus(&sentences, &vocab);
    let index = InvertedIndex::build(&store);
    let echo = cfg.echo_lines();
    vocab.save_tsv(&out_dir.join(VOCAB_FILE), &echo)?;
    store.save(&out_dir.join(CORPUS_FILE), &echo)?;
    index.save(&out_dir.join(INDEX_FILE), store.len(), &echo)?;
    eprintln!(
        "preprocess: {} sentences, vocabulary {} -> {}",
        store.len(),
        vocab.len(),
        out_dir.display()
    );
    Ok(())
}

pub struct LoadedCorpus {
    pub vocab: Vocabulary,
    pub store: SentenceStore,
    pub index: InvertedIndex,
}

fn with_path<T, E: Into<CliError>>(result: Result<T, E>, path: &Path) -> Result<T, CliError> {
    result.map_err(|e| {
        let e = e.into();
        CliError::new(e.code(), format!("{}: {}", path.display(), e.message()))
    })
}

pub fn load_corpus(dir: &Path) -> Result<LoadedCorpus, CliError> {
    let vocab = with_path(Vocabulary::load_tsv(&dir.join(VOCAB_FILE)), &dir.join(VOCAB_FILE))?;
    let store = with_path(SentenceStore::load(&dir.join(CORPUS_FILE)), &dir.join(CORPUS_FILE))?;
    let (index, sentences) = with_path(InvertedIndex::load(&dir.join(INDEX_FILE)), &dir.join(INDEX_FILE))?;
    if store.vocab_size() != vocab.len() {
        return Err(CliError::data(format!(
            "corpus/vocabulary mismatch: {} ids vs {} words",
            store.vocab_size(),
            vocab.len()
        )));
    }
    if sentences != store.len() || index.vocab_size() != vocab.len() {
        return Err(CliError::data("index does not match the encoded corpus"));
    }
    Ok(LoadedCorpus { vocab, store, index })
}

pub fn count_pairs(cfg: &RunConfig, corpus_dir: &Path, out: Option<PathBuf>, tsv: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = load_corpus(corpus_dir)?;
    let stats = cooccur::count_pairs_parallel(&loaded.store, cfg.window, cfg.threads);
    let path = out.unwrap_or_else(|| corpus_dir.join(PAIRS_FILE));
    let mut w = create(&path)?;
    stats.write(&mut w, &cfg.echo_lines())?;
    finish(w, &path)?;
    if let Some(tsv_path) = tsv {
        let mut w = create(&tsv_path)?;
        stats.write_tsv(&mut w, &cfg.echo_lines())?;
        finish(w, &tsv_path)?;
    }
    eprintln!("count-pairs: {} nonzero pairs, total {} -> {}", stats.nnz(), stats.total(), path.display());
    Ok(())
}

pub fn count_triples(cfg: &RunConfig, corpus_dir: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = load_corpus(corpus_dir)?;
    let tstats = cooccur::count_triple_marginals_parallel(&loaded.store, cfg.window, cfg.weighting, cfg.threads);
    let path = out.unwrap_or_else(|| corpus_dir.join(TRIPLES_FILE));
    let mut w = create(&path)?;
    tstats.write(&mut w, &cfg.echo_lines())?;
    finish(w, &path)?;
    let totals: Vec<String> = Slot::ALL.iter().map(|&s| format!("{}={}", s.name(), tstats.slot(s).total)).collect();
    eprintln!("count-triples: totals {} -> {}", totals.join(" "), path.display());
    Ok(())
}

fn load_pairs(cfg: &RunConfig, corpus_dir: &Path, pairs: Option<PathBuf>) -> Result<PairStats, CliError> {
    let path = pairs.unwrap_or_else(|| corpus_dir.join(PAIRS_FILE));
    let stats = with_path(PairStats::load(&path), &path)?;
    if stats.window() != cfg.window {
        return Err(CliError::config(format!(
            "pair counts were built with window {}, config says {}",
            stats.window(),
            cfg.window
        )));
    }
    Ok(stats)
}

fn load_triples(cfg: &RunConfig, corpus_dir: &Path, triples: Option<PathBuf>) -> Result<TripleStats, CliError> {
    let path = triples.unwrap_or_else(|| corpus_dir.join(TRIPLES_FILE));
    let tstats = with_path(TripleStats::load(&path), &path)?;
    if tstats.window() != cfg.window {
        return Err(CliError::config(format!(
            "triple counts were built with window {}, config says {}",
            tstats.window(),
            cfg.window
        )));
    }
    if tstats.weighting() != cfg.weighting {
        return Err(CliError::config(format!(
            "triple counts use {} weighting, config says {}",
            tstats.weighting().name(),
            cfg.weighting.name()
        )));
    }
    Ok(tstats)
}

fn load_model(corpus_dir: &Path, model: Option<PathBuf>, vocab: &Vocabulary) -> Result<trainer::EmbeddingModel, CliError> {
    let path = model.unwrap_or_else(|| corpus_dir.join(MODEL_FILE));
    let (model, words) = with_path(trainer::load_model(&path), &path)?;
    if words.len() != vocab.len() || (0..vocab.len() as u32).any(|i| vocab.word(i) != Some(words[i as usize].as_str())) {
        return Err(CliError::data(format!("model {} was trained on a different vocabulary", path.display())));
    }
    Ok(model)
}

pub fn train(cfg: &RunConfig, corpus_dir: &Path, pairs: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), CliError> {
    let loaded = load_corpus(corpus_dir)?;
    let stats = load_pairs(cfg, corpus_dir, pairs)?;
    if stats.n() != loaded.vocab.len() {
        return Err(CliError::data("pair counts do not match the vocabulary"));
    }
    let csets = trainer::build_context_sets(&stats, cfg.seed);
    let tc = TrainConfig {
        dims: cfg.dims,
        epochs: cfg.epochs,
        alpha: cfg.alpha,
        seed: cfg.seed,
        threads: cfg.threads,
        window: cfg.window,
        ..Default::default()
    };
    let model = trainer::train(&stats, &csets, &tc)?;
    let path = out.unwrap_or_else(|| corpus_dir.join(MODEL_FILE));
    trainer::save_model(&model, &loaded.vocab, &path, &cfg.echo_lines())?;
    eprintln!("train: {} words x {} dims, {} epochs -> {}", model.n(), model.d(), cfg.epochs, path.display());
    Ok(())
}

fn relvec_config(cfg: &RunConfig) -> RelvecConfig {
    RelvecConfig { measure: cfg.measure, alpha: cfg.alpha, lambda: cfg.lambda, blocks: cfg.blocks, seed: cfg.seed }
}

pub fn fit_relation_vectors(
    cfg: &RunConfig,
    corpus_dir: &Path,
    model: Option<PathBuf>,
    triples: Option<PathBuf>,
    pairs_list: &Path,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let loaded = load_corpus(corpus_dir)?;
    let tstats = load_triples(cfg, corpus_dir, triples)?;
    let model = load_model(corpus_dir, model, &loaded.vocab)?;
    let text = std::fs::read_to_string(pairs_list).map_err(|e| CliError::io(format!("{}: {e}", pairs_list.display())))?;
    let rc = relvec_config(cfg);
    let mut reps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let (a, b) = match (words.next(), words.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CliError::format(format!("{}:{}: expected two words", pairs_list.display(), lineno + 1))),
        };
        let resolve = |w: &str| {
            loaded
                .vocab
                .id(w)
                .ok_or_else(|| CliError::data(format!("{}:{}: word {w:?} not in vocabulary", pairs_list.display(), lineno + 1)))
        };
        let (i, k) = (resolve(a)?, resolve(b)?);
        reps.push(relvec::relation_representation(&model, &loaded.store, &loaded.index, &tstats, i, k, &rc)?);
    }
    let path = out.unwrap_or_else(|| corpus_dir.join("relvecs.tsv"));
    relvec::save_relation_vectors(&path, &reps, &loaded.vocab, &cfg.echo_lines())?;
    eprintln!("relvec: {} pairs, measure {} -> {}", reps.len(), cfg.measure.id(), path.display());
    Ok(())
}

pub enum FeaturizerKind {
    Diff,
    Conc,
    Avg,
    Relation(SiMeasure),
}

impl FeaturizerKind {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "diff" => Ok(FeaturizerKind::Diff),
            "conc" => Ok(FeaturizerKind::Conc),
            "avg" => Ok(FeaturizerKind::Avg),
            "r1" | "r2" | "r3" | "r4" => {
                let id = name.as_bytes()[1] - b'0';
                Ok(FeaturizerKind::Relation(SiMeasure::from_id(id).expect("digit checked")))
            }
            other => Err(CliError::usage(format!(
                "unknown featurizer {other:?} (expected diff, conc, avg, r1, r2, r3, r4)"
            ))),
        }
    }

    fn label(&self) -> String {
        match self {
            FeaturizerKind::Diff => "diff".into(),
            FeaturizerKind::Conc => "conc".into(),
            FeaturizerKind::Avg => "avg".into(),
            FeaturizerKind::Relation(m) => format!("r{}", m.id()),
        }
    }
}

struct EvalInputs {
    loaded: LoadedCorpus,
    model: trainer::EmbeddingModel,
    tstats: Option<TripleStats>,
}

fn load_eval_inputs(
    cfg: &RunConfig,
    corpus_dir: &Path,
    model: Option<PathBuf>,
    triples: Option<PathBuf>,
    kind: &FeaturizerKind,
) -> Result<EvalInputs, CliError> {
    let loaded = load_corpus(corpus_dir)?;
    let model = load_model(corpus_dir, model, &loaded.vocab)?;
    let tstats = match kind {
        FeaturizerKind::Relation(_) => Some(load_triples(cfg, corpus_dir, triples)?),
        _ => None,
    };
    Ok(EvalInputs { loaded, model, tstats })
}

fn make_featurizer<'a>(cfg: &RunConfig, kind: &FeaturizerKind, inputs: &'a EvalInputs) -> Box<dyn PairFeaturizer + 'a> {
    match kind {
        FeaturizerKind::Diff => Box::new(DiffFeaturizer { model: &inputs.model }),
        FeaturizerKind::Conc => Box::new(ConcFeaturizer { model: &inputs.model }),
        FeaturizerKind::Avg => Box::new(AvgFeaturizer {
            model: &inputs.model,
            store: &inputs.loaded.store,
            index: &inputs.loaded.index,
            window: cfg.window,
        }),
        FeaturizerKind::Relation(measure) => Box::new(RelationFeaturizer {
            model: &inputs.model,
            store: &inputs.loaded.store,
            index: &inputs.loaded.index,
            tstats: inputs.tstats.as_ref().expect("triples loaded for relation featurizer"),
            cfg: RelvecConfig { measure: *measure, ..relvec_config(cfg) },
        }),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn eval_induction(
    cfg: &RunConfig,
    corpus_dir: &Path,
    model: Option<PathBuf>,
    triples: Option<PathBuf>,
    dataset: &Path,
    featurizer: &str,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let kind = FeaturizerKind::parse(featurizer)?;
    let inputs = load_eval_inputs(cfg, corpus_dir, model, triples, &kind)?;
    let text = std::fs::read_to_string(dataset).map_err(|e| CliError::io(format!("{}: {e}", dataset.display())))?;
    let ds = eval::parse_relation_dataset(&text, &inputs.loaded.vocab);
    if ds.relations.is_empty() {
        return Err(CliError::data("dataset has no in-vocabulary relations"));
    }
    let featurizer_box = make_featurizer(cfg, &kind, &inputs);
    let ecfg = InductionConfig::new(inputs.loaded.vocab.len(), cfg.seed);
    let report = eval::evaluate_induction(&ds, featurizer_box.as_ref(), &ecfg);
    let path = out.unwrap_or_else(|| corpus_dir.join(format!("induction-{}.tsv", kind.label())));
    let mut w = create(&path)?;
    for line in cfg.echo_lines() {
        writeln!(&mut w, "# {line}").map_err(CliError::from_io)?;
    }
    writeln!(&mut w, "# featurizer: {}", kind.label()).map_err(CliError::from_io)?;
    if ds.skipped_pairs > 0 {
        writeln!(&mut w, "# skipped-pairs: {}", ds.skipped_pairs).map_err(CliError::from_io)?;
    }
    writeln!(&mut w, "relation\taccuracy\tprecision\trecall\tf1").map_err(CliError::from_io)?;
    for m in &report.per_relation {
        writeln!(&mut w, "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}", m.name, m.accuracy, m.precision, m.recall, m.f1)
            .map_err(CliError::from_io)?;
    }
    let (acc, prec, rec, f1) = report.macro_metrics();
    writeln!(&mut w, "macro\t{acc:.4}\t{prec:.4}\t{rec:.4}\t{f1:.4}").map_err(CliError::from_io)?;
    for (name, reason) in &report.skipped {
        writeln!(&mut w, "# skipped-relation: {name}: {reason}").map_err(CliError::from_io)?;
    }
    finish(w, &path)?;
    eprintln!(
        "eval-induction: {} relations, macro acc {:.4}, macro f1 {:.4} -> {}",
        report.per_relation.len(),
        acc,
        f1,
        path.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn eval_ranking(
    cfg: &RunConfig,
    corpus_dir: &Path,
    model: Option<PathBuf>,
    triples: Option<PathBuf>,
    dataset: &Path,
    featurizer: &str,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let kind = FeaturizerKind::parse(featurizer)?;
    let inputs = load_eval_inputs(cfg, corpus_dir, model, triples, &kind)?;
    let text = std::fs::read_to_string(dataset).map_err(|e| CliError::io(format!("{}: {e}", dataset.display())))?;
    let ds = eval::parse_ranked_dataset(&text, &inputs.loaded.vocab);
    if ds.relations.is_empty() {
        return Err(CliError::data("dataset has no in-vocabulary relations"));
    }
    let featurizer_box = make_featurizer(cfg, &kind, &inputs);
    let report = eval::evaluate_ranking(&ds, featurizer_box.as_ref(), &RankingConfig::new(cfg.seed));
    let path = out.unwrap_or_else(|| corpus_dir.join(format!("ranking-{}.tsv", kind.label())));
    let mut w = create(&path)?;
    for line in cfg.echo_lines() {
        writeln!(&mut w, "# {line}").map_err(CliError::from_io)?;
    }
    writeln!(&mut w, "# featurizer: {}", kind.label()).map_err(CliError::from_io)?;
    writeln!(&mut w, "relation\tspearman").map_err(CliError::from_io)?;
    for (name, rho) in &report.per_relation {
        writeln!(&mut w, "{name}\t{rho:.4}").map_err(CliError::from_io)?;
    }
    writeln!(&mut w, "macro\t{:.4}", report.mean_spearman()).map_err(CliError::from_io)?;
    for (name, reason) in &report.skipped {
        writeln!(&mut w, "# skipped-relation: {name}: {reason}").map_err(CliError::from_io)?;
    }
    finish(w, &path)?;
    eprintln!(
        "eval-ranking: {} relations, mean rho {:.4} -> {}",
        report.per_relation.len(),
        report.mean_spearman(),
        path.display()
    );
    Ok(())
}

pub fn measures_dump(
    cfg: &RunConfig,
    corpus_dir: &Path,
    triples: Option<PathBuf>,
    pair: &str,
    slot: &str,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let loaded = load_corpus(corpus_dir)?;
    let tstats = load_triples(cfg, corpus_dir, triples)?;
    let slot = Slot::from_name(slot).ok_or_else(|| CliError::usage(format!("unknown slot {slot:?}")))?;
    let (a, b) = pair
        .split_once(',')
        .ok_or_else(|| CliError::usage("pair must be given as word1,word2"))?;
    let resolve = |w: &str| loaded.vocab.id(w).ok_or_else(|| CliError::data(format!("word {w:?} not in vocabulary")));
    let (i, k) = (resolve(a.trim())?, resolve(b.trim())?);
    let slice = cooccur::extract_triple_slice(&loaded.store, &loaded.index, i, k, slot, tstats.window(), tstats.weighting())?;
    let smoothing = SmoothingConfig::new(cfg.alpha, loaded.vocab.len());
    let path = out.unwrap_or_else(|| corpus_dir.join("measures.tsv"));
    let mut w = create(&path)?;
    for line in cfg.echo_lines() {
        writeln!(&mut w, "# {line}").map_err(CliError::from_io)?;
    }
    writeln!(&mut w, "# slot: {}", slot.name()).map_err(CliError::from_io)?;
    writeln!(&mut w, "word_i\tword_j\tword_k\tmeasure\tvalue").map_err(CliError::from_io)?;
    for &(j, _) in slice.entries() {
        for measure in SiMeasure::ALL {
            let value = measures::si(measure, &tstats, &slice, j, &smoothing)?;
            writeln!(
                &mut w,
                "{}\t{}\t{}\t{}\t{value}",
                loaded.vocab.word(i).unwrap_or("?"),
                loaded.vocab.word(j).unwrap_or("?"),
                loaded.vocab.word(k).unwrap_or("?"),
                measure.id()
            )
            .map_err(CliError::from_io)?;
        }
    }
    finish(w, &path)?;
    eprintln!("measures-dump: {} contexts -> {}", slice.entries().len(), path.display());
    Ok(())
}

pub fn selfcheck() -> Result<(), CliError> {
    let mut failures = 0usize;
    let mut run = |name: &str, result: Result<String, String>| match result {
        Ok(detail) => println!("selfcheck {name}: ok ({detail})"),
        Err(e) => {
            failures += 1;
            println!("selfcheck {name}: FAIL ({e})");
        }
    };

    run(
        "counting-oracle",
        oracle::counting_suite(10, 12, 8, 15).map(|n| format!("{n} corpora vs exhaustive enumeration")),
    );
    run(
        "si-identities",
        oracle::si_identity_suite(5, 5).map(|s| format!("{} triples, max residual {:.2e}", s.triples, s.max_residual)),
    );
    run("normalization", {
        let mut detail = String::new();
        let mut err = None;
        for seed in [0u64, 1] {
            let store = oracle::random_corpus(seed, 8, 5, 9);
            let tstats = cooccur::count_triple_marginals(&store, 4, relvec_core::cooccur::TripleWeighting::Distance);
            for slot in Slot::ALL {
                for alpha in [1e-3, 1e-5] {
                    let cfg = SmoothingConfig::new(alpha, store.vocab_size());
                    match measures::normalization_check(&tstats, slot, &cfg) {
                        Ok(v) if (v - 1.0).abs() <= 1e-9 => {}
                        Ok(v) => err = Some(format!("seed {seed} {slot:?} alpha {alpha}: sum {v}")),
                        Err(e) => err = Some(e.to_string()),
                    }
                }
            }
            detail = format!("{} corpora x 3 slots x 2 alphas", seed + 1);
        }
        match err {
            None => Ok(detail),
            Some(e) => Err(e),
        }
    });
    run(
        "spearman-oracle",
        oracle::spearman_suite(20).map(|n| format!("{n} rankings vs definitional ranks")),
    );
    run(
        "ridge-oracle",
        oracle::ridge_suite(10).map(|n| format!("{n} systems vs Gauss-Jordan inverse")),
    );

    if failures > 0 {
        Err(CliError::selfcheck(format!("{failures} suite(s) failed")))
    } else {
        println!("selfcheck: all suites passed");
        Ok(())
    }
}
