//! Shared fixtures for the acceptance suite: the synthetic relation corpus,
//! binary invocation helpers, and the planted training problem.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use rand::Rng;
use relvec_core::rng;
use relvec_core::trainer::{TrainEntry, TrainingSet};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_relvec")
}

pub fn with_flags<'a>(mut args: Vec<&'a str>, flags: &[&'a str]) -> Vec<&'a str> {
    args.extend_from_slice(flags);
    args
}

/// Run the pipeline binary and panic with its output when it fails.
pub fn run_bin(args: &[&str]) {
    let output = Command::new(bin()).args(args).output().expect("failed to spawn relvec binary");
    if !output.status.success() {
        panic!(
            "relvec {:?} failed with {:?}\nstdout: {}\nstderr: {}",
            args,
            output.status,
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

pub fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("relvec-acceptance-{}", std::process::id())).join(name);
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

/// Synthetic corpus with three relation types, each marked by a dedicated
/// token that appears between related pairs. The marker of relation 0 is
/// additionally injected throughout the noise sentences, making it globally
/// frequent (the stop-word-like case a vector difference cannot capture).
pub struct PlantedCorpus {
    pub text: String,
    pub dataset_tsv: String,
    /// relation name -> (source, target) pairs
    pub relations: Vec<(String, Vec<(String, String)>)>,
    pub frequent_marker_relation: String,
}

pub const PAIRS_PER_RELATION: usize = 40;

pub fn planted_relation_corpus(seed: u64) -> PlantedCorpus {
    let mut rng = rng::stream(seed, "acceptance.planted-corpus");
    let fillers: Vec<String> = (0..57).map(|i| format!("w{i:02}")).collect();
    let markers = ["mka", "mkb", "mkc"];
    let mut relations = Vec::new();
    let mut pair_words = Vec::new();
    for r in 0..3 {
        let pairs: Vec<(String, String)> = (0..PAIRS_PER_RELATION)
            .map(|p| (format!("r{r}s{p:02}"), format!("r{r}t{p:02}")))
            .collect();
        for (s, t) in &pairs {
            pair_words.push(s.clone());
            pair_words.push(t.clone());
        }
        relations.push((format!("rel{r}"), pairs));
    }
    // words the noise draws from: fillers plus every pair word, but never
    // the rare markers
    let noise_words: Vec<&str> = fillers.iter().map(|s| s.as_str()).chain(pair_words.iter().map(|s| s.as_str())).collect();

    let mut sentences: Vec<String> = Vec::new();
    for (r, (_, pairs)) in relations.iter().enumerate() {
        for (s, t) in pairs {
            for _ in 0..5 {
                let lead = fillers[rng.gen_range(0..fillers.len())].clone();
                let tail = fillers[rng.gen_range(0..fillers.len())].clone();
                if r == 0 {
                    // the frequent marker shares the span with a filler, in
                    // either order, so per-span word averages look just like
                    // the noise spans; only the global counts tell them apart
                    let f = &fillers[rng.gen_range(0..fillers.len())];
                    let between = if rng.gen_bool(0.5) { format!("{} {f}", markers[r]) } else { format!("{f} {}", markers[r]) };
                    sentences.push(format!("{lead} {s} {between} {t} {tail}."));
                } else {
                    sentences.push(format!("{lead} {s} {} {t} {tail}.", markers[r]));
                }
            }
        }
    }
    for _ in 0..2600 {
        let mut words: Vec<&str> = (0..8).map(|_| noise_words[rng.gen_range(0..noise_words.len())]).collect();
        // two stop-word-like marker insertions per noise sentence keep mka
        // between arbitrary co-occurring pairs everywhere
        for _ in 0..2 {
            let at = rng.gen_range(1..words.len());
            words.insert(at, "mka");
        }
        sentences.push(format!("{}.", words.join(" ")));
    }
    // deterministic shuffle so relation sentences are spread through the file
    use rand::seq::SliceRandom;
    sentences.shuffle(&mut rng);

    let mut dataset_tsv = String::new();
    for (name, pairs) in &relations {
        for (s, t) in pairs {
            dataset_tsv.push_str(&format!("{name}\t{s}\t{t}\n"));
        }
    }
    PlantedCorpus {
        text: sentences.join(" "),
        dataset_tsv,
        relations,
        frequent_marker_relation: "rel0".to_string(),
    }
}

/// The planted-corpus pipeline artifacts, built once for the whole suite.
pub struct PlantedFixture {
    pub dir: PathBuf,
    pub corpus: PlantedCorpus,
}

pub const PLANTED_FLAGS: [&str; 8] = ["--seed", "17", "--dims", "32", "--epochs", "120", "--min-count", "10"];

static PLANTED: OnceLock<PlantedFixture> = OnceLock::new();

pub fn planted_fixture() -> &'static PlantedFixture {
    PLANTED.get_or_init(|| {
        let dir = scratch_dir("planted");
        let corpus = planted_relation_corpus(5);
        std::fs::write(dir.join("raw.txt"), &corpus.text).expect("write corpus");
        std::fs::write(dir.join("dataset.tsv"), &corpus.dataset_tsv).expect("write dataset");
        let dir_s = dir.to_str().expect("utf-8 temp path");
        let raw = dir.join("raw.txt");
        run_bin(&with_flags(vec!["preprocess", "--input", raw.to_str().unwrap(), "--out-dir", dir_s], &PLANTED_FLAGS));
        run_bin(&with_flags(vec!["count-pairs", "--corpus-dir", dir_s], &PLANTED_FLAGS));
        run_bin(&with_flags(vec!["count-triples", "--corpus-dir", dir_s], &PLANTED_FLAGS));
        run_bin(&with_flags(vec!["train", "--corpus-dir", dir_s], &PLANTED_FLAGS));
        PlantedFixture { dir, corpus }
    })
}

/// Run eval-induction on the planted fixture and return the output path.
pub fn run_planted_induction(featurizer: &str, extra: &[&str], out_name: &str) -> PathBuf {
    let fixture = planted_fixture();
    let dir_s = fixture.dir.to_str().unwrap();
    let dataset = fixture.dir.join("dataset.tsv");
    let out = fixture.dir.join(out_name);
    let mut args = vec![
        "eval-induction",
        "--corpus-dir",
        dir_s,
        "--dataset",
        dataset.to_str().unwrap(),
        "--featurizer",
        featurizer,
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(&PLANTED_FLAGS);
    args.extend_from_slice(extra);
    run_bin(&args);
    out
}

/// Parse the induction TSV: (relation -> [acc, prec, rec, f1], macro row).
pub fn parse_induction_tsv(path: &Path) -> (Vec<(String, [f64; 4])>, [f64; 4]) {
    let text = std::fs::read_to_string(path).expect("read induction tsv");
    let mut rows = Vec::new();
    let mut macro_row = None;
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("relation\t") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 5, "unexpected induction row {line:?}");
        let values: [f64; 4] = [
            cols[1].parse().unwrap(),
            cols[2].parse().unwrap(),
            cols[3].parse().unwrap(),
            cols[4].parse().unwrap(),
        ];
        if cols[0] == "macro" {
            macro_row = Some(values);
        } else {
            rows.push((cols[0].to_string(), values));
        }
    }
    (rows, macro_row.expect("macro row present"))
}

/// Dense rank-d planted regression problem for the recovery criterion.
pub fn planted_training_set(seed: u64, n: usize, d: usize) -> TrainingSet {
    let mut rng = rng::stream(seed, "acceptance.planted-model");
    let scale = (1.5 / (d as f64).sqrt()).sqrt();
    let w: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-scale..scale)).collect();
    let c: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-scale..scale)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let target: f64 = (0..d).map(|t| w[i * d + t] * c[j * d + t]).sum::<f64>() + b[j];
            entries.push(TrainEntry { i: i as u32, j: j as u32, target, count: 100.0 });
        }
    }
    TrainingSet::from_entries(n, entries).expect("planted set")
}

/// One pass/fail line per criterion; failures still panic so cargo reports
/// them.
pub fn criterion<T>(number: usize, name: &str, body: impl FnOnce() -> Result<T, String>) -> T {
    match body() {
        Ok(value) => {
            println!("ACCEPTANCE {number} {name}: PASS");
            value
        }
        Err(msg) => {
            println!("ACCEPTANCE {number} {name}: FAIL ({msg})");
            panic!("acceptance criterion {number} ({name}) failed: {msg}");
        }
    }
}
