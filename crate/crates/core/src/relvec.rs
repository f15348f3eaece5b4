//! Relation vectors for ordered word pairs.
//!
//! For a pair (i, k) and one slot, a vector r is fitted so that
//! r . w~_j + b~_j approximates SI(i, j, k) over a sampled context set,
//! with the context vectors and biases frozen at their trained values. That
//! makes each fit an exact linear least squares problem (a small ridge keeps
//! rank-deficient systems solvable). The full representation concatenates
//! the six slot/order vectors with the two word vectors.
//!
//! The 1/sigma_j^2 factor from embedding training is deliberately absent
//! here: high-variance contexts (such as function words) can be exactly the
//! evidence a relation needs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::cooccur::{extract_triple_slice, CooccurError, Slot, TripleSlice, TripleStats};
use crate::corpus::{InvertedIndex, SentenceStore, Vocabulary};
use crate::eval::PairFeaturizer;
use crate::files::FileError;
use crate::measures::{si, MeasureError, SiMeasure, SmoothingConfig};
use crate::rng;
use crate::solve::{RidgeProblem, SolveError};
use crate::trainer::EmbeddingModel;

#[derive(Debug, Error)]
pub enum RelvecError {
    #[error("relation representations are undefined for identical words (id {0})")]
    IdenticalPair(u32),
    #[error(transparent)]
    Cooccur(#[from] CooccurError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("singular relation fit; use lambda > 0")]
    Solve(#[from] SolveError),
    #[error(transparent)]
    File(#[from] FileError),
}

/// Which blocks make up the concatenated representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMode {
    /// r_ik, r_ki, s_ik, s_ki, t_ik, t_ki, w_i, w_k (8 blocks)
    Full,
    /// r_ik, r_ki, w_i, w_k (4 blocks; the no-before/after ablation)
    BetweenOnly,
}

impl BlockMode {
    pub fn blocks(self) -> usize {
        match self {
            BlockMode::Full => 8,
            BlockMode::BetweenOnly => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockMode::Full => "full",
            BlockMode::BetweenOnly => "between-only",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "full" => Some(BlockMode::Full),
            "between-only" => Some(BlockMode::BetweenOnly),
            _ => None,
        }
    }
}

/// Settings for relation-vector fitting. Window and position weighting are
/// taken from the triple statistics so slices and marginals always share an
/// event space.
#[derive(Debug, Clone)]
pub struct RelvecConfig {
    pub measure: SiMeasure,
    pub alpha: f64,
    pub lambda: f64,
    pub blocks: BlockMode,
    pub seed: u64,
}

impl Default for RelvecConfig {
    fn default() -> Self {
        RelvecConfig { measure: SiMeasure::Si2, alpha: 1e-5, lambda: 1e-6, blocks: BlockMode::Full, seed: 1 }
    }
}

/// Sampled context set with SI targets for one ordered pair and slot.
#[derive(Debug, Clone)]
pub struct RelationContextSet {
    pub i: u32,
    pub k: u32,
    pub slot: Slot,
    members: Vec<(u32, f64)>,
    n_positive: usize,
}

impl RelationContextSet {
    /// Assemble a context set from explicit (context, target) members, e.g.
    /// for solver cross-checks or externally computed targets.
    pub fn from_members(i: u32, k: u32, slot: Slot, members: Vec<(u32, f64)>) -> Self {
        let n_positive = members.len();
        RelationContextSet { i, k, slot, members, n_positive }
    }

    pub fn members(&self) -> &[(u32, f64)] {
        &self.members
    }

    pub fn n_positive(&self) -> usize {
        self.n_positive
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn slot_index(slot: Slot) -> u64 {
    match slot {
        Slot::Between => 0,
        Slot::Before => 1,
        Slot::After => 2,
    }
}

/// Positives are every context with y_ijk > 0; negatives are
/// min(2 |positives|, |zeros|) contexts sampled uniformly from the
/// zero-count words. SI targets are smoothed, so they are defined for the
/// negatives too. An empty slice yields an empty set.
pub fn build_relation_context_set(
    slice: &TripleSlice,
    tstats: &TripleStats,
    measure: SiMeasure,
    cfg: &SmoothingConfig,
    seed: u64,
) -> Result<RelationContextSet, RelvecError> {
    let n = tstats.n();
    let positives: Vec<u32> = slice.entries().iter().map(|&(j, _)| j).collect();
    let mut members: Vec<u32> = positives.clone();
    if !positives.is_empty() {
        let mut zeros: Vec<u32> = Vec::with_capacity(n - positives.len());
        let mut pos_iter = positives.iter().peekable();
        for j in 0..n as u32 {
            if pos_iter.peek() == Some(&&j) {
                pos_iter.next();
            } else {
                zeros.push(j);
            }
        }
        let wanted = (2 * positives.len()).min(zeros.len());
        let mut rng = rng::stream_n(seed, "relvec.context-set", &[slice.i as u64, slice.k as u64, slot_index(slice.slot)]);
        let (sampled, _) = zeros.partial_shuffle(&mut rng, wanted);
        members.extend_from_slice(sampled);
        members.sort_unstable();
    }
    let targets = members
        .into_iter()
        .map(|j| si(measure, tstats, slice, j, cfg).map(|v| (j, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RelationContextSet { i: slice.i, k: slice.k, slot: slice.slot, members: targets, n_positive: positives.len() })
}

/// A fitted relation vector; `empty_evidence` flags the zero vector returned
/// for pairs with no observed contexts.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub vector: Vec<f64>,
    pub empty_evidence: bool,
}

/// Solve min_r sum_{j in J} (r . w~_j + b~_j - SI_j)^2 + lambda |r|^2
/// via the normal equations.
pub fn fit_relation_vector(model: &EmbeddingModel, rcs: &RelationContextSet, lambda: f64) -> Result<FitOutcome, RelvecError> {
    if rcs.is_empty() {
        if lambda > 0.0 {
            return Ok(FitOutcome { vector: vec![0.0; model.d()], empty_evidence: true });
        }
        return Err(RelvecError::Solve(SolveError::Singular));
    }
    let mut prob = RidgeProblem::new(model.d());
    for &(j, target) in rcs.members() {
        prob.add_row(model.ctx_vec(j), target - model.bias(j));
    }
    Ok(FitOutcome { vector: prob.solve(lambda)?, empty_evidence: false })
}

/// Concatenated relation representation for an ordered pair.
#[derive(Debug, Clone)]
pub struct RelationRepresentation {
    pub i: u32,
    pub k: u32,
    pub measure: SiMeasure,
    pub block_mode: BlockMode,
    d: usize,
    vector: Vec<f64>,
}

impl RelationRepresentation {
    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// One block of the concatenation, by position.
    pub fn block(&self, idx: usize) -> &[f64] {
        &self.vector[idx * self.d..(idx + 1) * self.d]
    }

    pub fn blocks(&self) -> usize {
        self.block_mode.blocks()
    }
}

fn fitted_slot_vector(
    model: &EmbeddingModel,
    store: &SentenceStore,
    index: &InvertedIndex,
    tstats: &TripleStats,
    (first, second, slot): (u32, u32, Slot),
    cfg: &RelvecConfig,
) -> Result<Vec<f64>, RelvecError> {
    let slice = extract_triple_slice(store, index, first, second, slot, tstats.window(), tstats.weighting())?;
    let smoothing = SmoothingConfig::new(cfg.alpha, tstats.n());
    let rcs = build_relation_context_set(&slice, tstats, cfg.measure, &smoothing, cfg.seed)?;
    Ok(fit_relation_vector(model, &rcs, cfg.lambda)?.vector)
}

/// Fit all slot/order vectors for (i, k) and concatenate them with the word
/// vectors. Missing-evidence blocks are exact zero vectors.
pub fn relation_representation(
    model: &EmbeddingModel,
    store: &SentenceStore,
    index: &InvertedIndex,
    tstats: &TripleStats,
    i: u32,
    k: u32,
    cfg: &RelvecConfig,
) -> Result<RelationRepresentation, RelvecError> {
    if i == k {
        return Err(RelvecError::IdenticalPair(i));
    }
    let d = model.d();
    let slots: &[(u32, u32, Slot)] = match cfg.blocks {
        BlockMode::Full => &[
            (i, k, Slot::Between),
            (k, i, Slot::Between),
            (i, k, Slot::Before),
            (k, i, Slot::Before),
            (i, k, Slot::After),
            (k, i, Slot::After),
        ],
        BlockMode::BetweenOnly => &[(i, k, Slot::Between), (k, i, Slot::Between)],
    };
    let mut vector = Vec::with_capacity(cfg.blocks.blocks() * d);
    for &task in slots {
        vector.extend(fitted_slot_vector(model, store, index, tstats, task, cfg)?);
    }
    vector.extend_from_slice(model.word_vec(i));
    vector.extend_from_slice(model.word_vec(k));
    Ok(RelationRepresentation { i, k, measure: cfg.measure, block_mode: cfg.blocks, d, vector })
}

/// Vector-difference baseline w_k - w_i.
pub fn baseline_diff(model: &EmbeddingModel, i: u32, k: u32) -> Vec<f64> {
    model.word_vec(k).iter().zip(model.word_vec(i)).map(|(a, b)| a - b).collect()
}

/// Concatenation baseline [w_i ; w_k].
pub fn baseline_conc(model: &EmbeddingModel, i: u32, k: u32) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * model.d());
    v.extend_from_slice(model.word_vec(i));
    v.extend_from_slice(model.word_vec(k));
    v
}

fn averaged_slot_vector(
    model: &EmbeddingModel,
    store: &SentenceStore,
    index: &InvertedIndex,
    first: u32,
    second: u32,
    slot: Slot,
    window: usize,
) -> Result<Vec<f64>, RelvecError> {
    let d = model.d();
    let mut total = vec![0.0; d];
    let mut sentences_used = 0usize;
    for sid in index.sentences_with_pair(first, second).map_err(CooccurError::Corpus)? {
        let sentence = store.sentence(sid);
        let len = sentence.len();
        let mut sum = vec![0.0; d];
        let mut count = 0usize;
        for (pi, &tp) in sentence.iter().enumerate() {
            if tp != first {
                continue;
            }
            let p = pi + 1;
            for (ri, &tr) in sentence.iter().enumerate() {
                let r = ri + 1;
                if tr != second || p >= r || r - p > window {
                    continue;
                }
                let (lo, hi) = match slot {
                    Slot::Between => (p + 1, r.saturating_sub(1)),
                    Slot::Before => (if p > window { p - window } else { 1 }, p.saturating_sub(1)),
                    Slot::After => (r + 1, (r + window).min(len)),
                };
                for q in lo..=hi.min(len) {
                    let vec = model.word_vec(sentence[q - 1]);
                    for (s, v) in sum.iter_mut().zip(vec) {
                        *s += v;
                    }
                    count += 1;
                }
            }
        }
        if count > 0 {
            for (t, s) in total.iter_mut().zip(&sum) {
                *t += s / count as f64;
            }
            sentences_used += 1;
        }
    }
    if sentences_used > 0 {
        for t in &mut total {
            *t /= sentences_used as f64;
        }
    }
    Ok(total)
}

/// Word-vector averaging baseline: per slot and order, average the target
/// vectors of the slot's context words within each sentence, then across
/// sentences; concatenate with w_i and w_k (8 blocks).
pub fn baseline_avg(
    model: &EmbeddingModel,
    store: &SentenceStore,
    index: &InvertedIndex,
    i: u32,
    k: u32,
    window: usize,
) -> Result<Vec<f64>, RelvecError> {
    if i == k {
        return Err(RelvecError::IdenticalPair(i));
    }
    let mut vector = Vec::with_capacity(8 * model.d());
    for (first, second, slot) in [
        (i, k, Slot::Between),
        (k, i, Slot::Between),
        (i, k, Slot::Before),
        (k, i, Slot::Before),
        (i, k, Slot::After),
        (k, i, Slot::After),
    ] {
        vector.extend(averaged_slot_vector(model, store, index, first, second, slot, window)?);
    }
    vector.extend_from_slice(model.word_vec(i));
    vector.extend_from_slice(model.word_vec(k));
    Ok(vector)
}

/// TSV rows `word_i<TAB>word_k<TAB>measure<TAB>v1 ... v8d`.
pub fn write_relation_vectors<W: Write>(
    w: &mut W,
    reps: &[RelationRepresentation],
    vocab: &Vocabulary,
    echo: &[String],
) -> Result<(), RelvecError> {
    for line in echo {
        writeln!(w, "# {line}").map_err(FileError::Io)?;
    }
    for rep in reps {
        let wi = vocab.word(rep.i).unwrap_or("?");
        let wk = vocab.word(rep.k).unwrap_or("?");
        write!(w, "{wi}\t{wk}\t{}\t", rep.measure.id()).map_err(FileError::Io)?;
        for (idx, v) in rep.vector().iter().enumerate() {
            if idx > 0 {
                write!(w, " ").map_err(FileError::Io)?;
            }
            write!(w, "{}", crate::files::fmt_f64(*v)).map_err(FileError::Io)?;
        }
        writeln!(w).map_err(FileError::Io)?;
    }
    Ok(())
}

/// Row of a relation-vector file: word_i, word_k, measure id, vector.
pub type RelationVectorRow = (String, String, u8, Vec<f64>);

/// Parse rows written by [`write_relation_vectors`].
pub fn read_relation_vectors<R: BufRead>(r: &mut R) -> Result<Vec<RelationVectorRow>, RelvecError> {
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(FileError::Io)?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let mut parse = |what: &'static str| {
            cols.next().ok_or_else(|| FileError::parse("relation-vectors", lineno + 1, format!("missing {what} column")))
        };
        let wi = parse("word_i")?.to_string();
        let wk = parse("word_k")?.to_string();
        let measure: u8 = parse("measure")?
            .parse()
            .map_err(|_| FileError::parse("relation-vectors", lineno + 1, "bad measure id"))?;
        let values = parse("vector")?
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| FileError::parse("relation-vectors", lineno + 1, "bad vector value"))?;
        out.push((wi, wk, measure, values));
    }
    Ok(out)
}

pub fn save_relation_vectors(path: &Path, reps: &[RelationRepresentation], vocab: &Vocabulary, echo: &[String]) -> Result<(), RelvecError> {
    let mut w = BufWriter::new(File::create(path).map_err(FileError::Io)?);
    write_relation_vectors(&mut w, reps, vocab, echo)
}

pub fn load_relation_vectors(path: &Path) -> Result<Vec<RelationVectorRow>, RelvecError> {
    read_relation_vectors(&mut BufReader::new(File::open(path).map_err(FileError::Io)?))
}

/// Featurizers plugging the representations into the evaluation harnesses.
pub struct DiffFeaturizer<'a> {
    pub model: &'a EmbeddingModel,
}

impl PairFeaturizer for DiffFeaturizer<'_> {
    fn dim(&self) -> usize {
        self.model.d()
    }

    fn features(&self, i: u32, k: u32) -> Result<Vec<f64>, String> {
        Ok(baseline_diff(self.model, i, k))
    }
}

pub struct ConcFeaturizer<'a> {
    pub model: &'a EmbeddingModel,
}

impl PairFeaturizer for ConcFeaturizer<'_> {
    fn dim(&self) -> usize {
        2 * self.model.d()
    }

    fn features(&self, i: u32, k: u32) -> Result<Vec<f64>, String> {
        Ok(baseline_conc(self.model, i, k))
    }
}

pub struct AvgFeaturizer<'a> {
    pub model: &'a EmbeddingModel,
    pub store: &'a SentenceStore,
    pub index: &'a InvertedIndex,
    pub window: usize,
}

impl PairFeaturizer for AvgFeaturizer<'_> {
    fn dim(&self) -> usize {
        8 * self.model.d()
    }

    fn features(&self, i: u32, k: u32) -> Result<Vec<f64>, String> {
        baseline_avg(self.model, self.store, self.index, i, k, self.window).map_err(|e| e.to_string())
    }
}

pub struct RelationFeaturizer<'a> {
    pub model: &'a EmbeddingModel,
    pub store: &'a SentenceStore,
    pub index: &'a InvertedIndex,
    pub tstats: &'a TripleStats,
    pub cfg: RelvecConfig,
}

impl PairFeaturizer for RelationFeaturizer<'_> {
    fn dim(&self) -> usize {
        self.cfg.blocks.blocks() * self.model.d()
    }

    fn features(&self, i: u32, k: u32) -> Result<Vec<f64>, String> {
        relation_representation(self.model, self.store, self.index, self.tstats, i, k, &self.cfg)
            .map(|rep| rep.vector().to_vec())
            .map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::{count_pairs, count_triple_marginals, TripleWeighting};
    use crate::oracle;
    use crate::trainer::ModelMeta;
    use rand::Rng;

    fn test_model(seed: u64, n: usize, d: usize) -> EmbeddingModel {
        let mut rng = crate::rng::stream(seed, "relvec-test-model");
        let w: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let meta = ModelMeta { window: 10, alpha: 1e-5, epochs: 0, seed };
        EmbeddingModel::from_parts(d, w, c, b, vec![1.0; n], meta)
    }

    fn tiny_world(sentences: &[&[u32]], n: usize) -> (SentenceStore, InvertedIndex, TripleStats) {
        let store = SentenceStore::from_sentences(sentences.iter().map(|s| s.to_vec()).collect(), n);
        let index = InvertedIndex::build(&store);
        let tstats = count_triple_marginals(&store, 10, TripleWeighting::Distance);
        (store, index, tstats)
    }

    #[test]
    fn context_set_sizes_follow_the_sampling_rule() {
        // slice with 4 distinct positives in a vocabulary of 1000
        let mut sentences: Vec<Vec<u32>> = vec![vec![0, 2, 1], vec![0, 3, 1], vec![0, 4, 1], vec![0, 5, 1]];
        sentences.push((6..1000).collect());
        let store = SentenceStore::from_sentences(sentences, 1000);
        let index = InvertedIndex::build(&store);
        let tstats = count_triple_marginals(&store, 10, TripleWeighting::Distance);
        let slice = extract_triple_slice(&store, &index, 0, 1, Slot::Between, 10, TripleWeighting::Distance).unwrap();
        assert_eq!(slice.entries().len(), 4);
        let cfg = SmoothingConfig::new(1e-5, 1000);
        let rcs = build_relation_context_set(&slice, &tstats, SiMeasure::Si2, &cfg, 7).unwrap();
        assert_eq!(rcs.members().len(), 12);
        assert_eq!(rcs.n_positive(), 4);
        // deterministic under the same seed
        let again = build_relation_context_set(&slice, &tstats, SiMeasure::Si2, &cfg, 7).unwrap();
        assert_eq!(rcs.members(), again.members());
    }

    #[test]
    fn empty_slice_gives_empty_set_and_flagged_zero_fit() {
        let (store, index, tstats) = tiny_world(&[&[0, 1, 2]], 3);
        let slice = extract_triple_slice(&store, &index, 2, 0, Slot::Between, 10, TripleWeighting::Distance).unwrap();
        let cfg = SmoothingConfig::new(1e-5, 3);
        let rcs = build_relation_context_set(&slice, &tstats, SiMeasure::Si1, &cfg, 1).unwrap();
        assert!(rcs.is_empty());
        let model = test_model(1, 3, 4);
        let fit = fit_relation_vector(&model, &rcs, 1e-6).unwrap();
        assert!(fit.empty_evidence);
        assert_eq!(fit.vector, vec![0.0; 4]);
        assert!(fit_relation_vector(&model, &rcs, 0.0).is_err());
    }

    #[test]
    fn fits_match_the_inverse_oracle() {
        let mut rng = crate::rng::stream(21, "relvec-fit-oracle");
        for trial in 0..30u64 {
            let d = rng.gen_range(2..=12);
            let n = rng.gen_range(d..=60);
            let model = test_model(trial, n, d);
            let members: Vec<(u32, f64)> = (0..n as u32).map(|j| (j, rng.gen_range(-3.0..3.0))).collect();
            let rcs = RelationContextSet { i: 0, k: 1, slot: Slot::Between, members: members.clone(), n_positive: n };
            let lambda = [1e-6, 1e-3, 1.0][trial as usize % 3];
            let fit = fit_relation_vector(&model, &rcs, lambda).unwrap();
            let rows: Vec<Vec<f64>> = members.iter().map(|&(j, _)| model.ctx_vec(j).to_vec()).collect();
            let targets: Vec<f64> = members.iter().map(|&(j, t)| t - model.bias(j)).collect();
            let want = oracle::ridge_via_inverse(&rows, &targets, lambda, d).unwrap();
            let norm: f64 = want.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff: f64 = fit.vector.iter().zip(&want).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(diff <= 1e-6 * norm.max(1.0), "trial {trial}: diff {diff}, norm {norm}");
        }
    }

    #[test]
    fn ridge_shrinks_underdetermined_fits() {
        let model = test_model(3, 20, 8);
        // fewer observations than dimensions
        let members: Vec<(u32, f64)> = (0..3u32).map(|j| (j, 1.0 + j as f64)).collect();
        let rcs = RelationContextSet { i: 0, k: 1, slot: Slot::Between, members, n_positive: 3 };
        let norms: Vec<f64> = [1e-6, 1e-2, 1.0, 100.0]
            .iter()
            .map(|&lambda| {
                let fit = fit_relation_vector(&model, &rcs, lambda).unwrap();
                fit.vector.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[1] < w[0] + 1e-12, "{norms:?}");
        }
    }

    #[test]
    fn representation_on_single_sentence() {
        let (store, index, tstats) = tiny_world(&[&[0, 1, 2]], 3);
        let model = test_model(5, 3, 4);
        let cfg = RelvecConfig::default();
        let rep = relation_representation(&model, &store, &index, &tstats, 0, 2, &cfg).unwrap();
        assert_eq!(rep.vector().len(), 8 * 4);
        // r for (a, c) is fitted from context {b}: nonzero
        assert!(rep.block(0).iter().any(|&v| v != 0.0));
        // r for (c, a) has no evidence: zero
        assert!(rep.block(1).iter().all(|&v| v == 0.0));
        // word vectors land in the last two blocks
        assert_eq!(rep.block(6), model.word_vec(0));
        assert_eq!(rep.block(7), model.word_vec(2));
        // swapping the pair permutes block roles
        let swapped = relation_representation(&model, &store, &index, &tstats, 2, 0, &cfg).unwrap();
        assert_eq!(swapped.block(0), rep.block(1));
        assert_eq!(swapped.block(1), rep.block(0));
        assert_eq!(swapped.block(2), rep.block(3));
        assert_eq!(swapped.block(4), rep.block(5));
    }

    #[test]
    fn representation_for_never_cooccurring_pair_is_zero_padded() {
        let (store, index, tstats) = tiny_world(&[&[0, 1], &[2, 1]], 3);
        let model = test_model(6, 3, 4);
        let cfg = RelvecConfig::default();
        let rep = relation_representation(&model, &store, &index, &tstats, 0, 2, &cfg).unwrap();
        for blk in 0..6 {
            assert!(rep.block(blk).iter().all(|&v| v == 0.0), "block {blk}");
        }
        assert_eq!(rep.block(6), model.word_vec(0));
        assert_eq!(rep.block(7), model.word_vec(2));
        assert!(matches!(
            relation_representation(&model, &store, &index, &tstats, 1, 1, &cfg),
            Err(RelvecError::IdenticalPair(1))
        ));
    }

    #[test]
    fn between_only_mode_has_four_blocks() {
        let (store, index, tstats) = tiny_world(&[&[0, 1, 2]], 3);
        let model = test_model(7, 3, 5);
        let cfg = RelvecConfig { blocks: BlockMode::BetweenOnly, ..Default::default() };
        let rep = relation_representation(&model, &store, &index, &tstats, 0, 2, &cfg).unwrap();
        assert_eq!(rep.vector().len(), 4 * 5);
        assert_eq!(rep.block(2), model.word_vec(0));
        assert_eq!(rep.block(3), model.word_vec(2));
    }

    #[test]
    fn baseline_identities() {
        let model = test_model(8, 5, 3);
        assert_eq!(baseline_diff(&model, 2, 2), vec![0.0; 3]);
        let fwd = baseline_diff(&model, 1, 3);
        let bwd = baseline_diff(&model, 3, 1);
        for (a, b) in fwd.iter().zip(&bwd) {
            assert_eq!(*a, -b);
        }
        let conc = baseline_conc(&model, 1, 3);
        assert_eq!(conc.len(), 6);
        assert_eq!(&conc[..3], model.word_vec(1));
        assert_eq!(&conc[3..], model.word_vec(3));
        let self_conc = baseline_conc(&model, 2, 2);
        assert_eq!(&self_conc[..3], model.word_vec(2));
        assert_eq!(&self_conc[3..], model.word_vec(2));
        // any linear functional of diff equals [-f; f] applied to conc
        let f = [0.7, -1.1, 0.4];
        let via_diff: f64 = f.iter().zip(&fwd).map(|(x, y)| x * y).sum();
        let via_conc: f64 = f.iter().map(|v| -v).chain(f.iter().copied()).zip(&conc).map(|(x, y)| x * y).sum();
        assert!((via_diff - via_conc).abs() < 1e-12);
    }

    #[test]
    fn averaging_baseline_follows_sentence_then_corpus_rule() {
        // sentences [a, b, c] and [a, e, c]: between block = (w_b + w_e) / 2
        let (store, index, _) = tiny_world(&[&[0, 1, 2], &[0, 3, 2]], 4);
        let model = test_model(9, 4, 3);
        let avg = baseline_avg(&model, &store, &index, 0, 2, 10).unwrap();
        let d = 3;
        for ((got, a), b) in avg.iter().zip(model.word_vec(1)).zip(model.word_vec(3)) {
            assert!((got - (a + b) / 2.0).abs() < 1e-12);
        }
        // no sentences with the reverse order: zero block
        assert!(avg[d..2 * d].iter().all(|&v| v == 0.0));
        // word vectors in the last two blocks
        assert_eq!(&avg[6 * d..7 * d], model.word_vec(0));
        assert_eq!(&avg[7 * d..8 * d], model.word_vec(2));
        assert!(baseline_avg(&model, &store, &index, 1, 1, 10).is_err());
    }

    #[test]
    fn relation_vector_file_round_trip() {
        let sentences: Vec<Vec<String>> =
            vec![vec!["a".into(), "b".into(), "c".into()], vec!["c".into(), "b".into(), "a".into()]];
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        let store = crate::corpus::encode_corpus(&sentences, &vocab);
        let index = InvertedIndex::build(&store);
        let tstats = count_triple_marginals(&store, 10, TripleWeighting::Distance);
        let stats = count_pairs(&store, 10);
        let csets = crate::trainer::build_context_sets(&stats, 3);
        let tc = crate::trainer::TrainConfig { dims: 3, epochs: 6, seed: 2, ..Default::default() };
        let model = crate::trainer::train(&stats, &csets, &tc).unwrap();
        let cfg = RelvecConfig::default();
        let a = vocab.id("a").unwrap();
        let c = vocab.id("c").unwrap();
        let reps = vec![
            relation_representation(&model, &store, &index, &tstats, a, c, &cfg).unwrap(),
            relation_representation(&model, &store, &index, &tstats, c, a, &cfg).unwrap(),
        ];
        let mut buf = Vec::new();
        write_relation_vectors(&mut buf, &reps, &vocab, &["config: measure=2".into()]).unwrap();
        let rows = read_relation_vectors(&mut &buf[..]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].0, "a");
        assert_eq!(rows[0].1, "c");
        assert_eq!(rows[0].2, 2);
        assert_eq!(rows[0].3.len(), reps[0].vector().len());
        for (got, want) in rows[0].3.iter().zip(reps[0].vector()) {
            assert_eq!(got.to_bits(), want.to_bits());
        }
    }
}
