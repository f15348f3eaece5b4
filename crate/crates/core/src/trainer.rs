//! Embedding trainer.
//!
//! Fits target vectors w_i, context vectors w~_j and context biases b~_j so
//! that w_i . w~_j + b~_j approximates the smoothed PMI of the pair, by
//! minimizing
//!
//!   sum_i sum_{j in J_i} (1 / sigma_j^2) (w_i . w~_j + b~_j - PMI_S(i,j))^2
//!
//! with stochastic updates and per-coordinate adaptive learning rates. The
//! per-context residual variances sigma_j^2 are re-estimated every five
//! epochs; the first five epochs fall back to the standard GloVe weighting
//! function because no variance estimate exists yet. There is no per-target
//! bias term. J_i holds every positive context plus twice as many uniformly
//! sampled zero-count contexts.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::cooccur::PairStats;
use crate::corpus::Vocabulary;
use crate::files::{self, FileError};
use crate::measures::{pmi_smoothed, SmoothingConfig};
use crate::rng;
use crate::solve::{RidgeProblem, SolveError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("non-finite target for pair ({i}, {j})")]
    BadTarget { i: u32, j: u32 },
    #[error("training diverged at epoch {epoch}, update {step}: non-finite parameter")]
    Diverged { epoch: usize, step: usize },
    #[error("alpha must be positive for training targets, got {0}")]
    BadAlpha(f64),
    #[error("fold-in row is empty and lambda = 0; pass lambda > 0")]
    EmptyRow,
    #[error("singular normal system; use a ridge penalty lambda > 0")]
    Singular(#[from] SolveError),
    #[error("word id {id} out of range for vocabulary of size {n}")]
    IdOutOfRange { id: u32, n: usize },
    #[error(transparent)]
    Measure(#[from] crate::measures::MeasureError),
    #[error(transparent)]
    File(#[from] FileError),
}

/// Trainer hyperparameters. Defaults follow the reference setup: window 10,
/// 300 dimensions, 50 epochs, alpha 1e-5, learning rate 0.05.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub dims: usize,
    pub epochs: usize,
    pub alpha: f64,
    pub seed: u64,
    pub learning_rate: f64,
    /// GloVe weighting cutoff (warm-up epochs only).
    pub x_max: f64,
    /// GloVe weighting exponent (warm-up epochs only).
    pub weight_exponent: f64,
    /// Warm-up weight for sampled negatives, whose count is zero.
    pub negative_weight_floor: f64,
    /// Lower bound on estimated residual variances.
    pub sigma_floor: f64,
    /// Per-coordinate cap on update magnitude. A variance refresh can blow
    /// up the 1/sigma^2 weights faster than the gradient accumulators adapt;
    /// the cap bounds that transient (accumulators still see the raw
    /// gradient, so steps renormalize within a few updates).
    pub update_clip: f64,
    /// Cap on the ratio between the largest and mean step weight. Inverse
    /// variance weighting self-amplifies on near-realizable data: a context
    /// whose variance hits the floor would otherwise soak up the entire
    /// weight mass and freeze every other regression. The reported sigma^2
    /// stays the plain per-context estimate.
    pub weight_spread_cap: f64,
    /// Re-estimate sigma^2 every this many epochs.
    pub refresh_interval: usize,
    /// Epochs that use the GloVe weighting before the first sigma estimate.
    pub warmup_epochs: usize,
    /// 1 = deterministic single worker; more workers trade reproducibility
    /// for speed (lock-free updates, sigma refresh is a barrier).
    pub threads: usize,
    /// Snapshot only; recorded in the model header.
    pub window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dims: 300,
            epochs: 50,
            alpha: 1e-5,
            seed: 1,
            learning_rate: 0.05,
            x_max: 100.0,
            weight_exponent: 0.75,
            negative_weight_floor: 0.05,
            sigma_floor: 1e-8,
            update_clip: 0.5,
            weight_spread_cap: 10.0,
            refresh_interval: 5,
            warmup_epochs: 5,
            threads: 1,
            window: 10,
        }
    }
}

/// GloVe weighting function with a floor for zero counts.
pub fn glove_weight(x: f64, x_max: f64, exponent: f64, negative_floor: f64) -> f64 {
    if x <= 0.0 {
        negative_floor
    } else {
        (x / x_max).powf(exponent).min(1.0)
    }
}

/// Per-target context sets J_i: all positives plus sampled negatives.
#[derive(Debug, Clone)]
pub struct ContextSets {
    sets: Vec<Vec<u32>>,
}

impl ContextSets {
    pub fn set(&self, i: u32) -> &[u32] {
        &self.sets[i as usize]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Sample J_i = {j : x_ij > 0} plus min(2 |positives|, |zeros|) negatives
/// drawn uniformly without replacement from the zero-count contexts.
/// Deterministic: each word gets its own seeded stream.
pub fn build_context_sets(stats: &PairStats, seed: u64) -> ContextSets {
    let n = stats.n();
    let mut sets = Vec::with_capacity(n);
    for i in 0..n as u32 {
        let row = stats.row(i);
        let mut members: Vec<u32> = row.iter().map(|&(j, _)| j).collect();
        let mut zeros: Vec<u32> = Vec::with_capacity(n - members.len());
        let mut row_iter = members.iter().peekable();
        for j in 0..n as u32 {
            if row_iter.peek() == Some(&&j) {
                row_iter.next();
            } else {
                zeros.push(j);
            }
        }
        let wanted = (2 * members.len()).min(zeros.len());
        let mut rng = rng::stream_n(seed, "trainer.context-sets", &[i as u64]);
        let (sampled, _) = zeros.partial_shuffle(&mut rng, wanted);
        members.extend_from_slice(sampled);
        members.sort_unstable();
        sets.push(members);
    }
    ContextSets { sets }
}

/// One regression term: fit w_i . w~_j + b~_j to `target`.
#[derive(Debug, Clone, Copy)]
pub struct TrainEntry {
    pub i: u32,
    pub j: u32,
    pub target: f64,
    /// Raw co-occurrence count, used by the warm-up weighting (0 for
    /// sampled negatives).
    pub count: f64,
}

/// Fully materialized training problem.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    n: usize,
    entries: Vec<TrainEntry>,
    context_terms: Vec<u64>,
}

impl TrainingSet {
    /// Build the PMI regression problem from pair statistics and context
    /// sets. Targets are PMI_S values at the configured alpha.
    pub fn from_stats(stats: &PairStats, csets: &ContextSets, alpha: f64) -> Result<Self, TrainError> {
        if alpha <= 0.0 {
            return Err(TrainError::BadAlpha(alpha));
        }
        let n = stats.n();
        let cfg = SmoothingConfig::new(alpha, n);
        let mut entries = Vec::new();
        for i in 0..n as u32 {
            for &j in csets.set(i) {
                let target = pmi_smoothed(stats, i, j, &cfg)?;
                entries.push(TrainEntry { i, j, target, count: stats.x(i, j) });
            }
        }
        Self::from_entries(n, entries)
    }

    /// Build from explicit entries (synthetic benchmarks, tests).
    pub fn from_entries(n: usize, entries: Vec<TrainEntry>) -> Result<Self, TrainError> {
        if entries.is_empty() {
            return Err(TrainError::EmptyTrainingSet);
        }
        let mut context_terms = vec![0u64; n];
        for e in &entries {
            if e.i as usize >= n {
                return Err(TrainError::IdOutOfRange { id: e.i, n });
            }
            if e.j as usize >= n {
                return Err(TrainError::IdOutOfRange { id: e.j, n });
            }
            if !e.target.is_finite() {
                return Err(TrainError::BadTarget { i: e.i, j: e.j });
            }
            context_terms[e.j as usize] += 1;
        }
        Ok(TrainingSet { n, entries, context_terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[TrainEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ModelMeta {
    pub window: usize,
    pub alpha: f64,
    pub epochs: usize,
    pub seed: u64,
}

/// Trained embedding: target vectors, context vectors, context biases and
/// per-context residual variances.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    n: usize,
    d: usize,
    w: Vec<f64>,
    c: Vec<f64>,
    b: Vec<f64>,
    sigma2: Vec<f64>,
    pub meta: ModelMeta,
}

impl EmbeddingModel {
    pub fn from_parts(d: usize, w: Vec<f64>, c: Vec<f64>, b: Vec<f64>, sigma2: Vec<f64>, meta: ModelMeta) -> Self {
        let n = b.len();
        assert_eq!(w.len(), n * d);
        assert_eq!(c.len(), n * d);
        assert_eq!(sigma2.len(), n);
        EmbeddingModel { n, d, w, c, b, sigma2, meta }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn word_vec(&self, i: u32) -> &[f64] {
        &self.w[i as usize * self.d..(i as usize + 1) * self.d]
    }

    pub fn ctx_vec(&self, j: u32) -> &[f64] {
        &self.c[j as usize * self.d..(j as usize + 1) * self.d]
    }

    pub fn bias(&self, j: u32) -> f64 {
        self.b[j as usize]
    }

    pub fn sigma2(&self, j: u32) -> f64 {
        self.sigma2[j as usize]
    }

    pub fn sigma2_all(&self) -> &[f64] {
        &self.sigma2
    }

    /// w_i . w~_j + b~_j
    pub fn score(&self, i: u32, j: u32) -> f64 {
        dot(self.word_vec(i), self.ctx_vec(j)) + self.b[j as usize]
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.c).chain(&self.b).chain(&self.sigma2).all(|v| v.is_finite())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-epoch diagnostics.
#[derive(Debug, Clone)]
pub struct EpochStats {
    /// Objective under the sigma^2 in effect during the epoch.
    pub objective: f64,
    /// Unweighted sum of squared residuals.
    pub sse: f64,
    /// Squared-residual sums per context word, for reweighted diagnostics.
    pub per_context_sse: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
}

impl TrainLog {
    /// Objective along the trajectory under a fixed weighting, e.g. the
    /// final sigma^2. Useful for convergence checks: the self-normalizing
    /// refresh makes the live objective hover near the term count.
    pub fn objective_under(&self, epoch: usize, sigma2: &[f64]) -> f64 {
        self.epochs[epoch].per_context_sse.iter().zip(sigma2).map(|(sse, s)| sse / s).sum()
    }
}

/// Shared parameter buffers. Updates go through relaxed atomics so the
/// parallel mode stays free of locks; with one worker the schedule is fixed
/// and training is bit-reproducible.
struct ParamBuf(Vec<AtomicU64>);

impl ParamBuf {
    fn new(init: Vec<f64>) -> Self {
        ParamBuf(init.into_iter().map(|v| AtomicU64::new(v.to_bits())).collect())
    }

    #[inline]
    fn get(&self, idx: usize) -> f64 {
        f64::from_bits(self.0[idx].load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, idx: usize, v: f64) {
        self.0[idx].store(v.to_bits(), Ordering::Relaxed);
    }

    fn into_vec(self) -> Vec<f64> {
        self.0.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }
}

struct Params {
    d: usize,
    w: ParamBuf,
    c: ParamBuf,
    b: ParamBuf,
    acc_w: ParamBuf,
    acc_c: ParamBuf,
    acc_b: ParamBuf,
}

impl Params {
    fn score(&self, i: u32, j: u32) -> f64 {
        let (wo, co) = (i as usize * self.d, j as usize * self.d);
        let mut s = self.b.get(j as usize);
        for t in 0..self.d {
            s += self.w.get(wo + t) * self.c.get(co + t);
        }
        s
    }
}

fn update_range(
    params: &Params,
    entries: &[TrainEntry],
    order: &[u32],
    range: std::ops::Range<usize>,
    weights: &dyn Fn(&TrainEntry) -> f64,
    step: (f64, f64),
    diverged: &AtomicU64,
) {
    let (lr, clip) = step;
    let d = params.d;
    for idx in range {
        let e = &entries[order[idx] as usize];
        let (wo, co) = (e.i as usize * d, e.j as usize * d);
        let pred = params.score(e.i, e.j);
        let res = pred - e.target;
        if !res.is_finite() {
            let _ = diverged.compare_exchange(u64::MAX, idx as u64, Ordering::Relaxed, Ordering::Relaxed);
            return;
        }
        let g = weights(e) * res;
        for t in 0..d {
            let wv = params.w.get(wo + t);
            let cv = params.c.get(co + t);
            let gw = g * cv;
            let gc = g * wv;
            let aw = params.acc_w.get(wo + t);
            let ac = params.acc_c.get(co + t);
            params.w.set(wo + t, wv - (lr * gw / aw.sqrt()).clamp(-clip, clip));
            params.c.set(co + t, cv - (lr * gc / ac.sqrt()).clamp(-clip, clip));
            params.acc_w.set(wo + t, aw + gw * gw);
            params.acc_c.set(co + t, ac + gc * gc);
        }
        let ab = params.acc_b.get(e.j as usize);
        params.b.set(e.j as usize, params.b.get(e.j as usize) - (lr * g / ab.sqrt()).clamp(-clip, clip));
        params.acc_b.set(e.j as usize, ab + g * g);
    }
}

fn per_context_residuals(params: &Params, set: &TrainingSet) -> (Vec<f64>, f64) {
    let mut sse = vec![0.0; set.n()];
    let mut total = 0.0;
    for e in set.entries() {
        let res = params.score(e.i, e.j) - e.target;
        let sq = res * res;
        sse[e.j as usize] += sq;
        total += sq;
    }
    (sse, total)
}

fn sigma_from_sse(sse: &[f64], counts: &[u64], floor: f64) -> Vec<f64> {
    let total_sse: f64 = sse.iter().sum();
    let total_count: u64 = counts.iter().sum();
    let global = if total_count > 0 { (total_sse / total_count as f64).max(floor) } else { 1.0 };
    sse.iter()
        .zip(counts)
        .map(|(&s, &c)| if c > 0 { (s / c as f64).max(floor) } else { global })
        .collect()
}

/// Residual variance per context word under the given model:
/// sigma_j^2 = mean over {i : j in J_i} of (w_i . w~_j + b~_j - target)^2,
/// floored; contexts that appear in no J_i get the global mean.
pub fn estimate_residual_variances(model: &EmbeddingModel, set: &TrainingSet, floor: f64) -> Vec<f64> {
    let mut sse = vec![0.0; set.n()];
    for e in set.entries() {
        let res = model.score(e.i, e.j) - e.target;
        sse[e.j as usize] += res * res;
    }
    sigma_from_sse(&sse, &set.context_terms, floor)
}

/// The training objective under the model's current sigma^2.
pub fn objective(model: &EmbeddingModel, set: &TrainingSet) -> f64 {
    set.entries()
        .iter()
        .map(|e| {
            let res = model.score(e.i, e.j) - e.target;
            res * res / model.sigma2(e.j)
        })
        .sum()
}

/// Train on pair statistics: build targets from PMI_S and run the optimizer.
pub fn train(stats: &PairStats, csets: &ContextSets, cfg: &TrainConfig) -> Result<EmbeddingModel, TrainError> {
    let set = TrainingSet::from_stats(stats, csets, cfg.alpha)?;
    train_with_log(&set, cfg).map(|(model, _)| model)
}

/// Full training loop with per-epoch diagnostics.
pub fn train_with_log(set: &TrainingSet, cfg: &TrainConfig) -> Result<(EmbeddingModel, TrainLog), TrainError> {
    if set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    let n = set.n();
    let d = cfg.dims;
    let mut init_rng = rng::stream(cfg.seed, "trainer.init");
    let scale = 0.5 / d as f64;
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| init_rng.gen_range(-scale..scale)).collect() };
    let params = Params {
        d,
        w: ParamBuf::new(draw(n * d)),
        c: ParamBuf::new(draw(n * d)),
        b: ParamBuf::new(vec![0.0; n]),
        acc_w: ParamBuf::new(vec![1.0; n * d]),
        acc_c: ParamBuf::new(vec![1.0; n * d]),
        acc_b: ParamBuf::new(vec![1.0; n]),
    };
    let mut sigma2 = vec![1.0; n];
    // Step weights are 1/sigma_j^2 with the variances winsorized at
    // mean / spread_cap, normalized to mean 1 over the terms. Neither knob
    // moves the minimizer's target; they keep gradient scales stable across
    // refreshes and stop a floored variance from absorbing all weight mass.
    let step_weights = |sigma2: &[f64]| -> Vec<f64> {
        let total: u64 = set.context_terms.iter().sum();
        let mean: f64 = set.context_terms.iter().zip(sigma2).map(|(&c, &s)| c as f64 * s).sum::<f64>() / total as f64;
        let rel_floor = mean / cfg.weight_spread_cap;
        let eff: Vec<f64> = sigma2.iter().map(|&s| s.max(rel_floor)).collect();
        let denom: f64 = set.context_terms.iter().zip(&eff).map(|(&c, &s)| c as f64 / s).sum();
        let scale = set.len() as f64 / denom;
        eff.into_iter().map(|s| scale / s).collect()
    };
    let mut order: Vec<u32> = (0..set.len() as u32).collect();
    let mut log = TrainLog::default();
    let threads = cfg.threads.max(1);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng::stream_n(cfg.seed, "trainer.shuffle", &[epoch as u64]));
        let warmup = epoch <= cfg.warmup_epochs;
        let weights: Box<dyn Fn(&TrainEntry) -> f64 + Sync> = if warmup {
            let (x_max, expo, floor) = (cfg.x_max, cfg.weight_exponent, cfg.negative_weight_floor);
            Box::new(move |e: &TrainEntry| glove_weight(e.count, x_max, expo, floor))
        } else {
            let per_context = step_weights(&sigma2);
            Box::new(move |e: &TrainEntry| per_context[e.j as usize])
        };
        let diverged = AtomicU64::new(u64::MAX);
        if threads <= 1 {
            update_range(&params, set.entries(), &order, 0..order.len(), &*weights, (cfg.learning_rate, cfg.update_clip), &diverged);
        } else {
            let chunk = order.len().div_ceil(threads);
            std::thread::scope(|scope| {
                for t in 0..threads {
                    let lo = t * chunk;
                    let hi = ((t + 1) * chunk).min(order.len());
                    if lo >= hi {
                        break;
                    }
                    let (params, order, weights, diverged) = (&params, &order, &*weights, &diverged);
                    scope.spawn(move || {
                        update_range(params, set.entries(), order, lo..hi, weights, (cfg.learning_rate, cfg.update_clip), diverged);
                    });
                }
            });
        }
        let step = diverged.load(Ordering::Relaxed);
        if step != u64::MAX {
            return Err(TrainError::Diverged { epoch, step: step as usize });
        }
        let (sse, total) = per_context_residuals(&params, set);
        let objective: f64 = sse.iter().zip(&sigma2).map(|(s, v)| s / v).sum();
        if !objective.is_finite() {
            return Err(TrainError::Diverged { epoch, step: set.len() });
        }
        if epoch.is_multiple_of(cfg.refresh_interval) {
            sigma2 = sigma_from_sse(&sse, &set.context_terms, cfg.sigma_floor);
        }
        log.epochs.push(EpochStats { objective, sse: total, per_context_sse: sse });
    }
    if !cfg.epochs.is_multiple_of(cfg.refresh_interval) || cfg.epochs == 0 {
        let (sse, _) = per_context_residuals(&params, set);
        sigma2 = sigma_from_sse(&sse, &set.context_terms, cfg.sigma_floor);
    }
    let meta = ModelMeta { window: cfg.window, alpha: cfg.alpha, epochs: cfg.epochs, seed: cfg.seed };
    let model = EmbeddingModel {
        n,
        d,
        w: params.w.into_vec(),
        c: params.c.into_vec(),
        b: params.b.into_vec(),
        sigma2,
        meta,
    };
    Ok((model, log))
}

/// Fit a vector for a new target against the fixed context vectors:
/// min_w sum_j (w . w~_j + b~_j - row_j)^2 + lambda |w|^2, solved exactly.
/// An empty row with lambda > 0 shrinks to the zero vector.
pub fn fold_in(model: &EmbeddingModel, row: &[(u32, f64)], lambda: f64) -> Result<Vec<f64>, TrainError> {
    if row.is_empty() {
        return if lambda > 0.0 { Ok(vec![0.0; model.d()]) } else { Err(TrainError::EmptyRow) };
    }
    let mut prob = RidgeProblem::new(model.d());
    for &(j, target) in row {
        if j as usize >= model.n() {
            return Err(TrainError::IdOutOfRange { id: j, n: model.n() });
        }
        prob.add_row(model.ctx_vec(j), target - model.bias(j));
    }
    Ok(prob.solve(lambda)?)
}

const MODEL_MAGIC: &str = "RELVEC_MODEL_V1";

/// Write the model as plain text: header, then per-word target vectors,
/// context vectors, biases and sigma^2. Decimals carry 17 significant
/// digits so the file round-trips bit-exactly.
pub fn write_model<W: Write>(w: &mut W, model: &EmbeddingModel, vocab: &Vocabulary, echo: &[String]) -> Result<(), TrainError> {
    files::write_header(
        w,
        MODEL_MAGIC,
        echo,
        &[
            ("words", model.n().to_string()),
            ("dims", model.d().to_string()),
            ("window", model.meta.window.to_string()),
            ("alpha", files::fmt_f64(model.meta.alpha)),
            ("epochs", model.meta.epochs.to_string()),
            ("seed", model.meta.seed.to_string()),
        ],
    )
    .map_err(FileError::Io)?;
    let word = |i: u32| vocab.word(i).unwrap_or("?");
    for section in ["target-vectors", "context-vectors"] {
        writeln!(w, "{section}").map_err(FileError::Io)?;
        for i in 0..model.n() as u32 {
            let vec = if section == "target-vectors" { model.word_vec(i) } else { model.ctx_vec(i) };
            write!(w, "{}", word(i)).map_err(FileError::Io)?;
            for v in vec {
                write!(w, " {}", files::fmt_f64(*v)).map_err(FileError::Io)?;
            }
            writeln!(w).map_err(FileError::Io)?;
        }
    }
    writeln!(w, "biases").map_err(FileError::Io)?;
    for i in 0..model.n() as u32 {
        writeln!(w, "{} {}", word(i), files::fmt_f64(model.bias(i))).map_err(FileError::Io)?;
    }
    writeln!(w, "sigma2").map_err(FileError::Io)?;
    for i in 0..model.n() as u32 {
        writeln!(w, "{} {}", word(i), files::fmt_f64(model.sigma2(i))).map_err(FileError::Io)?;
    }
    Ok(())
}

/// Read a model file back; returns the model and the word order it was
/// written with.
pub fn read_model<R: BufRead>(r: &mut R) -> Result<(EmbeddingModel, Vec<String>), TrainError> {
    let header = files::read_header(r, "model", MODEL_MAGIC)?;
    let n: usize = header.require_parsed("model", "words")?;
    let d: usize = header.require_parsed("model", "dims")?;
    let meta = ModelMeta {
        window: header.require_parsed("model", "window")?,
        alpha: header.require_parsed("model", "alpha")?,
        epochs: header.require_parsed("model", "epochs")?,
        seed: header.require_parsed("model", "seed")?,
    };
    let mut lines = r.lines();
    let mut next_line = |what: &'static str| -> Result<String, TrainError> {
        lines
            .next()
            .ok_or(FileError::Truncated { artifact: "model" })?
            .map_err(|e| TrainError::File(FileError::Io(e)))
            .and_then(|l| if l.is_empty() { Err(FileError::parse("model", 0, format!("empty line in {what}")).into()) } else { Ok(l) })
    };
    let mut words = Vec::with_capacity(n);
    let mut read_section = |label: &'static str, width: usize, collect_words: bool, words: &mut Vec<String>| -> Result<Vec<f64>, TrainError> {
        let head = next_line(label)?;
        if head != label {
            return Err(FileError::parse("model", 0, format!("expected section {label}, found {head:?}")).into());
        }
        let mut values = Vec::with_capacity(n * width);
        for _ in 0..n {
            let line = next_line(label)?;
            let mut parts = line.split_whitespace();
            let word = parts.next().ok_or_else(|| FileError::parse("model", 0, "missing word"))?;
            if collect_words {
                words.push(word.to_string());
            }
            let mut got = 0;
            for part in parts {
                let v: f64 = part.parse().map_err(|_| FileError::parse("model", 0, format!("bad value {part:?}")))?;
                values.push(v);
                got += 1;
            }
            if got != width {
                return Err(FileError::parse("model", 0, format!("{label}: expected {width} values, got {got}")).into());
            }
        }
        Ok(values)
    };
    let w = read_section("target-vectors", d, true, &mut words)?;
    let c = read_section("context-vectors", d, false, &mut words)?;
    let b = read_section("biases", 1, false, &mut words)?;
    let sigma2 = read_section("sigma2", 1, false, &mut words)?;
    Ok((EmbeddingModel { n, d, w, c, b, sigma2, meta }, words))
}

pub fn save_model(model: &EmbeddingModel, vocab: &Vocabulary, path: &Path, echo: &[String]) -> Result<(), TrainError> {
    let mut w = BufWriter::new(File::create(path).map_err(FileError::Io)?);
    write_model(&mut w, model, vocab, echo)
}

pub fn load_model(path: &Path) -> Result<(EmbeddingModel, Vec<String>), TrainError> {
    read_model(&mut BufReader::new(File::open(path).map_err(FileError::Io)?))
}
