//! Evaluation harnesses: relation induction (binary classification per
//! relation, 10-fold cross-validation, generated negatives) and
//! prototypicality ranking (ridge regression on gold scores, Spearman rho).
//!
//! Negative examples, parameter tuning and classifier fitting only ever see
//! the split they belong to; the fold inspector hook exists so tests can
//! assert that no test-fold information reaches training.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::corpus::Vocabulary;
use crate::rng;
use crate::solve::RidgeProblem;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("classifier needs both classes in the training data")]
    SingleClass,
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least {need} items, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("gold scores are constant; ranking is undefined")]
    ConstantGold,
    #[error("ranking values are constant; rank correlation is undefined")]
    DegenerateRanking,
    #[error("featurizer failed for pair ({i}, {k}): {msg}")]
    Featurizer { i: u32, k: u32, msg: String },
    #[error(transparent)]
    Solve(#[from] crate::solve::SolveError),
}

/// Maps an ordered word pair to a fixed-length feature vector.
pub trait PairFeaturizer {
    fn dim(&self) -> usize;
    fn features(&self, i: u32, k: u32) -> Result<Vec<f64>, String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordPair {
    pub source: u32,
    pub target: u32,
}

impl WordPair {
    pub fn new(source: u32, target: u32) -> Self {
        WordPair { source, target }
    }

    pub fn reversed(self) -> Self {
        WordPair { source: self.target, target: self.source }
    }
}

/// Labeled relation dataset: relation name -> ordered positive pairs.
/// Out-of-vocabulary pairs are skipped and counted at load time.
#[derive(Debug, Clone, Default)]
pub struct RelationDataset {
    pub relations: Vec<(String, Vec<WordPair>)>,
    pub skipped_pairs: usize,
}

/// Ranked dataset: pairs with real-valued prototypicality scores,
/// most prototypical first.
#[derive(Debug, Clone, Default)]
pub struct RankedDataset {
    pub relations: Vec<(String, Vec<(WordPair, f64)>)>,
    pub skipped_pairs: usize,
}

fn push_relation<T>(relations: &mut Vec<(String, Vec<T>)>, name: &str) -> usize {
    if let Some(idx) = relations.iter().position(|(n, _)| n == name) {
        idx
    } else {
        relations.push((name.to_string(), Vec::new()));
        relations.len() - 1
    }
}

/// Parse either the sectioned format (": relation-name" headers with one
/// "source target" pair per line) or TSV (relation, source, target[, score]).
pub fn parse_relation_dataset(text: &str, vocab: &Vocabulary) -> RelationDataset {
    let mut out = RelationDataset::default();
    let mut current: Option<usize> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            current = Some(push_relation(&mut out.relations, name.trim()));
            continue;
        }
        let (rel_idx, source, target) = if line.contains('\t') {
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(rel), Some(s), Some(t)) => (push_relation(&mut out.relations, rel.trim()), s.trim(), t.trim()),
                _ => {
                    out.skipped_pairs += 1;
                    continue;
                }
            }
        } else if let Some(idx) = current {
            let mut words = line.split_whitespace();
            match (words.next(), words.next()) {
                (Some(s), Some(t)) => (idx, s, t),
                _ => {
                    out.skipped_pairs += 1;
                    continue;
                }
            }
        } else {
            out.skipped_pairs += 1;
            continue;
        };
        match (vocab.id(source), vocab.id(target)) {
            (Some(s), Some(t)) => out.relations[rel_idx].1.push(WordPair::new(s, t)),
            _ => out.skipped_pairs += 1,
        }
    }
    out.relations.retain(|(_, pairs)| !pairs.is_empty());
    out
}

/// Parse a ranked dataset from TSV (relation, source, target, score).
/// Duplicate pairs within a relation keep their first occurrence.
pub fn parse_ranked_dataset(text: &str, vocab: &Vocabulary) -> RankedDataset {
    let mut out = RankedDataset::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (rel, s, t, score) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
            (Some(rel), Some(s), Some(t), Some(score)) => (rel.trim(), s.trim(), t.trim(), score.trim()),
            _ => {
                out.skipped_pairs += 1;
                continue;
            }
        };
        let score: f64 = match score.parse() {
            Ok(v) => v,
            Err(_) => {
                out.skipped_pairs += 1;
                continue;
            }
        };
        match (vocab.id(s), vocab.id(t)) {
            (Some(s), Some(t)) => {
                let idx = push_relation(&mut out.relations, rel);
                let pair = WordPair::new(s, t);
                if out.relations[idx].1.iter().any(|&(p, _)| p == pair) {
                    out.skipped_pairs += 1;
                } else {
                    out.relations[idx].1.push((pair, score));
                }
            }
            _ => out.skipped_pairs += 1,
        }
    }
    out
}

/// Negatives generated for one split of positives.
#[derive(Debug, Clone)]
pub struct NegativeSet {
    pub pairs: Vec<WordPair>,
    /// Set when the full four-negatives-per-positive protocol could not be
    /// followed (fewer than two positives, or exhausted retries).
    pub flagged: bool,
}

/// Per positive (s, t): the reversal (t, s), two pairs (s, t') with tails
/// drawn from the other positives of the same split, and one random pair
/// from the vocabulary (never an exact split positive).
pub fn generate_negatives(positives: &[WordPair], vocab_size: usize, seed: u64) -> NegativeSet {
    let mut rng = rng::stream(seed, "eval.negatives");
    let mut negatives = Vec::with_capacity(4 * positives.len());
    let mut flagged = positives.len() < 2;
    let positive_set: HashSet<WordPair> = positives.iter().copied().collect();
    for (idx, &pos) in positives.iter().enumerate() {
        negatives.push(pos.reversed());
        let tails: Vec<u32> = positives
            .iter()
            .enumerate()
            .filter(|&(other, p)| other != idx && p.target != pos.target)
            .map(|(_, p)| p.target)
            .collect();
        if tails.is_empty() {
            flagged = true;
        } else {
            for _ in 0..2 {
                let tail = tails[rng.gen_range(0..tails.len())];
                negatives.push(WordPair::new(pos.source, tail));
            }
        }
        let mut found = false;
        for _ in 0..100 {
            let u = rng.gen_range(0..vocab_size as u32);
            let v = rng.gen_range(0..vocab_size as u32);
            let cand = WordPair::new(u, v);
            if u != v && !positive_set.contains(&cand) {
                negatives.push(cand);
                found = true;
                break;
            }
        }
        if !found {
            flagged = true;
        }
    }
    NegativeSet { pairs: negatives, flagged }
}

/// Balanced index folds; leave-one-out below 10 items.
pub fn kfold_split(n_items: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if n_items < 2 {
        return Err(EvalError::TooFew { need: 2, got: n_items });
    }
    let k = if n_items < 10 { n_items } else { k.min(n_items) };
    let mut indices: Vec<usize> = (0..n_items).collect();
    indices.shuffle(&mut rng::stream(seed, "eval.kfold"));
    let base = n_items / k;
    let extra = n_items % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(indices[at..at + size].to_vec());
        at += size;
    }
    Ok(folds)
}

/// Linear decision function w . x + b.
#[derive(Debug, Clone)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }
}

/// L2-regularized hinge-loss SVM trained by dual coordinate descent with
/// the bias folded in as a constant feature. Runs until the duality gap
/// drops below 1e-4 (or the projected gradients vanish).
pub fn svm_fit(x: &[Vec<f64>], y: &[bool], c: f64, seed: u64) -> Result<SvmModel, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.is_empty() || y.iter().all(|&l| l) || y.iter().all(|&l| !l) {
        return Err(EvalError::SingleClass);
    }
    let dim = x[0].len();
    let n = x.len();
    let labels: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    // squared norms of the augmented rows [x; 1]
    let q_diag: Vec<f64> = x.iter().map(|row| row.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
    let mut alpha = vec![0.0f64; n];
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::stream(seed, "eval.svm");
    const GAP_TOL: f64 = 1e-4;
    const MAX_PASSES: usize = 20_000;
    for pass in 0..MAX_PASSES {
        order.shuffle(&mut rng);
        let mut max_violation = 0.0f64;
        for &i in &order {
            let margin = labels[i] * (w.iter().zip(&x[i]).map(|(a, v)| a * v).sum::<f64>() + b);
            let g = margin - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-12 {
                let next = (alpha[i] - g / q_diag[i]).clamp(0.0, c);
                let delta = next - alpha[i];
                if delta != 0.0 {
                    alpha[i] = next;
                    let step = delta * labels[i];
                    for (wv, xv) in w.iter_mut().zip(&x[i]) {
                        *wv += step * xv;
                    }
                    b += step;
                }
            }
        }
        if max_violation < 1e-8 {
            break;
        }
        if pass % 10 == 9 {
            let wnorm: f64 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
            let hinge: f64 = (0..n)
                .map(|i| {
                    let margin = labels[i] * (w.iter().zip(&x[i]).map(|(a, v)| a * v).sum::<f64>() + b);
                    (1.0 - margin).max(0.0)
                })
                .sum();
            let primal = 0.5 * wnorm + c * hinge;
            let dual = alpha.iter().sum::<f64>() - 0.5 * wnorm;
            if primal - dual <= GAP_TOL {
                break;
            }
        }
    }
    Ok(SvmModel { w, b })
}

/// Tuning grid from the evaluation protocol.
pub const DEFAULT_C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Hold out a stratified 25% of the training data, pick the best C from the
/// grid by held-out accuracy, then retrain on everything.
pub fn train_linear_classifier(x: &[Vec<f64>], y: &[bool], c_grid: &[f64], seed: u64) -> Result<SvmModel, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { a: x.len(), b: y.len() });
    }
    let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(EvalError::SingleClass);
    }
    let mut rng = rng::stream(seed, "eval.svm-tuning");
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let pos_cut = pos.len() / 4;
    let neg_cut = neg.len() / 4;
    let mut best_c = c_grid.get(c_grid.len() / 2).copied().unwrap_or(1.0);
    if pos_cut > 0 && neg_cut > 0 && c_grid.len() > 1 {
        let tune: Vec<usize> = pos[..pos_cut].iter().chain(&neg[..neg_cut]).copied().collect();
        let fit: Vec<usize> = pos[pos_cut..].iter().chain(&neg[neg_cut..]).copied().collect();
        let fit_x: Vec<Vec<f64>> = fit.iter().map(|&i| x[i].clone()).collect();
        let fit_y: Vec<bool> = fit.iter().map(|&i| y[i]).collect();
        let mut best_acc = -1.0;
        for (grid_idx, &c) in c_grid.iter().enumerate() {
            let model = svm_fit(&fit_x, &fit_y, c, seed.wrapping_add(grid_idx as u64))?;
            let correct = tune.iter().filter(|&&i| model.predict(&x[i]) == y[i]).count();
            let acc = correct as f64 / tune.len() as f64;
            if acc > best_acc {
                best_acc = acc;
                best_c = c;
            }
        }
    }
    svm_fit(x, y, best_c, seed)
}

#[derive(Debug, Clone, Copy, Default)]
struct Confusion {
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
}

impl Confusion {
    fn add(&mut self, gold: bool, predicted: bool) {
        match (gold, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    fn accuracy(&self) -> f64 {
        let total = self.tp + self.fp + self.tn + self.fn_;
        if total == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / total as f64
        }
    }

    fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelationMetrics {
    pub name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub folds: usize,
    /// True when some fold could not follow the full negative protocol.
    pub flagged_negatives: bool,
}

#[derive(Debug, Clone, Default)]
pub struct InductionReport {
    pub per_relation: Vec<RelationMetrics>,
    /// Relations that could not be evaluated, with reasons.
    pub skipped: Vec<(String, String)>,
}

impl InductionReport {
    /// Macro averages over relations: (accuracy, precision, recall, f1).
    pub fn macro_metrics(&self) -> (f64, f64, f64, f64) {
        let n = self.per_relation.len().max(1) as f64;
        let sum = self.per_relation.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, m| {
            (acc.0 + m.accuracy, acc.1 + m.precision, acc.2 + m.recall, acc.3 + m.f1)
        });
        (sum.0 / n, sum.1 / n, sum.2 / n, sum.3 / n)
    }
}

#[derive(Debug, Clone)]
pub struct InductionConfig {
    pub folds: usize,
    pub seed: u64,
    pub c_grid: Vec<f64>,
    pub vocab_size: usize,
}

impl InductionConfig {
    pub fn new(vocab_size: usize, seed: u64) -> Self {
        InductionConfig { folds: 10, seed, c_grid: DEFAULT_C_GRID.to_vec(), vocab_size }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LabeledPair {
    pub pair: WordPair,
    pub label: bool,
}

/// One fold's view, exposed to the inspector hook.
pub struct FoldView<'a> {
    pub relation: &'a str,
    pub fold: usize,
    pub train: &'a [LabeledPair],
    pub test: &'a [LabeledPair],
}

/// Per relation: 10-fold CV (leave-one-out under 10 pairs) with per-split
/// negative generation, C tuning on 25% of the training data, and pooled
/// confusion counts; macro averages over relations.
pub fn evaluate_induction(
    dataset: &RelationDataset,
    featurizer: &dyn PairFeaturizer,
    cfg: &InductionConfig,
) -> InductionReport {
    evaluate_induction_inspected(dataset, featurizer, cfg, |_| {})
}

pub fn evaluate_induction_inspected(
    dataset: &RelationDataset,
    featurizer: &dyn PairFeaturizer,
    cfg: &InductionConfig,
    mut inspect: impl FnMut(&FoldView),
) -> InductionReport {
    let mut report = InductionReport::default();
    let mut cache: HashMap<WordPair, Vec<f64>> = HashMap::new();
    for (name, positives) in &dataset.relations {
        match evaluate_relation(name, positives, featurizer, cfg, &mut cache, &mut inspect) {
            Ok(metrics) => report.per_relation.push(metrics),
            Err(e) => report.skipped.push((name.clone(), e.to_string())),
        }
    }
    report
}

fn featurize_cached<'a>(
    cache: &'a mut HashMap<WordPair, Vec<f64>>,
    featurizer: &dyn PairFeaturizer,
    pair: WordPair,
) -> Result<&'a [f64], EvalError> {
    match cache.entry(pair) {
        std::collections::hash_map::Entry::Occupied(hit) => Ok(hit.into_mut()),
        std::collections::hash_map::Entry::Vacant(slot) => {
            let feats = featurizer
                .features(pair.source, pair.target)
                .map_err(|msg| EvalError::Featurizer { i: pair.source, k: pair.target, msg })?;
            Ok(slot.insert(feats))
        }
    }
}

fn evaluate_relation(
    name: &str,
    positives: &[WordPair],
    featurizer: &dyn PairFeaturizer,
    cfg: &InductionConfig,
    cache: &mut HashMap<WordPair, Vec<f64>>,
    inspect: &mut impl FnMut(&FoldView),
) -> Result<RelationMetrics, EvalError> {
    let rel_salt = rng::hash_label(name);
    let folds = kfold_split(positives.len(), cfg.folds, cfg.seed ^ rel_salt)?;
    let mut confusion = Confusion::default();
    let mut flagged = false;
    for (fold_idx, fold) in folds.iter().enumerate() {
        let in_fold: HashSet<usize> = fold.iter().copied().collect();
        let test_pos: Vec<WordPair> = fold.iter().map(|&i| positives[i]).collect();
        let train_pos: Vec<WordPair> = (0..positives.len()).filter(|i| !in_fold.contains(i)).map(|i| positives[i]).collect();
        let salts = [rel_salt, fold_idx as u64];
        let train_neg = generate_negatives(&train_pos, cfg.vocab_size, rng::stream_n(cfg.seed, "eval.train-neg", &salts).gen());
        let test_neg = generate_negatives(&test_pos, cfg.vocab_size, rng::stream_n(cfg.seed, "eval.test-neg", &salts).gen());
        flagged |= train_neg.flagged || test_neg.flagged;
        let train: Vec<LabeledPair> = train_pos
            .iter()
            .map(|&pair| LabeledPair { pair, label: true })
            .chain(train_neg.pairs.iter().map(|&pair| LabeledPair { pair, label: false }))
            .collect();
        let test: Vec<LabeledPair> = test_pos
            .iter()
            .map(|&pair| LabeledPair { pair, label: true })
            .chain(test_neg.pairs.iter().map(|&pair| LabeledPair { pair, label: false }))
            .collect();
        inspect(&FoldView { relation: name, fold: fold_idx, train: &train, test: &test });
        let mut x = Vec::with_capacity(train.len());
        let mut y = Vec::with_capacity(train.len());
        for lp in &train {
            x.push(featurize_cached(cache, featurizer, lp.pair)?.to_vec());
            y.push(lp.label);
        }
        let model = train_linear_classifier(&x, &y, &cfg.c_grid, rng::stream_n(cfg.seed, "eval.classifier", &salts).gen())?;
        for lp in &test {
            let feats = featurize_cached(cache, featurizer, lp.pair)?;
            confusion.add(lp.label, model.predict(feats));
        }
    }
    Ok(RelationMetrics {
        name: name.to_string(),
        accuracy: confusion.accuracy(),
        precision: confusion.precision(),
        recall: confusion.recall(),
        f1: confusion.f1(),
        folds: folds.len(),
        flagged_negatives: flagged,
    })
}

/// Linear model fitted by ridge regression on gold scores (with intercept).
#[derive(Debug, Clone)]
pub struct RankRegressor {
    pub w: Vec<f64>,
    pub intercept: f64,
}

impl RankRegressor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.intercept
    }
}

fn ridge_with_intercept(x: &[Vec<f64>], gold: &[f64], lambda: f64) -> Result<RankRegressor, EvalError> {
    let dim = x[0].len();
    let n = x.len() as f64;
    let mut x_mean = vec![0.0; dim];
    for row in x {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    let y_mean: f64 = gold.iter().sum::<f64>() / n;
    let mut prob = RidgeProblem::new(dim);
    for (row, &g) in x.iter().zip(gold) {
        let centered: Vec<f64> = row.iter().zip(&x_mean).map(|(v, m)| v - m).collect();
        prob.add_row(&centered, g - y_mean);
    }
    let w = prob.solve(lambda)?;
    let intercept = y_mean - w.iter().zip(&x_mean).map(|(a, b)| a * b).sum::<f64>();
    Ok(RankRegressor { w, intercept })
}

/// Default ridge grid for rank-regression tuning.
pub const DEFAULT_LAMBDA_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Fit on the training rows and pick lambda by Spearman rho on the tuning
/// rows. Requires at least 3 training pairs and non-constant gold scores.
pub fn train_rank_regressor(
    train_x: &[Vec<f64>],
    train_gold: &[f64],
    tune_x: &[Vec<f64>],
    tune_gold: &[f64],
    lambda_grid: &[f64],
) -> Result<RankRegressor, EvalError> {
    if train_x.len() != train_gold.len() {
        return Err(EvalError::LengthMismatch { a: train_x.len(), b: train_gold.len() });
    }
    if train_x.len() < 3 {
        return Err(EvalError::TooFew { need: 3, got: train_x.len() });
    }
    let first = train_gold[0];
    if train_gold.iter().all(|&g| g == first) {
        return Err(EvalError::ConstantGold);
    }
    let mut best: Option<(f64, RankRegressor)> = None;
    for &lambda in lambda_grid {
        let model = ridge_with_intercept(train_x, train_gold, lambda)?;
        let score = if tune_x.len() >= 2 {
            let pred: Vec<f64> = tune_x.iter().map(|row| model.predict(row)).collect();
            spearman(&pred, tune_gold).unwrap_or(-2.0)
        } else {
            0.0
        };
        match &best {
            Some((best_score, _)) if *best_score >= score => {}
            _ => best = Some((score, model)),
        }
    }
    Ok(best.expect("non-empty lambda grid").1)
}

#[derive(Debug, Clone)]
pub struct RankingConfig {
    pub seed: u64,
    pub lambda_grid: Vec<f64>,
}

impl RankingConfig {
    pub fn new(seed: u64) -> Self {
        RankingConfig { seed, lambda_grid: DEFAULT_LAMBDA_GRID.to_vec() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RankingReport {
    pub per_relation: Vec<(String, f64)>,
    pub skipped: Vec<(String, String)>,
}

impl RankingReport {
    pub fn mean_spearman(&self) -> f64 {
        if self.per_relation.is_empty() {
            0.0
        } else {
            self.per_relation.iter().map(|(_, rho)| rho).sum::<f64>() / self.per_relation.len() as f64
        }
    }
}

/// 60/20/20 split per relation (counts rounded toward training), lambda
/// tuned on the tuning split, Spearman rho reported on the test split.
pub fn evaluate_ranking(
    dataset: &RankedDataset,
    featurizer: &dyn PairFeaturizer,
    cfg: &RankingConfig,
) -> RankingReport {
    let mut report = RankingReport::default();
    for (name, scored_pairs) in &dataset.relations {
        match evaluate_ranked_relation(name, scored_pairs, featurizer, cfg) {
            Ok(rho) => report.per_relation.push((name.clone(), rho)),
            Err(e) => report.skipped.push((name.clone(), e.to_string())),
        }
    }
    report
}

fn evaluate_ranked_relation(
    name: &str,
    scored_pairs: &[(WordPair, f64)],
    featurizer: &dyn PairFeaturizer,
    cfg: &RankingConfig,
) -> Result<f64, EvalError> {
    let n = scored_pairs.len();
    let n_tune = n / 5;
    let n_test = n / 5;
    let n_train = n - n_tune - n_test;
    if n_train < 3 || n_test < 2 {
        return Err(EvalError::TooFew { need: 6, got: n });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng::stream_n(cfg.seed, "eval.ranking-split", &[rng::hash_label(name)]));
    let mut feats = Vec::with_capacity(n);
    let mut gold = Vec::with_capacity(n);
    for &idx in &indices {
        let (pair, score) = scored_pairs[idx];
        feats.push(
            featurizer
                .features(pair.source, pair.target)
                .map_err(|msg| EvalError::Featurizer { i: pair.source, k: pair.target, msg })?,
        );
        gold.push(score);
    }
    let (train_x, rest_x) = feats.split_at(n_train);
    let (train_g, rest_g) = gold.split_at(n_train);
    let (tune_x, test_x) = rest_x.split_at(n_tune);
    let (tune_g, test_g) = rest_g.split_at(n_tune);
    let model = train_rank_regressor(train_x, train_g, tune_x, tune_g, &cfg.lambda_grid)?;
    let pred: Vec<f64> = test_x.iter().map(|row| model.predict(row)).collect();
    spearman(&pred, test_g)
}

/// Average ranks with ties sharing their mean position.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("non-finite rank input"));
    let mut ranks = vec![0.0; values.len()];
    let mut at = 0;
    while at < order.len() {
        let mut end = at + 1;
        while end < order.len() && values[order[end]] == values[order[at]] {
            end += 1;
        }
        let mean_rank = (at + 1 + end) as f64 / 2.0;
        for &idx in &order[at..end] {
            ranks[idx] = mean_rank;
        }
        at = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch { a: pred.len(), b: gold.len() });
    }
    if pred.len() < 2 {
        return Err(EvalError::TooFew { need: 2, got: pred.len() });
    }
    let ra = average_ranks(pred);
    let rb = average_ranks(gold);
    let n = ra.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (a, b) in ra.iter().zip(&rb) {
        cov += (a - mean) * (b - mean);
        var_a += (a - mean) * (a - mean);
        var_b += (b - mean) * (b - mean);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(EvalError::DegenerateRanking);
    }
    Ok(cov / (var_a * var_b).sqrt())
}
