//! Distance-weighted co-occurrence statistics.
//!
//! Pair counts x_ij feed the embedding trainer; per-slot triple marginals and
//! on-demand per-pair triple slices feed the relation-vector machinery.
//! Triple counts are order-sensitive: a triple (i, j, k) means i occurs
//! before k, with the context word j drawn from one of three slots (between
//! the pair, before i, after k). Pairs with i = k are excluded from triple
//! statistics throughout.
//!
//! Marginals of the form y_ij*, y_i*k, y_*jk are accumulated per position
//! pair with closed-form inner sums (partial harmonic sums plus a constant
//! block), never by enumerating triples.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{CorpusError, InvertedIndex, SentenceStore};
use crate::files::{self, FileError};

#[derive(Debug, Error)]
pub enum CooccurError {
    #[error("triple statistics are undefined for identical pair words (id {0})")]
    IdenticalPair(u32),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    File(#[from] FileError),
}

/// Context slot of a triple relative to an ordered pair (i, k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Between,
    Before,
    After,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Between, Slot::Before, Slot::After];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Between => "between",
            Slot::Before => "before",
            Slot::After => "after",
        }
    }

    pub fn from_name(name: &str) -> Option<Slot> {
        Slot::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Position weighting for triple statistics. `Uniform` replaces every weight
/// with 1 and exists to reproduce the no-position-weighting ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleWeighting {
    Distance,
    Uniform,
}

impl TripleWeighting {
    pub fn name(self) -> &'static str {
        match self {
            TripleWeighting::Distance => "distance",
            TripleWeighting::Uniform => "uniform",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "distance" => Some(TripleWeighting::Distance),
            "uniform" => Some(TripleWeighting::Uniform),
            _ => None,
        }
    }
}

/// Harmonic co-occurrence weight for a position pair.
pub fn pair_weight(p: usize, q: usize, window: usize) -> f64 {
    let d = p.abs_diff(q);
    if d > 0 && d <= window {
        1.0 / d as f64
    } else {
        0.0
    }
}

/// Weight of an ordered position triple p < q < r within the window.
pub fn triple_weight(p: usize, q: usize, r: usize, window: usize) -> f64 {
    if p < q && q < r && r - p <= window {
        (1.0 / (q - p) as f64).max(1.0 / (r - q) as f64)
    } else {
        0.0
    }
}

/// Sparse symmetric pair counts with marginals.
#[derive(Debug, Clone)]
pub struct PairStats {
    rows: Vec<Vec<(u32, f64)>>,
    row_sums: Vec<f64>,
    total: f64,
    window: usize,
}

impl PairStats {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// x_ij (= x_ji). Zero when the pair never co-occurs.
    pub fn x(&self, i: u32, j: u32) -> f64 {
        match self.rows.get(i as usize) {
            Some(row) => row.binary_search_by_key(&j, |&(w, _)| w).map(|idx| row[idx].1).unwrap_or(0.0),
            None => 0.0,
        }
    }

    /// x_i* row marginal.
    pub fn row_sum(&self, i: u32) -> f64 {
        self.row_sums.get(i as usize).copied().unwrap_or(0.0)
    }

    /// x_** grand total.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Nonzero contexts of word i, sorted by context id.
    pub fn row(&self, i: u32) -> &[(u32, f64)] {
        &self.rows[i as usize]
    }

    /// Number of stored unordered pairs.
    pub fn nnz(&self) -> usize {
        self.canonical_entries().count()
    }

    /// Entries with i <= j, ascending.
    pub fn canonical_entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter_map(move |&(j, v)| if j >= i as u32 { Some((i as u32, j, v)) } else { None }))
    }

    fn from_map(map: HashMap<(u32, u32), f64>, n: usize, window: usize) -> Self {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (&(a, b), &v) in &map {
            rows[a as usize].push((b, v));
            if a != b {
                rows[b as usize].push((a, v));
            }
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
        }
        let row_sums: Vec<f64> = rows.iter().map(|row| row.iter().map(|&(_, v)| v).sum()).collect();
        let total = row_sums.iter().sum();
        PairStats { rows, row_sums, total, window }
    }
}

fn accumulate_pairs(map: &mut HashMap<(u32, u32), f64>, sentence: &[u32], window: usize) {
    let len = sentence.len();
    for p in 1..=len {
        let hi = (p + window).min(len);
        for q in p + 1..=hi {
            let w = 1.0 / (q - p) as f64;
            let (i, j) = (sentence[p - 1], sentence[q - 1]);
            if i == j {
                // both ordered position pairs (p,q) and (q,p) land on x_ii
                *map.entry((i, i)).or_insert(0.0) += 2.0 * w;
            } else {
                let key = (i.min(j), i.max(j));
                *map.entry(key).or_insert(0.0) += w;
            }
        }
    }
}

/// Count distance-weighted pair co-occurrences over the whole store.
pub fn count_pairs(store: &SentenceStore, window: usize) -> PairStats {
    let mut map = HashMap::new();
    for sentence in store.sentences() {
        accumulate_pairs(&mut map, sentence, window);
    }
    PairStats::from_map(map, store.vocab_size(), window)
}

/// Sharded variant: sentences are split into contiguous ranges, counted
/// independently, and merged in shard order, so the result does not depend
/// on scheduling.
pub fn count_pairs_parallel(store: &SentenceStore, window: usize, threads: usize) -> PairStats {
    let threads = threads.max(1).min(store.len().max(1));
    if threads <= 1 {
        return count_pairs(store, window);
    }
    let sentences = store.sentences();
    let chunk = sentences.len().div_ceil(threads);
    let maps: Vec<HashMap<(u32, u32), f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sentences
            .chunks(chunk)
            .map(|shard| {
                scope.spawn(move || {
                    let mut map = HashMap::new();
                    for sentence in shard {
                        accumulate_pairs(&mut map, sentence, window);
                    }
                    map
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("counting shard panicked")).collect()
    });
    let mut merged: HashMap<(u32, u32), f64> = HashMap::new();
    for map in maps {
        for (k, v) in map {
            *merged.entry(k).or_insert(0.0) += v;
        }
    }
    PairStats::from_map(merged, store.vocab_size(), window)
}

/// Sorted sparse (a, b) -> value map.
#[derive(Debug, Clone, Default)]
pub struct SparsePairMap {
    entries: Vec<((u32, u32), f64)>,
}

impl SparsePairMap {
    fn from_map(map: HashMap<(u32, u32), f64>) -> Self {
        let mut entries: Vec<_> = map.into_iter().collect();
        entries.sort_by_key(|&(k, _)| k);
        SparsePairMap { entries }
    }

    pub fn get(&self, a: u32, b: u32) -> f64 {
        self.entries
            .binary_search_by_key(&(a, b), |&(k, _)| k)
            .map(|idx| self.entries[idx].1)
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// All precomputable marginals for one slot.
#[derive(Debug, Clone)]
pub struct SlotMarginals {
    /// y_ij* keyed by (i, j)
    pub ij: SparsePairMap,
    /// y_i*k keyed by (i, k)
    pub ik: SparsePairMap,
    /// y_*jk keyed by (j, k)
    pub jk: SparsePairMap,
    /// y_i**
    pub i: Vec<f64>,
    /// y_*j*
    pub j: Vec<f64>,
    /// y_**k
    pub k: Vec<f64>,
    /// y_***
    pub total: f64,
}

impl SlotMarginals {
    fn from_maps(n: usize, ij: HashMap<(u32, u32), f64>, ik: HashMap<(u32, u32), f64>, jk: HashMap<(u32, u32), f64>) -> Self {
        let ij = SparsePairMap::from_map(ij);
        let ik = SparsePairMap::from_map(ik);
        let jk = SparsePairMap::from_map(jk);
        let mut i_marg = vec![0.0; n];
        let mut j_marg = vec![0.0; n];
        let mut k_marg = vec![0.0; n];
        let mut total = 0.0;
        for ((i, j), v) in ij.iter() {
            i_marg[i as usize] += v;
            j_marg[j as usize] += v;
            total += v;
        }
        for ((_, k), v) in ik.iter() {
            k_marg[k as usize] += v;
        }
        SlotMarginals { ij, ik, jk, i: i_marg, j: j_marg, k: k_marg, total }
    }
}

/// Per-slot triple marginals for the whole corpus.
#[derive(Debug, Clone)]
pub struct TripleStats {
    slots: [SlotMarginals; 3],
    n: usize,
    window: usize,
    weighting: TripleWeighting,
}

impl TripleStats {
    pub fn slot(&self, slot: Slot) -> &SlotMarginals {
        match slot {
            Slot::Between => &self.slots[0],
            Slot::Before => &self.slots[1],
            Slot::After => &self.slots[2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn weighting(&self) -> TripleWeighting {
        self.weighting
    }
}

/// Prefix sums of the harmonic series, H[t] = 1 + 1/2 + ... + 1/t.
struct Harmonic(Vec<f64>);

impl Harmonic {
    fn up_to(max: usize) -> Self {
        let mut h = Vec::with_capacity(max + 1);
        h.push(0.0);
        for t in 1..=max {
            h.push(h[t - 1] + 1.0 / t as f64);
        }
        Harmonic(h)
    }

    fn h(&self, t: usize) -> f64 {
        self.0[t]
    }

    /// sum of 1/t for t in [lo, hi], zero when empty
    fn range(&self, lo: usize, hi: usize) -> f64 {
        if lo > hi {
            0.0
        } else {
            self.0[hi] - self.0[lo - 1]
        }
    }
}

struct SentenceView<'a> {
    tokens: &'a [u32],
    positions: HashMap<u32, Vec<usize>>,
}

impl<'a> SentenceView<'a> {
    fn new(tokens: &'a [u32]) -> Self {
        let mut positions: HashMap<u32, Vec<usize>> = HashMap::new();
        for (idx, &t) in tokens.iter().enumerate() {
            positions.entry(t).or_default().push(idx + 1);
        }
        SentenceView { tokens, positions }
    }

    fn len(&self) -> usize {
        self.tokens.len()
    }

    fn tok(&self, p: usize) -> u32 {
        self.tokens[p - 1]
    }

    /// positions of `word` inside [lo, hi]
    fn positions_in(&self, word: u32, lo: usize, hi: usize) -> &[usize] {
        match self.positions.get(&word) {
            None => &[],
            Some(ps) => {
                let from = ps.partition_point(|&p| p < lo);
                let to = ps.partition_point(|&p| p <= hi);
                &ps[from..to]
            }
        }
    }
}

struct TripleAccumulator {
    ij: HashMap<(u32, u32), f64>,
    ik: HashMap<(u32, u32), f64>,
    jk: HashMap<(u32, u32), f64>,
}

impl TripleAccumulator {
    fn new() -> Self {
        TripleAccumulator { ij: HashMap::new(), ik: HashMap::new(), jk: HashMap::new() }
    }

    fn merge(&mut self, other: TripleAccumulator) {
        for (map, other) in [(&mut self.ij, other.ij), (&mut self.ik, other.ik), (&mut self.jk, other.jk)] {
            for (k, v) in other {
                *map.entry(k).or_insert(0.0) += v;
            }
        }
    }
}

fn add(map: &mut HashMap<(u32, u32), f64>, key: (u32, u32), v: f64) {
    if v != 0.0 {
        *map.entry(key).or_insert(0.0) += v;
    }
}

/// Between-slot marginals for one sentence.
///
/// Events are position triples p < q < r with r - p <= W and tok(p) != tok(r),
/// weighted by max(1/(q-p), 1/(r-q)).
fn between_sentence(view: &SentenceView, window: usize, h: &Harmonic, uniform: bool, acc: &mut TripleAccumulator) {
    let len = view.len();
    for p in 1..=len {
        let i = view.tok(p);
        // y_ij*: fix (p, q), sum over r in (q, p+W]
        for q in p + 1..=(p + window - 1).min(len) {
            let a = q - p;
            let hi = (p + window).min(len);
            if hi <= q {
                continue;
            }
            let count = hi - q;
            let mut sum = if uniform {
                count as f64
            } else {
                let m = a.min(count);
                h.h(m) + (count - m) as f64 / a as f64
            };
            for &r in view.positions_in(i, q + 1, hi) {
                sum -= if uniform {
                    1.0
                } else if r - q <= a {
                    1.0 / (r - q) as f64
                } else {
                    1.0 / a as f64
                };
            }
            add(&mut acc.ij, (i, view.tok(q)), sum);
        }
        // y_i*k: fix (p, r), closed form over q strictly between
        for r in p + 2..=(p + window).min(len) {
            let k = view.tok(r);
            if k == i {
                continue;
            }
            let d = r - p;
            let sum = if uniform {
                (d - 1) as f64
            } else {
                // sum over t = 1..d-1 of 1/min(t, d-t)
                let m = (d - 1) / 2;
                2.0 * h.h(m) + if d % 2 == 0 { 2.0 / d as f64 } else { 0.0 }
            };
            add(&mut acc.ik, (i, k), sum);
        }
    }
    // y_*jk: fix (q, r), sum over p in [max(1, r-W), q-1]
    for q in 1..=len {
        let j = view.tok(q);
        for r in q + 1..=(q + window - 1).min(len) {
            let k = view.tok(r);
            let b = r - q;
            let lo = if r > window { r - window } else { 1 };
            if lo > q - 1 || q == 1 {
                continue;
            }
            let span = q - lo;
            let mut sum = if uniform {
                span as f64
            } else {
                let m = b.min(span);
                h.h(m) + (span - m) as f64 / b as f64
            };
            for &p in view.positions_in(k, lo, q - 1) {
                sum -= if uniform {
                    1.0
                } else if q - p <= b {
                    1.0 / (q - p) as f64
                } else {
                    1.0 / b as f64
                };
            }
            add(&mut acc.jk, (j, k), sum);
        }
    }
}

/// Before-slot marginals: the context word sits at q in [p-W, p-1] with
/// weight 1/(p-q); the pair (i at p, k at r) satisfies p < r <= p + W.
fn before_sentence(view: &SentenceView, window: usize, h: &Harmonic, uniform: bool, acc: &mut TripleAccumulator) {
    let len = view.len();
    for p in 1..=len {
        let i = view.tok(p);
        let r_hi = (p + window).min(len);
        // y_ij*: fix (q, p); the inner weight is constant in r
        if r_hi > p {
            let r_count = r_hi - p;
            let excl = view.positions_in(i, p + 1, r_hi).len();
            let valid_r = (r_count - excl) as f64;
            if valid_r > 0.0 {
                let q_lo = if p > window { p - window } else { 1 };
                for q in q_lo..p {
                    let w = if uniform { 1.0 } else { 1.0 / (p - q) as f64 };
                    add(&mut acc.ij, (i, view.tok(q)), w * valid_r);
                }
            }
        }
        // y_i*k: fix (p, r), closed form over q
        let q_terms = (p - 1).min(window);
        if q_terms > 0 {
            let inner = if uniform { q_terms as f64 } else { h.h(q_terms) };
            for r in p + 1..=r_hi {
                let k = view.tok(r);
                if k != i {
                    add(&mut acc.ik, (i, k), inner);
                }
            }
        }
    }
    // y_*jk: fix (q, r); p ranges over [max(q+1, r-W), min(r-1, q+W)]
    for q in 1..=len {
        let j = view.tok(q);
        for r in q + 2..=len {
            let k = view.tok(r);
            let lo = (q + 1).max(if r > window { r - window } else { 1 });
            let hi = (r - 1).min(q + window);
            if lo > hi {
                continue;
            }
            let mut sum = if uniform { (hi - lo + 1) as f64 } else { h.range(lo - q, hi - q) };
            for &p in view.positions_in(k, lo, hi) {
                sum -= if uniform { 1.0 } else { 1.0 / (p - q) as f64 };
            }
            add(&mut acc.jk, (j, k), sum);
        }
    }
}

/// After-slot marginals: the context word sits at q in [r+1, r+W] with
/// weight 1/(q-r); the pair (i at p, k at r) satisfies p < r <= p + W.
fn after_sentence(view: &SentenceView, window: usize, h: &Harmonic, uniform: bool, acc: &mut TripleAccumulator) {
    let len = view.len();
    // y_ij*: fix (p, q) with q after the pair; r ranges between them
    for p in 1..=len {
        let i = view.tok(p);
        for q in p + 2..=(p + 2 * window).min(len) {
            let lo = (p + 1).max(if q > window { q - window } else { 1 });
            let hi = (q - 1).min(p + window);
            if lo > hi {
                continue;
            }
            let mut sum = if uniform { (hi - lo + 1) as f64 } else { h.range(q - hi, q - lo) };
            for &r in view.positions_in(i, lo, hi) {
                sum -= if uniform { 1.0 } else { 1.0 / (q - r) as f64 };
            }
            add(&mut acc.ij, (i, view.tok(q)), sum);
        }
        // y_i*k: fix (p, r), closed form over q in (r, r+W]
        for r in p + 1..=(p + window).min(len) {
            let k = view.tok(r);
            if k == i {
                continue;
            }
            let q_terms = (len - r).min(window);
            if q_terms > 0 {
                let inner = if uniform { q_terms as f64 } else { h.h(q_terms) };
                add(&mut acc.ik, (i, k), inner);
            }
        }
    }
    // y_*jk: fix (r, q); the inner weight is constant in p
    for r in 1..=len {
        let k = view.tok(r);
        if r < 2 {
            continue;
        }
        let p_lo = if r > window { r - window } else { 1 };
        let p_count = r - p_lo;
        let excl = view.positions_in(k, p_lo, r - 1).len();
        let valid_p = (p_count - excl) as f64;
        if valid_p <= 0.0 {
            continue;
        }
        for q in r + 1..=(r + window).min(len) {
            let w = if uniform { 1.0 } else { 1.0 / (q - r) as f64 };
            add(&mut acc.jk, (view.tok(q), k), w * valid_p);
        }
    }
}

fn count_triples_range(sentences: &[Vec<u32>], window: usize, weighting: TripleWeighting, h: &Harmonic) -> [TripleAccumulator; 3] {
    let uniform = weighting == TripleWeighting::Uniform;
    let mut accs = [TripleAccumulator::new(), TripleAccumulator::new(), TripleAccumulator::new()];
    for sentence in sentences {
        let view = SentenceView::new(sentence);
        between_sentence(&view, window, h, uniform, &mut accs[0]);
        before_sentence(&view, window, h, uniform, &mut accs[1]);
        after_sentence(&view, window, h, uniform, &mut accs[2]);
    }
    accs
}

/// Precompute per-slot triple marginals for the whole store.
pub fn count_triple_marginals(store: &SentenceStore, window: usize, weighting: TripleWeighting) -> TripleStats {
    count_triple_marginals_parallel(store, window, weighting, 1)
}

/// Sharded variant with deterministic shard-order merging.
pub fn count_triple_marginals_parallel(store: &SentenceStore, window: usize, weighting: TripleWeighting, threads: usize) -> TripleStats {
    let max_len = store.sentences().iter().map(|s| s.len()).max().unwrap_or(0);
    let h = Harmonic::up_to(max_len.max(window) + 1);
    let threads = threads.max(1).min(store.len().max(1));
    let merged = if threads <= 1 {
        count_triples_range(store.sentences(), window, weighting, &h)
    } else {
        let chunk = store.len().div_ceil(threads);
        let shards: Vec<[TripleAccumulator; 3]> = std::thread::scope(|scope| {
            let h = &h;
            let handles: Vec<_> = store
                .sentences()
                .chunks(chunk)
                .map(|shard| scope.spawn(move || count_triples_range(shard, window, weighting, h)))
                .collect();
            handles.into_iter().map(|j| j.join().expect("triple shard panicked")).collect()
        });
        let mut iter = shards.into_iter();
        let mut merged = iter.next().unwrap_or([TripleAccumulator::new(), TripleAccumulator::new(), TripleAccumulator::new()]);
        for shard in iter {
            let [b, f, a] = shard;
            merged[0].merge(b);
            merged[1].merge(f);
            merged[2].merge(a);
        }
        merged
    };
    let n = store.vocab_size();
    let slots = merged.map(|acc| SlotMarginals::from_maps(n, acc.ij, acc.ik, acc.jk));
    TripleStats { slots, n, window, weighting }
}

/// Nonzero y_ijk over j for one ordered pair and slot.
#[derive(Debug, Clone)]
pub struct TripleSlice {
    pub i: u32,
    pub k: u32,
    pub slot: Slot,
    entries: Vec<(u32, f64)>,
}

impl TripleSlice {
    pub fn get(&self, j: u32) -> f64 {
        self.entries.binary_search_by_key(&j, |&(w, _)| w).map(|idx| self.entries[idx].1).unwrap_or(0.0)
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }
}

/// Retrieve sentences containing both words and accumulate y_ijk for the
/// ordered pair (i, k) in the requested slot. A pair that never co-occurs
/// yields an empty slice.
pub fn extract_triple_slice(
    store: &SentenceStore,
    index: &InvertedIndex,
    i: u32,
    k: u32,
    slot: Slot,
    window: usize,
    weighting: TripleWeighting,
) -> Result<TripleSlice, CooccurError> {
    if i == k {
        return Err(CooccurError::IdenticalPair(i));
    }
    let uniform = weighting == TripleWeighting::Uniform;
    let mut acc: HashMap<u32, f64> = HashMap::new();
    for sid in index.sentences_with_pair(i, k)? {
        let sentence = store.sentence(sid);
        let view = SentenceView::new(sentence);
        let len = view.len();
        let empty: &[usize] = &[];
        let ps = view.positions.get(&i).map(|v| v.as_slice()).unwrap_or(empty);
        let rs = view.positions.get(&k).map(|v| v.as_slice()).unwrap_or(empty);
        for &p in ps {
            for &r in rs {
                if p >= r || r - p > window {
                    continue;
                }
                match slot {
                    Slot::Between => {
                        for q in p + 1..r {
                            let w = if uniform { 1.0 } else { triple_weight(p, q, r, window) };
                            *acc.entry(view.tok(q)).or_insert(0.0) += w;
                        }
                    }
                    Slot::Before => {
                        let lo = if p > window { p - window } else { 1 };
                        for q in lo..p {
                            let w = if uniform { 1.0 } else { 1.0 / (p - q) as f64 };
                            *acc.entry(view.tok(q)).or_insert(0.0) += w;
                        }
                    }
                    Slot::After => {
                        for q in r + 1..=(r + window).min(len) {
                            let w = if uniform { 1.0 } else { 1.0 / (q - r) as f64 };
                            *acc.entry(view.tok(q)).or_insert(0.0) += w;
                        }
                    }
                }
            }
        }
    }
    let mut entries: Vec<(u32, f64)> = acc.into_iter().filter(|&(_, v)| v != 0.0).collect();
    entries.sort_by_key(|&(j, _)| j);
    Ok(TripleSlice { i, k, slot, entries })
}

const PAIRS_MAGIC: &str = "RELVEC_PAIRS_V1";
const TRIPLES_MAGIC: &str = "RELVEC_TRIPLES_V1";

impl PairStats {
    pub fn write<W: Write>(&self, w: &mut W, echo: &[String]) -> Result<(), FileError> {
        files::write_header(
            w,
            PAIRS_MAGIC,
            echo,
            &[
                ("words", self.n().to_string()),
                ("window", self.window.to_string()),
                ("total", files::fmt_f64(self.total)),
                ("pairs", self.nnz().to_string()),
            ],
        )?;
        for (i, j, v) in self.canonical_entries() {
            w.write_all(&i.to_le_bytes())?;
            w.write_all(&j.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: &mut R) -> Result<Self, FileError> {
        let header = files::read_header(r, "pairs", PAIRS_MAGIC)?;
        let n: usize = header.require_parsed("pairs", "words")?;
        let window: usize = header.require_parsed("pairs", "window")?;
        let count: usize = header.require_parsed("pairs", "pairs")?;
        let mut map = HashMap::with_capacity(count);
        for _ in 0..count {
            let (i, j, v) = read_triplet(r, "pairs")?;
            map.insert((i, j), v);
        }
        Ok(PairStats::from_map(map, n, window))
    }

    pub fn write_tsv<W: Write>(&self, w: &mut W, echo: &[String]) -> Result<(), FileError> {
        for line in echo {
            writeln!(w, "# {line}")?;
        }
        for (i, j, v) in self.canonical_entries() {
            writeln!(w, "{i}\t{j}\t{v}", v = files::fmt_f64(v))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path, echo: &[String]) -> Result<(), FileError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w, echo)
    }

    pub fn load(path: &Path) -> Result<Self, FileError> {
        Self::read(&mut BufReader::new(File::open(path)?))
    }
}

fn read_triplet<R: Read>(r: &mut R, artifact: &'static str) -> Result<(u32, u32, f64), FileError> {
    let mut buf = [0u8; 16];
    r.read_exact(&mut buf).map_err(|_| FileError::Truncated { artifact })?;
    let i = u32::from_le_bytes(buf[0..4].try_into().unwrap());
    let j = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    let v = f64::from_le_bytes(buf[8..16].try_into().unwrap());
    Ok((i, j, v))
}

fn write_sparse<W: Write>(w: &mut W, map: &SparsePairMap) -> Result<(), FileError> {
    files::write_varint(w, map.len() as u64)?;
    for ((a, b), v) in map.iter() {
        w.write_all(&a.to_le_bytes())?;
        w.write_all(&b.to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_sparse<R: BufRead>(r: &mut R) -> Result<SparsePairMap, FileError> {
    let count = files::read_varint(r, "triples")? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let (a, b, v) = read_triplet(r, "triples")?;
        entries.push(((a, b), v));
    }
    Ok(SparsePairMap { entries })
}

fn write_dense<W: Write>(w: &mut W, values: &[f64]) -> Result<(), FileError> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_dense<R: BufRead>(r: &mut R, n: usize) -> Result<Vec<f64>, FileError> {
    let mut out = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut buf).map_err(|_| FileError::Truncated { artifact: "triples" })?;
        out.push(f64::from_le_bytes(buf));
    }
    Ok(out)
}

impl TripleStats {
    pub fn write<W: Write>(&self, w: &mut W, echo: &[String]) -> Result<(), FileError> {
        files::write_header(
            w,
            TRIPLES_MAGIC,
            echo,
            &[
                ("words", self.n.to_string()),
                ("window", self.window.to_string()),
                ("weighting", self.weighting.name().to_string()),
            ],
        )?;
        for slot in Slot::ALL {
            let m = self.slot(slot);
            write_sparse(w, &m.ij)?;
            write_sparse(w, &m.ik)?;
            write_sparse(w, &m.jk)?;
            write_dense(w, &m.i)?;
            write_dense(w, &m.j)?;
            write_dense(w, &m.k)?;
            w.write_all(&m.total.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: &mut R) -> Result<Self, FileError> {
        let header = files::read_header(r, "triples", TRIPLES_MAGIC)?;
        let n: usize = header.require_parsed("triples", "words")?;
        let window: usize = header.require_parsed("triples", "window")?;
        let weighting = TripleWeighting::from_name(header.require("triples", "weighting")?)
            .ok_or_else(|| FileError::parse("triples", 0, "bad weighting"))?;
        let mut slots = Vec::with_capacity(3);
        for _ in 0..3 {
            let ij = read_sparse(r)?;
            let ik = read_sparse(r)?;
            let jk = read_sparse(r)?;
            let i = read_dense(r, n)?;
            let j = read_dense(r, n)?;
            let k = read_dense(r, n)?;
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(|_| FileError::Truncated { artifact: "triples" })?;
            slots.push(SlotMarginals { ij, ik, jk, i, j, k, total: f64::from_le_bytes(buf) });
        }
        let after = slots.pop().unwrap();
        let before = slots.pop().unwrap();
        let between = slots.pop().unwrap();
        Ok(TripleStats { slots: [between, before, after], n, window, weighting })
    }

    pub fn save(&self, path: &Path, echo: &[String]) -> Result<(), FileError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w, echo)
    }

    pub fn load(path: &Path) -> Result<Self, FileError> {
        Self::read(&mut BufReader::new(File::open(path)?))
    }
}
