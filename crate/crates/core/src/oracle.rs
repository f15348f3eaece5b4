//! Independent reference implementations used to cross-check the fast paths.
//!
//! Everything here trades speed for obviousness: counts are produced by
//! exhaustive enumeration over position tuples, the ridge reference inverts
//! the normal matrix outright, and the rank correlation is computed straight
//! from its definition. None of it shares code with the implementations it
//! checks. The `selfcheck` CLI subcommand and the acceptance suite both run
//! these on small corpora.

use rand::Rng;

use crate::cooccur::{self, Slot, TripleWeighting};
use crate::corpus::{InvertedIndex, SentenceStore};
use crate::rng;

/// Seeded random corpus for oracle comparisons.
pub fn random_corpus(seed: u64, max_vocab: usize, max_sentences: usize, max_len: usize) -> SentenceStore {
    let mut rng = rng::stream(seed, "oracle.corpus");
    let n = rng.gen_range(2..=max_vocab);
    let count = rng.gen_range(1..=max_sentences);
    let sentences: Vec<Vec<u32>> = (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len).map(|_| rng.gen_range(0..n as u32)).collect()
        })
        .collect();
    SentenceStore::from_sentences(sentences, n)
}

/// Dense pair counts from enumerating all ordered position pairs.
pub struct BrutePairs {
    pub n: usize,
    x: Vec<f64>,
}

impl BrutePairs {
    pub fn x(&self, i: u32, j: u32) -> f64 {
        self.x[i as usize * self.n + j as usize]
    }

    pub fn row_sum(&self, i: u32) -> f64 {
        (0..self.n).map(|j| self.x(i, j as u32)).sum()
    }

    pub fn total(&self) -> f64 {
        self.x.iter().sum()
    }
}

pub fn brute_pair_counts(store: &SentenceStore, window: usize) -> BrutePairs {
    let n = store.vocab_size();
    let mut x = vec![0.0; n * n];
    for sentence in store.sentences() {
        let len = sentence.len();
        for p in 1..=len {
            for q in 1..=len {
                if p == q {
                    continue;
                }
                let d = p.abs_diff(q);
                if d <= window {
                    x[sentence[p - 1] as usize * n + sentence[q - 1] as usize] += 1.0 / d as f64;
                }
            }
        }
    }
    BrutePairs { n, x }
}

/// Dense ordered-triple counts y_ijk from enumerating position tuples.
pub struct BruteTriples {
    pub n: usize,
    y: Vec<f64>,
}

impl BruteTriples {
    pub fn get(&self, i: u32, j: u32, k: u32) -> f64 {
        self.y[(i as usize * self.n + j as usize) * self.n + k as usize]
    }

    pub fn ij(&self, i: u32, j: u32) -> f64 {
        (0..self.n).map(|k| self.get(i, j, k as u32)).sum()
    }

    pub fn ik(&self, i: u32, k: u32) -> f64 {
        (0..self.n).map(|j| self.get(i, j as u32, k)).sum()
    }

    pub fn jk(&self, j: u32, k: u32) -> f64 {
        (0..self.n).map(|i| self.get(i as u32, j, k)).sum()
    }

    pub fn i_marg(&self, i: u32) -> f64 {
        (0..self.n).map(|j| self.ij(i, j as u32)).sum()
    }

    pub fn j_marg(&self, j: u32) -> f64 {
        (0..self.n).map(|i| self.ij(i as u32, j)).sum()
    }

    pub fn k_marg(&self, k: u32) -> f64 {
        (0..self.n).map(|i| self.ik(i as u32, k)).sum()
    }

    pub fn total(&self) -> f64 {
        self.y.iter().sum()
    }
}

pub fn brute_triple_counts(store: &SentenceStore, window: usize, slot: Slot, weighting: TripleWeighting) -> BruteTriples {
    let n = store.vocab_size();
    let mut y = vec![0.0; n * n * n];
    let uniform = weighting == TripleWeighting::Uniform;
    for sentence in store.sentences() {
        let len = sentence.len();
        let tok = |p: usize| sentence[p - 1] as usize;
        for p in 1..=len {
            for r in p + 1..=(p + window).min(len) {
                if tok(p) == tok(r) {
                    continue;
                }
                let (q_lo, q_hi) = match slot {
                    Slot::Between => (p + 1, r.saturating_sub(1)),
                    Slot::Before => (if p > window { p - window } else { 1 }, p.saturating_sub(1)),
                    Slot::After => (r + 1, (r + window).min(len)),
                };
                for q in q_lo..=q_hi.min(len) {
                    let w = if uniform {
                        1.0
                    } else {
                        match slot {
                            Slot::Between => (1.0 / (q - p) as f64).max(1.0 / (r - q) as f64),
                            Slot::Before => 1.0 / (p - q) as f64,
                            Slot::After => 1.0 / (q - r) as f64,
                        }
                    };
                    y[(tok(p) * n + tok(q)) * n + tok(r)] += w;
                }
            }
        }
    }
    BruteTriples { n, y }
}

const TOL: f64 = 1e-12;

fn expect(label: String, got: f64, want: f64) -> Result<(), String> {
    if (got - want).abs() <= TOL {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, oracle says {want} (|diff| = {})", (got - want).abs()))
    }
}

/// Compare fast pair counts, triple marginals, and per-pair slices against
/// exhaustive enumeration. Absolute tolerance 1e-12.
pub fn check_corpus_counts(store: &SentenceStore, window: usize, weighting: TripleWeighting) -> Result<(), String> {
    let n = store.vocab_size();
    let stats = cooccur::count_pairs(store, window);
    let brute = brute_pair_counts(store, window);
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            expect(format!("x[{i},{j}]"), stats.x(i, j), brute.x(i, j))?;
        }
        expect(format!("x[{i},*]"), stats.row_sum(i), brute.row_sum(i))?;
    }
    expect("x[*,*]".into(), stats.total(), brute.total())?;

    let tstats = cooccur::count_triple_marginals(store, window, weighting);
    let index = InvertedIndex::build(store);
    for slot in Slot::ALL {
        let name = slot.name();
        let marg = tstats.slot(slot);
        let brute = brute_triple_counts(store, window, slot, weighting);
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                expect(format!("{name} y[{i},{j},*]"), marg.ij.get(i, j), brute.ij(i, j))?;
                expect(format!("{name} y[{i},*,{j}]"), marg.ik.get(i, j), brute.ik(i, j))?;
                expect(format!("{name} y[*,{i},{j}]"), marg.jk.get(i, j), brute.jk(i, j))?;
            }
            expect(format!("{name} y[{i},*,*]"), marg.i[i as usize], brute.i_marg(i))?;
            expect(format!("{name} y[*,{i},*]"), marg.j[i as usize], brute.j_marg(i))?;
            expect(format!("{name} y[*,*,{i}]"), marg.k[i as usize], brute.k_marg(i))?;
        }
        expect(format!("{name} y[*,*,*]"), marg.total, brute.total())?;
        for i in 0..n as u32 {
            for k in 0..n as u32 {
                if i == k {
                    continue;
                }
                let slice = cooccur::extract_triple_slice(store, &index, i, k, slot, window, weighting)
                    .map_err(|e| e.to_string())?;
                for j in 0..n as u32 {
                    expect(format!("{name} slice[{i},{j},{k}]"), slice.get(j), brute.get(i, j, k))?;
                }
                expect(format!("{name} slice sum ({i},{k})"), slice.sum(), brute.ik(i, k))?;
            }
        }
    }
    Ok(())
}

/// Run the counting oracle over a batch of seeded random corpora
/// (the acceptance-criterion corpus shape). Returns corpora checked.
pub fn counting_suite(corpora: usize, max_vocab: usize, max_sentences: usize, max_len: usize) -> Result<usize, String> {
    for seed in 0..corpora as u64 {
        let store = random_corpus(seed, max_vocab, max_sentences, max_len);
        let window = 2 + (seed as usize % 9);
        for weighting in [TripleWeighting::Distance, TripleWeighting::Uniform] {
            check_corpus_counts(&store, window, weighting).map_err(|e| format!("corpus seed {seed}, window {window}: {e}"))?;
        }
    }
    Ok(corpora)
}

pub struct SiIdentityStats {
    pub corpora: usize,
    pub triples: usize,
    pub max_residual: f64,
}

/// Verify the SI identities on random tiny corpora:
/// PMI(i,j) + PMI(j,k) - SI1 = SI3 and SI2 - PMI(i,j) - PMI(j,k) = SI4
/// exactly (<= 1e-9) at alpha = 0 for every observed triple, with the
/// residual shrinking monotonically over alpha in {1e-3, 1e-4, 1e-5}.
pub fn si_identity_suite(corpora: usize, window: usize) -> Result<SiIdentityStats, String> {
    use crate::measures::{self, SiMeasure, SmoothingConfig, TriplePair};

    const ALPHAS: [f64; 3] = [1e-3, 1e-4, 1e-5];
    let mut triples = 0usize;
    let mut max_residual = 0.0f64;
    for seed in 0..corpora as u64 {
        let store = random_corpus(seed.wrapping_add(500), 8, 6, 10);
        let n = store.vocab_size();
        let index = InvertedIndex::build(&store);
        let tstats = cooccur::count_triple_marginals(&store, window, TripleWeighting::Distance);
        let mut alpha_max = [0.0f64; 3];
        for slot in Slot::ALL {
            for i in 0..n as u32 {
                for k in 0..n as u32 {
                    if i == k {
                        continue;
                    }
                    let slice = cooccur::extract_triple_slice(&store, &index, i, k, slot, window, TripleWeighting::Distance)
                        .map_err(|e| e.to_string())?;
                    for &(j, _) in slice.entries() {
                        let eval = |alpha: f64| -> Result<(f64, f64), String> {
                            let cfg = SmoothingConfig::new(alpha, n);
                            let err = |e: measures::MeasureError| e.to_string();
                            let pmi_ij = measures::pmi_triple(&tstats, slot, TriplePair::Ij, i, j, &cfg).map_err(err)?;
                            let pmi_jk = measures::pmi_triple(&tstats, slot, TriplePair::Jk, j, k, &cfg).map_err(err)?;
                            let si1 = measures::si(SiMeasure::Si1, &tstats, &slice, j, &cfg).map_err(err)?;
                            let si2 = measures::si(SiMeasure::Si2, &tstats, &slice, j, &cfg).map_err(err)?;
                            let si3 = measures::si(SiMeasure::Si3, &tstats, &slice, j, &cfg).map_err(err)?;
                            let si4 = measures::si(SiMeasure::Si4, &tstats, &slice, j, &cfg).map_err(err)?;
                            Ok(((pmi_ij + pmi_jk - si1 - si3).abs(), (si2 - pmi_ij - pmi_jk - si4).abs()))
                        };
                        let (r1, r2) = eval(0.0)?;
                        if r1 > 1e-9 || r2 > 1e-9 {
                            return Err(format!(
                                "corpus seed {seed} {slot:?} triple ({i},{j},{k}): identity residuals {r1:e}, {r2:e} at alpha = 0"
                            ));
                        }
                        max_residual = max_residual.max(r1).max(r2);
                        triples += 1;
                        for (idx, &alpha) in ALPHAS.iter().enumerate() {
                            let (r1, r2) = eval(alpha)?;
                            alpha_max[idx] = alpha_max[idx].max(r1).max(r2);
                        }
                    }
                }
            }
        }
        // monotone trend: residual shrinks with alpha (fp-noise slack)
        if alpha_max[0] + 1e-12 < alpha_max[1] || alpha_max[1] + 1e-12 < alpha_max[2] {
            return Err(format!("corpus seed {seed}: residual trend not monotone over alphas: {alpha_max:?}"));
        }
    }
    if triples == 0 {
        return Err("identity suite generated no valid triples".into());
    }
    Ok(SiIdentityStats { corpora, triples, max_residual })
}

/// Ridge regression via explicit Gauss-Jordan inversion of the normal
/// matrix. Slow and blunt on purpose; used to cross-check the Cholesky path.
pub fn ridge_via_inverse(rows: &[Vec<f64>], targets: &[f64], lambda: f64, d: usize) -> Option<Vec<f64>> {
    let mut m = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for (phi, &t) in rows.iter().zip(targets) {
        for a in 0..d {
            for b in 0..d {
                m[a * d + b] += phi[a] * phi[b];
            }
            rhs[a] += phi[a] * t;
        }
    }
    for i in 0..d {
        m[i * d + i] += lambda;
    }
    let inv = invert(&m, d)?;
    let mut w = vec![0.0; d];
    for a in 0..d {
        for b in 0..d {
            w[a] += inv[a * d + b] * rhs[b];
        }
    }
    Some(w)
}

fn invert(m: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv: Vec<f64> = (0..d * d).map(|idx| if idx / d == idx % d { 1.0 } else { 0.0 }).collect();
    for col in 0..d {
        let pivot = (col..d).max_by(|&x, &y| a[x * d + col].abs().partial_cmp(&a[y * d + col].abs()).unwrap())?;
        if a[pivot * d + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..d {
                a.swap(col * d + j, pivot * d + j);
                inv.swap(col * d + j, pivot * d + j);
            }
        }
        let diag = a[col * d + col];
        for j in 0..d {
            a[col * d + j] /= diag;
            inv[col * d + j] /= diag;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = a[row * d + col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..d {
                a[row * d + j] -= factor * a[col * d + j];
                inv[row * d + j] -= factor * inv[col * d + j];
            }
        }
    }
    Some(inv)
}

/// Compare the fast Spearman implementation against the definitional one on
/// random permutations, with and without ties.
pub fn spearman_suite(trials: usize) -> Result<usize, String> {
    use rand::seq::SliceRandom;
    let mut rng = rng::stream(1, "oracle.spearman-suite");
    let mut checked = 0usize;
    for trial in 0..trials {
        let n = rng.gen_range(3..30usize);
        let mut a: Vec<f64> = (0..n).map(|i| i as f64).collect();
        a.shuffle(&mut rng);
        let b: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.gen_range(0..5) as f64).collect()
        } else {
            let mut b: Vec<f64> = (0..n).map(|i| i as f64).collect();
            b.shuffle(&mut rng);
            b
        };
        if b.iter().all(|&v| v == b[0]) {
            continue;
        }
        let ours = crate::eval::spearman(&a, &b).map_err(|e| e.to_string())?;
        let reference = definitional_spearman(&a, &b);
        if (ours - reference).abs() > 1e-12 {
            return Err(format!("trial {trial}: {ours} vs definitional {reference}"));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Compare the Cholesky ridge solver against Gauss-Jordan inversion on
/// random systems.
pub fn ridge_suite(trials: usize) -> Result<usize, String> {
    let mut rng = rng::stream(2, "oracle.ridge-suite");
    for trial in 0..trials {
        let d = rng.gen_range(2..10usize);
        let rows: Vec<Vec<f64>> = (0..d + 6).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let targets: Vec<f64> = (0..rows.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut prob = crate::solve::RidgeProblem::new(d);
        for (row, &t) in rows.iter().zip(&targets) {
            prob.add_row(row, t);
        }
        let ours = prob.solve(1e-6).map_err(|e| e.to_string())?;
        let reference = ridge_via_inverse(&rows, &targets, 1e-6, d).ok_or("oracle inversion failed")?;
        let diff = ours.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff > 1e-6 {
            return Err(format!("trial {trial}: solver disagreement {diff}"));
        }
    }
    Ok(trials)
}

/// Spearman rank correlation straight from the definition: average ranks
/// computed by counting, then the textbook correlation of the rank vectors.
pub fn definitional_spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |xs: &[f64]| -> Vec<f64> {
        xs.iter()
            .map(|&x| {
                let less = xs.iter().filter(|&&y| y < x).count() as f64;
                let equal = xs.iter().filter(|&&y| y == x).count() as f64;
                less + (equal - 1.0) / 2.0 + 1.0
            })
            .collect()
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = ra.len() as f64;
    let mean_a = ra.iter().sum::<f64>() / n;
    let mean_b = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a) * (x - mean_a);
        var_b += (y - mean_b) * (y - mean_b);
    }
    cov / (var_a * var_b).sqrt()
}
