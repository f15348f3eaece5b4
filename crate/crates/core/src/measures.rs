//! Smoothed probability estimation and association measures.
//!
//! Two PMI variants live side by side and must not be conflated:
//! [`pmi_smoothed`] works over unordered pair counts (the embedding model's
//! event space), while [`pmi_triple`] works over ordered-triple marginals
//! (the event space of the SI measures). The SI identities only hold inside
//! the triple event space.

use thiserror::Error;

use crate::cooccur::{PairStats, SlotMarginals, TripleSlice, TripleStats};
use crate::trainer::EmbeddingModel;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("undefined value: zero count with alpha = 0 ({what})")]
    Undefined { what: &'static str },
    #[error("word id {id} out of range for vocabulary of size {n}")]
    IdOutOfRange { id: u32, n: usize },
    #[error("normalization check refused: n = {n} exceeds cap {cap}")]
    VocabTooLarge { n: usize, cap: usize },
}

/// Additive-smoothing configuration. `alpha = 0` is reserved for test and
/// oracle paths; production estimation keeps it positive so every value is
/// finite.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingConfig {
    pub alpha: f64,
    pub n: usize,
}

impl SmoothingConfig {
    pub fn new(alpha: f64, n: usize) -> Self {
        SmoothingConfig { alpha, n }
    }
}

/// Candidate smoothing values for held-out tuning.
pub const DEFAULT_ALPHA_GRID: [f64; 6] = [0.1, 0.01, 0.001, 1e-4, 1e-5, 1e-6];

/// Refusal cap for [`normalization_check`].
pub const NORMALIZATION_CAP: usize = 12;

fn log_ratio(count: f64, alpha: f64, total: f64, pseudo: f64, what: &'static str) -> Result<f64, MeasureError> {
    let num = count + alpha;
    if num <= 0.0 || total + pseudo <= 0.0 {
        return Err(MeasureError::Undefined { what });
    }
    Ok((num / (total + pseudo)).ln())
}

/// Smoothed PMI over unordered pair counts:
/// log P(i,j) / (P(i) P(j)) with P(i,j) = (x_ij + a) / (x_** + n^2 a) and
/// P(i) = (x_i* + a) / (x_** + n a).
pub fn pmi_smoothed(stats: &PairStats, i: u32, j: u32, cfg: &SmoothingConfig) -> Result<f64, MeasureError> {
    let n = cfg.n as f64;
    if i as usize >= cfg.n || j as usize >= cfg.n {
        let id = if i as usize >= cfg.n { i } else { j };
        return Err(MeasureError::IdOutOfRange { id, n: cfg.n });
    }
    let total = stats.total();
    let a = cfg.alpha;
    let lp_ij = log_ratio(stats.x(i, j), a, total, n * n * a, "x_ij")?;
    let lp_i = log_ratio(stats.row_sum(i), a, total, n * a, "x_i*")?;
    let lp_j = log_ratio(stats.row_sum(j), a, total, n * a, "x_*j")?;
    Ok(lp_ij - lp_i - lp_j)
}

/// Model-level PMI: PMI_W(i,j) = w_i . w~_j + b~_j, the low-rank
/// approximation the trainer fits to PMI_S.
pub fn pmi_model(model: &EmbeddingModel, i: u32, j: u32) -> Result<f64, MeasureError> {
    let n = model.n();
    if i as usize >= n || j as usize >= n {
        let id = if i as usize >= n { i } else { j };
        return Err(MeasureError::IdOutOfRange { id, n });
    }
    Ok(model.score(i, j))
}

/// The four generalizations of PMI to an ordered triple (i, j, k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiMeasure {
    Si1,
    Si2,
    Si3,
    Si4,
}

impl SiMeasure {
    pub const ALL: [SiMeasure; 4] = [SiMeasure::Si1, SiMeasure::Si2, SiMeasure::Si3, SiMeasure::Si4];

    pub fn id(self) -> u8 {
        match self {
            SiMeasure::Si1 => 1,
            SiMeasure::Si2 => 2,
            SiMeasure::Si3 => 3,
            SiMeasure::Si4 => 4,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        SiMeasure::ALL.into_iter().find(|m| m.id() == id)
    }
}

/// Smoothed log-probabilities over the ordered-triple event space of one slot.
struct TripleProbs<'a> {
    m: &'a SlotMarginals,
    n: f64,
    alpha: f64,
}

impl<'a> TripleProbs<'a> {
    fn new(m: &'a SlotMarginals, cfg: &SmoothingConfig) -> Self {
        TripleProbs { m, n: cfg.n as f64, alpha: cfg.alpha }
    }

    fn lp_triple(&self, y_ijk: f64) -> Result<f64, MeasureError> {
        log_ratio(y_ijk, self.alpha, self.m.total, self.n * self.n * self.n * self.alpha, "y_ijk")
    }

    fn lp_pair(&self, count: f64, what: &'static str) -> Result<f64, MeasureError> {
        log_ratio(count, self.alpha, self.m.total, self.n * self.n * self.alpha, what)
    }

    fn lp_word(&self, count: f64, what: &'static str) -> Result<f64, MeasureError> {
        log_ratio(count, self.alpha, self.m.total, self.n * self.alpha, what)
    }
}

fn check_id(id: u32, n: usize) -> Result<(), MeasureError> {
    if id as usize >= n {
        Err(MeasureError::IdOutOfRange { id, n })
    } else {
        Ok(())
    }
}

/// SI measure for the slice's ordered pair (i, k) and a context word j.
/// Counts come from the slice's slot so that y_ijk and the marginals share
/// one event space.
pub fn si(
    measure: SiMeasure,
    tstats: &TripleStats,
    slice: &TripleSlice,
    j: u32,
    cfg: &SmoothingConfig,
) -> Result<f64, MeasureError> {
    let (i, k) = (slice.i, slice.k);
    check_id(i, cfg.n)?;
    check_id(j, cfg.n)?;
    check_id(k, cfg.n)?;
    let m = tstats.slot(slice.slot);
    let p = TripleProbs::new(m, cfg);
    let lp_ijk = p.lp_triple(slice.get(j))?;
    let lp_j = p.lp_word(m.j[j as usize], "y_*j*")?;
    match measure {
        SiMeasure::Si1 => {
            let lp_ij = p.lp_pair(m.ij.get(i, j), "y_ij*")?;
            let lp_ik = p.lp_pair(m.ik.get(i, k), "y_i*k")?;
            let lp_jk = p.lp_pair(m.jk.get(j, k), "y_*jk")?;
            let lp_i = p.lp_word(m.i[i as usize], "y_i**")?;
            let lp_k = p.lp_word(m.k[k as usize], "y_**k")?;
            Ok(lp_ij + lp_ik + lp_jk - lp_i - lp_j - lp_k - lp_ijk)
        }
        SiMeasure::Si2 => {
            let lp_i = p.lp_word(m.i[i as usize], "y_i**")?;
            let lp_k = p.lp_word(m.k[k as usize], "y_**k")?;
            Ok(lp_ijk - lp_i - lp_j - lp_k)
        }
        SiMeasure::Si3 => {
            let lp_ik = p.lp_pair(m.ik.get(i, k), "y_i*k")?;
            Ok(lp_ijk - lp_ik - lp_j)
        }
        SiMeasure::Si4 => {
            let lp_ij = p.lp_pair(m.ij.get(i, j), "y_ij*")?;
            let lp_jk = p.lp_pair(m.jk.get(j, k), "y_*jk")?;
            Ok(lp_ijk + lp_j - lp_ij - lp_jk)
        }
    }
}

/// Which pair marginal of the triple event space a PMI is taken over.
#[derive(Debug, Clone, Copy)]
pub enum TriplePair {
    /// PMI(i, j) from y_ij*, y_i**, y_*j*
    Ij,
    /// PMI(j, k) from y_*jk, y_*j*, y_**k
    Jk,
}

/// PMI over ordered-triple marginals. This is the PMI that appears in the SI
/// identities; it is a different estimator from [`pmi_smoothed`].
pub fn pmi_triple(tstats: &TripleStats, slot: crate::cooccur::Slot, pair: TriplePair, a: u32, b: u32, cfg: &SmoothingConfig) -> Result<f64, MeasureError> {
    check_id(a, cfg.n)?;
    check_id(b, cfg.n)?;
    let m = tstats.slot(slot);
    let p = TripleProbs::new(m, cfg);
    match pair {
        TriplePair::Ij => {
            let lp_pair = p.lp_pair(m.ij.get(a, b), "y_ij*")?;
            let lp_a = p.lp_word(m.i[a as usize], "y_i**")?;
            let lp_b = p.lp_word(m.j[b as usize], "y_*j*")?;
            Ok(lp_pair - lp_a - lp_b)
        }
        TriplePair::Jk => {
            let lp_pair = p.lp_pair(m.jk.get(a, b), "y_*jk")?;
            let lp_a = p.lp_word(m.j[a as usize], "y_*j*")?;
            let lp_b = p.lp_word(m.k[b as usize], "y_**k")?;
            Ok(lp_pair - lp_a - lp_b)
        }
    }
}

/// Total smoothed probability mass over all n^3 ordered triples of one slot.
/// The y_ijk total is reconstructed from the y_i*k marginal family, so a
/// result far from 1 means the marginal families disagree.
pub fn normalization_check(tstats: &TripleStats, slot: crate::cooccur::Slot, cfg: &SmoothingConfig) -> Result<f64, MeasureError> {
    if cfg.n > NORMALIZATION_CAP {
        return Err(MeasureError::VocabTooLarge { n: cfg.n, cap: NORMALIZATION_CAP });
    }
    let m = tstats.slot(slot);
    let n = cfg.n as f64;
    let pseudo = n * n * n * cfg.alpha;
    if m.total + pseudo <= 0.0 {
        return Err(MeasureError::Undefined { what: "y_***" });
    }
    let observed: f64 = m.ik.iter().map(|(_, v)| v).sum();
    Ok((observed + pseudo) / (m.total + pseudo))
}
