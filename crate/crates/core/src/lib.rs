//! Corpus-to-vectors toolkit.
//!
//! Trains word embeddings whose scores w_i . w~_j + b~_j approximate smoothed
//! PMI, derives relation vectors for ordered word pairs from global triple
//! co-occurrence statistics by exact least squares against the fixed context
//! vectors, and ships evaluation harnesses for relation induction and
//! prototypicality ranking.
//!
//! Pipeline: [`corpus`] ingests raw text; [`cooccur`] counts pair and triple
//! statistics; [`measures`] turns counts into PMI and SI association scores;
//! [`trainer`] fits the embedding; [`relvec`] fits relation vectors and the
//! baselines; [`eval`] runs the benchmark protocols. [`oracle`] holds the
//! brute-force reference implementations that everything is tested against.

pub mod cooccur;
pub mod corpus;
pub mod eval;
pub mod files;
pub mod measures;
pub mod oracle;
pub mod relvec;
pub mod rng;
pub mod solve;
pub mod trainer;
