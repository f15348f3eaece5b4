//! Corpus ingestion: raw text to a filtered, sentence-segmented,
//! integer-encoded corpus with an inverted index for pair-restricted
//! sentence retrieval.
//!
//! The pipeline order is fixed: segment, strip markup, strip punctuation,
//! lowercase, tokenize, min-count filter, reindex. Segmentation runs first so
//! it can still use case cues.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::files::{self, FileError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("min_count must be at least 1, got {0}")]
    InvalidMinCount(u64),
    #[error("no token reaches the min_count threshold; vocabulary would be empty")]
    EmptyVocabulary,
    #[error("word id {id} out of range for vocabulary of size {n}")]
    WordIdOutOfRange { id: u32, n: usize },
    #[error(transparent)]
    File(#[from] FileError),
}

/// Options for the rule-based preprocessor.
#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    /// Words (lowercase, dots removed) whose trailing period does not end a
    /// sentence.
    pub abbreviations: Vec<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            abbreviations: ["mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "eg", "ie", "etc", "fig", "vol", "approx"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

/// Split into sentences on `.`, `!`, `?` runs followed by whitespace (or end
/// of input), unless the period belongs to a listed abbreviation.
fn segment(text: &str, opts: &PreprocessOptions) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut idx = 0;
    while idx < chars.len() {
        let c = chars[idx];
        if c == '.' || c == '!' || c == '?' {
            // consume the full terminator run
            let mut end = idx + 1;
            while end < chars.len() && matches!(chars[end], '.' | '!' | '?') {
                end += 1;
            }
            let at_boundary = end >= chars.len() || chars[end].is_whitespace();
            let abbreviation = c == '.' && end == idx + 1 && {
                let mut w = String::new();
                let mut k = idx;
                while k > start && !chars[k - 1].is_whitespace() {
                    k -= 1;
                }
                for &ch in &chars[k..idx] {
                    if ch != '.' {
                        w.extend(ch.to_lowercase());
                    }
                }
                opts.abbreviations.iter().any(|a| a == &w)
            };
            if at_boundary && !abbreviation {
                sentences.push(chars[start..end].iter().collect());
                start = end;
            }
            idx = end;
        } else {
            idx += 1;
        }
    }
    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        if !tail.trim().is_empty() {
            sentences.push(tail);
        }
    }
    sentences
}

/// Replace `<...>` tag spans with spaces. A `<` without a matching `>` is
/// left alone; punctuation stripping removes it later.
fn strip_markup(sentence: &str) -> String {
    let mut out = String::with_capacity(sentence.len());
    let mut rest = sentence;
    while let Some(open) = rest.find('<') {
        match rest[open..].find('>') {
            Some(close) => {
                out.push_str(&rest[..open]);
                out.push(' ');
                rest = &rest[open + close + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

fn is_kept_hyphen(chars: &[char], i: usize) -> bool {
    (chars[i] == '-' || chars[i] == '\u{2010}')
        && i > 0
        && i + 1 < chars.len()
        && chars[i - 1].is_alphanumeric()
        && chars[i + 1].is_alphanumeric()
}

/// Replace Unicode punctuation with spaces, keeping hyphens inside tokens.
fn strip_punctuation(sentence: &str) -> String {
    let chars: Vec<char> = sentence.chars().collect();
    let mut out = String::with_capacity(sentence.len());
    for i in 0..chars.len() {
        let c = chars[i];
        if c.general_category_group() == GeneralCategoryGroup::Punctuation && !is_kept_hyphen(&chars, i) {
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

/// Run the full preprocessing pipeline over already-validated text.
pub fn preprocess(text: &str, opts: &PreprocessOptions) -> Vec<Vec<String>> {
    segment(text, opts)
        .iter()
        .filter_map(|sentence| {
            let cleaned = strip_punctuation(&strip_markup(sentence)).to_lowercase();
            let tokens: Vec<String> = cleaned.split_whitespace().map(|t| t.to_string()).collect();
            if tokens.is_empty() {
                None
            } else {
                Some(tokens)
            }
        })
        .collect()
}

/// Like [`preprocess`], but validates the byte stream first and reports the
/// offending offset on bad encodings.
pub fn preprocess_bytes(bytes: &[u8], opts: &PreprocessOptions) -> Result<Vec<Vec<String>>, CorpusError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::InvalidUtf8 { offset: e.valid_up_to() })?;
    Ok(preprocess(text, opts))
}

/// Bidirectional word/id map with per-id frequencies. Ids are assigned by
/// descending frequency, ties broken lexicographically, so they are stable
/// across runs on identical input.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    word_to_id: HashMap<String, u32>,
    id_to_word: Vec<String>,
    counts: Vec<u64>,
}

impl Vocabulary {
    pub fn build(sentences: &[Vec<String>], min_count: u64) -> Result<Self, CorpusError> {
        if min_count < 1 {
            return Err(CorpusError::InvalidMinCount(min_count));
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for sentence in sentences {
            for token in sentence {
                *freq.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(CorpusError::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut vocab = Vocabulary {
            word_to_id: HashMap::with_capacity(kept.len()),
            id_to_word: Vec::with_capacity(kept.len()),
            counts: Vec::with_capacity(kept.len()),
        };
        for (word, count) in kept {
            vocab.word_to_id.insert(word.to_string(), vocab.id_to_word.len() as u32);
            vocab.id_to_word.push(word.to_string());
            vocab.counts.push(count);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_word.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.word_to_id.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.id_to_word.get(id as usize).map(|s| s.as_str())
    }

    pub fn count(&self, id: u32) -> Option<u64> {
        self.counts.get(id as usize).copied()
    }

    pub fn write_tsv<W: Write>(&self, w: &mut W, echo: &[String]) -> Result<(), FileError> {
        for line in echo {
            writeln!(w, "# {line}")?;
        }
        for (word, count) in self.id_to_word.iter().zip(&self.counts) {
            writeln!(w, "{word}\t{count}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(r: &mut R) -> Result<Self, CorpusError> {
        let mut vocab = Vocabulary { word_to_id: HashMap::new(), id_to_word: Vec::new(), counts: Vec::new() };
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(FileError::Io)?;
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| FileError::parse("vocabulary", lineno + 1, "expected word<TAB>count"))?;
            let count: u64 = count
                .parse()
                .map_err(|_| FileError::parse("vocabulary", lineno + 1, format!("bad count {count:?}")))?;
            vocab.word_to_id.insert(word.to_string(), vocab.id_to_word.len() as u32);
            vocab.id_to_word.push(word.to_string());
            vocab.counts.push(count);
        }
        if vocab.id_to_word.is_empty() {
            return Err(CorpusError::EmptyVocabulary);
        }
        Ok(vocab)
    }

    pub fn save_tsv(&self, path: &Path, echo: &[String]) -> Result<(), CorpusError> {
        let mut w = BufWriter::new(File::create(path).map_err(FileError::Io)?);
        self.write_tsv(&mut w, echo)?;
        Ok(())
    }

    pub fn load_tsv(path: &Path) -> Result<Self, CorpusError> {
        Self::read_tsv(&mut BufReader::new(File::open(path).map_err(FileError::Io)?))
    }
}

/// Sentences as token ids. Positions are 1-based after out-of-vocabulary
/// removal; sentences that become empty are dropped.
#[derive(Debug, Clone)]
pub struct SentenceStore {
    sentences: Vec<Vec<u32>>,
    n: usize,
}

impl SentenceStore {
    pub fn sentences(&self) -> &[Vec<u32>] {
        &self.sentences
    }

    pub fn sentence(&self, idx: u32) -> &[u32] {
        &self.sentences[idx as usize]
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.n
    }

    pub fn from_sentences(sentences: Vec<Vec<u32>>, n: usize) -> Self {
        debug_assert!(sentences.iter().flatten().all(|&t| (t as usize) < n));
        let sentences = sentences.into_iter().filter(|s| !s.is_empty()).collect();
        SentenceStore { sentences, n }
    }

    pub fn write<W: Write>(&self, w: &mut W, echo: &[String]) -> Result<(), FileError> {
        for line in echo {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# words={}", self.n)?;
        for sentence in &self.sentences {
            let mut first = true;
            for id in sentence {
                if first {
                    first = false;
                } else {
                    write!(w, " ")?;
                }
                write!(w, "{id}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: &mut R) -> Result<Self, CorpusError> {
        let mut sentences = Vec::new();
        let mut n: usize = 0;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(FileError::Io)?;
            if let Some(rest) = line.strip_prefix("# words=") {
                n = rest
                    .parse()
                    .map_err(|_| FileError::parse("corpus", lineno + 1, "bad words= header"))?;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let ids = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| FileError::parse("corpus", lineno + 1, "bad token id"))?;
            sentences.push(ids);
        }
        for sentence in &sentences {
            for &id in sentence {
                if id as usize >= n {
                    return Err(CorpusError::WordIdOutOfRange { id, n });
                }
            }
        }
        Ok(SentenceStore { sentences, n })
    }

    pub fn save(&self, path: &Path, echo: &[String]) -> Result<(), CorpusError> {
        let mut w = BufWriter::new(File::create(path).map_err(FileError::Io)?);
        self.write(&mut w, echo)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::read(&mut BufReader::new(File::open(path).map_err(FileError::Io)?))
    }
}

/// Encode token sentences against a vocabulary, dropping out-of-vocabulary
/// tokens (positions reindex contiguously) and empty sentences.
pub fn encode_corpus(sentences: &[Vec<String>], vocab: &Vocabulary) -> SentenceStore {
    let encoded = sentences
        .iter()
        .filter_map(|sentence| {
            let ids: Vec<u32> = sentence.iter().filter_map(|t| vocab.id(t)).collect();
            if ids.is_empty() {
                None
            } else {
                Some(ids)
            }
        })
        .collect();
    SentenceStore { sentences: encoded, n: vocab.len() }
}

/// Map ids back to words; inverse of encoding up to OOV deletion.
pub fn decode_sentence(vocab: &Vocabulary, ids: &[u32]) -> Vec<String> {
    ids.iter().filter_map(|&id| vocab.word(id).map(|w| w.to_string())).collect()
}

const INDEX_MAGIC: &str = "RELVEC_INDEX_V1";

/// Per-word sorted sentence postings.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    postings: Vec<Vec<u32>>,
}

impl InvertedIndex {
    pub fn build(store: &SentenceStore) -> Self {
        let mut postings = vec![Vec::new(); store.vocab_size()];
        for (sid, sentence) in store.sentences().iter().enumerate() {
            for &token in sentence {
                let list: &mut Vec<u32> = &mut postings[token as usize];
                if list.last() != Some(&(sid as u32)) {
                    list.push(sid as u32);
                }
            }
        }
        InvertedIndex { postings }
    }

    pub fn vocab_size(&self) -> usize {
        self.postings.len()
    }

    pub fn postings(&self, id: u32) -> Result<&[u32], CorpusError> {
        self.postings
            .get(id as usize)
            .map(|v| v.as_slice())
            .ok_or(CorpusError::WordIdOutOfRange { id, n: self.postings.len() })
    }

    /// Sorted sentence indices containing both words (postings intersection).
    pub fn sentences_with_pair(&self, i: u32, k: u32) -> Result<Vec<u32>, CorpusError> {
        let a = self.postings(i)?;
        let b = self.postings(k)?;
        if i == k {
            return Ok(a.to_vec());
        }
        let mut out = Vec::new();
        let (mut x, mut y) = (0, 0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[x]);
                    x += 1;
                    y += 1;
                }
            }
        }
        Ok(out)
    }

    pub fn write<W: Write>(&self, w: &mut W, sentence_count: usize, echo: &[String]) -> Result<(), FileError> {
        files::write_header(
            w,
            INDEX_MAGIC,
            echo,
            &[("words", self.postings.len().to_string()), ("sentences", sentence_count.to_string())],
        )?;
        for list in &self.postings {
            files::write_varint(w, list.len() as u64)?;
            let mut prev = 0u32;
            for (idx, &sid) in list.iter().enumerate() {
                let delta = if idx == 0 { sid } else { sid - prev };
                files::write_varint(w, delta as u64)?;
                prev = sid;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: &mut R) -> Result<(Self, usize), CorpusError> {
        let header = files::read_header(r, "index", INDEX_MAGIC)?;
        let n: usize = header.require_parsed("index", "words")?;
        let sentence_count: usize = header.require_parsed("index", "sentences")?;
        let mut postings = Vec::with_capacity(n);
        for _ in 0..n {
            let len = files::read_varint(r, "index")? as usize;
            let mut list = Vec::with_capacity(len);
            let mut prev = 0u64;
            for idx in 0..len {
                let delta = files::read_varint(r, "index")?;
                let value = if idx == 0 { delta } else { prev + delta };
                if idx > 0 && delta == 0 {
                    return Err(CorpusError::File(FileError::parse("index", 0, "posting list not strictly ascending")));
                }
                list.push(value as u32);
                prev = value;
            }
            postings.push(list);
        }
        Ok((InvertedIndex { postings }, sentence_count))
    }

    pub fn save(&self, path: &Path, sentence_count: usize, echo: &[String]) -> Result<(), CorpusError> {
        let mut w = BufWriter::new(File::create(path).map_err(FileError::Io)?);
        self.write(&mut w, sentence_count, echo)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, usize), CorpusError> {
        Self::read(&mut BufReader::new(File::open(path).map_err(FileError::Io)?))
    }
}

/// Convenience: raw bytes for tests and the self-check corpora.
pub fn read_to_bytes(path: &Path) -> Result<Vec<u8>, CorpusError> {
    let mut buf = Vec::new();
    File::open(path).map_err(FileError::Io)?.read_to_end(&mut buf).map_err(FileError::Io)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prep(text: &str) -> Vec<Vec<String>> {
        preprocess(text, &PreprocessOptions::default())
    }

    #[test]
    fn preprocess_segments_then_lowercases() {
        assert_eq!(prep("The cat sat. Dogs bark!"), vec![vec!["the", "cat", "sat"], vec!["dogs", "bark"]]);
    }

    #[test]
    fn preprocess_strips_markup_and_punctuation() {
        assert_eq!(prep("<b>Paris</b>, France."), vec![vec!["paris", "france"]]);
    }

    #[test]
    fn preprocess_empty_input() {
        assert!(prep("").is_empty());
        assert!(prep("   \n\t ").is_empty());
    }

    #[test]
    fn preprocess_keeps_inner_hyphens() {
        assert_eq!(prep("A state-of-the-art system - really."), vec![vec!["a", "state-of-the-art", "system", "really"]]);
    }

    #[test]
    fn preprocess_respects_abbreviations() {
        assert_eq!(prep("Dr. Smith arrived. He left."), vec![vec!["dr", "smith", "arrived"], vec!["he", "left"]]);
    }

    #[test]
    fn preprocess_reports_bad_encoding_offset() {
        let bytes = b"abc\xffdef";
        match preprocess_bytes(bytes, &PreprocessOptions::default()) {
            Err(CorpusError::InvalidUtf8 { offset }) => assert_eq!(offset, 3),
            other => panic!("expected encoding error, got {other:?}"),
        }
    }

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn vocabulary_threshold_semantics() {
        let mut sentences = vec![toks(&["a"]); 12];
        sentences.extend(vec![toks(&["b"]); 9]);
        let vocab = Vocabulary::build(&sentences, 10).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.id("a"), Some(0));
        assert_eq!(vocab.id("b"), None);
    }

    #[test]
    fn vocabulary_min_count_one_keeps_everything() {
        let sentences = vec![toks(&["b", "a", "b"])];
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        assert_eq!(vocab.len(), 2);
        // descending frequency, then lexicographic
        assert_eq!(vocab.word(0), Some("b"));
        assert_eq!(vocab.word(1), Some("a"));
    }

    #[test]
    fn vocabulary_ties_break_lexicographically() {
        let sentences = vec![toks(&["z", "a", "m"])];
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        assert_eq!(vocab.word(0), Some("a"));
        assert_eq!(vocab.word(1), Some("m"));
        assert_eq!(vocab.word(2), Some("z"));
    }

    #[test]
    fn vocabulary_rejects_empty_result() {
        let sentences = vec![toks(&["a", "b"])];
        assert!(matches!(Vocabulary::build(&sentences, 10), Err(CorpusError::EmptyVocabulary)));
        assert!(matches!(Vocabulary::build(&sentences, 0), Err(CorpusError::InvalidMinCount(0))));
    }

    #[test]
    fn encode_drops_oov_and_reindexes() {
        let sentences = vec![toks(&["a", "zz", "b"]), toks(&["zz"]), toks(&["a", "b"])];
        let vocab = Vocabulary::build(&vec![toks(&["a", "b"]); 3], 1).unwrap();
        let store = encode_corpus(&sentences, &vocab);
        assert_eq!(store.len(), 2);
        assert_eq!(store.sentence(0), &[vocab.id("a").unwrap(), vocab.id("b").unwrap()]);
        assert_eq!(decode_sentence(&vocab, store.sentence(0)), toks(&["a", "b"]));
    }

    #[test]
    fn index_postings_and_pair_retrieval() {
        // sentences [[a,b],[b]]
        let vocab = Vocabulary::build(&[toks(&["a", "b"]), toks(&["b"])], 1).unwrap();
        let a = vocab.id("a").unwrap();
        let b = vocab.id("b").unwrap();
        let store = encode_corpus(&[toks(&["a", "b"]), toks(&["b"])], &vocab);
        let index = InvertedIndex::build(&store);
        assert_eq!(index.postings(a).unwrap(), &[0]);
        assert_eq!(index.postings(b).unwrap(), &[0, 1]);
        assert_eq!(index.sentences_with_pair(a, b).unwrap(), vec![0]);
        assert_eq!(index.sentences_with_pair(a, a).unwrap(), vec![0]);
        assert!(index.sentences_with_pair(a, 99).is_err());
    }

    #[test]
    fn index_handles_absent_word_and_empty_store() {
        let vocab = Vocabulary::build(&[toks(&["a", "b"])], 1).unwrap();
        // word b in vocab but absent from the encoded corpus
        let store = SentenceStore::from_sentences(vec![vec![0]], vocab.len());
        let index = InvertedIndex::build(&store);
        assert!(index.postings(1).unwrap().is_empty());
        let empty = SentenceStore::from_sentences(Vec::new(), 2);
        let index = InvertedIndex::build(&empty);
        assert!(index.postings(0).unwrap().is_empty());
    }

    #[test]
    fn pair_retrieval_matches_brute_force_on_random_corpora() {
        use rand::Rng;
        for seed in 0..20u64 {
            let mut rng = crate::rng::stream(seed, "corpus-pair-test");
            let n = rng.gen_range(2..8usize);
            let sentences: Vec<Vec<u32>> = (0..rng.gen_range(1..8usize))
                .map(|_| (0..rng.gen_range(1..10usize)).map(|_| rng.gen_range(0..n as u32)).collect())
                .collect();
            let store = SentenceStore::from_sentences(sentences, n);
            let index = InvertedIndex::build(&store);
            for i in 0..n as u32 {
                for k in 0..n as u32 {
                    let got = index.sentences_with_pair(i, k).unwrap();
                    let want: Vec<u32> = store
                        .sentences()
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.contains(&i) && s.contains(&k))
                        .map(|(sid, _)| sid as u32)
                        .collect();
                    assert_eq!(got, want, "seed {seed} pair ({i},{k})");
                }
            }
        }
    }

    #[test]
    fn vocab_file_round_trip() {
        let vocab = Vocabulary::build(&[toks(&["b", "a", "b", "c", "b", "a"])], 1).unwrap();
        let mut buf = Vec::new();
        vocab.write_tsv(&mut buf, &["config: seed=1".into()]).unwrap();
        let back = Vocabulary::read_tsv(&mut &buf[..]).unwrap();
        assert_eq!(back.len(), vocab.len());
        for id in 0..vocab.len() as u32 {
            assert_eq!(back.word(id), vocab.word(id));
            assert_eq!(back.count(id), vocab.count(id));
        }
    }

    #[test]
    fn store_and_index_file_round_trip() {
        let store = SentenceStore::from_sentences(vec![vec![0, 1, 2], vec![2, 2], vec![1]], 3);
        let mut buf = Vec::new();
        store.write(&mut buf, &[]).unwrap();
        let back = SentenceStore::read(&mut &buf[..]).unwrap();
        assert_eq!(back.sentences(), store.sentences());
        assert_eq!(back.vocab_size(), 3);

        let index = InvertedIndex::build(&store);
        let mut buf = Vec::new();
        index.write(&mut buf, store.len(), &[]).unwrap();
        let (back, count) = InvertedIndex::read(&mut &buf[..]).unwrap();
        assert_eq!(count, store.len());
        for id in 0..3u32 {
            assert_eq!(back.postings(id).unwrap(), index.postings(id).unwrap());
        }
    }
}
