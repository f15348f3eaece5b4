//! End-to-end library pipeline on a synthetic corpus with a planted pattern:
//! a marker word always appears between related pairs, so the fitted
//! relation vectors should score the marker above random context words.

use rand::Rng;

use relvec_core::cooccur::{count_pairs, count_triple_marginals, TripleWeighting};
use relvec_core::corpus::{encode_corpus, preprocess, InvertedIndex, PreprocessOptions, Vocabulary};
use relvec_core::relvec::{relation_representation, RelvecConfig};
use relvec_core::rng;
use relvec_core::trainer::{build_context_sets, train, TrainConfig};

fn planted_marker_text(seed: u64, n_pairs: usize) -> (String, Vec<(String, String)>) {
    let mut rng = rng::stream(seed, "pipeline-corpus");
    let fillers: Vec<String> = (0..20).map(|i| format!("filler{i}")).collect();
    let mut text = String::new();
    let mut pairs = Vec::new();
    for p in 0..n_pairs {
        let src = format!("src{p}");
        let tgt = format!("tgt{p}");
        for _ in 0..4 {
            let f1 = &fillers[rng.gen_range(0..fillers.len())];
            let f2 = &fillers[rng.gen_range(0..fillers.len())];
            text.push_str(&format!("{f1} {src} marker {tgt} {f2}. "));
        }
        pairs.push((src, tgt));
    }
    for _ in 0..150 {
        let words: Vec<&str> = (0..6).map(|_| fillers[rng.gen_range(0..fillers.len())].as_str()).collect();
        text.push_str(&words.join(" "));
        text.push_str(". ");
    }
    (text, pairs)
}

#[test]
fn planted_marker_dominates_relation_vectors() {
    let (text, pairs) = planted_marker_text(11, 20);
    let sentences = preprocess(&text, &PreprocessOptions::default());
    let vocab = Vocabulary::build(&sentences, 1).unwrap();
    let store = encode_corpus(&sentences, &vocab);
    let index = InvertedIndex::build(&store);
    let window = 10;
    let stats = count_pairs(&store, window);
    let csets = build_context_sets(&stats, 4);
    let tc = TrainConfig { dims: 8, epochs: 30, seed: 4, window, ..Default::default() };
    let model = train(&stats, &csets, &tc).unwrap();
    let tstats = count_triple_marginals(&store, window, TripleWeighting::Distance);

    let marker = vocab.id("marker").unwrap();
    let non_markers: Vec<u32> = (0..20).map(|i| vocab.id(&format!("filler{i}")).unwrap()).collect();
    let cfg = RelvecConfig { seed: 4, ..Default::default() };
    let mut rng = rng::stream(7, "pipeline-probe");
    let mut good = 0usize;
    for (src, tgt) in &pairs {
        let i = vocab.id(src).unwrap();
        let k = vocab.id(tgt).unwrap();
        let rep = relation_representation(&model, &store, &index, &tstats, i, k, &cfg).unwrap();
        let r = rep.block(0);
        let score = |j: u32| -> f64 {
            r.iter().zip(model.ctx_vec(j)).map(|(a, b)| a * b).sum::<f64>() + model.bias(j)
        };
        let marker_score = score(marker);
        let beats_all = (0..10).all(|_| {
            let u = non_markers[rng.gen_range(0..non_markers.len())];
            marker_score > score(u)
        });
        if beats_all {
            good += 1;
        }
    }
    assert!(good * 100 >= pairs.len() * 95, "only {good}/{} pairs rank the marker first", pairs.len());
}

#[test]
fn pipeline_reaches_relation_vectors_from_raw_text() {
    // a compact smoke test over the whole library surface
    let (text, pairs) = planted_marker_text(3, 6);
    let sentences = preprocess(&text, &PreprocessOptions::default());
    let vocab = Vocabulary::build(&sentences, 2).unwrap();
    let store = encode_corpus(&sentences, &vocab);
    let index = InvertedIndex::build(&store);
    let stats = count_pairs(&store, 10);
    let csets = build_context_sets(&stats, 1);
    let tc = TrainConfig { dims: 6, epochs: 12, seed: 1, window: 10, ..Default::default() };
    let model = train(&stats, &csets, &tc).unwrap();
    let tstats = count_triple_marginals(&store, 10, TripleWeighting::Distance);
    let cfg = RelvecConfig::default();
    let (src, tgt) = &pairs[0];
    if let (Some(i), Some(k)) = (vocab.id(src), vocab.id(tgt)) {
        let rep = relation_representation(&model, &store, &index, &tstats, i, k, &cfg).unwrap();
        assert_eq!(rep.vector().len(), 8 * model.d());
        assert!(rep.vector().iter().all(|v| v.is_finite()));
    } else {
        panic!("planted pair fell below min_count");
    }
}
