//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test -p relvec-cli --test acceptance -- --nocapture` to
//! see them). Oracles are the brute-force reference implementations; no
//! criterion shares a code path with the implementation it checks.

mod support;

use std::time::Instant;

use rand::Rng;
use relvec_core::cooccur::{count_triple_marginals, Slot, TripleWeighting};
use relvec_core::corpus::SentenceStore;
use relvec_core::measures::{normalization_check, SmoothingConfig};
use relvec_core::oracle;
use relvec_core::relvec::{fit_relation_vector, RelationContextSet};
use relvec_core::rng;
use relvec_core::trainer::{fold_in, train_with_log, EmbeddingModel, ModelMeta, TrainConfig};

use support::*;

#[test]
fn criterion_1_counting_oracle_equivalence() {
    criterion(1, "counting oracle equivalence", || {
        let start = Instant::now();
        let corpora = oracle::counting_suite(50, 12, 8, 15)?;
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() >= 10.0 {
            return Err(format!("took {elapsed:?}, budget is 10 s"));
        }
        Ok(format!("{corpora} corpora in {elapsed:?}"))
    });
}

#[test]
fn criterion_2_si_identity_suite() {
    criterion(2, "SI identity suite", || {
        let stats = oracle::si_identity_suite(20, 5)?;
        Ok(format!("{} triples, max residual {:.2e}", stats.triples, stats.max_residual))
    });
}

#[test]
fn criterion_3_probability_normalization() {
    criterion(3, "probability normalization", || {
        let alphas = [0.1, 1e-3, 1e-5];
        let mut checked = 0usize;
        let mut corpora: Vec<SentenceStore> = vec![SentenceStore::from_sentences(Vec::new(), 4)];
        for seed in 0..6u64 {
            corpora.push(oracle::random_corpus(seed, 10, 6, 9));
        }
        for (idx, store) in corpora.iter().enumerate() {
            let tstats = count_triple_marginals(store, 4, TripleWeighting::Distance);
            for slot in Slot::ALL {
                for &alpha in &alphas {
                    let cfg = SmoothingConfig::new(alpha, store.vocab_size());
                    let sum = normalization_check(&tstats, slot, &cfg).map_err(|e| e.to_string())?;
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(format!("corpus {idx} {slot:?} alpha {alpha}: sum {sum}"));
                    }
                    checked += 1;
                }
            }
        }
        Ok(format!("{checked} normalizations within 1e-9, empty corpus included"))
    });
}

#[test]
fn criterion_4_low_rank_recovery() {
    criterion(4, "low-rank recovery", || {
        let start = Instant::now();
        let set = planted_training_set(77, 200, 10);
        let cfg = TrainConfig { dims: 10, epochs: 200, seed: 5, window: 10, ..Default::default() };
        let (model, log) = train_with_log(&set, &cfg).map_err(|e| e.to_string())?;
        if !model.is_finite() {
            return Err("model has non-finite parameters".into());
        }
        let rmse = (log.epochs.last().unwrap().sse / set.len() as f64).sqrt();
        if rmse > 0.05 {
            return Err(format!("RMSE {rmse} > 0.05 after 200 epochs"));
        }
        // Per-5-epoch mean of the residual-sum trajectory must be
        // non-increasing (relative tolerance 1e-6). The Eq-(2) value under
        // the live sigma^2 self-normalizes to the term count at every
        // refresh, so the residual sum is the meaningful monotone
        // diagnostic; both are recorded in the log.
        let means: Vec<f64> = (0..log.epochs.len() / 5)
            .map(|w| log.epochs[5 * w..5 * w + 5].iter().map(|e| e.sse).sum::<f64>() / 5.0)
            .collect();
        for w in 1..means.len() {
            if means[w] > means[w - 1] * (1.0 + 1e-6) {
                return Err(format!(
                    "window {w} mean {} exceeds window {} mean {}",
                    means[w],
                    w - 1,
                    means[w - 1]
                ));
            }
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() >= 120.0 {
            return Err(format!("took {elapsed:?}, budget is 2 min"));
        }
        Ok(format!("RMSE {rmse:.4}, {} monotone windows, {elapsed:?}", means.len()))
    });
}

#[test]
fn criterion_5_least_squares_exactness() {
    criterion(5, "least-squares exactness", || {
        let mut rng = rng::stream(41, "acceptance.lsq");
        let mut worst_rel = 0.0f64;
        let mut worst_opt = 0.0f64;
        for trial in 0..100u64 {
            let d = rng.gen_range(2..=20usize);
            let rows = if trial % 3 == 0 { rng.gen_range(1..d.max(2)) } else { rng.gen_range(d..=100) };
            let n = rows.max(d) + rng.gen_range(0..5);
            let c: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let meta = ModelMeta { window: 10, alpha: 1e-5, epochs: 0, seed: trial };
            let model = EmbeddingModel::from_parts(d, vec![0.0; n * d], c, b, vec![1.0; n], meta);
            let lambda = [1e-6, 1e-4, 1e-2][trial as usize % 3];
            let members: Vec<(u32, f64)> = (0..rows as u32).map(|j| (j, rng.gen_range(-3.0..3.0))).collect();

            // independent dense oracle on the same observations
            let phi: Vec<Vec<f64>> = members.iter().map(|&(j, _)| model.ctx_vec(j).to_vec()).collect();
            let targets: Vec<f64> = members.iter().map(|&(j, t)| t - model.bias(j)).collect();
            let reference = oracle::ridge_via_inverse(&phi, &targets, lambda, d).ok_or("oracle inversion failed")?;
            let ref_norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();

            let check = |got: &[f64], label: &str, worst_rel: &mut f64, worst_opt: &mut f64| -> Result<(), String> {
                let diff = got.iter().zip(&reference).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let rel = diff / ref_norm.max(1.0);
                *worst_rel = worst_rel.max(rel);
                if rel > 1e-6 {
                    return Err(format!("trial {trial} {label}: relative error {rel:e}"));
                }
                // first-order optimality: sum_j res_j phi_j + lambda w = 0
                let mut grad = vec![0.0; d];
                for (row, &t) in phi.iter().zip(&targets) {
                    let res: f64 = row.iter().zip(got).map(|(p, x)| p * x).sum::<f64>() - t;
                    for (g, p) in grad.iter_mut().zip(row) {
                        *g += res * p;
                    }
                }
                for (g, x) in grad.iter_mut().zip(got) {
                    *g += lambda * x;
                }
                let opt = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
                *worst_opt = worst_opt.max(opt);
                if opt > 1e-8 {
                    return Err(format!("trial {trial} {label}: optimality residual {opt:e}"));
                }
                Ok(())
            };

            let rcs = RelationContextSet::from_members(0, 1, Slot::Between, members.clone());
            let fit = fit_relation_vector(&model, &rcs, lambda).map_err(|e| e.to_string())?;
            check(&fit.vector, "fit_relation_vector", &mut worst_rel, &mut worst_opt)?;

            let folded = fold_in(&model, &members, lambda).map_err(|e| e.to_string())?;
            check(&folded, "fold_in", &mut worst_rel, &mut worst_opt)?;
        }
        Ok(format!("100 instances; worst relative error {worst_rel:.2e}, worst optimality residual {worst_opt:.2e}"))
    });
}

#[test]
fn criterion_6_planted_relation_end_to_end() {
    criterion(6, "planted-relation end to end", || {
        let start = Instant::now();
        let fixture = planted_fixture();
        let r2 = parse_induction_tsv(&run_planted_induction("r2", &[], "induction-r2.tsv"));
        let avg = parse_induction_tsv(&run_planted_induction("avg", &[], "induction-avg.tsv"));
        let diff = parse_induction_tsv(&run_planted_induction("diff", &[], "induction-diff.tsv"));
        let acc_of = |rows: &[(String, [f64; 4])], name: &str| -> Result<f64, String> {
            rows.iter()
                .find(|(rel, _)| rel == name)
                .map(|(_, vals)| vals[0])
                .ok_or_else(|| format!("relation {name} missing from output"))
        };
        let frequent = &fixture.corpus.frequent_marker_relation;
        let r2_macro = r2.1[0];
        let r2_freq = acc_of(&r2.0, frequent)?;
        let avg_freq = acc_of(&avg.0, frequent)?;
        let diff_freq = acc_of(&diff.0, frequent)?;
        if r2_macro < 0.90 {
            return Err(format!("R2 macro accuracy {r2_macro:.4} < 0.90"));
        }
        if r2_freq <= avg_freq {
            return Err(format!("R2 accuracy {r2_freq:.4} does not exceed Avg {avg_freq:.4} on {frequent}"));
        }
        if diff_freq > avg_freq {
            return Err(format!("Diff accuracy {diff_freq:.4} exceeds Avg {avg_freq:.4} on {frequent}"));
        }
        let elapsed = start.elapsed();
        if elapsed.as_secs_f64() >= 300.0 {
            return Err(format!("took {elapsed:?}, budget is 5 min"));
        }
        Ok(format!(
            "R2 macro {r2_macro:.4}; on {frequent}: R2 {r2_freq:.4} > Avg {avg_freq:.4} >= Diff {diff_freq:.4}; {elapsed:?}"
        ))
    });
}

#[test]
fn criterion_7_ablation_flags() {
    criterion(7, "ablation flags", || {
        let fixture = planted_fixture();
        let dir_s = fixture.dir.to_str().unwrap();
        // no-position-weighting mode needs its own triple marginals
        let uniform_a = fixture.dir.join("triples-uniform-a.bin");
        let uniform_b = fixture.dir.join("triples-uniform-b.bin");
        for out in [&uniform_a, &uniform_b] {
            let mut args = vec!["count-triples", "--corpus-dir", dir_s, "--out", out.to_str().unwrap(), "--weighting", "uniform"];
            args.extend_from_slice(&PLANTED_FLAGS);
            run_bin(&args);
        }
        if std::fs::read(&uniform_a).unwrap() != std::fs::read(&uniform_b).unwrap() {
            return Err("uniform triple counting is not deterministic".into());
        }
        let uniform_flags = ["--weighting", "uniform", "--triples", uniform_a.to_str().unwrap()];
        let run_a = run_planted_induction("r2", &uniform_flags, "induction-noweight-a.tsv");
        let run_b = run_planted_induction("r2", &uniform_flags, "induction-noweight-b.tsv");
        if std::fs::read(&run_a).unwrap() != std::fs::read(&run_b).unwrap() {
            return Err("weighting=off evaluation is not deterministic".into());
        }
        let (rows, macro_row) = parse_induction_tsv(&run_a);
        if rows.len() != 3 || macro_row.iter().any(|v| !v.is_finite()) {
            return Err(format!("weighting=off output has unexpected shape: {} relations", rows.len()));
        }
        let noweight_macro = macro_row[0];

        let between_a = run_planted_induction("r2", &["--blocks", "between-only"], "induction-between-a.tsv");
        let between_b = run_planted_induction("r2", &["--blocks", "between-only"], "induction-between-b.tsv");
        if std::fs::read(&between_a).unwrap() != std::fs::read(&between_b).unwrap() {
            return Err("between-only evaluation is not deterministic".into());
        }
        let (rows, macro_row) = parse_induction_tsv(&between_a);
        if rows.len() != 3 || macro_row.iter().any(|v| !v.is_finite()) {
            return Err(format!("between-only output has unexpected shape: {} relations", rows.len()));
        }
        Ok(format!(
            "weighting=off macro acc {noweight_macro:.4}, between-only macro acc {:.4}; both deterministic",
            macro_row[0]
        ))
    });
}

#[test]
fn criterion_8_spearman_oracle() {
    criterion(8, "spearman oracle", || {
        let checked = oracle::spearman_suite(100)?;
        Ok(format!("{checked} rankings match the definitional computation"))
    });
}

#[test]
fn criterion_9_pipeline_determinism() {
    criterion(9, "pipeline determinism", || {
        let base = scratch_dir("determinism");
        let corpus = planted_relation_corpus(23);
        let raw = base.join("raw.txt");
        std::fs::write(&raw, &corpus.text).map_err(|e| e.to_string())?;
        // a small dataset and pair list keep the double run quick
        let dataset = base.join("dataset.tsv");
        let lines: Vec<String> = corpus.relations[1].1[..12]
            .iter()
            .map(|(s, t)| format!("rel1\t{s}\t{t}"))
            .collect();
        std::fs::write(&dataset, lines.join("\n")).map_err(|e| e.to_string())?;
        let pairs_list = base.join("pairs.txt");
        let pair_lines: Vec<String> = corpus.relations[0].1[..5].iter().map(|(s, t)| format!("{s} {t}")).collect();
        std::fs::write(&pairs_list, pair_lines.join("\n")).map_err(|e| e.to_string())?;

        let flags = ["--seed", "3", "--dims", "8", "--epochs", "10", "--min-count", "10", "--threads", "1"];
        let artifacts = ["vocab.tsv", "corpus.enc", "index.bin", "pairs.bin", "triples.bin", "model.txt", "relvecs.tsv", "induction-r2.tsv"];
        let mut digests: Vec<Vec<Vec<u8>>> = Vec::new();
        for run in ["a", "b"] {
            let dir = base.join(run);
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let dir_s = dir.to_str().unwrap();
            run_bin(&with_flags(vec!["preprocess", "--input", raw.to_str().unwrap(), "--out-dir", dir_s], &flags));
            run_bin(&with_flags(vec!["count-pairs", "--corpus-dir", dir_s], &flags));
            run_bin(&with_flags(vec!["count-triples", "--corpus-dir", dir_s], &flags));
            run_bin(&with_flags(vec!["train", "--corpus-dir", dir_s], &flags));
            run_bin(&with_flags(vec!["relvec", "--corpus-dir", dir_s, "--pairs-list", pairs_list.to_str().unwrap()], &flags));
            let induction_out = dir.join("induction-r2.tsv");
            run_bin(&with_flags(
                vec![
                    "eval-induction",
                    "--corpus-dir",
                    dir_s,
                    "--dataset",
                    dataset.to_str().unwrap(),
                    "--featurizer",
                    "r2",
                    "--out",
                    induction_out.to_str().unwrap(),
                ],
                &flags,
            ));
            digests.push(
                artifacts
                    .iter()
                    .map(|name| std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing artifact {name}: {e}")))
                    .collect(),
            );
        }
        for (name, (a, b)) in artifacts.iter().zip(digests[0].iter().zip(&digests[1])) {
            if a != b {
                return Err(format!("artifact {name} differs between identical runs"));
            }
        }
        Ok(format!("{} artifacts byte-identical across two runs", artifacts.len()))
    });
}
