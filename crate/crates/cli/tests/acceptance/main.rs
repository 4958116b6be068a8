//! Acceptance suite: one test per release criterion, each printing its own
//! pass line with the measured numbers. Run with `cargo test --test
//! acceptance` (add `-- --nocapture` to see the measurements).

mod oracle;

use std::time::Instant;

use macroembed_core::analysis::{
    davies_bouldin, kmeans, silhouette, temporal_splits, upgma, DistanceMatrix,
};
use macroembed_core::embed::{decoupled_embedding, FeatureExtractor};
use macroembed_core::image::{vectorize, ImageGrid, Preprocessor, WORK_SIZE};
use macroembed_core::matcher::{build_dictionary, match_all, MatchConfig};
use macroembed_core::sparse::{solve_l1, Dictionary};
use macroembed_core::synth;
use macroembed_core::template_set::{construct_templates, ConstructConfig};
use macroembed_core::PixelVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// 1. Coordinate descent matches closed-form soft thresholding on
///    orthonormal dictionaries, and the enumeration oracle on tiny dense
///    instances.
#[test]
fn criterion_1_l1_solver_against_oracles() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);

    let mut worst_coeff_err = 0.0f64;
    for case in 0..100 {
        let n = rng.gen_range(4..=24);
        let m = rng.gen_range(1..=n.min(12));
        let cols = oracle::orthonormal_columns(&mut rng, n, m);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let corr_inf = cols
            .iter()
            .map(|c| oracle::dot(c, &y).abs())
            .fold(0.0f64, f64::max);
        if corr_inf == 0.0 {
            continue;
        }
        let lambda = corr_inf * rng.gen_range(0.05..0.95);
        let dict = Dictionary::new(
            cols.iter().map(|c| PixelVector::new(c.clone())).collect(),
            vec![0; m],
        )
        .unwrap();
        let code = solve_l1(&dict, &PixelVector::new(y.clone()), lambda, 1e-10, 2000).unwrap();
        assert!(code.converged, "case {case} did not converge");
        for (j, col) in cols.iter().enumerate() {
            let z = oracle::dot(col, &y);
            let expect = z.signum() * (z.abs() - lambda).max(0.0);
            let err = (code.coeffs[j] - expect).abs();
            worst_coeff_err = worst_coeff_err.max(err);
            assert!(
                err < 1e-6,
                "case {case} column {j}: got {} want {expect}",
                code.coeffs[j]
            );
        }
    }

    let mut worst_obj_gap = 0.0f64;
    for case in 0..60 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=4);
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = oracle::dot(&v, &v).sqrt();
                v.iter().map(|x| x / norm.max(1e-9)).collect()
            })
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lambda = rng.gen_range(0.01..0.8);
        let (_, best_obj) = oracle::lasso_optimum(&cols, &y, lambda);
        let dict = Dictionary::new(
            cols.iter().map(|c| PixelVector::new(c.clone())).collect(),
            vec![0; m],
        )
        .unwrap();
        let code = solve_l1(&dict, &PixelVector::new(y.clone()), lambda, 1e-12, 20_000).unwrap();
        let gap = (code.objective - best_obj).abs();
        worst_obj_gap = worst_obj_gap.max(gap);
        assert!(
            gap < 1e-4,
            "case {case}: objective {} vs oracle {best_obj}",
            code.objective
        );
        assert!(
            code.objective >= best_obj - 1e-9,
            "case {case}: solver beat the global optimum, oracle is wrong"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 took {elapsed:?}");
    println!(
        "[criterion 1] PASS - closed-form max err {worst_coeff_err:.2e}, \
         oracle objective gap {worst_obj_gap:.2e}, {elapsed:?}"
    );
}

/// 2. Occlusion-robust matching at the shipped defaults on a 20-template
///    corpus, plus noise fallback.
#[test]
fn criterion_2_occlusion_robust_matching() {
    let started = Instant::now();
    let templates = synth::gen_templates(20, 0xACC2, 96, 96).unwrap();
    let corpus = synth::gen_corpus(&templates, 10, 0.3, 0xACC2).unwrap();
    assert_eq!(corpus.len(), 200);

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2 + 1);
    let noise: Vec<ImageGrid> = (0..50)
        .map(|_| {
            ImageGrid::gray(
                96,
                96,
                (0..96 * 96).map(|_| rng.gen_range(0u32..=255) as f64).collect(),
            )
            .unwrap()
        })
        .collect();

    let pre = Preprocessor::fit(
        templates
            .iter()
            .chain(corpus.iter().map(|(m, _)| m))
            .chain(noise.iter()),
        WORK_SIZE,
        WORK_SIZE,
    )
    .unwrap();
    let groups: Vec<Vec<ImageGrid>> = templates.iter().map(|t| vec![t.clone()]).collect();
    let dictionary = build_dictionary(&groups, 3, 0, &pre).unwrap();
    let cfg = MatchConfig::default();

    let working: Vec<ImageGrid> = corpus.iter().map(|(m, _)| pre.apply(m).unwrap()).collect();
    let results = match_all(&dictionary, &working, &cfg).unwrap();
    let correct = results
        .iter()
        .zip(corpus.iter())
        .filter(|(r, (_, truth))| r.template_id == Some(*truth))
        .count();
    let accuracy = correct as f64 / corpus.len() as f64;

    let noise_working: Vec<ImageGrid> = noise.iter().map(|m| pre.apply(m).unwrap()).collect();
    let noise_results = match_all(&dictionary, &noise_working, &cfg).unwrap();
    let fallbacks = noise_results.iter().filter(|r| !r.matched).count();
    let fallback_rate = fallbacks as f64 / noise.len() as f64;

    let elapsed = started.elapsed();
    assert!(
        accuracy >= 0.95,
        "identification accuracy {accuracy} ({correct}/200)"
    );
    assert!(
        fallback_rate >= 0.9,
        "noise fallback rate {fallback_rate} ({fallbacks}/50)"
    );
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 2 took {elapsed:?}");
    println!(
        "[criterion 2] PASS - accuracy {correct}/200, noise fallback {fallbacks}/50, {elapsed:?}"
    );
}

/// 3. Template-set recovery: 4 templates x 25 macros, mean-abs pixel error
///    <= 2 gray levels against ground truth, member purity >= 90%.
#[test]
fn criterion_3_template_set_recovery() {
    let started = Instant::now();
    let k = 4;
    let templates = synth::gen_templates(k, 0xACC3, 96, 96).unwrap();
    // Round-robin order interleaves the four templates.
    let corpus = synth::gen_corpus(&templates, 25, 0.2, 0xACC3).unwrap();
    assert_eq!(corpus.len(), 100);

    let pre = Preprocessor::fit(corpus.iter().map(|(m, _)| m), WORK_SIZE, WORK_SIZE).unwrap();
    let working: Vec<ImageGrid> = corpus.iter().map(|(m, _)| pre.apply(m).unwrap()).collect();
    let library = construct_templates(&working, &ConstructConfig::default()).unwrap();

    assert_eq!(
        library.templates.len(),
        k,
        "recovered {} templates instead of {k}",
        library.templates.len()
    );

    // Ground truth in working space; differences survive mean subtraction
    // unchanged, so the comparison is on the 0-255 scale.
    let gt_working: Vec<ImageGrid> = templates.iter().map(|t| pre.apply(t).unwrap()).collect();
    let mut majorities = Vec::new();
    let mut worst_mae = 0.0f64;
    let mut worst_purity = 1.0f64;
    for tpl in &library.templates {
        let mut counts = vec![0usize; k];
        for &member in &tpl.members {
            counts[corpus[member].1] += 1;
        }
        let majority = (0..k).max_by_key(|&t| counts[t]).unwrap();
        majorities.push(majority);
        let purity = counts[majority] as f64 / tpl.members.len() as f64;
        worst_purity = worst_purity.min(purity);
        let mae = tpl
            .image
            .data()
            .iter()
            .zip(gt_working[majority].data())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / tpl.image.data().len() as f64;
        worst_mae = worst_mae.max(mae);
        assert!(purity >= 0.9, "template purity {purity}");
        assert!(mae <= 2.0, "mean abs pixel error {mae}");
    }
    majorities.sort_unstable();
    majorities.dedup();
    assert_eq!(majorities.len(), k, "every ground-truth template recovered");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 3 took {elapsed:?}");
    println!(
        "[criterion 3] PASS - 4/4 templates, worst purity {worst_purity:.3}, \
         worst mae {worst_mae:.3}, {elapsed:?}"
    );
}

/// 4. Decoupled embeddings cluster strictly better than naive flattened
///    pixels, across five k-means seeds.
#[test]
fn criterion_4_decoupling_benefit() {
    let started = Instant::now();
    let k = 6;
    let templates = synth::gen_templates(k, 0xACC4, 96, 96).unwrap();
    let corpus = synth::gen_corpus(&templates, 25, 0.3, 0xACC4).unwrap();

    let pre = Preprocessor::fit(
        templates.iter().chain(corpus.iter().map(|(m, _)| m)),
        WORK_SIZE,
        WORK_SIZE,
    )
    .unwrap();
    let groups: Vec<Vec<ImageGrid>> = templates.iter().map(|t| vec![t.clone()]).collect();
    let dictionary = build_dictionary(&groups, 3, 0, &pre).unwrap();
    let cfg = MatchConfig::default();
    let working: Vec<ImageGrid> = corpus.iter().map(|(m, _)| pre.apply(m).unwrap()).collect();
    let results = match_all(&dictionary, &working, &cfg).unwrap();

    let decoupled: Vec<Vec<f64>> = results
        .iter()
        .map(|r| decoupled_embedding(r, FeatureExtractor::RawPixels).unwrap())
        .collect();
    let naive: Vec<Vec<f64>> = working.iter().map(|w| vectorize(w).into_values()).collect();

    for seed in 0..5u64 {
        let dec = kmeans(&decoupled, k, seed, 300).unwrap();
        let nai = kmeans(&naive, k, seed, 300).unwrap();
        let dec_dbi = davies_bouldin(&decoupled, &dec.labels).unwrap();
        let nai_dbi = davies_bouldin(&naive, &nai.labels).unwrap();
        let dec_sil = silhouette(&decoupled, &dec.labels).unwrap().mean;
        let nai_sil = silhouette(&naive, &nai.labels).unwrap().mean;
        assert!(
            dec_dbi < nai_dbi,
            "seed {seed}: decoupled dbi {dec_dbi} !< naive dbi {nai_dbi}"
        );
        assert!(
            dec_sil > nai_sil,
            "seed {seed}: decoupled silhouette {dec_sil} !> naive {nai_sil}"
        );
        if seed == 0 {
            println!(
                "[criterion 4] seed 0 detail: dbi {dec_dbi:.4} vs {nai_dbi:.4}, \
                 silhouette {dec_sil:.4} vs {nai_sil:.4}"
            );
        }
    }
    let elapsed = started.elapsed();
    println!("[criterion 4] PASS - decoupled strictly better on both metrics, 5 seeds, {elapsed:?}");
}

/// 5. Hand-computed metric oracles, byte-identical Newick.
#[test]
fn criterion_5_metric_oracles() {
    let points = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![10.0, 0.0],
        vec![10.0, 1.0],
    ];
    let labels = vec![0, 0, 1, 1];
    let sil = silhouette(&points, &labels).unwrap();
    // a = 1, b = (10 + sqrt(101)) / 2 for every point by symmetry.
    let b = (10.0 + 101.0f64.sqrt()) / 2.0;
    let expected = (b - 1.0) / b;
    assert!((sil.mean - 0.9002).abs() < 1e-3, "silhouette mean {}", sil.mean);
    assert!((sil.mean - expected).abs() < 1e-12);

    let dbi = davies_bouldin(&points, &labels).unwrap();
    assert!((dbi - 0.1).abs() < 1e-9, "dbi {dbi}");

    let mut data = vec![0.0; 9];
    for (i, j, v) in [(0, 1, 2.0), (0, 2, 8.0), (1, 2, 8.0)] {
        data[i * 3 + j] = v;
        data[j * 3 + i] = v;
    }
    let d = DistanceMatrix::from_entries(3, data).unwrap();
    let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let newick = upgma(&d, &names).unwrap().to_newick();
    assert_eq!(newick, "((a:1,b:1):3,c:4);");
    println!("[criterion 5] PASS - silhouette {:.6}, dbi {dbi:.10}, newick {newick}", sil.mean);
}

/// 6. Temporal-split harness arithmetic.
#[test]
fn criterion_6_temporal_split_count() {
    let splits = temporal_splits(13);
    assert_eq!(splits.len(), 78);
    assert_eq!(splits.len(), 13 * 12 / 2);
    assert!(splits.iter().all(|(train, test)| train < test));
    println!("[criterion 6] PASS - 13 periods -> {} train/test runs", splits.len());
}

/// 7. Every subcommand, run twice with the same inputs and seed, produces
///    byte-identical outputs.
#[test]
fn criterion_7_cli_determinism() {
    use std::collections::BTreeMap;
    use std::fs;
    use std::path::Path;
    use std::process::Command;

    let started = Instant::now();

    fn run_pipeline(root: &Path) {
        let bin = env!("CARGO_BIN_EXE_macroembed");
        let run = |args: &[&str]| {
            let out = Command::new(bin)
                .args(args)
                .current_dir(root)
                .output()
                .expect("spawn macroembed");
            assert!(
                out.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        run(&["synth", "--templates", "2", "--per", "4", "--out", "corpus", "--seed", "9", "--max-coverage", "0.2"]);
        run(&["build-templates", "--targets", "corpus/corpus.manifest", "--out", "discovered", "--seed", "9"]);
        run(&["match", "--templates", "corpus/templates.manifest", "--targets", "corpus/corpus.manifest", "--seed", "9", "--out", "report.tsv"]);
        fs::write(
            root.join("text.etbl"),
            "ETBL1 2\nmacro_0000 1 0\nmacro_0001 0 1\nmacro_0002 0.5 0.5\n",
        )
        .unwrap();
        run(&["embed", "--templates", "corpus/templates.manifest", "--targets", "corpus/corpus.manifest", "--text", "text.etbl", "--extractor", "block-mean:12", "--seed", "9", "--out", "emb.etbl", "--report", "emb_report.tsv"]);
        run(&["embed", "--templates", "corpus/templates.manifest", "--targets", "corpus/corpus.manifest", "--extractor", "block-mean:12", "--format", "etbb", "--seed", "9", "--out", "emb.etbb"]);
        run(&["cluster", "--embeddings", "emb.etbl", "--k", "2", "--seed", "9", "--out", "labels.tsv"]);
        run(&["retrieve", "--embeddings", "emb.etbl", "--query", "macro_0000", "--k", "3", "--out", "hits.tsv"]);
        run(&["tree", "--embeddings", "emb.etbl", "--out", "tree.nwk"]);
        run(&["metrics", "--embeddings", "emb.etbl", "--labels", "labels.tsv", "--out", "metrics.txt"]);
    }

    fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
        let mut files = BTreeMap::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                    files.insert(rel, fs::read(&path).unwrap());
                }
            }
        }
        files
    }

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_pipeline(dir_a.path());
    run_pipeline(dir_b.path());
    let a = snapshot(dir_a.path());
    let b = snapshot(dir_b.path());
    assert_eq!(
        a.keys().collect::<Vec<_>>(),
        b.keys().collect::<Vec<_>>(),
        "different file sets"
    );
    let mut total = 0;
    for (name, bytes) in &a {
        assert_eq!(bytes, &b[name], "{name} differs between runs");
        total += 1;
    }
    let elapsed = started.elapsed();
    println!("[criterion 7] PASS - {total} output files byte-identical across runs, {elapsed:?}");
}
