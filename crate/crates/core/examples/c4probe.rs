use macroembed_core::analysis::{davies_bouldin, kmeans, silhouette};
use macroembed_core::embed::{decoupled_embedding, FeatureExtractor};
use macroembed_core::image::{vectorize, ImageGrid, Preprocessor, WORK_SIZE};
use macroembed_core::matcher::{build_dictionary, match_all, MatchConfig};
use macroembed_core::synth;

fn main() {
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
    let dict = build_dictionary(&groups, 3, 0, &pre).unwrap();
    let working: Vec<ImageGrid> = corpus.iter().map(|(m, _)| pre.apply(m).unwrap()).collect();
    let results = match_all(&dict, &working, &MatchConfig::default()).unwrap();
    let decoupled: Vec<Vec<f64>> = results
        .iter()
        .map(|r| decoupled_embedding(r, FeatureExtractor::RawPixels).unwrap())
        .collect();
    let naive: Vec<Vec<f64>> = working.iter().map(|w| vectorize(w).into_values()).collect();
    for seed in 0..5u64 {
        let dec = kmeans(&decoupled, k, seed, 300).unwrap();
        let mut sizes = vec![0usize; k];
        for &l in &dec.labels {
            sizes[l] += 1;
        }
        // cross-tab against truth
        let mut tab = vec![vec![0usize; k]; k];
        for (label, (_, truth)) in dec.labels.iter().zip(&corpus) {
            tab[*label][*truth] += 1;
        }
        println!(
            "seed {seed}: inertia {:.1} sizes {:?} dbi {:.4} sil {:.4}",
            dec.inertia,
            sizes,
            davies_bouldin(&decoupled, &dec.labels).unwrap(),
            silhouette(&decoupled, &dec.labels).unwrap().mean
        );
        for row in tab {
            println!("   {row:?}");
        }
        let nai = kmeans(&naive, k, seed, 300).unwrap();
        println!(
            "   naive: inertia {:.1} dbi {:.4} sil {:.4}",
            nai.inertia,
            davies_bouldin(&naive, &nai.labels).unwrap(),
            silhouette(&naive, &nai.labels).unwrap().mean
        );
    }
}
