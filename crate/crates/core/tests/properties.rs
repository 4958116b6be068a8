//! Property tests for the invariants that hold across the whole input
//! space, not just the hand-picked cases.

use macroembed_core::analysis::{pairwise_distances, silhouette, upgma, Metric};
use macroembed_core::embed::{impute_missing_text, EmbeddingRecord, TextTable};
use macroembed_core::image::{downsample, reshape, vectorize, ImageGrid};
use macroembed_core::sparse::{solve_l1, Dictionary};
use macroembed_core::template_set::median_blend;
use macroembed_core::PixelVector;
use proptest::prelude::*;

fn grid_strategy(max_side: usize) -> impl Strategy<Value = ImageGrid> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(0.0..255.0f64, w * h)
            .prop_map(move |data| ImageGrid::gray(w, h, data).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vectorize_reshape_identity(img in grid_strategy(12)) {
        let v = vectorize(&img);
        let back = reshape(&v, img.width(), img.height(), img.channels(), img.is_normalized()).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn downsample_idempotent_at_target(img in grid_strategy(16), out in 1usize..8) {
        let once = downsample(&img, out, out).unwrap();
        let twice = downsample(&once, out, out).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn median_blend_permutation_invariant(
        grids in proptest::collection::vec(
            proptest::collection::vec(0.0..255.0f64, 9).prop_map(|d| ImageGrid::gray(3, 3, d).unwrap()),
            1..6,
        ),
        seed in any::<u64>(),
    ) {
        use rand::prelude::*;
        let refs: Vec<&ImageGrid> = grids.iter().collect();
        let blended = median_blend(&refs).unwrap();
        let mut shuffled = refs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(median_blend(&shuffled).unwrap(), blended);
    }

    #[test]
    fn lasso_dead_zone(
        cols in proptest::collection::vec(proptest::collection::vec(-1.0..1.0f64, 6), 1..5),
        y in proptest::collection::vec(-2.0..2.0f64, 6),
        slack in 1.0..3.0f64,
    ) {
        let columns: Vec<PixelVector> = cols
            .iter()
            .filter(|c| c.iter().any(|v| v.abs() > 1e-6))
            .map(|c| PixelVector::new(c.clone()).unit().unwrap())
            .collect();
        prop_assume!(!columns.is_empty());
        let ids = vec![0usize; columns.len()];
        let dict = Dictionary::new(columns, ids).unwrap();
        let max_corr = dict
            .correlations(&y)
            .unwrap()
            .iter()
            .fold(0.0f64, |a, c| a.max(c.abs()));
        prop_assume!(max_corr > 1e-9);
        let code = solve_l1(&dict, &PixelVector::new(y), max_corr * slack, 1e-9, 200).unwrap();
        prop_assert!(code.coeffs.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn silhouette_values_bounded(
        points in proptest::collection::vec(proptest::collection::vec(-5.0..5.0f64, 3), 4..20),
        seed in any::<u64>(),
    ) {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let k = 2 + (seed % 3) as usize;
        prop_assume!(points.len() >= k);
        // Guarantee every cluster non-empty, rest random.
        let mut labels: Vec<usize> = (0..points.len()).map(|i| {
            if i < k { i } else { rng.gen_range(0..k) }
        }).collect();
        labels.shuffle(&mut rng);
        let s = silhouette(&points, &labels).unwrap();
        for v in &s.per_point {
            prop_assert!((-1.0..=1.0).contains(v), "out of range: {}", v);
        }
        prop_assert!((-1.0..=1.0).contains(&s.mean));
    }

    #[test]
    fn upgma_heights_monotone(
        points in proptest::collection::vec(proptest::collection::vec(-4.0..4.0f64, 2), 3..12),
    ) {
        let d = pairwise_distances(&points, Metric::Euclidean).unwrap();
        let names: Vec<String> = (0..points.len()).map(|i| format!("l{i}")).collect();
        let tree = upgma(&d, &names).unwrap();
        let heights = tree.merge_heights();
        for w in heights.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12, "heights {:?}", heights);
        }
        prop_assert_eq!(tree.num_leaves(), points.len());
    }

    #[test]
    fn imputation_idempotent(
        texted in proptest::collection::vec((0usize..3, proptest::collection::vec(-2.0..2.0f64, 2)), 1..6),
        missing in proptest::collection::vec(0usize..4, 0..6),
    ) {
        let mut records = Vec::new();
        let mut rows = Vec::new();
        for (i, (template, text)) in texted.iter().enumerate() {
            let id = format!("t{i}");
            rows.push((id.clone(), text.clone()));
            records.push(EmbeddingRecord {
                target_id: id,
                template_id: Some(*template),
                image_part: vec![0.0; 3],
                text_part: None,
                text_imputed: false,
            });
        }
        for (i, template) in missing.iter().enumerate() {
            records.push(EmbeddingRecord {
                target_id: format!("m{i}"),
                template_id: Some(*template),
                image_part: vec![0.0; 3],
                text_part: None,
                text_imputed: false,
            });
        }
        let table = TextTable::from_rows(2, rows).unwrap();
        let once = impute_missing_text(records, &table).unwrap();
        let twice = impute_missing_text(once.clone(), &table).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert_eq!(&a.text_part, &b.text_part);
            prop_assert_eq!(a.text_imputed, b.text_imputed);
            prop_assert_eq!(a.full().len(), a.image_part.len() + 2);
        }
    }
}
