#[path = "support/gen.rs"]
mod gen;

use copydesc_core::io::{decode_binary, write_binary, LoadOptions};
use copydesc_core::trainmath::{batch_hard_triplet, gem_pool, lr_ratio, FeatureMap, GemParams, LabeledBatch, ScheduleConfig};
use copydesc_core::{
    fuse_multiscale, knn_search, micro_ap, recall_at_rank, stretch, DescriptorSet, GroundTruth, MatchCandidate, Role,
    SearchOptions, StretchConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn l2(v: &[f32]) -> f64 {
    v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_roundtrip_is_bit_exact(
        dim in 1usize..=256,
        rows in prop::collection::vec(prop::collection::vec(any::<u32>(), 256), 0..6),
        role in 0u8..3,
    ) {
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("id-{i}")).collect();
        let mut data = Vec::new();
        for r in &rows {
            // arbitrary finite bit patterns, including subnormals and -0.0
            data.extend(r[..dim].iter().map(|b| {
                let f = f32::from_bits(*b);
                if f.is_finite() { f } else { 1.0 }
            }));
        }
        let set = DescriptorSet::from_parts(Role::from_byte(role).unwrap(), dim, ids, data).unwrap();
        let mut buf = Vec::new();
        write_binary(&set, &mut buf).unwrap();
        let back = decode_binary(&buf, LoadOptions { reject_zero: false }).unwrap();
        prop_assert_eq!(back.ids(), set.ids());
        let a: Vec<u32> = back.as_flat().iter().map(|f| f.to_bits()).collect();
        let b: Vec<u32> = set.as_flat().iter().map(|f| f.to_bits()).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fusion_is_unit_norm_and_scale_order_free(seed in any::<u64>(), scales in 1usize..5, perm_seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets: Vec<_> = (0..scales).map(|_| gen::random_set(&mut rng, Role::Query, "x", 6, 24, false)).collect();
        let fused = fuse_multiscale(&sets).unwrap();
        for i in 0..fused.len() {
            prop_assert!((l2(fused.vector(i)) - 1.0).abs() < 1e-6);
        }
        let mut shuffled = sets.clone();
        let rot = (perm_seed as usize) % scales;
        shuffled.rotate_left(rot);
        shuffled.reverse();
        let other = fuse_multiscale(&shuffled).unwrap();
        for (a, b) in fused.as_flat().iter().zip(other.as_flat()) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn knn_ignores_reference_order_and_threads(seed in any::<u64>(), k in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = gen::random_set(&mut rng, Role::Query, "q", 7, 8, false);
        let r = gen::random_set(&mut rng, Role::Reference, "r", 40, 8, false);
        let base = knn_search(&q, &r, &SearchOptions { k, threads: 1, query_block: 1, reference_block: 3 }).unwrap();
        let mut order: Vec<String> = r.ids().to_vec();
        order.reverse();
        let rev = r.reorder(&order).unwrap();
        let other = knn_search(&q, &rev, &SearchOptions { k, threads: 4, query_block: 5, reference_block: 64 }).unwrap();
        prop_assert_eq!(base, other);
    }

    #[test]
    fn stretch_preserves_per_query_order(seed in any::<u64>(), alpha in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = gen::random_set(&mut rng, Role::Query, "q", 6, 12, true);
        let r = gen::random_set(&mut rng, Role::Reference, "r", 60, 12, true);
        let t = gen::random_set(&mut rng, Role::Training, "t", 30, 12, true);
        let cfg = StretchConfig { alpha, n: 5 };
        let (sq, report) = stretch(&q, &t, &cfg, 0).unwrap();
        let (_, report2) = stretch(&q, &t, &StretchConfig { alpha: alpha * 2.0, n: 5 }, 0).unwrap();
        for (a, b) in report.per_query.iter().zip(&report2.per_query) {
            prop_assert_eq!(a.s_n, b.s_n);
        }
        let before = knn_search(&q, &r, &SearchOptions::with_k(10)).unwrap();
        let after = knn_search(&sq.clone().with_role(Role::Query), &r, &SearchOptions::with_k(10)).unwrap();
        for (i, row) in report.per_query.iter().enumerate() {
            if row.s_n > 0.0 {
                let a: Vec<_> = before.candidates()[i * 10..(i + 1) * 10].iter().map(|c| &c.reference_id).collect();
                let b: Vec<_> = after.candidates()[i * 10..(i + 1) * 10].iter().map(|c| &c.reference_id).collect();
                prop_assert_eq!(a, b);
                prop_assert!((l2(sq.vector(i)) - alpha * row.s_n).abs() < 1e-5);
            }
        }
        prop_assert_eq!(sq.ids(), q.ids());
        prop_assert_eq!(sq.dim(), q.dim());
    }

    #[test]
    fn micro_ap_is_a_global_rank_statistic(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cands = Vec::new();
        for q in 0..6 {
            for r in 0..4 {
                cands.push(MatchCandidate::new(format!("q{q}"), format!("r{r}"), rng.random_range(0.0..2.0)));
            }
        }
        let truth = GroundTruth::from_pairs((0..5).map(|q| (format!("q{q}"), format!("r{}", q % 4)))).unwrap();
        let ap = micro_ap(&cands, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&ap));
        let warped: Vec<_> = cands.iter().map(|c| MatchCandidate { score: (3.0 * c.score).exp() + 1.0, ..c.clone() }).collect();
        prop_assert_eq!(micro_ap(&warped, &truth).unwrap(), ap);
        // per-query strictly increasing maps keep per-query ranks
        let per_query: Vec<_> = cands.iter().map(|c| {
            let q: f64 = c.query_id[1..].parse().unwrap();
            MatchCandidate { score: c.score * (q + 1.0) + q, ..c.clone() }
        }).collect();
        for k in [1, 2, 10] {
            prop_assert_eq!(recall_at_rank(&per_query, &truth, k).unwrap(), recall_at_rank(&cands, &truth, k).unwrap());
        }
    }

    #[test]
    fn distractor_ahead_of_a_hit_lowers_micro_ap(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cands: Vec<_> = (0..5).map(|q| MatchCandidate::new(format!("q{q}"), format!("r{q}"), rng.random_range(0.1..2.0))).collect();
        let truth = GroundTruth::from_pairs((0..5).map(|q| (format!("q{q}"), format!("r{q}")))).unwrap();
        prop_assert_eq!(micro_ap(&cands, &truth).unwrap(), 1.0);
        let worst = cands.iter().map(|c| c.score).fold(0.0, f64::max);
        let mut more = cands.clone();
        more.push(MatchCandidate::new("distractor", "r0", worst * 0.999));
        prop_assert!(micro_ap(&more, &truth).unwrap() < 1.0);
    }

    #[test]
    fn gem_monotone_and_bounded(xs in prop::collection::vec(0.0f64..5.0, 1..30)) {
        let fm = FeatureMap::new(vec![xs.clone()]).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let max = xs.iter().copied().fold(0.0, f64::max);
        let mut prev = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 32.0, 64.0, 256.0] {
            let v = gem_pool(&fm, &GemParams::uniform(1, p)).unwrap()[0];
            prop_assert!(v >= prev - 1e-12);
            prop_assert!(v >= mean - 1e-12 && v <= max + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn triplet_translation_invariant(seed in any::<u64>(), shift in -100.0f64..100.0) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feats: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let labels = vec![0, 0, 1, 1, 2, 2];
        let moved: Vec<Vec<f64>> = feats.iter().map(|f| f.iter().map(|x| x + shift).collect()).collect();
        let a = batch_hard_triplet(&LabeledBatch::new(feats, labels.clone(), 0.3).unwrap());
        let b = batch_hard_triplet(&LabeledBatch::new(moved, labels, 0.3).unwrap());
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn schedule_continuous_at_branch_points() {
    let cfg = ScheduleConfig::default();
    for edge in [5.0f64, 10.0] {
        let left = lr_ratio(edge - 1e-12, &cfg).unwrap();
        let right = lr_ratio(edge, &cfg).unwrap();
        assert!((left - right).abs() < 1e-11);
    }
}
