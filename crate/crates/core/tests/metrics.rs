mod common;

use hairstep::image::Mask;
use hairstep::metrics::{
    evaluate, hair_rida, hair_sale, hair_sale_undirected, l_depth, l_rank, l_strand_l1, occupancy_precision,
    orientation_l2, LossConfig, PairLabel,
};
use hairstep::repr::{DepthMap, StrandMap};
use hairstep::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

fn map_with(dirs: &[(usize, usize, f64)], w: usize, h: usize) -> StrandMap {
    let mut m = StrandMap::new(w, h);
    for &(x, y, deg) in dirs {
        let t = deg.to_radians();
        m.set(x, y, [1.0, t.cos() / 2.0 + 0.5, t.sin() / 2.0 + 0.5]);
    }
    m
}

#[test]
fn sale_of_perpendicular_and_opposite_pixels() {
    let a = map_with(&[(0, 0, 0.0), (1, 0, 0.0), (2, 0, 30.0)], 3, 1);
    let b = map_with(&[(0, 0, 90.0), (1, 0, 180.0)], 3, 1);
    let (sale, n) = hair_sale(&a, &b).unwrap();
    assert_eq!(n, 2);
    assert!((sale - 135.0).abs() < 1e-9);
    let (und, _) = hair_sale_undirected(&a, &b).unwrap();
    assert!((und - 45.0).abs() < 1e-9);
}

#[test]
fn empty_overlap_is_undefined() {
    let a = map_with(&[(0, 0, 0.0)], 2, 1);
    let b = map_with(&[(1, 0, 0.0)], 2, 1);
    assert!(matches!(hair_sale(&a, &b), Err(Error::Undefined(_))));
    let report = evaluate(&a, &b, None, &[]).unwrap();
    assert_eq!(report.hair_sale, None);
    assert_eq!(report.iou, Some(0.0));
    let depth = DepthMap::new(Mask::new(2, 1), vec![0.0; 2], 1.0, 2.0).unwrap();
    let pairs = [PairLabel::new([0, 0], [1, 0], 1)];
    assert!(matches!(hair_rida(&depth, &pairs, &Mask::new(2, 1)), Err(Error::Undefined(_))));
}

#[test]
fn rida_ties_count_against() {
    let mask = Mask::from_fn(3, 1, |_, _| true);
    let depth = DepthMap::new(mask.clone(), vec![0.9, 0.5, 0.5], 1.0, 2.0).unwrap();
    let pairs = [
        PairLabel::new([0, 0], [1, 0], 1),
        PairLabel::new([0, 0], [1, 0], -1),
        PairLabel::new([1, 0], [2, 0], 1),
        PairLabel::new([2, 0], [1, 0], -1),
    ];
    assert_eq!(hair_rida(&depth, &pairs, &mask).unwrap(), (0.25, 4));
}

#[test]
fn rank_loss_mismatched_inputs_are_rejected() {
    let mask = Mask::from_fn(2, 2, |_, _| true);
    let depth = DepthMap::new(mask, vec![0.0; 4], 1.0, 2.0).unwrap();
    let cfg = LossConfig::default();
    assert!(l_rank(&depth, &[], &cfg).is_err());
    assert!(l_rank(&depth, &[PairLabel::new([0, 0], [2, 0], 1)], &cfg).is_err());
    let other = DepthMap::new(Mask::from_fn(2, 2, |x, _| x == 0), vec![0.0; 4], 1.0, 2.0).unwrap();
    assert!(l_depth(&depth, &other, &[PairLabel::new([0, 0], [1, 0], 1)], &cfg).is_err());
    assert!(l_rank(&depth, &[PairLabel::new([0, 0], [1, 0], 1)], &LossConfig { epsilon: 0.0, ..cfg }).is_err());
}

#[test]
fn evaluate_agrees_with_each_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let a = common::random_strand_map(&mut rng, 24, 16, 0.6);
        let b = common::random_strand_map(&mut rng, 24, 16, 0.6);
        let depth = common::random_depth(&mut rng, 24, 16, 1.0, Some(8));
        let pairs = common::random_pairs(&mut rng, 24, 16, 200);
        let r = evaluate(&a, &b, Some(&depth), &pairs).unwrap();
        let region = a.mask().intersection(&b.mask()).unwrap();
        assert_eq!(r.hair_sale, Some(hair_sale(&a, &b).unwrap().0));
        assert_eq!(r.hair_sale_undirected, Some(hair_sale_undirected(&a, &b).unwrap().0));
        let (rida, q) = hair_rida(&depth, &pairs, &region).unwrap();
        assert_eq!((r.hair_rida, r.pair_count), (Some(rida), q));
        assert!(close(r.iou.unwrap(), common::iou_oracle(&a.mask(), &b.mask())));
        assert_eq!(r.pixel_count, region.count());
    }
}

#[test]
fn grid_metrics_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for fill in [0.1, 0.4, 0.8] {
        let a = common::random_grid(&mut rng, [6, 5, 4], fill);
        let b = common::random_grid(&mut rng, [6, 5, 4], fill);
        for t in [0.25f32, 0.5, 0.75] {
            let want = common::occupancy_precision_oracle(&a, &b, t).unwrap();
            assert!(close(occupancy_precision(&a, &b, t).unwrap(), want));
        }
        let want = common::orientation_l2_oracle(&a, &b).unwrap();
        assert!(close(orientation_l2(&a, &b).unwrap(), want));
        assert_eq!(orientation_l2(&b, &b).unwrap(), 0.0);
    }
}

fn seeded() -> impl Strategy<Value = ChaCha8Rng> {
    any::<u64>().prop_map(ChaCha8Rng::seed_from_u64)
}

fn with_values(d: &DepthMap, f: impl Fn(f64) -> f64) -> DepthMap {
    DepthMap::new(d.valid().clone(), d.values().iter().map(|&v| f(v)).collect(), d.d_near, d.d_far).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sale_is_symmetric_and_bounded(mut rng in seeded(), hair in 0.2f64..1.0) {
        let a = common::random_strand_map(&mut rng, 12, 10, hair);
        let b = common::random_strand_map(&mut rng, 12, 10, hair);
        if let Ok((ab, n)) = hair_sale(&a, &b) {
            let (ba, m) = hair_sale(&b, &a).unwrap();
            prop_assert_eq!(n, m);
            prop_assert!(close(ab, ba));
            prop_assert!((0.0..=180.0).contains(&ab));
            let (und, _) = hair_sale_undirected(&a, &b).unwrap();
            prop_assert!(und <= ab + 1e-12 && (0.0..=90.0).contains(&und));
            prop_assert!(close(ab, common::hair_sale_oracle(&a, &b).unwrap()));
        }
        // acos cannot resolve angles below about 1.2e-6 degrees
        prop_assert!(hair_sale(&a, &a.clone()).map(|r| r.0).unwrap_or(0.0) < 1e-5);
    }

    #[test]
    fn rida_ignores_monotone_rescaling(mut rng in seeded(), levels in 2u32..20) {
        let depth = common::random_depth(&mut rng, 10, 10, 0.7, Some(levels));
        let pairs = common::random_pairs(&mut rng, 10, 10, 80);
        let region = depth.valid().clone();
        let warped = with_values(&depth, |v| 3.0 * v.powi(3) + v - 7.0);
        let a = hair_rida(&depth, &pairs, &region);
        let b = hair_rida(&warped, &pairs, &region);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a, b);
                prop_assert!(close(a.0, common::hair_rida_oracle(&depth, &pairs, &region).unwrap()));
            }
            (Err(Error::Undefined(_)), Err(Error::Undefined(_))) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn rank_loss_shift_and_scale(mut rng in seeded(), shift in -5.0f64..5.0, k in 0.1f64..10.0) {
        let depth = common::random_depth(&mut rng, 9, 7, 1.0, None);
        let pairs = common::random_pairs(&mut rng, 9, 7, 50);
        let cfg = LossConfig::default();
        let base = l_rank(&depth, &pairs, &cfg).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!(close(base, common::l_rank_oracle(&depth, &pairs, cfg.epsilon)));
        let shifted = l_rank(&with_values(&depth, |v| v + shift), &pairs, &cfg).unwrap();
        prop_assert!((shifted - base).abs() < 1e-9);
        let scaled_cfg = LossConfig { epsilon: cfg.epsilon * k, ..cfg };
        let scaled = l_rank(&with_values(&depth, |v| v * k), &pairs, &scaled_cfg).unwrap();
        prop_assert!((scaled - k * base).abs() < 1e-9 * (1.0 + k));
    }

    #[test]
    fn depth_loss_matches_oracle(mut rng in seeded()) {
        let d = common::random_depth(&mut rng, 8, 8, 0.8, None);
        let noise = common::random_depth(&mut rng, 8, 8, 1.0, None);
        let pseudo = DepthMap::new(
            d.valid().clone(),
            d.values().iter().zip(noise.values()).map(|(a, b)| a + 0.1 * b).collect(),
            1.0,
            2.0,
        ).unwrap();
        let pairs = common::random_pairs(&mut rng, 8, 8, 30);
        let cfg = LossConfig::default();
        if d.valid().count() > 0 {
            let got = l_depth(&d, &pseudo, &pairs, &cfg).unwrap();
            prop_assert!(close(got, common::l_depth_oracle(&d, &pseudo, &pairs, cfg.epsilon, cfg.beta)));
            prop_assert!(got >= l_rank(&d, &pairs, &cfg).unwrap());
        }
    }

    #[test]
    fn strand_l1_is_zero_only_on_equal_maps(mut rng in seeded()) {
        let a = common::random_strand_map(&mut rng, 8, 8, 0.5);
        let b = common::random_strand_map(&mut rng, 8, 8, 0.5);
        if b.mask().count() > 0 {
            prop_assert_eq!(l_strand_l1(&b, &b).unwrap(), 0.0);
            let got = l_strand_l1(&a, &b).unwrap();
            prop_assert!(close(got, common::l_strand_l1_oracle(&a, &b).unwrap()));
            if a != b {
                prop_assert!(got > 0.0);
            }
        }
    }
}
