mod common;

use hairstep::hair3d::{
    grow_strands, procedural_wig, sample_points, strands_to_fields, Aabb, GrowParams, HairModel, Root, ScalpRoots,
    Strand, VolumeGrid, WigParams,
};
use hairstep::Vec3;
use nalgebra::Vector3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wig_box(model: &HairModel) -> Aabb {
    let (lo, hi) = model.bounds().unwrap();
    Aabb::cube_around(lo, hi, 0.05).unwrap()
}

#[test]
fn trilinear_sampling_matches_corner_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let grid = common::random_grid(&mut rng, [7, 5, 6], 0.5);
    let (lo, hi) = (grid.bbox.lo(), grid.bbox.hi());
    for _ in 0..1000 {
        let p = Vec3::from_fn(|a, _| rng.random_range(lo[a]..=hi[a]));
        let got = grid.sample(&p).unwrap();
        let (occ, o) = common::trilinear_oracle(&grid, p);
        assert!((got.occupancy - occ).abs() < 1e-6);
        assert!((got.orientation - Vec3::from(o)).norm() < 1e-6);
    }
    assert!(grid.sample(&(hi + Vec3::repeat(1e-3))).is_none());
}

#[test]
fn every_wig_vertex_lands_in_an_occupied_voxel() {
    let wig = procedural_wig(&WigParams::default(), 2).unwrap();
    let bbox = wig_box(&wig);
    let v = strands_to_fields(&wig, [128; 3], bbox, 1.0).unwrap();
    assert_eq!(v.clamped_points, 0);
    v.grid.validate().unwrap();
    for s in &wig.strands {
        for i in 0..s.points.len() {
            let idx = v.grid.index(v.grid.voxel_of(&s.point(i)).unwrap());
            assert!(v.grid.is_occupied(idx));
        }
    }
}

#[test]
fn surface_samples_stay_within_the_band() {
    let bbox = Aabb::new(Vec3::zeros(), Vec3::repeat(12.0)).unwrap();
    let grid = VolumeGrid::from_fn([12; 3], bbox, |p| {
        if (p - Vec3::repeat(6.0)).norm() < 4.0 {
            (1.0, Vector3::x())
        } else {
            (0.0, Vector3::zeros())
        }
    })
    .unwrap();
    for band in [0.5, 1.0, 2.0] {
        let pts = sample_points(&grid, band, 400, 7).unwrap();
        assert_eq!(pts.iter().filter(|p| p.near_surface).count(), 200);
        for p in pts.iter().filter(|p| p.near_surface) {
            assert!(common::distance_to_boundary(&grid, p.position) <= band + 1e-9);
        }
        let occupied = pts.iter().filter(|p| p.occ_label == 1).count();
        assert!(occupied > 0 && occupied < 400);
    }
    assert_eq!(sample_points(&grid, 1.0, 400, 7).unwrap(), sample_points(&grid, 1.0, 400, 7).unwrap());
    assert!(sample_points(&grid, 1.0, 401, 7).is_err());
}

#[test]
fn large_wig_round_trips_byte_for_byte() {
    let wig = procedural_wig(&WigParams { strands: 10_000, ..Default::default() }, 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wig.data");
    wig.save(&path).unwrap();
    let loaded = HairModel::load(&path).unwrap();
    assert_eq!(loaded, wig);
    assert_eq!(std::fs::read(&path).unwrap(), loaded.to_bytes());
}

#[test]
fn voxel_grid_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = common::random_grid(&mut rng, [5, 4, 3], 0.5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.bin");
    grid.save(&path).unwrap();
    assert_eq!(VolumeGrid::load(&path).unwrap(), grid);
}

fn grown_fixture() -> (VolumeGrid, ScalpRoots) {
    let wig = procedural_wig(&WigParams { strands: 400, ..Default::default() }, 6).unwrap();
    let v = strands_to_fields(&wig, [48; 3], wig_box(&wig), 1.0).unwrap();
    (v.grid, ScalpRoots::from_model(&wig))
}

#[test]
fn growth_is_deterministic_and_order_free() {
    let (grid, roots) = grown_fixture();
    let params = GrowParams::for_grid(&grid);
    let a = grow_strands(&grid, &roots, &params).unwrap();
    let b = grow_strands(&grid, &roots, &params).unwrap();
    assert_eq!(a.model, b.model);
    assert!(a.model.strands.len() > roots.roots.len() / 2);

    let n = roots.roots.len();
    let reversed = ScalpRoots { roots: roots.roots.iter().rev().copied().collect() };
    let c = grow_strands(&grid, &reversed, &params).unwrap();
    assert_eq!(c.model.strands.len(), a.model.strands.len());
    for (s, &ri) in c.model.strands.iter().zip(&c.root_index) {
        let k = a.root_index.iter().position(|&r| r == n - 1 - ri).unwrap();
        assert_eq!(s, &a.model.strands[k]);
    }
}

#[test]
fn grown_points_stay_occupied_until_the_last() {
    let (grid, roots) = grown_fixture();
    let params = GrowParams::for_grid(&grid);
    let out = grow_strands(&grid, &roots, &params).unwrap();
    for s in &out.model.strands {
        assert!(s.points.len() >= 2 && s.points.len() <= params.max_steps + 1);
        for i in 0..s.points.len() - 1 {
            let f = grid.sample(&s.point(i)).unwrap();
            // points are stored as f32, so allow for the round trip
            assert!(f.occupancy >= params.occ_threshold - 1e-4, "{}", f.occupancy);
        }
        for w in s.points.windows(2) {
            assert!(((w[1] - w[0]).cast::<f64>().norm() - params.step).abs() < 1e-4);
        }
    }
}

#[test]
fn smooth_field_never_flips() {
    let grid = common::circular_field(8.0, 5.0, 2.0);
    let roots = ScalpRoots {
        roots: (0..12)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 12.0;
                Root { position: Vec3::new(5.0 * t.cos(), 5.0 * t.sin(), 0.0), direction: Vec3::new(-t.sin(), t.cos(), 0.0) }
            })
            .collect(),
    };
    let params = GrowParams { step: 0.25, occ_threshold: 0.5, max_steps: 200, inertia: 0.3 };
    let out = grow_strands(&grid, &roots, &params).unwrap();
    assert_eq!(out.flips, 0);
    assert_eq!(out.model.strands.len(), 12);
    for s in &out.model.strands {
        for i in 0..s.points.len() {
            assert!((s.point(i).xy().norm() - 5.0).abs() <= 2.5);
        }
    }
}

fn arb_strands() -> impl Strategy<Value = HairModel> {
    let point = prop::array::uniform3(-1.0f32..1.0);
    prop::collection::vec(prop::collection::vec(point, 2..6), 1..8).prop_filter_map("degenerate", |v| {
        v.into_iter()
            .map(|s| Strand::new(s.into_iter().map(Vector3::from).collect()).ok())
            .collect::<Option<Vec<_>>>()
            .map(HairModel::new)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn occupancy_grows_with_radius(m in arb_strands(), r in 0.0f64..2.0, extra in 0.0f64..1.5) {
        let bbox = Aabb::new(Vec3::repeat(-1.0), Vec3::repeat(1.0)).unwrap();
        let a = strands_to_fields(&m, [10; 3], bbox, r).unwrap();
        let b = strands_to_fields(&m, [10; 3], bbox, r + extra).unwrap();
        for idx in 0..a.grid.len() {
            prop_assert!(!a.grid.is_occupied(idx) || b.grid.is_occupied(idx));
        }
    }

    #[test]
    fn fields_satisfy_grid_invariants(m in arb_strands(), r in 0.0f64..1.5, n in 4usize..12) {
        let bbox = Aabb::new(Vec3::repeat(-0.8), Vec3::repeat(0.8)).unwrap();
        let v = strands_to_fields(&m, [n, n + 1, n + 2], bbox, r).unwrap();
        prop_assert!(v.grid.validate().is_ok());
        prop_assert!(v.grid.occupied_count() > 0);
        for idx in 0..v.grid.len() {
            let o = v.grid.orientation[idx].cast::<f64>();
            if v.grid.is_occupied(idx) {
                prop_assert!((o.norm() - 1.0).abs() < 1e-5);
            } else {
                prop_assert_eq!(o, Vec3::zeros());
            }
        }
        for &f in &v.flagged {
            prop_assert!(v.grid.is_occupied(f));
        }
    }
}
