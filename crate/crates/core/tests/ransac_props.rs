use std::collections::HashSet;

use drawscaffold_core::composition::{clip_to_unit_square, fit_composition_lines, LineModel, RansacConfig};
use drawscaffold_core::geometry::{sample_polygon_points, NormPoint, PolygonContour, SampledPoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(id: u32, cx: f64, cy: f64, side: f64) -> PolygonContour {
    let h = side / 2.0;
    PolygonContour::new(
        id,
        vec![
            NormPoint::new(cx - h, cy - h),
            NormPoint::new(cx + h, cy - h),
            NormPoint::new(cx + h, cy + h),
            NormPoint::new(cx - h, cy + h),
        ],
        None,
    )
    .unwrap()
}

/// A few random convex-ish polygons well inside the unit square.
fn random_scene(seed: u64, polygons: usize) -> Vec<SampledPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::new();
    for id in 0..polygons as u32 {
        let cx = rng.gen_range(0.25..0.75);
        let cy = rng.gen_range(0.25..0.75);
        let n = rng.gen_range(3..9);
        let verts: Vec<NormPoint> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * std::f64::consts::TAU;
                let r = rng.gen_range(0.03..0.15);
                NormPoint::new(cx + r * t.cos(), cy + r * t.sin())
            })
            .collect();
        pts.extend(sample_polygon_points(&PolygonContour::new(id, verts, None).unwrap()));
    }
    pts
}

#[test]
fn vertically_stacked_squares() {
    let pts: Vec<SampledPoint> = [square(4, 0.5, 0.3, 0.1), square(9, 0.5, 0.7, 0.1)]
        .iter()
        .flat_map(sample_polygon_points)
        .collect();
    let lines = fit_composition_lines(&pts, &RansacConfig::default()).unwrap();
    let first = &lines[0];
    assert!(first.model().angle_to_horizontal_deg() > 88.0);
    let seg = first.segment.unwrap();
    assert!(((seg[0].x + seg[1].x) / 2.0 - 0.5).abs() <= 0.05);
    assert_eq!(first.supporting_polygons, vec![4, 9]);
}

#[test]
fn clip_examples() {
    let horizontal = LineModel::from_normal([0.0, 1.0], 0.5);
    let seg = clip_to_unit_square(&horizontal).unwrap();
    assert_eq!(seg, [NormPoint::new(0.0, 0.5), NormPoint::new(1.0, 0.5)]);
    assert!(clip_to_unit_square(&LineModel::from_normal([1.0, 0.0], 2.0)).is_none());
    let diag = LineModel::through(&NormPoint::new(0.2, 0.2), &NormPoint::new(0.7, 0.7)).unwrap();
    let seg = clip_to_unit_square(&diag).unwrap();
    assert!(seg[0].distance(&NormPoint::new(0.0, 0.0)) < 1e-12);
    assert!(seg[1].distance(&NormPoint::new(1.0, 1.0)) < 1e-12);
}

fn rotate(p: NormPoint, angle: f64, shift: (f64, f64)) -> NormPoint {
    let (s, c) = angle.sin_cos();
    let (x, y) = (p.x - 0.5, p.y - 0.5);
    NormPoint::new(0.5 + c * x - s * y + shift.0, 0.5 + s * x + c * y + shift.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn deterministic_disjoint_and_above_threshold(seed in 0u64..10_000, n in 2usize..6) {
        let pts = random_scene(seed, n);
        let cfg = RansacConfig { seed, iterations: 300, ..Default::default() };
        let a = fit_composition_lines(&pts, &cfg).unwrap();
        let b = fit_composition_lines(&pts, &cfg).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

        let mut seen = HashSet::new();
        for line in &a {
            prop_assert!(line.inliers as f64 >= cfg.theta_inl * pts.len() as f64 - 1e-9);
            prop_assert_eq!(line.inlier_fraction, line.inliers as f64 / pts.len() as f64);
            let norm = (line.normal[0].powi(2) + line.normal[1].powi(2)).sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let polys: HashSet<u32> = line.inlier_indices.iter().map(|&i| pts[i].polygon_id).collect();
            prop_assert!(polys.len() >= 2);
            prop_assert_eq!(polys.len(), line.supporting_polygons.len());
            for &i in &line.inlier_indices {
                prop_assert!(seen.insert(i), "point {} reused", i);
                prop_assert!(line.model().distance(&pts[i].point) <= cfg.theta_dis);
            }
        }
    }

    #[test]
    fn raising_inlier_threshold_never_adds_lines(seed in 0u64..10_000, n in 2usize..6) {
        let pts = random_scene(seed, n);
        let count = |t: f64| {
            fit_composition_lines(&pts, &RansacConfig { seed, theta_inl: t, iterations: 300, ..Default::default() })
                .unwrap()
                .len()
        };
        let (a, b, c) = (count(0.05), count(0.10), count(0.20));
        prop_assert!(a >= b && b >= c, "{} {} {}", a, b, c);
    }

    #[test]
    fn single_polygon_never_fits(seed in 0u64..10_000) {
        let pts = random_scene(seed, 1);
        let cfg = RansacConfig { seed, ..Default::default() };
        prop_assert!(fit_composition_lines(&pts, &cfg).unwrap().is_empty());
    }

    #[test]
    fn rigid_motion_equivariance(seed in 0u64..10_000, angle in -0.3f64..0.3, dx in -0.05f64..0.05, dy in -0.05f64..0.05) {
        let pts = random_scene(seed, 3);
        let moved: Vec<SampledPoint> = pts
            .iter()
            .map(|p| SampledPoint { point: rotate(p.point, angle, (dx, dy)), polygon_id: p.polygon_id })
            .collect();
        // two-point lines all have distance sum 0, an exact tie that rounding can flip
        let theta_inl = (3.0 / pts.len() as f64).max(0.1);
        let cfg = RansacConfig { seed, iterations: 200, theta_inl, ..Default::default() };
        let before = fit_composition_lines(&pts, &cfg).unwrap();
        let after = fit_composition_lines(&moved, &cfg).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (l0, l1) in before.iter().zip(&after) {
            prop_assert_eq!(&l0.inlier_indices, &l1.inlier_indices);
            // map two points of the original line and check they land on the new one
            let m = l0.model();
            let foot = NormPoint::new(m.normal[0] * m.offset, m.normal[1] * m.offset);
            let along = NormPoint::new(foot.x - m.normal[1] * 0.3, foot.y + m.normal[0] * 0.3);
            for p in [foot, along] {
                prop_assert!(l1.model().distance(&rotate(p, angle, (dx, dy))) < 1e-6);
            }
        }
    }
}
