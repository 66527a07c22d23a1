use proptest::prelude::*;

use polytraverse::encode::{check_segment_in_union, segment_block_satisfied};
use polytraverse::io::{format_scene, parse_scene};
use polytraverse::{Configuration, ConvexPolytope, RigidObject, RotationTable, Scene, Vec3};

fn v(x: f64, y: f64) -> Vec3 {
    Vec3::new(x, y, 0.0)
}

fn boxed(x0: f64, y0: f64, w: f64, h: f64) -> ConvexPolytope {
    ConvexPolytope::from_box(v(x0, y0), v(x0 + w, y0 + h), 2).unwrap()
}

fn gap(p: &[&ConvexPolytope], x: &Vec3) -> f64 {
    p.iter().map(|q| q.violation(x)).fold(f64::INFINITY, f64::min)
}

fn seg() -> impl Strategy<Value = (Vec3, Vec3)> {
    (-1.0..5.0f64, -1.0..5.0f64, -1.0..5.0f64, -1.0..5.0f64).prop_map(|(a, b, c, d)| (v(a, b), v(c, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hull_rows_are_unit_and_contain_the_points(pts in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 4..10)) {
        let pts: Vec<Vec3> = pts.into_iter().map(|(x, y)| v(x, y)).collect();
        if let Ok(p) = ConvexPolytope::from_points(2, &pts) {
            for r in p.rows() {
                prop_assert!((r.norm() - 1.0).abs() < 1e-9);
            }
            for x in &pts {
                prop_assert!(p.contains(x, 1e-7));
            }
        }
    }

    #[test]
    fn accepted_segments_stay_in_the_union((a, b) in seg(), w in 0.5..3.0f64, shift in 0.5..3.0f64) {
        let p1 = boxed(0.0, 0.0, w, 2.0);
        let p2 = boxed(shift, 1.0, 2.0, 2.0);
        let polys = [&p1, &p2];
        let direct = segment_block_satisfied(&a, &b, &polys, 10, 1e-9);
        let exact = check_segment_in_union(&p1, &p2, &a, &b, 1e-9);
        let worst = (0..=2000).map(|s| gap(&polys, &(a + (b - a) * (s as f64 / 2000.0)))).fold(f64::NEG_INFINITY, f64::max);
        if direct || exact {
            prop_assert!(worst <= 1e-6, "accepted segment leaves the union by {worst}");
        }
    }

    #[test]
    fn poses_preserve_shape(x in -5.0..5.0f64, y in -5.0..5.0f64, rot in 0usize..12) {
        let obj = RigidObject::rectangle(1.2, 0.1);
        let table = RotationTable::for_dim(2, 12).unwrap();
        let world = obj.transform(&Configuration::new(v(x, y), rot), &table);
        let body = obj.vertices();
        for i in 0..body.len() {
            for j in 0..body.len() {
                prop_assert!(((world[i] - world[j]).norm() - (body[i] - body[j]).norm()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scenes_round_trip(obs in prop::collection::vec((0.0..6.0f64, 0.0..6.0f64, 0.1..2.0f64, 0.1..2.0f64), 0..5)) {
        let obstacles = obs.into_iter().map(|(x, y, w, h)| boxed(x, y, w, h)).collect();
        let scene = Scene::new(2, v(0.0, 0.0), v(8.0, 8.0), obstacles).unwrap();
        let text = format_scene(&scene);
        let back = parse_scene(&text).unwrap();
        prop_assert_eq!(format_scene(&back), text);
        prop_assert_eq!(back.obstacles.len(), scene.obstacles.len());
    }
}
