use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varifold_core::density::*;
use varifold_core::generators::*;
use varifold_core::{DiscreteVarifold, Point};

fn x1() -> Point {
    Point::new((2.0f64 / 3.0).sqrt(), -1.0 / 3f64.sqrt(), 0.0)
}

fn tetrahedral_length() -> f64 {
    6.0 * (-1.0f64 / 3.0).acos()
}

#[test]
fn plane_ball_mass_is_exact() {
    let g = gen_flat_disk(3.0, 3).unwrap();
    let o = Point::origin();
    assert!((ball_mass(&g.varifold, &o, 1.0) - PI).abs() < 1e-9);
    for r in [0.01, 0.1, 0.5, 1.7, 2.5] {
        assert!((mass_ratio(&g.varifold, &Point::new(0.1, -0.2, 0.0), r) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn sphere_mass_ratio_converges_to_one() {
    // exact on the round sphere; the inscribed mesh loses O(h²)
    let mut last = f64::INFINITY;
    for level in 2..6 {
        let g = gen_sphere(1.0, level).unwrap();
        let p = g.varifold.vertices()[0];
        let err = (mass_ratio(&g.varifold, &p, 0.5) - 1.0).abs();
        assert!(err < 0.5 * last, "level {level}: {err}");
        last = err;
    }
    assert!(last < 2e-4);
}

#[test]
fn branched_patch_carries_twice_the_disk_area() {
    let g = gen_branched_patch(0.0, 1.0, 3).unwrap();
    let o = Point::origin();
    for r in [1e-3, 0.05, 0.3] {
        let m = ball_mass(&g.varifold, &o, r);
        assert!((m / (2.0 * PI * r * r) - 1.0).abs() < 1e-6);
    }
    for delta in [0.0, 0.1] {
        let g = gen_branched_patch(delta, 1.0, 4).unwrap();
        let d = density(&g.varifold, &o).unwrap();
        assert!((d.theta - 2.0).abs() < 0.03, "delta {delta}: {}", d.theta);
        assert_eq!(d.classification, Some(Classification::Unclassified));
    }
}

#[test]
fn sphere_density_is_one() {
    let g = gen_sphere(1.0, 4).unwrap();
    let p = g.varifold.vertices()[17];
    let d = density(&g.varifold, &p).unwrap();
    assert!((d.theta - 1.0).abs() < 0.05);
    assert_eq!(d.classification.unwrap().label(), "1");
    assert!(d.ratios.iter().all(|&x| x >= 0.0));
}

#[test]
fn double_bubble_junction_density() {
    for theta2 in [0.4, 0.7, 1.0] {
        let g = gen_double_bubble(theta2, 1.0, 4).unwrap();
        let d = density(&g.varifold, &Point::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d.theta - 1.5).abs() < 0.05, "theta2 {theta2}: {}", d.theta);
        assert_eq!(d.classification.unwrap().label(), "3/2");
    }
}

#[test]
fn triple_bubble_tetrahedral_point() {
    let g = gen_triple_bubble(4).unwrap();
    let d = density(&g.varifold, &x1()).unwrap();
    assert!((d.theta - tetrahedral_density()).abs() < 0.05, "{}", d.theta);
    match d.classification.unwrap() {
        Classification::Admissible { value, residual } => {
            assert_eq!(value, AdmissibleDensity::Tetrahedral);
            assert!((residual - (d.theta - tetrahedral_density()).abs()).abs() < 1e-15);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn off_support_point_is_rejected() {
    let g = gen_sphere(1.0, 3).unwrap();
    match density(&g.varifold, &Point::new(0.0, 0.0, 1.5)) {
        Err(DensityError::OffSupport { distance, .. }) => assert!((distance - 0.5).abs() < 0.01),
        other => panic!("{other:?}"),
    }
}

#[test]
fn links_of_the_model_cones() {
    let plane = gen_flat_disk(2.0, 3).unwrap();
    let l = spherical_link(&plane.varifold, &Point::new(0.1, 0.2, 0.0), 0.5, &LinkOptions::default());
    assert!((l.total_length / (2.0 * PI) - 1.0).abs() < 1e-3);
    assert_eq!(l.junction_count, 0);

    let db = gen_double_bubble(0.4, 1.0, 4).unwrap();
    let l = spherical_link(&db.varifold, &Point::new(1.0, 0.0, 0.0), 0.1, &LinkOptions::default());
    assert!((l.total_length / (3.0 * PI) - 1.0).abs() < 0.01, "{}", l.total_length);
    assert_eq!(l.junction_count, 2);
    assert_eq!(l.polylines.len(), 3);

    let tb = gen_triple_bubble(4).unwrap();
    let l = spherical_link(&tb.varifold, &x1(), 0.1, &LinkOptions::default());
    assert!((l.total_length / tetrahedral_length() - 1.0).abs() < 0.01, "{}", l.total_length);
    assert_eq!(l.junction_count, 4);
    assert_eq!(l.polylines.len(), 6);
    for p in l.polylines.iter().flat_map(|q| &q.points) {
        assert!((p.coords.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn link_length_agrees_with_density() {
    let cases: Vec<(DiscreteVarifold, Point)> = vec![
        (gen_sphere(1.0, 4).unwrap().varifold, Point::new(0.0, 0.0, 1.0)),
        (gen_double_bubble(0.7, 1.0, 4).unwrap().varifold, Point::new(1.0, 0.0, 0.0)),
        (gen_triple_bubble(4).unwrap().varifold, x1()),
        (gen_branched_patch(0.1, 1.0, 4).unwrap().varifold, Point::origin()),
        (gen_torus(2.0, 0.5, 4).unwrap().varifold, Point::new(2.5, 0.0, 0.0)),
    ];
    for (v, p) in cases {
        let d = density(&v, &p).unwrap();
        let l = spherical_link(&v, &p, d.radii[2], &LinkOptions::default());
        assert!((l.density / d.theta - 1.0).abs() < 0.02, "{p:?}: {} vs {}", l.density, d.theta);
    }
}

#[test]
fn empty_link_away_from_support() {
    let g = gen_sphere(1.0, 2).unwrap();
    let l = spherical_link(&g.varifold, &Point::new(0.0, 0.0, 3.0), 0.5, &LinkOptions::default());
    assert!(l.is_empty());
    assert_eq!(l.total_length, 0.0);
}

#[test]
fn classification_is_scale_invariant() {
    let g = gen_double_bubble(0.4, 1.0, 3).unwrap();
    let base = density(&g.varifold, &Point::new(1.0, 0.0, 0.0)).unwrap();
    for lambda in [0.1, 10.0] {
        let scaled = g.varifold.map_vertices(|p| Point::from(lambda * p.coords)).unwrap();
        let d = density(&scaled, &Point::new(lambda, 0.0, 0.0)).unwrap();
        assert_eq!(d.classification.unwrap().label(), base.classification.unwrap().label());
        assert!((d.theta - base.theta).abs() < 1e-9);
    }
}

#[test]
fn monotonicity_examples() {
    let sphere = gen_sphere(1.0, 4).unwrap();
    let p = sphere.varifold.vertices()[3];
    let m = monotonicity_check(&sphere.varifold, &p, 0.2, 1.0, 0.02).unwrap();
    assert!(m.pass && m.slack > 0.0);
    assert!((m.lhs - 1.0).abs() < 0.01);

    let plane = gen_flat_disk(3.0, 3).unwrap();
    let m = monotonicity_check(&plane.varifold, &Point::origin(), 0.3, 1.0, 0.02).unwrap();
    assert!(m.pass && m.slack.abs() < 1e-9);

    let db = gen_double_bubble(0.4, 1.0, 4).unwrap();
    let m = monotonicity_check(&db.varifold, &Point::new(1.0, 0.0, 0.0), 0.05, 0.5, 0.02).unwrap();
    assert!(m.pass, "{m:?}");

    assert_eq!(
        monotonicity_check(&db.varifold, &Point::origin(), 0.5, 0.5, 0.02).unwrap_err(),
        DensityError::BadRadii(0.5, 0.5)
    );
}

#[test]
fn monotonicity_on_random_triples() {
    let meshes = [
        gen_sphere(1.0, 4).unwrap().varifold,
        gen_double_bubble(0.7, 1.0, 4).unwrap().varifold,
        gen_triple_bubble(4).unwrap().varifold,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for v in &meshes {
        let field = varifold_core::curvature::mean_curvature(v);
        for _ in 0..50 {
            let p = v.vertices()[rng.gen_range(0..v.vertex_count())];
            let s = rng.gen_range(0.1..1.5);
            let r = s * rng.gen_range(0.05..0.95);
            let m = monotonicity_check_with(v, &field, &p, r, s, 0.02).unwrap();
            assert!(m.pass, "{m:?}");
        }
    }
}

#[test]
fn li_yau_equality_cases() {
    let sphere = gen_sphere(1.0, 4).unwrap();
    let samples: Vec<Point> = sphere.varifold.vertices()[..4].to_vec();
    let r = li_yau_check(&sphere.varifold, &samples, 0.05).unwrap();
    assert!(r.pass && r.equality_gap < 0.05, "{r:?}");

    let db = gen_double_bubble(0.4, 1.0, 5).unwrap();
    let samples = [Point::new(1.0, 0.0, 0.0), db.varifold.vertices()[40]];
    let r = li_yau_check(&db.varifold, &samples, 0.05).unwrap();
    assert!(r.pass && r.equality_gap < 0.05, "{r:?}");
    assert_eq!(r.argmax, 0);

    let tb = gen_triple_bubble(5).unwrap();
    let [a, b] = triple_bubble_tetra_points();
    let r = li_yau_check(&tb.varifold, &[a, b, tb.varifold.vertices()[100]], 0.05).unwrap();
    assert!(r.pass && r.equality_gap < 0.05, "{r:?}");
    assert!((r.theta_max - tetrahedral_density()).abs() < 0.05);
}

#[test]
fn reports_serialize() {
    let g = gen_double_bubble(0.4, 1.0, 2).unwrap();
    let d = density(&g.varifold, &Point::new(1.0, 0.0, 0.0)).unwrap();
    let back: DensityReport = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back.classification, d.classification);
    let l = spherical_link(&g.varifold, &Point::new(1.0, 0.0, 0.0), 0.3, &LinkOptions::default());
    let back: SphericalLink = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
    assert_eq!(back.junction_count, l.junction_count);
}

fn small_sphere() -> DiscreteVarifold {
    gen_sphere(1.0, 2).unwrap().varifold
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ball_mass_is_monotone_in_r(i in 0usize..162, r in 0.01f64..2.5, dr in 0.0f64..0.5) {
        let v = small_sphere();
        let p = v.vertices()[i];
        prop_assert!(ball_mass(&v, &p, r) <= ball_mass(&v, &p, r + dr) + 1e-13);
    }

    #[test]
    fn ball_mass_is_additive_in_multiplicity(i in 0usize..162, r in 0.01f64..2.5, k in 2u32..5) {
        let v = small_sphere();
        let w = v.scaled_multiplicity(k).unwrap();
        let p = v.vertices()[i];
        let (a, b) = (ball_mass(&v, &p, r), ball_mass(&w, &p, r));
        prop_assert!((b - k as f64 * a).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn classification_residual_is_distance_to_value(theta in 0.5f64..1.94) {
        if let Classification::Admissible { value, residual } = classify_density(theta).unwrap() {
            prop_assert_eq!(residual, (theta - value.value()).abs());
            for other in AdmissibleDensity::ALL {
                prop_assert!(residual <= (theta - other.value()).abs());
            }
        } else {
            prop_assert!(false);
        }
    }
}
