use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varifold_core::boundary::*;
use varifold_core::curvature::first_variation_residual;
use varifold_core::generators::{gen_cap, gen_flat_disk};
use varifold_core::{Point, Vec3};

fn unit_circle(m: u32, sign: f64) -> Circle {
    Circle::new(Point::origin(), 1.0, Vec3::z(), m, sign)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm() > 0.1 && v.norm() < 1.0 {
            return v.normalize();
        }
    }
}

#[test]
fn closed_form_matches_quadrature_on_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let c = Circle::new(
            Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            rng.gen_range(0.2..3.0),
            random_unit(&mut rng),
            rng.gen_range(1..4),
            if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
        );
        let x0 = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        // general position: keep x₀ away from the circle
        let d = x0 - c.center;
        let h = d.dot(&c.normal);
        let planar = (d - h * c.normal).norm();
        if (h * h + (planar - c.radius).powi(2)).sqrt() < 0.2 * c.radius {
            continue;
        }
        let exact = circle_conormal_integral(&c, &x0).unwrap();
        let quad = circle_conormal_integral_quad(&c, &x0, 4096).unwrap();
        assert!((exact - quad).abs() < 1e-10, "{exact} vs {quad}");
        assert!(exact.abs() <= c.multiplicity as f64 * PI + 1e-12);
        checked += 1;
    }
}

#[test]
fn closed_form_examples() {
    let c = unit_circle(1, 1.0);
    assert!((circle_conormal_integral(&c, &Point::new(0.0, 0.0, 1.0)).unwrap() + PI).abs() < 1e-14);
    assert_eq!(circle_conormal_integral(&c, &Point::origin()).unwrap(), 0.0);
    assert!(circle_conormal_integral(&c, &Point::new(5.0, 0.0, 0.1)).unwrap().abs() < PI);
    let q = circle_conormal_integral_quad(&c, &Point::new(0.3, 0.0, 0.7), 256).unwrap();
    assert!((q - circle_conormal_integral(&c, &Point::new(0.3, 0.0, 0.7)).unwrap()).abs() < 1e-10);
    let q = circle_conormal_integral_quad(&c, &Point::new(0.0, 0.0, 1.0), 256).unwrap();
    assert!((q + PI).abs() < 1e-10);
    assert_eq!(
        circle_conormal_integral_quad(&c, &Point::new(0.0, 0.0, 1.0), 8),
        Err(BoundaryError::TooFewSamples(8))
    );
}

#[test]
fn single_term_peaks_at_half_pi_on_the_unit_circle() {
    let golden = |a: f64| -> (f64, f64) {
        let f = |c: f64| single_term(a, c).abs();
        let (mut lo, mut hi) = (1e-9, 4.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if f(x1) < f(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        let c = 0.5 * (lo + hi);
        (c, f(c))
    };
    let mut best: f64 = 0.0;
    for i in 0..=200 {
        let a = -0.95 + 1.9 * i as f64 / 200.0;
        let (c, v) = golden(a);
        assert!((c - (1.0 - a * a).sqrt()).abs() < 1e-4, "a {a}: c {c}");
        assert!((v - PI / 2.0).abs() < 1e-10);
        best = best.max(v);
    }
    for i in 0..=100 {
        let a = 1.05 + 3.0 * i as f64 / 100.0;
        assert!(golden(a).1 < PI / 2.0);
        assert!(golden(-a).1 < PI / 2.0);
    }
    assert!((best - PI / 2.0).abs() < 1e-4);
}

#[test]
fn integral_is_invariant_under_rigid_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c = Circle::new(Point::new(0.3, -0.2, 0.1), 1.3, random_unit(&mut rng), 2, -1.0);
        let x0 = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(random_unit(&mut rng)), rng.gen_range(0.0..6.0));
        let shift = Vec3::new(1.0, 2.0, -3.0);
        let moved = Circle::new(rot * c.center + shift, c.radius, rot * c.normal, 2, -1.0);
        let a = circle_conormal_integral(&c, &x0).unwrap();
        let b = circle_conormal_integral(&moved, &(rot * x0 + shift)).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn sup_for_a_single_circle_is_pi_below_the_plane() {
    let r = sup_conormal_integral(&[unit_circle(1, 1.0)], &SupSearch::default()).unwrap();
    assert!((r.value - PI).abs() < 1e-6, "{}", r.value);
    // the value π is attained on the whole unit sphere below the plane,
    // (0, 0, -1) included
    assert!((r.argmax.coords.norm() - 1.0).abs() < 1e-3 && r.argmax.z < 0.0, "{:?}", r.argmax);
    let axis = datum_integral(&[unit_circle(1, 1.0)], &Point::new(0.0, 0.0, -1.0)).unwrap();
    assert!((axis - PI).abs() < 1e-14);
    let r3 = sup_conormal_integral(&[unit_circle(3, 1.0)], &SupSearch::default()).unwrap();
    assert!((r3.value - 3.0 * r.value).abs() < 1e-12);
    assert_eq!(r3.argmax, r.argmax);
}

#[test]
fn sup_for_two_parallel_circles_respects_the_bound() {
    // conormals pointing away from each other: both terms reach π on the
    // circle where the two maximizing spheres meet
    let apart = [
        Circle::new(Point::new(0.0, 0.0, 0.1), 1.0, Vec3::z(), 1, 1.0),
        Circle::new(Point::new(0.0, 0.0, -0.1), 1.0, Vec3::z(), 1, -1.0),
    ];
    let r = sup_conormal_integral(&apart, &SupSearch::default()).unwrap();
    assert!(r.value <= 2.0 * PI + 1e-9 && r.value > 2.0 * PI - 1e-6, "{}", r.value);
    assert!(r.argmax.z.abs() < 1e-3);
    assert_eq!(sup_conormal_integral(&apart, &SupSearch::default()).unwrap(), r);

    let towards = [
        Circle::new(Point::new(0.0, 0.0, 0.1), 1.0, Vec3::z(), 1, -1.0),
        Circle::new(Point::new(0.0, 0.0, -0.1), 1.0, Vec3::z(), 1, 1.0),
    ];
    let r = sup_conormal_integral(&towards, &SupSearch::default()).unwrap();
    assert!(r.value > 0.0 && r.value < PI, "{}", r.value);
}

#[test]
fn admissibility_examples() {
    let band = [
        Circle::new(Point::new(0.0, 0.0, 0.1), 1.0, Vec3::z(), 1, 1.0),
        Circle::new(Point::new(0.0, 0.0, -0.1), 1.0, Vec3::z(), 1, -1.0),
    ];
    let r = admissibility_check(3.0, &band, Threshold::SixPi, &SupSearch::default()).unwrap();
    assert!(r.pass && r.slack > 0.0);

    let r = admissibility_check(4.0 * PI, &band, Threshold::EightPi, &SupSearch::default()).unwrap();
    assert!(!r.p_below_4pi && !r.pass);

    let r = admissibility_check(0.0, &[unit_circle(1, 1.0)], Threshold::SixPi, &SupSearch::default()).unwrap();
    assert!(r.slack >= 4.0 * PI - 1e-6, "{}", r.slack);
}

#[test]
fn flat_disk_boundary_is_radial() {
    let g = gen_flat_disk(1.0, 4).unwrap();
    let b = boundary_measure(&g.varifold);
    assert!((b.total_length / (2.0 * PI) - 1.0).abs() < 5e-3);
    for e in &b.edges {
        let mid = (g.varifold.vertices()[e.vertices[0]].coords + g.varifold.vertices()[e.vertices[1]].coords) / 2.0;
        assert!((e.conormal - mid.normalize()).norm() < 1e-6);
        assert!((e.conormal.norm() - 1.0).abs() < 1e-14);
    }
    let field: Vec<Vec3> = g
        .varifold
        .vertices()
        .iter()
        .map(|p| Vec3::new(p.x * p.y + 0.3, p.y * p.y - p.x, 0.5 * p.x))
        .collect();
    let fv = first_variation_residual(&g.varifold, &field).unwrap();
    assert!(fv.residual < 1e-10);
}

#[test]
fn cap_conormal_meets_the_base_plane_at_the_cap_angle() {
    for theta in [PI / 3.0, PI / 2.0] {
        let g = gen_cap(1.0, theta, 4).unwrap();
        let b = boundary_measure(&g.varifold);
        for e in &b.edges {
            let angle = e.conormal.z.abs().asin();
            assert!((angle - theta).abs() < 2f64.to_radians(), "theta {theta}: {angle}");
        }
    }
    let g = gen_cap(1.0, PI / 2.0, 4).unwrap();
    for e in &boundary_measure(&g.varifold).edges {
        assert!((e.conormal + Vec3::z()).norm() < 2f64.to_radians());
    }
}

#[test]
fn closed_mesh_has_empty_boundary() {
    let g = gen_cap(1.0, PI, 2).unwrap();
    assert!(boundary_measure(&g.varifold).is_empty());
}

#[test]
fn datum_json_round_trip() {
    let s = r#"{"circles":[{"center":[0,0,0.1],"radius":1,"normal":[0,0,1],"m":2,"conormal_sign":-1}]}"#;
    let d = BoundaryDatum::from_json_str(s).unwrap();
    assert_eq!(d.circles[0].multiplicity, 2);
    assert!(d.conormal_defect(64) < 1e-10);
    let back = BoundaryDatum::from_json_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back, d);
    assert!(BoundaryDatum::from_json_str(r#"{"circles":[{"center":[0,0,0],"radius":-1,"normal":[0,0,1],"m":1,"conormal_sign":1}]}"#).is_err());
}
