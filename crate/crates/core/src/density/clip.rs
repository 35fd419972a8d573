//! Exact area of a triangle intersected with a disk.

use nalgebra::Vector2;

use crate::mesh::{Point, Vec3};

type V2 = Vector2<f64>;

/// Discriminant tolerance for tangency.
const DISC_TOL: f64 = 1e-12;

fn cross(a: &V2, b: &V2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Roots t ∈ (0, 1) of |a + t(b − a)|² = r², ascending.
fn segment_circle(a: &V2, b: &V2, r: f64) -> Vec<f64> {
    let d = b - a;
    let qa = d.norm_squared();
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = 2.0 * a.dot(&d);
    let qc = a.norm_squared() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= DISC_TOL * (qb * qb).max(qa * r * r) {
        return Vec::new();
    }
    let s = disc.sqrt();
    [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)]
        .into_iter()
        .filter(|t| *t > 0.0 && *t < 1.0)
        .collect()
}

/// Signed area of (origin, a, b) ∩ disk(origin, r).
fn wedge_area(a: &V2, b: &V2, r: f64) -> f64 {
    let mut pts = vec![*a];
    for t in segment_circle(a, b, r) {
        pts.push(a + t * (b - a));
    }
    pts.push(*b);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = (p + q) / 2.0;
        if mid.norm_squared() <= r * r {
            total += 0.5 * cross(&p, &q);
        } else {
            total += 0.5 * r * r * cross(&p, &q).atan2(p.dot(&q));
        }
    }
    total
}

/// Area of triangle (a, b, c) ∩ disk(center, r), all in one plane.
pub fn triangle_disk_area_2d(a: V2, b: V2, c: V2, center: V2, r: f64) -> f64 {
    let (a, b, c) = (a - center, b - center, c - center);
    (wedge_area(&a, &b, r) + wedge_area(&b, &c, r) + wedge_area(&c, &a, r)).abs()
}

/// Area of the part of triangle `p` inside the ball B_r(x0).
pub fn triangle_ball_area(p: [Point; 3], x0: &Point, r: f64) -> f64 {
    let r2 = r * r;
    let d2: [f64; 3] = p.map(|q| (q - x0).norm_squared());
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let n = e1.cross(&e2);
    let twice_area = n.norm();
    if twice_area == 0.0 {
        return 0.0;
    }
    if d2.iter().all(|&d| d <= r2) {
        return 0.5 * twice_area;
    }
    let centroid = Point::from((p[0].coords + p[1].coords + p[2].coords) / 3.0);
    let spread = p.iter().map(|q| (q - centroid).norm()).fold(0.0, f64::max);
    if (centroid - x0).norm() > r + spread {
        return 0.0;
    }
    let n = n / twice_area;
    let height = (x0 - p[0]).dot(&n);
    let rho2 = r2 - height * height;
    if rho2 <= 0.0 {
        return 0.0;
    }
    let center = x0 - height * n;
    let u = e1.normalize();
    let w = n.cross(&u);
    let local = |q: &Point| -> V2 {
        let d: Vec3 = q - center;
        V2::new(d.dot(&u), d.dot(&w))
    };
    triangle_disk_area_2d(local(&p[0]), local(&p[1]), local(&p[2]), V2::zeros(), rho2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_inside_large_triangle() {
        let a = triangle_disk_area_2d(
            V2::new(-10.0, -10.0),
            V2::new(10.0, -10.0),
            V2::new(0.0, 10.0),
            V2::zeros(),
            1.0,
        );
        assert!((a - PI).abs() < 1e-14);
    }

    #[test]
    fn quarter_disk_in_corner() {
        let a = triangle_disk_area_2d(V2::zeros(), V2::new(5.0, 0.0), V2::new(0.0, 5.0), V2::zeros(), 1.0);
        assert!((a - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn half_disk_cut_by_edge() {
        let a = triangle_disk_area_2d(
            V2::new(-10.0, 0.0),
            V2::new(10.0, 0.0),
            V2::new(0.0, 10.0),
            V2::zeros(),
            1.0,
        );
        assert!((a - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn circular_segment() {
        // chord at distance 0.5 from the centre of a unit disk
        let a = triangle_disk_area_2d(
            V2::new(-10.0, 0.5),
            V2::new(10.0, 0.5),
            V2::new(0.0, 10.0),
            V2::zeros(),
            1.0,
        );
        let exact = (0.5f64).acos() - 0.5 * (0.75f64).sqrt();
        assert!((a - exact).abs() < 1e-13);
    }

    #[test]
    fn winding_does_not_matter() {
        let (a, b, c) = (V2::new(0.2, -0.3), V2::new(1.5, 0.1), V2::new(0.1, 1.2));
        let x = triangle_disk_area_2d(a, b, c, V2::new(0.3, 0.2), 0.7);
        let y = triangle_disk_area_2d(a, c, b, V2::new(0.3, 0.2), 0.7);
        assert!((x - y).abs() < 1e-15);
    }

    #[test]
    fn ball_slices_plane_at_height() {
        let p = [Point::new(-10.0, -10.0, 0.0), Point::new(10.0, -10.0, 0.0), Point::new(0.0, 10.0, 0.0)];
        let a = triangle_ball_area(p, &Point::new(0.0, 0.0, 0.6), 1.0);
        assert!((a - PI * 0.64).abs() < 1e-13);
        assert_eq!(triangle_ball_area(p, &Point::new(0.0, 0.0, 1.5), 1.0), 0.0);
    }
}
