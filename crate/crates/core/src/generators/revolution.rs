//! Ring-based meshing of surfaces of revolution with graded edge length.
//!
//! A profile curve is walked by arclength from its boundary circle (s = 0)
//! to the axis (s = L). Rings are placed at a spacing of √3/2 times the local
//! target edge length, which grows geometrically from the boundary value to
//! the interior value, and consecutive rings are zipped together whatever
//! their vertex counts. Several surfaces can share one boundary ring, which
//! is how the double bubble's junction circle gets three incident faces per
//! edge.

use std::f64::consts::PI;

use crate::mesh::{Point, Vec3};

/// Accumulates vertices, faces and per-face patch labels.
#[derive(Clone, Debug, Default)]
pub struct MeshBuilder {
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    pub patches: Vec<u32>,
}

impl MeshBuilder {
    pub fn push_vertex(&mut self, p: Point) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    pub fn push_face(&mut self, f: [usize; 3], patch: u32) {
        self.faces.push(f);
        self.patches.push(patch);
    }

    /// Flips faces in `range` so their normals agree with `outward(p)` at the
    /// face centroids (majority vote).
    pub fn orient_range(&mut self, range: std::ops::Range<usize>, outward: impl Fn(&Point) -> Vec3) {
        let mut score = 0.0;
        for f in &self.faces[range.clone()] {
            let [a, b, c] = f.map(|i| self.vertices[i]);
            let n = (b - a).cross(&(c - a));
            let centroid = Point::from((a.coords + b.coords + c.coords) / 3.0);
            score += n.dot(&outward(&centroid)).signum();
        }
        if score < 0.0 {
            for f in &mut self.faces[range] {
                f.swap(1, 2);
            }
        }
    }
}

/// Profile of a surface of revolution in a local frame: radius from the axis
/// and height along it, as functions of arclength from the boundary.
pub struct Profile<'a> {
    pub length: f64,
    pub point: &'a dyn Fn(f64) -> (f64, f64),
}

/// Orthonormal frame; ring angle α maps to `origin + r(cos α e1 + sin α e2) + z e3`.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub origin: Point,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl Frame {
    pub fn standard() -> Self {
        Self {
            origin: Point::origin(),
            e1: Vec3::x(),
            e2: Vec3::y(),
            e3: Vec3::z(),
        }
    }

    /// Same ring angles, axis reversed.
    pub fn flipped() -> Self {
        Self {
            e3: -Vec3::z(),
            ..Self::standard()
        }
    }

    fn place(&self, r: f64, z: f64, angle: f64) -> Point {
        self.origin + r * (angle.cos() * self.e1 + angle.sin() * self.e2) + z * self.e3
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RingParams {
    /// Vertex count on the boundary ring (ignored if the profile starts on the axis).
    pub boundary_count: usize,
    /// Target edge length at the boundary.
    pub h_boundary: f64,
    /// Target edge length far from the boundary.
    pub h_interior: f64,
    /// Per-ring geometric growth factor of the target length.
    pub growth: f64,
    /// Angular over-sampling (vertices per ring = factor × circumference / h).
    pub angular_factor: f64,
}

struct Ring {
    indices: Vec<usize>,
    offset: f64,
}

/// Meshes a profile into `builder`. If `boundary` is given, those vertex
/// indices (already placed at angles 2πk/n) form the first ring. Returns the
/// indices of the first ring.
pub fn revolve(
    builder: &mut MeshBuilder,
    profile: &Profile<'_>,
    frame: &Frame,
    params: &RingParams,
    boundary: Option<&[usize]>,
    patch: u32,
) -> Vec<usize> {
    let l = profile.length;
    let (r0, _) = (profile.point)(0.0);
    let axis_start = r0 <= 1e-12 * l.max(1.0);

    // ring arclength positions and target lengths
    let mut s_list = vec![0.0];
    let mut h_list = vec![if axis_start { params.h_interior } else { params.h_boundary }];
    loop {
        let s = *s_list.last().unwrap();
        let h = *h_list.last().unwrap();
        let ds = 0.5 * 3f64.sqrt() * h;
        if l - s <= 1.5 * ds {
            break;
        }
        let next_h = if params.h_interior > h {
            (h * params.growth).min(params.h_interior)
        } else {
            (h / params.growth).max(params.h_interior)
        };
        s_list.push(s + ds);
        h_list.push(next_h);
    }
    let last = s_list.len() - 1;
    if last > 0 {
        let ds_last = 0.5 * 3f64.sqrt() * h_list[last];
        let scale = (l - ds_last).max(0.5 * l) / s_list[last];
        for s in s_list.iter_mut().skip(1) {
            *s *= scale;
        }
    }

    let mut rings: Vec<Ring> = Vec::with_capacity(s_list.len() + 1);
    for (k, (&s, &h)) in s_list.iter().zip(&h_list).enumerate() {
        let (r, z) = (profile.point)(s);
        if k == 0 && axis_start {
            let idx = builder.push_vertex(frame.place(0.0, z, 0.0));
            rings.push(Ring {
                indices: vec![idx],
                offset: 0.0,
            });
            continue;
        }
        if k == 0 {
            let indices = match boundary {
                Some(b) => b.to_vec(),
                None => {
                    let n = params.boundary_count;
                    (0..n)
                        .map(|i| builder.push_vertex(frame.place(r, z, 2.0 * PI * i as f64 / n as f64)))
                        .collect()
                }
            };
            rings.push(Ring {
                indices,
                offset: 0.0,
            });
            continue;
        }
        let m = ((params.angular_factor * 2.0 * PI * r / h).round() as usize).max(3);
        let offset = if k % 2 == 1 { PI / m as f64 } else { 0.0 };
        let indices = (0..m)
            .map(|i| builder.push_vertex(frame.place(r, z, offset + 2.0 * PI * i as f64 / m as f64)))
            .collect();
        rings.push(Ring { indices, offset });
    }
    let (_, z_end) = (profile.point)(l);
    let apex = builder.push_vertex(frame.place(0.0, z_end, 0.0));
    rings.push(Ring {
        indices: vec![apex],
        offset: 0.0,
    });

    for w in rings.windows(2) {
        zip(builder, &w[0], &w[1], patch);
    }
    rings[0].indices.clone()
}

fn zip(builder: &mut MeshBuilder, a: &Ring, b: &Ring, patch: u32) {
    let (ma, mb) = (a.indices.len(), b.indices.len());
    let ai = |t: usize| a.indices[t % ma];
    let bi = |t: usize| b.indices[t % mb];
    if ma == 1 {
        for t in 0..mb {
            builder.push_face([ai(0), bi(t + 1), bi(t)], patch);
        }
        return;
    }
    if mb == 1 {
        for t in 0..ma {
            builder.push_face([ai(t), ai(t + 1), bi(0)], patch);
        }
        return;
    }
    let step_a = 2.0 * PI / ma as f64;
    let step_b = 2.0 * PI / mb as f64;
    // start B at the vertex angularly closest to a[0]
    let rel = (a.offset - b.offset).rem_euclid(2.0 * PI);
    let j0 = ((rel / step_b).round() as usize) % mb;
    let mut b_start = b.offset + j0 as f64 * step_b;
    while b_start - a.offset > PI {
        b_start -= 2.0 * PI;
    }
    while b_start - a.offset < -PI {
        b_start += 2.0 * PI;
    }
    let (mut ta, mut tb) = (0usize, 0usize);
    while ta < ma || tb < mb {
        let next_a = a.offset + (ta + 1) as f64 * step_a;
        let next_b = b_start + (tb + 1) as f64 * step_b;
        if tb == mb || (ta < ma && next_a <= next_b) {
            builder.push_face([ai(ta), ai(ta + 1), bi(j0 + tb)], patch);
            ta += 1;
        } else {
            builder.push_face([ai(ta), bi(j0 + tb + 1), bi(j0 + tb)], patch);
            tb += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DiscreteVarifold;

    #[test]
    fn flat_disk_is_valid_and_upward() {
        let mut b = MeshBuilder::default();
        let rho = 1.0;
        let n = 48;
        let h = 2.0 * PI * rho / n as f64;
        let point = move |s: f64| (rho - s, 0.0);
        let profile = Profile {
            length: rho,
            point: &point,
        };
        let params = RingParams {
            boundary_count: n,
            h_boundary: h,
            h_interior: h,
            growth: 1.15,
            angular_factor: 1.0,
        };
        revolve(&mut b, &profile, &Frame::standard(), &params, None, 0);

        let v = DiscreteVarifold::new(b.vertices.clone(), b.faces.clone(), None, true).unwrap();
        let polygon = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
        assert!((v.total_mass() - polygon).abs() < 1e-12, "{}", v.total_mass());
        for f in 0..v.face_count() {
            assert!(v.face_normal(f).z > 0.999);
        }
        let t = v.edge_topology();
        assert_eq!(t.boundary_edges().len(), n);
        assert!(t.junction_edges().is_empty());
    }
}
