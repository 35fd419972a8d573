//! Analytic constraint surfaces and the patch-aware refinement projector.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::mesh::{EdgeContext, Point, Projector, Vec3};

/// A level set used to snap refined vertices back onto the exact geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Surface {
    Sphere { center: Point, radius: f64 },
    Plane { point: Point, normal: Vec3 },
}

impl Surface {
    pub fn plane(point: Point, normal: Vec3) -> Self {
        Surface::Plane {
            point,
            normal: normal.normalize(),
        }
    }

    /// Signed residual and its gradient.
    fn residual(&self, p: &Point) -> (f64, Vec3) {
        match *self {
            Surface::Sphere { center, radius } => {
                let d = p - center;
                let n = d.norm();
                if n == 0.0 {
                    (-radius, Vec3::z())
                } else {
                    (n - radius, d / n)
                }
            }
            Surface::Plane { point, normal } => ((p - point).dot(&normal), normal),
        }
    }

    pub fn distance(&self, p: &Point) -> f64 {
        self.residual(p).0.abs()
    }
}

/// Least-squares Gauss-Newton projection onto the intersection of
/// `constraints`, using the pseudo-inverse so redundant constraints (a circle
/// given as sphere ∩ sphere ∩ plane) are harmless.
pub fn project_onto(p: Point, constraints: &[Surface]) -> Point {
    if constraints.is_empty() {
        return p;
    }
    let mut x = p;
    for _ in 0..60 {
        let k = constraints.len();
        let mut g = DVector::zeros(k);
        let mut jac = DMatrix::zeros(k, 3);
        for (i, s) in constraints.iter().enumerate() {
            let (r, grad) = s.residual(&x);
            g[i] = r;
            jac.set_row(i, &grad.transpose());
        }
        if g.amax() < 1e-15 {
            break;
        }
        let pinv = match jac.clone().pseudo_inverse(1e-10) {
            Ok(p) => p,
            Err(_) => break,
        };
        let dx = pinv * g;
        x -= Vec3::new(dx[0], dx[1], dx[2]);
        if dx.amax() < 1e-16 {
            break;
        }
    }
    x
}

/// Maps patch labels to analytic surfaces; edges on a patch boundary are
/// additionally held on that patch's boundary surface.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SurfaceProjector {
    pub surfaces: BTreeMap<u32, Surface>,
    pub boundary: BTreeMap<u32, Vec<Surface>>,
}

impl SurfaceProjector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_patch(mut self, patch: u32, surface: Surface) -> Self {
        self.surfaces.insert(patch, surface);
        self
    }

    pub fn with_boundary(mut self, patch: u32, surface: Surface) -> Self {
        self.boundary.entry(patch).or_default().push(surface);
        self
    }

    fn constraints(&self, ctx: &EdgeContext) -> Vec<Surface> {
        let mut out: Vec<Surface> = ctx
            .patches
            .iter()
            .filter_map(|p| self.surfaces.get(p).copied())
            .collect();
        if ctx.boundary {
            for p in &ctx.patches {
                if let Some(b) = self.boundary.get(p) {
                    out.extend(b.iter().copied());
                }
            }
        }
        out
    }
}

impl Projector for SurfaceProjector {
    fn project(&self, p: Point, context: &EdgeContext) -> Point {
        project_onto(p, &self.constraints(context))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sphere_is_radial_projection() {
        let s = Surface::Sphere {
            center: Point::new(1.0, 0.0, 0.0),
            radius: 2.0,
        };
        let q = project_onto(Point::new(1.0, 0.5, 0.5), &[s]);
        let expected = Point::new(1.0, 2.0 / 2f64.sqrt(), 2.0 / 2f64.sqrt());
        assert!((q - expected).norm() < 1e-14);
    }

    #[test]
    fn two_spheres_and_plane_meet_on_circle() {
        let a = Surface::Sphere {
            center: Point::origin(),
            radius: 1.0,
        };
        let b = Surface::Sphere {
            center: Point::new(0.0, 0.0, 1.0),
            radius: 1.0,
        };
        let c = Surface::plane(Point::new(0.0, 0.0, 0.5), Vec3::z());
        let q = project_onto(Point::new(0.7, 0.1, 0.4), &[a, b, c]);
        assert!(a.distance(&q) < 1e-14);
        assert!(b.distance(&q) < 1e-14);
        assert!((q.z - 0.5).abs() < 1e-14);
    }
}
