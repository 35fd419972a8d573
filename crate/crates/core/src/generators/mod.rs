//! Constructors for the example surfaces, each paired with its exact values.
//!
//! Every generator returns the discrete varifold, an [`Analytic`] record of
//! closed-form reference values, and (where the geometry is piecewise
//! spherical or planar) a [`SurfaceProjector`] that keeps further
//! [`refine`](crate::mesh::refine) calls on the exact surface.
//!
//! Orientation convention: spheres, caps and tori are wound so face normals
//! point away from the enclosed region. With that orientation the discrete
//! mean curvature of the unit sphere is H = -2n.

mod revolution;
mod surface;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{refine, DiscreteVarifold, MeshError, Point, Vec3};

pub use revolution::{Frame, MeshBuilder, Profile, RingParams};
pub use surface::{project_onto, Surface, SurfaceProjector};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("flat-interface case; use gen_double_bubble_flat")]
    FlatInterface,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A point with a known exact density.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityPoint {
    pub name: String,
    pub point: [f64; 3],
    pub density: f64,
    pub expression: String,
}

/// A curve along which sheets meet.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JunctionCurve {
    Circle {
        center: [f64; 3],
        radius: f64,
        normal: [f64; 3],
    },
    Segment {
        start: [f64; 3],
        end: [f64; 3],
    },
}

/// Exact reference values attached to a generated mesh.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Analytic {
    pub total_area: Option<f64>,
    pub willmore: Option<f64>,
    pub willmore_expression: Option<String>,
    pub density_points: Vec<DensityPoint>,
    pub junction_curves: Vec<JunctionCurve>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct GeneratorOutput {
    pub varifold: DiscreteVarifold,
    pub analytic: Analytic,
    pub projector: Option<SurfaceProjector>,
}

impl GeneratorOutput {
    /// Refines the mesh further, staying on the analytic surface when a
    /// projector is available.
    pub fn refined(&self, levels: usize) -> DiscreteVarifold {
        match &self.projector {
            Some(p) => refine(&self.varifold, levels, Some(p)),
            None => refine(&self.varifold, levels, None),
        }
    }
}

fn arr(p: &Point) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn finish(builder: MeshBuilder, oriented: bool) -> Result<DiscreteVarifold, GeneratorError> {
    Ok(DiscreteVarifold::new(builder.vertices, builder.faces, None, oriented)?.with_patches(builder.patches)?)
}

fn check_positive(name: &str, x: f64) -> Result<(), GeneratorError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(GeneratorError::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

const ICOSAHEDRON_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

/// Subdivided icosahedron projected to the sphere of radius `radius` centred
/// at the origin, wound outward.
pub fn gen_sphere(radius: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("radius", radius)?;
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let mut builder = MeshBuilder::default();
    for (x, y, z) in raw {
        builder.push_vertex(Point::from(Vec3::new(x, y, z).normalize() * radius));
    }
    for f in ICOSAHEDRON_FACES {
        builder.push_face(f, 0);
    }
    builder.orient_range(0..20, |p| p.coords);
    let coarse = finish(builder, true)?;
    let projector = SurfaceProjector::new().with_patch(
        0,
        Surface::Sphere {
            center: Point::origin(),
            radius,
        },
    );
    let varifold = refine(&coarse, level, Some(&projector));
    let mut analytic = Analytic {
        total_area: Some(4.0 * PI * radius * radius),
        willmore: Some(4.0 * PI),
        willmore_expression: Some("4π".into()),
        ..Default::default()
    };
    analytic.density_points.push(DensityPoint {
        name: "north_pole".into(),
        point: [0.0, 0.0, radius],
        density: 1.0,
        expression: "1".into(),
    });
    analytic.values.insert("radius".into(), radius);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: Some(projector),
    })
}

/// Vertex count of the coarse boundary and junction rings; refinement
/// doubles it per level.
const COARSE_RING: usize = 6;

fn coarse_ring(builder: &mut MeshBuilder, rho: f64) -> Vec<usize> {
    (0..COARSE_RING)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / COARSE_RING as f64;
            builder.push_vertex(Point::new(rho * a.cos(), rho * a.sin(), 0.0))
        })
        .collect()
}

/// Spherical cap of radius `radius` and opening angle `theta`, with its
/// boundary circle in the plane z = 0 and its apex on the positive z-axis.
struct CapSpec {
    radius: f64,
    theta: f64,
    /// +1 bulges towards +z, -1 towards -z.
    side: f64,
}

impl CapSpec {
    fn center(&self) -> Point {
        Point::new(0.0, 0.0, -self.side * self.radius * self.theta.cos())
    }

    fn area(&self) -> f64 {
        2.0 * PI * self.radius * self.radius * (1.0 - self.theta.cos())
    }

    fn surface(&self) -> Surface {
        Surface::Sphere {
            center: self.center(),
            radius: self.radius,
        }
    }

    /// Coarse ring mesh with a hexagonal boundary, graded towards the apex
    /// for caps much larger than their boundary circle.
    fn coarse(&self, builder: &mut MeshBuilder, boundary: Option<&[usize]>, patch: u32) {
        let (r_sph, theta) = (self.radius, self.theta);
        let rho = r_sph * theta.sin();
        let point = move |s: f64| {
            let phi = theta - s / r_sph;
            (r_sph * phi.sin().max(0.0), r_sph * phi.cos() - r_sph * theta.cos())
        };
        let profile = Profile {
            length: r_sph * theta,
            point: &point,
        };
        let params = RingParams {
            boundary_count: COARSE_RING,
            h_boundary: 2.0 * PI * rho / COARSE_RING as f64,
            h_interior: 2.0 * PI * r_sph / COARSE_RING as f64,
            growth: 1.5,
            angular_factor: 1.0,
        };
        let frame = if self.side > 0.0 {
            Frame::standard()
        } else {
            Frame::flipped()
        };
        let start = builder.faces.len();
        revolution::revolve(builder, &profile, &frame, &params, boundary, patch);
        let c = self.center();
        builder.orient_range(start..builder.faces.len(), move |p| p - c);
    }
}

/// Spherical cap with opening angle `theta` ∈ (0, π]; boundary circle in
/// z = 0 (collapsed to a point when theta = π).
pub fn gen_cap(radius: f64, theta: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("radius", radius)?;
    if !(theta > 0.0 && theta <= PI) {
        return Err(GeneratorError::InvalidParameter(format!(
            "theta must lie in (0, π], got {theta}"
        )));
    }
    let cap = CapSpec {
        radius,
        theta,
        side: 1.0,
    };
    let mut builder = MeshBuilder::default();
    cap.coarse(&mut builder, None, 0);
    let coarse = finish(builder, true)?;
    let mut projector = SurfaceProjector::new().with_patch(0, cap.surface());
    if theta < PI {
        projector = projector.with_boundary(0, Surface::plane(Point::origin(), Vec3::z()));
    }
    let varifold = refine(&coarse, level, Some(&projector));
    let mut analytic = Analytic {
        total_area: Some(cap.area()),
        willmore: Some(2.0 * PI * (1.0 - theta.cos())),
        willmore_expression: Some("2π(1 - cos θ)".into()),
        ..Default::default()
    };
    analytic.values.insert("radius".into(), radius);
    analytic.values.insert("theta".into(), theta);
    analytic.values.insert("boundary_radius".into(), radius * theta.sin());
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: Some(projector),
    })
}

/// Opening angles θ₁ = 2π/3 - θ₂, θ₂, θ₃ = θ₂ + 2π/3 of the standard double bubble.
pub fn double_bubble_angles(theta2: f64) -> [f64; 3] {
    [2.0 * PI / 3.0 - theta2, theta2, theta2 + 2.0 * PI / 3.0]
}

/// Signed radii Rᵢ = ρ / sin θᵢ.
pub fn double_bubble_radii(theta2: f64, rho: f64) -> [f64; 3] {
    double_bubble_angles(theta2).map(|t| rho / t.sin())
}

/// Cap placement from the direction of its inward tangent at the junction,
/// measured in the (radial, z) half-plane.
fn cap_from_tangent_angle(alpha: f64, rho: f64) -> Option<CapSpec> {
    let a = alpha.rem_euclid(2.0 * PI);
    let (theta, side) = if a < PI { (PI - a, 1.0) } else { (a - PI, -1.0) };
    let s = theta.sin();
    if s.abs() < 1e-9 || theta <= 0.0 || theta >= PI {
        return None;
    }
    Some(CapSpec {
        radius: rho / s,
        theta,
        side,
    })
}

/// Standard double bubble: three spherical caps through the junction circle
/// of radius `rho` in z = 0, meeting pairwise at 120°.
pub fn gen_double_bubble(theta2: f64, rho: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("rho", rho)?;
    if !(theta2 > 0.0 && theta2 < 2.0 * PI / 3.0) {
        return Err(GeneratorError::InvalidParameter(format!(
            "theta2 must lie in (0, 2π/3), got {theta2}"
        )));
    }
    let alphas = [PI / 3.0 + theta2, PI + theta2, 5.0 * PI / 3.0 + theta2];
    let caps: Vec<CapSpec> = alphas
        .iter()
        .map(|&a| cap_from_tangent_angle(a, rho))
        .collect::<Option<_>>()
        .ok_or(GeneratorError::FlatInterface)?;
    let out = build_bubble_caps(&caps, None, rho, level)?;
    let angles = double_bubble_angles(theta2);
    let mut analytic = out.1;
    analytic.values.insert("theta2".into(), theta2);
    for (i, (t, r)) in angles.iter().zip(double_bubble_radii(theta2, rho)).enumerate() {
        analytic.values.insert(format!("theta{}", i + 1), *t);
        analytic.values.insert(format!("R{}", i + 1), r);
        analytic.values.insert(
            format!("cap_area{}", i + 1),
            2.0 * PI * r * r * (1.0 - t.cos()),
        );
    }
    Ok(GeneratorOutput {
        varifold: out.0,
        analytic,
        projector: Some(out.2),
    })
}

/// Equal-volume double bubble: two caps of opening angle 2π/3 and the flat
/// separating disk (the θ₂ → 0 limit of [`gen_double_bubble`]).
pub fn gen_double_bubble_flat(rho: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("rho", rho)?;
    let caps = [
        CapSpec {
            radius: rho / (2.0 * PI / 3.0).sin(),
            theta: 2.0 * PI / 3.0,
            side: 1.0,
        },
        CapSpec {
            radius: rho / (2.0 * PI / 3.0).sin(),
            theta: 2.0 * PI / 3.0,
            side: -1.0,
        },
    ];
    let (varifold, mut analytic, projector) = build_bubble_caps(&caps, Some(()), rho, level)?;
    analytic.values.insert("theta2".into(), 0.0);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: Some(projector),
    })
}

fn build_bubble_caps(
    caps: &[CapSpec],
    flat_disk: Option<()>,
    rho: f64,
    level: usize,
) -> Result<(DiscreteVarifold, Analytic, SurfaceProjector), GeneratorError> {
    let mut builder = MeshBuilder::default();
    let ring = coarse_ring(&mut builder, rho);
    let mut projector = SurfaceProjector::new();
    for (i, cap) in caps.iter().enumerate() {
        cap.coarse(&mut builder, Some(&ring), i as u32);
        projector = projector.with_patch(i as u32, cap.surface());
    }
    if flat_disk.is_some() {
        let patch = caps.len() as u32;
        disk_coarse(&mut builder, rho, COARSE_RING, Some(&ring), patch);
        projector = projector.with_patch(patch, Surface::plane(Point::origin(), Vec3::z()));
    }
    let coarse = finish(builder, false)?;
    let varifold = refine(&coarse, level, Some(&projector));
    let disk_area = if flat_disk.is_some() { PI * rho * rho } else { 0.0 };
    let mut analytic = Analytic {
        total_area: Some(caps.iter().map(CapSpec::area).sum::<f64>() + disk_area),
        willmore: Some(6.0 * PI),
        willmore_expression: Some("6π".into()),
        ..Default::default()
    };
    analytic.values.insert("rho".into(), rho);
    analytic.density_points.push(DensityPoint {
        name: "junction".into(),
        point: [0.0, rho, 0.0],
        density: 1.5,
        expression: "3/2".into(),
    });
    analytic.junction_curves.push(JunctionCurve::Circle {
        center: [0.0; 3],
        radius: rho,
        normal: [0.0, 0.0, 1.0],
    });
    Ok((varifold, analytic, projector))
}

/// Fan of triangles from the centre to a regular `count`-gon of radius `rho`,
/// wound towards +z.
fn disk_coarse(builder: &mut MeshBuilder, rho: f64, count: usize, boundary: Option<&[usize]>, patch: u32) {
    let ring: Vec<usize> = match boundary {
        Some(b) => b.to_vec(),
        None => (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                builder.push_vertex(Point::new(rho * a.cos(), rho * a.sin(), 0.0))
            })
            .collect(),
    };
    let center = builder.push_vertex(Point::origin());
    let start = builder.faces.len();
    for i in 0..ring.len() {
        builder.push_face([center, ring[i], ring[(i + 1) % ring.len()]], patch);
    }
    builder.orient_range(start..builder.faces.len(), |_| Vec3::z());
}

fn disk_projector(rho: f64) -> SurfaceProjector {
    SurfaceProjector::new()
        .with_patch(0, Surface::plane(Point::origin(), Vec3::z()))
        .with_boundary(
            0,
            Surface::Sphere {
                center: Point::origin(),
                radius: rho,
            },
        )
}

/// Refined disk of radius `rho` in z = 0 with `count`·2^level boundary vertices.
fn refined_disk(rho: f64, count: usize, level: usize) -> Result<DiscreteVarifold, GeneratorError> {
    let mut builder = MeshBuilder::default();
    disk_coarse(&mut builder, rho, count, None, 0);
    let coarse = finish(builder, true)?;
    Ok(refine(&coarse, level, Some(&disk_projector(rho))))
}

/// Triangulated disk of radius `rho` in z = 0, wound towards +z.
pub fn gen_flat_disk(rho: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("rho", rho)?;
    let varifold = refined_disk(rho, COARSE_RING, level)?;
    let projector = disk_projector(rho);
    let mut analytic = Analytic {
        total_area: Some(PI * rho * rho),
        willmore: Some(0.0),
        willmore_expression: Some("0".into()),
        ..Default::default()
    };
    analytic.density_points.push(DensityPoint {
        name: "center".into(),
        point: [0.0; 3],
        density: 1.0,
        expression: "1".into(),
    });
    analytic.values.insert("rho".into(), rho);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: Some(projector),
    })
}

/// Sphere centres of the symmetric triple bubble: the unit sphere at the
/// origin and its two images under rotation by ±2π/3 about the line
/// {y = -1/√3, z = 0}.
pub fn triple_bubble_centers() -> [Point; 3] {
    let s3 = 3f64.sqrt();
    [
        Point::origin(),
        Point::new(0.0, -s3 / 2.0, 0.5),
        Point::new(0.0, -s3 / 2.0, -0.5),
    ]
}

/// The two tetrahedral junction points x₁, x₂.
pub fn triple_bubble_tetra_points() -> [Point; 2] {
    let a = (2.0f64 / 3.0).sqrt();
    let b = -1.0 / 3f64.sqrt();
    [Point::new(a, b, 0.0), Point::new(-a, b, 0.0)]
}

/// Quarter-patch parametrisation X(θ, φ) of one spherical part.
pub fn triple_bubble_patch(theta: f64, phi: f64) -> Point {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let s3 = 3f64.sqrt();
    Point::new(-st * sp, 0.5 * st * cp - 0.5 * s3 * ct, 0.5 * s3 * st * cp + 0.5 * ct)
}

/// Upper limit φ_θ = arccos(-cot θ / √3) of the quarter patch.
pub fn triple_bubble_phi_limit(theta: f64) -> f64 {
    (-(theta.cos() / theta.sin()) / 3f64.sqrt()).clamp(-1.0, 1.0).acos()
}

/// Rotation by `angle` about the triple-bubble symmetry axis.
pub fn triple_bubble_rotate(p: &Point, angle: f64) -> Point {
    let q = Point::new(0.0, -1.0 / 3f64.sqrt(), 0.0);
    let d = p - q;
    let (s, c) = angle.sin_cos();
    q + Vec3::new(d.x, c * d.y - s * d.z, s * d.y + c * d.z)
}

/// Symmetric triple bubble: three parts of unit spheres and three planar
/// walls, meeting along three circular arcs and the axis segment x₂x₁.
pub fn gen_triple_bubble(level: usize) -> Result<GeneratorOutput, GeneratorError> {
    let centers = triple_bubble_centers();
    let [x1, x2] = triple_bubble_tetra_points();
    let axis_mid = Point::new(0.0, -1.0 / 3f64.sqrt(), 0.0);
    let pairs = [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)];

    let mut builder = MeshBuilder::default();
    let ix1 = builder.push_vertex(x1);
    let ix2 = builder.push_vertex(x2);
    let imid = builder.push_vertex(axis_mid);
    // arc midpoints on the far side from the third centre
    let mut arc_mid = [0usize; 3];
    for (w, &(i, j, k)) in pairs.iter().enumerate() {
        let m = Point::from((centers[i].coords + centers[j].coords) / 2.0);
        let u = (m - centers[k]).normalize();
        arc_mid[w] = builder.push_vertex(m + u * (3f64.sqrt() / 2.0));
    }
    let mut back = [0usize; 3];
    for i in 0..3 {
        let out = (centers[i] - axis_mid).normalize();
        back[i] = builder.push_vertex(centers[i] + out);
    }
    let wall_of = |i: usize, j: usize| -> usize {
        pairs
            .iter()
            .position(|&(a, b, _)| (a == i && b == j) || (a == j && b == i))
            .unwrap()
    };
    let mut projector = SurfaceProjector::new();
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        let (aij, aik) = (arc_mid[wall_of(i, j)], arc_mid[wall_of(i, k)]);
        let b = back[i];
        let start = builder.faces.len();
        for f in [[b, ix1, aij], [b, aij, ix2], [b, ix2, aik], [b, aik, ix1]] {
            builder.push_face(f, i as u32);
        }
        let c = centers[i];
        builder.orient_range(start..builder.faces.len(), move |p| p - c);
        projector = projector.with_patch(
            i as u32,
            Surface::Sphere {
                center: centers[i],
                radius: 1.0,
            },
        );
    }
    for (w, &(i, j, _)) in pairs.iter().enumerate() {
        let patch = 3 + w as u32;
        let normal = (centers[j] - centers[i]).normalize();
        let start = builder.faces.len();
        builder.push_face([ix1, imid, arc_mid[w]], patch);
        builder.push_face([imid, ix2, arc_mid[w]], patch);
        builder.orient_range(start..builder.faces.len(), move |_| normal);
        let mid = Point::from((centers[i].coords + centers[j].coords) / 2.0);
        projector = projector.with_patch(patch, Surface::plane(mid, normal));
    }
    let coarse = finish(builder, false)?;
    let varifold = refine(&coarse, level, Some(&projector));

    let w = 12.0 * (-1.0f64 / 3.0).acos();
    let theta_tetra = 3.0 * (-1.0f64 / 3.0).acos() / PI;
    // each wall is the major segment of a disk of radius √3/2 cut by a chord
    // at distance 1/(2√3) from its centre
    let (r, d) = (3f64.sqrt() / 2.0, 1.0 / (2.0 * 3f64.sqrt()));
    let minor = r * r * (d / r).acos() - d * (r * r - d * d).sqrt();
    let wall_area = PI * r * r - minor;
    let mut analytic = Analytic {
        total_area: Some(w + 3.0 * wall_area),
        willmore: Some(w),
        willmore_expression: Some("12·arccos(-1/3)".into()),
        ..Default::default()
    };
    for (name, p) in [("x1", x1), ("x2", x2)] {
        analytic.density_points.push(DensityPoint {
            name: name.into(),
            point: arr(&p),
            density: theta_tetra,
            expression: "3·arccos(-1/3)/π".into(),
        });
    }
    analytic.junction_curves.push(JunctionCurve::Segment {
        start: arr(&x2),
        end: arr(&x1),
    });
    for &(i, j, _) in &pairs {
        let m = Point::from((centers[i].coords + centers[j].coords) / 2.0);
        analytic.junction_curves.push(JunctionCurve::Circle {
            center: arr(&m),
            radius: r,
            normal: arr(&Point::from((centers[j] - centers[i]).normalize())),
        });
    }
    analytic.values.insert("wall_area".into(), wall_area);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: Some(projector),
    })
}

/// C² quintic smoothstep cutoff: 1 on [0, ρ₀/3], 0 on [2ρ₀/3, ∞).
pub fn cutoff(rho: f64, rho0: f64) -> f64 {
    let t = ((rho - rho0 / 3.0) / (rho0 / 3.0)).clamp(0.0, 1.0);
    1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// f(ρ, θ) = (ρ cos 2θ, ρ sin 2θ, δ e^{-1/ρ²} ψ(ρ) cos θ).
pub fn branched_map(rho: f64, theta: f64, delta: f64, rho0: f64) -> Point {
    let lift = if rho > 0.0 && delta != 0.0 {
        delta * (-1.0 / (rho * rho)).exp() * cutoff(rho, rho0) * theta.cos()
    } else {
        0.0
    };
    Point::new(rho * (2.0 * theta).cos(), rho * (2.0 * theta).sin(), lift)
}

/// Image of the branched immersion over the parameter disk of radius `rho0`.
/// The origin is a single vertex with density 2.
pub fn gen_branched_patch(delta: f64, rho0: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("rho0", rho0)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(GeneratorError::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    // twice the angular resolution: the map doubles angles
    let param = refined_disk(rho0, 2 * COARSE_RING, level)?;
    let varifold = param.map_vertices(|p| {
        let rho = (p.x * p.x + p.y * p.y).sqrt();
        branched_map(rho, p.y.atan2(p.x), delta, rho0)
    })?;
    let mut analytic = Analytic {
        willmore: (delta == 0.0).then_some(0.0),
        willmore_expression: (delta == 0.0).then(|| "0".to_string()),
        total_area: (delta == 0.0).then_some(2.0 * PI * rho0 * rho0),
        ..Default::default()
    };
    analytic.density_points.push(DensityPoint {
        name: "branch_point".into(),
        point: [0.0; 3],
        density: 2.0,
        expression: "2".into(),
    });
    analytic.values.insert("delta".into(), delta);
    analytic.values.insert("rho0".into(), rho0);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: None,
    })
}

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth non-negative function on the plane vanishing exactly on the union
/// of the closed disks.
pub fn contact_function(p: (f64, f64), centers: &[[f64; 2]], radii: &[f64]) -> f64 {
    centers
        .iter()
        .zip(radii)
        .map(|(c, r)| bump(((p.0 - c[0]).powi(2) + (p.1 - c[1]).powi(2)).sqrt() - r))
        .product()
}

/// Two graph sheets z = ±δ u over the unit disk that coincide (and carry
/// multiplicity 2) exactly on a finite union of closed disks.
pub fn gen_singular_pair(
    disk_centers: &[[f64; 2]],
    disk_radii: &[f64],
    delta: f64,
    level: usize,
) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("delta", delta)?;
    if disk_centers.len() != disk_radii.len() || disk_centers.is_empty() {
        return Err(GeneratorError::InvalidParameter(
            "need one radius per disk centre and at least one disk".into(),
        ));
    }
    for (c, &r) in disk_centers.iter().zip(disk_radii) {
        check_positive("disk radius", r)?;
        if (c[0] * c[0] + c[1] * c[1]).sqrt() + r >= 1.0 {
            log::warn!("contact disk at {c:?} with radius {r} is not contained in the unit disk");
        }
    }
    let param = refined_disk(1.0, COARSE_RING, level)?;
    let u: Vec<f64> = param
        .vertices()
        .iter()
        .map(|p| contact_function((p.x, p.y), disk_centers, disk_radii))
        .collect();
    if u.iter().all(|&x| x > 0.0) {
        log::warn!("contact set is not resolved by any mesh vertex; refine further");
    }
    let mut builder = MeshBuilder::default();
    let mut upper = Vec::with_capacity(u.len());
    let mut lower = Vec::with_capacity(u.len());
    for (p, &ui) in param.vertices().iter().zip(&u) {
        let up = builder.push_vertex(Point::new(p.x, p.y, delta * ui));
        upper.push(up);
        lower.push(if ui == 0.0 {
            up
        } else {
            builder.push_vertex(Point::new(p.x, p.y, -delta * ui))
        });
    }
    let mut multiplicity = Vec::new();
    for f in param.faces() {
        if f.iter().all(|&i| u[i] == 0.0) {
            builder.push_face(f.map(|i| upper[i]), 2);
            multiplicity.push(2);
        } else {
            builder.push_face(f.map(|i| upper[i]), 0);
            multiplicity.push(1);
            builder.push_face(f.map(|i| lower[i]), 1);
            multiplicity.push(1);
        }
    }
    let varifold = DiscreteVarifold::new(builder.vertices, builder.faces, Some(multiplicity), false)?
        .with_patches(builder.patches)?;
    let mut analytic = Analytic::default();
    let c0 = disk_centers[0];
    analytic.density_points.push(DensityPoint {
        name: "contact".into(),
        point: [c0[0], c0[1], 0.0],
        density: 2.0,
        expression: "2".into(),
    });
    let h = delta * contact_function((0.9, 0.0), disk_centers, disk_radii);
    for (name, z) in [("upper_sheet", h), ("lower_sheet", -h)] {
        analytic.density_points.push(DensityPoint {
            name: name.into(),
            point: [0.9, 0.0, z],
            density: if h == 0.0 { 2.0 } else { 1.0 },
            expression: if h == 0.0 { "2" } else { "1" }.into(),
        });
    }
    analytic.values.insert("delta".into(), delta);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: None,
    })
}

/// Embedded torus with tube radius `minor` around a circle of radius `major`,
/// wound outward, on an (8·2^level) × (4·2^level) parameter grid.
pub fn gen_torus(major: f64, minor: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("minor", minor)?;
    if !(major > minor) {
        return Err(GeneratorError::InvalidParameter("major radius must exceed minor radius".into()));
    }
    let nu = 8 << level;
    let nv = 4 << level;
    let mut builder = MeshBuilder::default();
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            builder.push_vertex(Point::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    for i in 0..nu {
        for j in 0..nv {
            builder.push_face([id(i, j), id(i + 1, j), id(i + 1, j + 1)], 0);
            builder.push_face([id(i, j), id(i + 1, j + 1), id(i, j + 1)], 0);
        }
    }
    let outward = move |p: &Point| {
        let ring = Vec3::new(p.x, p.y, 0.0).normalize() * major;
        p.coords - ring
    };
    builder.orient_range(0..builder.faces.len(), outward);
    let varifold = finish(builder, true)?;
    let mut analytic = Analytic {
        total_area: Some(4.0 * PI * PI * major * minor),
        ..Default::default()
    };
    analytic.values.insert("major".into(), major);
    analytic.values.insert("minor".into(), minor);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: None,
    })
}

/// Open cylinder of the given radius around the z-axis, z ∈ [-height/2, height/2].
pub fn gen_cylinder(radius: f64, height: f64, level: usize) -> Result<GeneratorOutput, GeneratorError> {
    check_positive("radius", radius)?;
    check_positive("height", height)?;
    let nu = 12 << level;
    let h = 2.0 * PI * radius / nu as f64;
    let nz = ((height / (0.5 * 3f64.sqrt() * h)).round() as usize).max(1);
    let mut builder = MeshBuilder::default();
    for j in 0..=nz {
        let z = -height / 2.0 + height * j as f64 / nz as f64;
        let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..nu {
            let u = 2.0 * PI * (i as f64 + shift) / nu as f64;
            builder.push_vertex(Point::new(radius * u.cos(), radius * u.sin(), z));
        }
    }
    let id = |i: usize, j: usize| j * nu + (i % nu);
    for j in 0..nz {
        for i in 0..nu {
            if j % 2 == 0 {
                builder.push_face([id(i, j), id(i + 1, j), id(i, j + 1)], 0);
                builder.push_face([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], 0);
            } else {
                builder.push_face([id(i, j), id(i + 1, j + 1), id(i, j + 1)], 0);
                builder.push_face([id(i, j), id(i + 1, j), id(i + 1, j + 1)], 0);
            }
        }
    }
    builder.orient_range(0..builder.faces.len(), |p| Vec3::new(p.x, p.y, 0.0));
    let varifold = finish(builder, true)?;
    let mut analytic = Analytic {
        total_area: Some(2.0 * PI * radius * height),
        ..Default::default()
    };
    analytic.values.insert("radius".into(), radius);
    Ok(GeneratorOutput {
        varifold,
        analytic,
        projector: None,
    })
}
