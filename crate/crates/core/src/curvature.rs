//! Mean curvature from the area gradient, Willmore and Helfrich energies,
//! angle-defect Gauss curvature, a dihedral shape operator, topology and
//! volumes.
//!
//! H at a vertex is minus the multiplicity-weighted gradient of total area
//! with respect to that vertex, corrected on boundary edges by the discrete
//! conormal, divided by the lumped mass A_v = ⅓ Σ (incident multiplicity ×
//! area). For every piecewise-linear field Φ this makes
//!
//! ```text
//! δμ(Φ) + Σ_v ⟨Φ_v, H_v⟩ A_v − Σ_e m_e ℓ_e ⟨(Φ_a + Φ_b)/2, ν_e⟩ = 0
//! ```
//!
//! hold up to round-off. Orientation convention: with outward winding the
//! unit sphere has H = −2n, so Helfrich's ¼∫|H − c₀n|² equals π(2 + c₀)².

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::boundary_measure;
use crate::mesh::{DiscreteVarifold, EdgeKind, EdgeTopology, Point, Vec3};
use crate::sum::{sum, sum_vec};

#[derive(Debug, Error, PartialEq)]
pub enum CurvatureError {
    #[error("non-manifold edge ({0}, {1}) with {2} incident faces")]
    NonManifoldEdge(usize, usize, usize),
    #[error("boundary edge ({0}, {1}): mesh is not closed")]
    OpenMesh(usize, usize),
    #[error("mesh is not oriented")]
    Unoriented,
    #[error("concentrated volume singular: point is within {0:e} of the support")]
    ConcentratedVolumeSingular(f64),
    #[error("field has {got} vectors but mesh has {expected} vertices")]
    FieldLength { got: usize, expected: usize },
}

/// Local structure of the star of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexClass {
    /// No incident face.
    Isolated,
    /// Star is a single disk.
    Interior,
    /// On at least one boundary edge.
    Boundary,
    /// On at least one edge with three or more faces.
    Junction,
    /// Manifold edges only, but the link is not a single cycle.
    Singular,
}

impl VertexClass {
    /// Vertices whose H enters the energy integrals.
    pub fn in_energy(self) -> bool {
        matches!(self, VertexClass::Interior | VertexClass::Junction | VertexClass::Singular)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureField {
    pub class: Vec<VertexClass>,
    /// Mean curvature vector (trace convention).
    pub mean_curvature: Vec<Vec3>,
    /// Multiplicity-weighted lumped mass.
    pub vertex_area: Vec<f64>,
    /// Angle-defect Gauss curvature, interior vertices only.
    pub gauss: Vec<Option<f64>>,
    /// |B|² from the dihedral shape operator, interior vertices only.
    pub b_norm2: Vec<Option<f64>>,
    /// |K − (|H|² − |B|²)/2|, interior vertices only.
    pub gauss_residual: Vec<Option<f64>>,
    /// Mass of vertices left out of K and |B|² integrals.
    pub excluded_mass: f64,
}

impl CurvatureField {
    /// Area-weighted mean of the Gauss-relation residual over interior vertices.
    pub fn mean_gauss_residual(&self) -> Option<f64> {
        let (mut num, mut den) = (Vec::new(), Vec::new());
        for (r, a) in self.gauss_residual.iter().zip(&self.vertex_area) {
            if let Some(r) = r {
                num.push(r * a);
                den.push(*a);
            }
        }
        let d = sum(den);
        (d > 0.0).then(|| sum(num) / d)
    }

    /// ∫K dμ over interior vertices.
    pub fn total_gauss(&self) -> f64 {
        sum(self
            .gauss
            .iter()
            .zip(&self.vertex_area)
            .filter_map(|(k, a)| k.map(|k| k * a)))
    }
}

/// Area gradient of a triangle with respect to each corner:
/// ∇_a A = ½ N̂ × (c − b) and cyclically.
pub fn triangle_area_gradients(p: [Point; 3]) -> [Vec3; 3] {
    let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let len = n.norm();
    if len == 0.0 {
        return [Vec3::zeros(); 3];
    }
    let n = n / len;
    [
        0.5 * n.cross(&(p[2] - p[1])),
        0.5 * n.cross(&(p[0] - p[2])),
        0.5 * n.cross(&(p[1] - p[0])),
    ]
}

fn corner_angle(p: [Point; 3], k: usize) -> f64 {
    let a = p[(k + 1) % 3] - p[k];
    let b = p[(k + 2) % 3] - p[k];
    a.cross(&b).norm().atan2(a.dot(&b))
}

struct Star {
    vertex_faces: Vec<Vec<usize>>,
    topo: EdgeTopology,
}

impl Star {
    fn new(v: &DiscreteVarifold) -> Self {
        Self {
            vertex_faces: v.vertex_faces(),
            topo: v.edge_topology(),
        }
    }

    fn classify(&self, v: &DiscreteVarifold, vi: usize) -> VertexClass {
        let faces = &self.vertex_faces[vi];
        if faces.is_empty() {
            return VertexClass::Isolated;
        }
        let mut junction = false;
        for &f in faces {
            for e in self.topo.face_edges(f) {
                if !self.topo.edges()[e].contains(&vi) {
                    continue;
                }
                match self.topo.kind(e) {
                    EdgeKind::Boundary => return VertexClass::Boundary,
                    EdgeKind::Junction => junction = true,
                    EdgeKind::Manifold => {}
                }
            }
        }
        if junction {
            return VertexClass::Junction;
        }
        // link edges: the side of each incident face opposite vi
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &f in faces {
            let others: Vec<usize> = v.faces()[f].into_iter().filter(|&i| i != vi).collect();
            adjacency.entry(others[0]).or_default().push(others[1]);
            adjacency.entry(others[1]).or_default().push(others[0]);
        }
        if adjacency.values().any(|n| n.len() != 2) {
            return VertexClass::Singular;
        }
        let start = *adjacency.keys().next().unwrap();
        let mut seen = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in &adjacency[&x] {
                if !seen.contains(&y) {
                    seen.push(y);
                    queue.push_back(y);
                }
            }
        }
        if seen.len() == adjacency.len() {
            VertexClass::Interior
        } else {
            VertexClass::Singular
        }
    }
}

/// Multiplicity-weighted area gradient at every vertex.
fn area_gradient(v: &DiscreteVarifold, vertex_faces: &[Vec<usize>]) -> Vec<Vec3> {
    (0..v.vertex_count())
        .into_par_iter()
        .map(|vi| {
            sum_vec(vertex_faces[vi].iter().map(|&f| {
                let face = v.faces()[f];
                let k = face.iter().position(|&i| i == vi).unwrap();
                let g = triangle_area_gradients(v.face_points(f))[k];
                g * v.multiplicity()[f] as f64
            }))
        })
        .collect()
}

fn lumped_area(v: &DiscreteVarifold, vertex_faces: &[Vec<usize>], weighted: bool) -> Vec<f64> {
    (0..v.vertex_count())
        .into_par_iter()
        .map(|vi| {
            sum(vertex_faces[vi].iter().map(|&f| {
                let m = if weighted { v.multiplicity()[f] as f64 } else { 1.0 };
                m * v.face_area(f) / 3.0
            }))
        })
        .collect()
}

/// Half-length conormal sums ½ Σ_{boundary e ∋ v} m_e ℓ_e ν_e.
fn boundary_correction(v: &DiscreteVarifold) -> Vec<Vec3> {
    let b = boundary_measure(v);
    let mut per_vertex: Vec<Vec<Vec3>> = vec![Vec::new(); v.vertex_count()];
    for e in &b.edges {
        let w = 0.5 * e.length * e.multiplicity as f64 * e.conormal;
        for vi in e.vertices {
            per_vertex[vi].push(w);
        }
    }
    per_vertex.into_iter().map(sum_vec).collect()
}

fn mean_curvature_with(v: &DiscreteVarifold, star: &Star) -> CurvatureField {
    let class: Vec<VertexClass> = (0..v.vertex_count()).map(|i| star.classify(v, i)).collect();
    let isolated = class.iter().filter(|c| **c == VertexClass::Isolated).count();
    if isolated > 0 {
        log::warn!("{isolated} isolated vertices excluded from curvature");
    }
    let grad = area_gradient(v, &star.vertex_faces);
    let area = lumped_area(v, &star.vertex_faces, true);
    let correction = boundary_correction(v);
    let mean_curvature = (0..v.vertex_count())
        .map(|i| {
            if area[i] > 0.0 {
                -(grad[i] - correction[i]) / area[i]
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    let excluded_mass = sum(class
        .iter()
        .zip(&area)
        .filter(|(c, _)| **c != VertexClass::Interior)
        .map(|(_, a)| *a));
    let n = v.vertex_count();
    CurvatureField {
        class,
        mean_curvature,
        vertex_area: area,
        gauss: vec![None; n],
        b_norm2: vec![None; n],
        gauss_residual: vec![None; n],
        excluded_mass,
    }
}

/// H, A_v and vertex classes; K and |B|² are left empty.
pub fn mean_curvature(v: &DiscreteVarifold) -> CurvatureField {
    mean_curvature_with(v, &Star::new(v))
}

fn angle_defects(v: &DiscreteVarifold, vertex_faces: &[Vec<usize>]) -> Vec<f64> {
    (0..v.vertex_count())
        .into_par_iter()
        .map(|vi| {
            2.0 * PI
                - sum(vertex_faces[vi].iter().map(|&f| {
                    let k = v.faces()[f].iter().position(|&i| i == vi).unwrap();
                    corner_angle(v.face_points(f), k)
                }))
        })
        .collect()
}

fn fill_gauss(v: &DiscreteVarifold, star: &Star, field: &mut CurvatureField) {
    let defects = angle_defects(v, &star.vertex_faces);
    let geometric = lumped_area(v, &star.vertex_faces, false);
    for i in 0..v.vertex_count() {
        if field.class[i] == VertexClass::Interior && geometric[i] > 0.0 {
            field.gauss[i] = Some(defects[i] / geometric[i]);
        }
    }
}

/// Signed dihedral angle across a manifold edge (positive where the surface
/// bends towards the side opposite the normals).
fn dihedral(v: &DiscreteVarifold, topo: &EdgeTopology, e: usize) -> f64 {
    let fs = topo.incident_faces(e);
    let [a, b] = topo.edges()[e];
    let n0 = v.face_normal(fs[0]);
    let mut n1 = v.face_normal(fs[1]);
    // make the second normal consistent with the first across the edge
    let winds = |f: usize| {
        let face = v.faces()[f];
        (0..3).any(|k| face[k] == a && face[(k + 1) % 3] == b)
    };
    if winds(fs[0]) == winds(fs[1]) {
        n1 = -n1;
    }
    let t = (v.vertices()[b] - v.vertices()[a]).normalize();
    let angle = n0.cross(&n1).dot(&t).atan2(n0.dot(&n1));
    if winds(fs[0]) {
        angle
    } else {
        -angle
    }
}

fn fill_second_fundamental(v: &DiscreteVarifold, star: &Star, field: &mut CurvatureField) {
    let topo = &star.topo;
    let geometric = lumped_area(v, &star.vertex_faces, false);
    let beta: Vec<f64> = (0..topo.edge_count())
        .into_par_iter()
        .map(|e| {
            if topo.kind(e) == EdgeKind::Manifold {
                dihedral(v, topo, e)
            } else {
                0.0
            }
        })
        .collect();
    let mut vertex_edges: Vec<Vec<usize>> = vec![Vec::new(); v.vertex_count()];
    for (e, [a, b]) in topo.edges().iter().enumerate() {
        vertex_edges[*a].push(e);
        vertex_edges[*b].push(e);
    }
    let values: Vec<Option<f64>> = (0..v.vertex_count())
        .into_par_iter()
        .map(|i| {
            if field.class[i] != VertexClass::Interior || geometric[i] <= 0.0 {
                return None;
            }
            let mut s = nalgebra::Matrix3::<f64>::zeros();
            for &e in &vertex_edges[i] {
                let [a, b] = topo.edges()[e];
                let d = v.vertices()[b] - v.vertices()[a];
                let len = d.norm();
                let u = d / len;
                s += beta[e] * 0.5 * len * u * u.transpose();
            }
            s /= geometric[i];
            Some(s.norm_squared())
        })
        .collect();
    for i in 0..v.vertex_count() {
        field.b_norm2[i] = values[i];
        if let (Some(k), Some(b2)) = (field.gauss[i], values[i]) {
            let h2 = field.mean_curvature[i].norm_squared();
            field.gauss_residual[i] = Some((k - (h2 - b2) / 2.0).abs());
        }
    }
}

/// Mean curvature plus angle-defect Gauss curvature.
pub fn gauss_curvature(v: &DiscreteVarifold) -> CurvatureField {
    let star = Star::new(v);
    let mut field = mean_curvature_with(v, &star);
    fill_gauss(v, &star, &mut field);
    field
}

/// Everything: H, K, |B|² and the Gauss-relation residual.
pub fn second_fundamental_norm(v: &DiscreteVarifold) -> CurvatureField {
    let star = Star::new(v);
    let mut field = mean_curvature_with(v, &star);
    fill_gauss(v, &star, &mut field);
    fill_second_fundamental(v, &star, &mut field);
    field
}

/// ¼ Σ |H_v|² A_v over interior, junction and singular vertices.
pub fn willmore_from(field: &CurvatureField) -> f64 {
    sum((0..field.class.len())
        .filter(|&i| field.class[i].in_energy())
        .map(|i| 0.25 * field.mean_curvature[i].norm_squared() * field.vertex_area[i]))
}

pub fn willmore_energy(v: &DiscreteVarifold) -> f64 {
    willmore_from(&mean_curvature(v))
}

/// Normalized multiplicity-and-area-weighted face normal average.
pub fn vertex_normals(v: &DiscreteVarifold) -> Vec<Vec3> {
    let vertex_faces = v.vertex_faces();
    (0..v.vertex_count())
        .into_par_iter()
        .map(|vi| {
            let n = sum_vec(
                vertex_faces[vi]
                    .iter()
                    .map(|&f| v.face_area_vector(f) * v.multiplicity()[f] as f64),
            );
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                n
            }
        })
        .collect()
}

/// ¼ Σ |H_v − c₀ n_v|² A_v over the same vertices as the Willmore energy.
pub fn helfrich_energy(v: &DiscreteVarifold, c0: f64) -> Result<f64, CurvatureError> {
    if !v.is_oriented() {
        return Err(CurvatureError::Unoriented);
    }
    let field = mean_curvature(v);
    let normals = vertex_normals(v);
    Ok(sum((0..field.class.len())
        .filter(|&i| field.class[i].in_energy())
        .map(|i| 0.25 * (field.mean_curvature[i] - c0 * normals[i]).norm_squared() * field.vertex_area[i])))
}

/// Seven-point degree-5 rule on the reference triangle: barycentric
/// coordinates and weights summing to one.
const GAUSS7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_2;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// ∫_T 1/|x − x₀|² dA, subdividing while the triangle is large compared with
/// its distance to x₀.
fn inverse_square_integral(p: [Point; 3], x0: &Point, depth: usize) -> f64 {
    let centroid = Point::from((p[0].coords + p[1].coords + p[2].coords) / 3.0);
    let diameter = (p[0] - p[1]).norm().max((p[1] - p[2]).norm()).max((p[2] - p[0]).norm());
    let dist = (centroid - x0).norm();
    if depth > 0 && diameter > 0.5 * dist {
        let m01 = Point::from((p[0].coords + p[1].coords) / 2.0);
        let m12 = Point::from((p[1].coords + p[2].coords) / 2.0);
        let m20 = Point::from((p[2].coords + p[0].coords) / 2.0);
        return sum([
            inverse_square_integral([p[0], m01, m20], x0, depth - 1),
            inverse_square_integral([m01, p[1], m12], x0, depth - 1),
            inverse_square_integral([m20, m12, p[2]], x0, depth - 1),
            inverse_square_integral([m01, m12, m20], x0, depth - 1),
        ]);
    }
    let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    area * sum(GAUSS7.iter().map(|(b, w)| {
        let x = p[0].coords * b[0] + p[1].coords * b[1] + p[2].coords * b[2];
        w / (x - x0.coords).norm_squared()
    }))
}

/// −∫ ⟨x − x₀, n⟩ / |x − x₀|² dμ.
pub fn concentrated_volume(v: &DiscreteVarifold, x0: &Point) -> Result<f64, CurvatureError> {
    if !v.is_oriented() {
        return Err(CurvatureError::Unoriented);
    }
    let scale = v
        .bounding_box()
        .map(|(lo, hi)| (hi - lo).norm())
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    if let Some((_, _, d)) = v.closest_point(x0) {
        if d <= tol {
            return Err(CurvatureError::ConcentratedVolumeSingular(tol));
        }
    }
    let terms: Vec<f64> = (0..v.face_count())
        .into_par_iter()
        .map(|f| {
            let p = v.face_points(f);
            let n = v.face_normal(f);
            // ⟨x − x₀, n⟩ is constant on a flat face
            let height = (p[0] - x0).dot(&n);
            v.multiplicity()[f] as f64 * height * inverse_square_integral(p, x0, 12)
        })
        .collect();
    Ok(-sum(terms))
}

/// ⅓ ∫ ⟨x, n⟩ dμ: positive for outward-wound closed surfaces.
pub fn enclosed_volume(v: &DiscreteVarifold) -> Result<f64, CurvatureError> {
    if !v.is_oriented() {
        return Err(CurvatureError::Unoriented);
    }
    let topo = v.edge_topology();
    if let Some(&e) = topo.boundary_edges().first() {
        let [a, b] = topo.edges()[e];
        return Err(CurvatureError::OpenMesh(a, b));
    }
    let terms: Vec<f64> = (0..v.face_count())
        .into_par_iter()
        .map(|f| {
            let p = v.face_points(f);
            let centroid = (p[0].coords + p[1].coords + p[2].coords) / 3.0;
            v.multiplicity()[f] as f64 * centroid.dot(&v.face_area_vector(f)) / 3.0
        })
        .collect();
    Ok(sum(terms))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FirstVariation {
    /// ∫ div_μ Φ dμ (the derivative of total mass along Φ).
    pub divergence: f64,
    /// Σ ⟨Φ_v, H_v⟩ A_v.
    pub mean_curvature: f64,
    /// Σ_e m_e ℓ_e ⟨(Φ_a + Φ_b)/2, ν_e⟩.
    pub boundary: f64,
    /// |divergence + mean_curvature − boundary|.
    pub residual: f64,
}

/// Directional derivative of total mass along a per-vertex field.
pub fn mass_derivative(v: &DiscreteVarifold, field: &[Vec3]) -> f64 {
    let terms: Vec<f64> = (0..v.face_count())
        .into_par_iter()
        .map(|f| {
            let g = triangle_area_gradients(v.face_points(f));
            let face = v.faces()[f];
            v.multiplicity()[f] as f64 * sum((0..3).map(|k| g[k].dot(&field[face[k]])))
        })
        .collect();
    sum(terms)
}

fn check_field(v: &DiscreteVarifold, field: &[Vec3]) -> Result<(), CurvatureError> {
    if field.len() != v.vertex_count() {
        return Err(CurvatureError::FieldLength {
            got: field.len(),
            expected: v.vertex_count(),
        });
    }
    Ok(())
}

/// Residual of the first variation identity with boundary term.
pub fn first_variation_residual(v: &DiscreteVarifold, field: &[Vec3]) -> Result<FirstVariation, CurvatureError> {
    check_field(v, field)?;
    let curv = mean_curvature(v);
    let divergence = mass_derivative(v, field);
    let mean_curvature = sum((0..v.vertex_count()).map(|i| field[i].dot(&curv.mean_curvature[i]) * curv.vertex_area[i]));
    let boundary = sum(boundary_measure(v).edges.iter().map(|e| {
        let avg = (field[e.vertices[0]] + field[e.vertices[1]]) / 2.0;
        e.multiplicity as f64 * e.length * avg.dot(&e.conormal)
    }));
    Ok(FirstVariation {
        divergence,
        mean_curvature,
        boundary,
        residual: (divergence + mean_curvature - boundary).abs(),
    })
}

/// Same identity, but with H assembled sheet by sheet: each patch treats its
/// junction edges as boundary and removes the conormal there, as a smooth
/// surface's H would. The junction conormals then no longer cancel exactly,
/// leaving a residual that vanishes only as the mesh resolves the 120°
/// balance. Requires patch labels; without them this equals
/// [`first_variation_residual`].
pub fn first_variation_residual_sheetwise(
    v: &DiscreteVarifold,
    field: &[Vec3],
) -> Result<FirstVariation, CurvatureError> {
    check_field(v, field)?;
    let Some(patches) = v.patches() else {
        return first_variation_residual(v, field);
    };
    let topo = v.edge_topology();
    // conormal sums of each sheet along junction edges
    let mut junction_terms = Vec::new();
    for e in topo.junction_edges() {
        let [a, b] = topo.edges()[e];
        let mut by_patch: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for &f in topo.incident_faces(e) {
            by_patch.entry(patches[f]).or_default().push(f);
        }
        for faces in by_patch.values() {
            if faces.len() != 1 {
                continue;
            }
            let f = faces[0];
            let c = v.faces()[f].into_iter().find(|&i| i != a && i != b).unwrap();
            let (pa, pb, pc) = (v.vertices()[a], v.vertices()[b], v.vertices()[c]);
            let t = (pb - pa).normalize();
            let w = pc - pa;
            let nu = -(w - w.dot(&t) * t).normalize();
            let avg = (field[a] + field[b]) / 2.0;
            junction_terms.push(v.multiplicity()[f] as f64 * (pb - pa).norm() * avg.dot(&nu));
        }
    }
    let exact = first_variation_residual(v, field)?;
    // sheetwise H·A differs from the exact one by the junction conormal terms
    let mean_curvature = exact.mean_curvature + sum(junction_terms);
    Ok(FirstVariation {
        divergence: exact.divergence,
        mean_curvature,
        boundary: exact.boundary,
        residual: (exact.divergence + mean_curvature - exact.boundary).abs(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TopologyReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    /// (1/2π) Σ angle defects.
    pub angle_defect_characteristic: f64,
    pub orientable: bool,
    /// The stored winding is already consistent.
    pub consistently_wound: bool,
    pub components: usize,
    pub genus: Option<i64>,
}

/// χ by counting and by angle defects, orientability and genus for closed
/// manifold meshes.
pub fn euler_characteristic(v: &DiscreteVarifold) -> Result<TopologyReport, CurvatureError> {
    let topo = v.edge_topology();
    for e in 0..topo.edge_count() {
        let [a, b] = topo.edges()[e];
        match topo.kind(e) {
            EdgeKind::Junction => {
                return Err(CurvatureError::NonManifoldEdge(a, b, topo.incident_faces(e).len()))
            }
            EdgeKind::Boundary => return Err(CurvatureError::OpenMesh(a, b)),
            EdgeKind::Manifold => {}
        }
    }
    let used: Vec<bool> = {
        let mut u = vec![false; v.vertex_count()];
        for f in v.faces() {
            for &i in f {
                u[i] = true;
            }
        }
        u
    };
    let vcount = used.iter().filter(|&&x| x).count();
    let chi = vcount as i64 - topo.edge_count() as i64 + v.face_count() as i64;
    let defects = angle_defects(v, &v.vertex_faces());
    let angle_chi = sum((0..v.vertex_count()).filter(|&i| used[i]).map(|i| defects[i])) / (2.0 * PI);

    // BFS over faces assigning flips; a conflict means non-orientable
    let winds = |f: usize, a: usize, b: usize| {
        let face = v.faces()[f];
        (0..3).any(|k| face[k] == a && face[(k + 1) % 3] == b)
    };
    let mut flip: Vec<Option<bool>> = vec![None; v.face_count()];
    let mut orientable = true;
    let mut consistently_wound = true;
    let mut components = 0;
    for start in 0..v.face_count() {
        if flip[start].is_some() {
            continue;
        }
        components += 1;
        flip[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            for e in topo.face_edges(f) {
                let [a, b] = topo.edges()[e];
                for &g in topo.incident_faces(e) {
                    if g == f {
                        continue;
                    }
                    // adjacent faces must traverse the shared edge in opposite directions
                    let same = winds(f, a, b) == winds(g, a, b);
                    if same {
                        consistently_wound = false;
                    }
                    let want = flip[f].unwrap() ^ same;
                    match flip[g] {
                        None => {
                            flip[g] = Some(want);
                            queue.push_back(g);
                        }
                        Some(x) if x != want => orientable = false,
                        _ => {}
                    }
                }
            }
        }
    }
    let genus = (orientable && components == 1 && chi % 2 == 0).then_some((2 - chi) / 2);
    Ok(TopologyReport {
        vertices: vcount,
        edges: topo.edge_count(),
        faces: v.face_count(),
        euler_characteristic: chi,
        angle_defect_characteristic: angle_chi,
        orientable,
        consistently_wound,
        components,
        genus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> DiscreteVarifold {
        DiscreteVarifold::new(
            vec![
                Point::new(1.0, 1.0, 1.0),
                Point::new(1.0, -1.0, -1.0),
                Point::new(-1.0, 1.0, -1.0),
                Point::new(-1.0, -1.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
            None,
            true,
        )
        .unwrap()
    }

    #[test]
    fn triangle_gradient_matches_finite_difference() {
        let p = [Point::new(0.1, 0.2, 0.3), Point::new(1.2, -0.1, 0.4), Point::new(0.3, 0.9, -0.2)];
        let g = triangle_area_gradients(p);
        let area = |q: [Point; 3]| 0.5 * (q[1] - q[0]).cross(&(q[2] - q[0])).norm();
        let h = 1e-6;
        for k in 0..3 {
            for axis in 0..3 {
                let mut plus = p;
                let mut minus = p;
                plus[k][axis] += h;
                minus[k][axis] -= h;
                let fd = (area(plus) - area(minus)) / (2.0 * h);
                assert!((fd - g[k][axis]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tetrahedron_topology() {
        let t = euler_characteristic(&tetra()).unwrap();
        assert_eq!(t.euler_characteristic, 2);
        assert!((t.angle_defect_characteristic - 2.0).abs() < 1e-12);
        assert!(t.orientable && t.consistently_wound);
        assert_eq!(t.genus, Some(0));
    }

    #[test]
    fn tetrahedron_volume_is_positive_outward() {
        let v = tetra();
        let vol = enclosed_volume(&v).unwrap();
        assert!((vol - 8.0 / 3.0).abs() < 1e-12, "{vol}");
        assert!((enclosed_volume(&v.reversed()).unwrap() + vol).abs() < 1e-12);
    }

    #[test]
    fn single_triangle_vertices_are_boundary() {
        let v = DiscreteVarifold::new(
            vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
            None,
            true,
        )
        .unwrap();
        let f = mean_curvature(&v);
        assert!(f.class.iter().all(|c| *c == VertexClass::Boundary));
        for h in &f.mean_curvature {
            assert!(h.norm() < 1e-12);
        }
        assert_eq!(willmore_energy(&v), 0.0);
    }

    #[test]
    fn open_and_unoriented_meshes_are_rejected() {
        let v = DiscreteVarifold::new(
            vec![Point::origin(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
            None,
            false,
        )
        .unwrap();
        assert_eq!(helfrich_energy(&v, 0.0), Err(CurvatureError::Unoriented));
        assert!(matches!(
            enclosed_volume(&v.with_orientation(true)),
            Err(CurvatureError::OpenMesh(..))
        ));
        assert!(matches!(euler_characteristic(&v), Err(CurvatureError::OpenMesh(..))));
    }
}
