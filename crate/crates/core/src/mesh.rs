//! Discrete integral 2-varifolds as multiplicity-weighted triangle soups.
//!
//! A [`DiscreteVarifold`] is a list of vertices and triangles with a positive
//! integer multiplicity per triangle. No manifold assumption is made: an edge
//! may bound one face (boundary), two faces, or three and more faces
//! (junctions such as the seam of a double bubble). Connectivity is derived on
//! demand through [`EdgeTopology`].
//!
//! The JSON interchange format is
//!
//! ```json
//! {"vertices": [[x, y, z], ...], "faces": [[i, j, k], ...],
//!  "multiplicity": [m, ...], "oriented": true}
//! ```
//!
//! with `multiplicity` and `oriented` optional. An optional `patch` array
//! carries one integer label per face; generators use it to tell refinement
//! which analytic surface a face belongs to.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sum;

pub type Point = Point3<f64>;
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to read mesh file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse mesh: {0}")]
    Parse(String),
    #[error("face {face}: index out of range ({index} >= {vertex_count} vertices)")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("face {face} is degenerate (zero area)")]
    DegenerateFace { face: usize },
    #[error("face {face} has multiplicity 0")]
    ZeroMultiplicity { face: usize },
    #[error("{what} has {got} entries, expected one per face ({faces})")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        faces: usize,
    },
    #[error("vertex {vertex} is not finite")]
    NonFinite { vertex: usize },
}

/// Serialized form of a varifold mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshJson {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oriented: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch: Option<Vec<u32>>,
}

/// Triangle soup with per-face multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteVarifold {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    multiplicity: Vec<u32>,
    oriented: bool,
    patches: Option<Vec<u32>>,
}

impl DiscreteVarifold {
    /// Builds and validates a varifold. Missing multiplicities default to 1.
    pub fn new(
        vertices: Vec<Point>,
        faces: Vec<[usize; 3]>,
        multiplicity: Option<Vec<u32>>,
        oriented: bool,
    ) -> Result<Self, MeshError> {
        let multiplicity = multiplicity.unwrap_or_else(|| vec![1; faces.len()]);
        let v = Self {
            vertices,
            faces,
            multiplicity,
            oriented,
            patches: None,
        };
        v.validate()?;
        Ok(v)
    }

    /// Attaches one patch label per face.
    pub fn with_patches(mut self, patches: Vec<u32>) -> Result<Self, MeshError> {
        if patches.len() != self.faces.len() {
            return Err(MeshError::LengthMismatch {
                what: "patch",
                got: patches.len(),
                faces: self.faces.len(),
            });
        }
        self.patches = Some(patches);
        Ok(self)
    }

    fn validate(&self) -> Result<(), MeshError> {
        if self.multiplicity.len() != self.faces.len() {
            return Err(MeshError::LengthMismatch {
                what: "multiplicity",
                got: self.multiplicity.len(),
                faces: self.faces.len(),
            });
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.coords.iter().all(|x| x.is_finite()) {
                return Err(MeshError::NonFinite { vertex: i });
            }
        }
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    face: fi,
                    index,
                    vertex_count: n,
                });
            }
            if self.multiplicity[fi] == 0 {
                return Err(MeshError::ZeroMultiplicity { face: fi });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || self.is_degenerate(fi) {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }
        Ok(())
    }

    fn is_degenerate(&self, f: usize) -> bool {
        let [a, b, c] = self.face_points(f);
        let longest = (b - a)
            .norm_squared()
            .max((c - b).norm_squared())
            .max((a - c).norm_squared());
        let twice_area = (b - a).cross(&(c - a)).norm();
        longest == 0.0 || twice_area <= 64.0 * f64::EPSILON * longest
    }

    pub fn from_json(json: MeshJson) -> Result<Self, MeshError> {
        let vertices = json
            .vertices
            .iter()
            .map(|p| Point::new(p[0], p[1], p[2]))
            .collect();
        let v = Self::new(
            vertices,
            json.faces,
            json.multiplicity,
            json.oriented.unwrap_or(false),
        )?;
        match json.patch {
            Some(p) => v.with_patches(p),
            None => Ok(v),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, MeshError> {
        let json: MeshJson = serde_json::from_str(s).map_err(|e| MeshError::Parse(e.to_string()))?;
        Self::from_json(json)
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            vertices: self.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            faces: self.faces.clone(),
            multiplicity: Some(self.multiplicity.clone()),
            oriented: Some(self.oriented),
            patch: self.patches.clone(),
        }
    }

    /// Parses a Wavefront OBJ file (vertices and faces only, polygons fanned,
    /// multiplicity 1).
    pub fn from_obj_str(s: &str) -> Result<Self, MeshError> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> = it
                        .take(3)
                        .map(|t| t.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| MeshError::Parse(format!("line {}: {e}", lineno + 1)))?;
                    if c.len() != 3 {
                        return Err(MeshError::Parse(format!("line {}: short vertex", lineno + 1)));
                    }
                    vertices.push(Point::new(c[0], c[1], c[2]));
                }
                Some("f") => {
                    let idx: Vec<usize> = it
                        .map(|t| {
                            let head = t.split('/').next().unwrap_or("");
                            let i: i64 = head
                                .parse()
                                .map_err(|e| MeshError::Parse(format!("line {}: {e}", lineno + 1)))?;
                            let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                            usize::try_from(resolved)
                                .map_err(|_| MeshError::Parse(format!("line {}: bad index", lineno + 1)))
                        })
                        .collect::<Result<_, _>>()?;
                    if idx.len() < 3 {
                        return Err(MeshError::Parse(format!("line {}: short face", lineno + 1)));
                    }
                    for k in 1..idx.len() - 1 {
                        faces.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Self::new(vertices, faces, None, true)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn multiplicity(&self) -> &[u32] {
        &self.multiplicity
    }

    pub fn patches(&self) -> Option<&[u32]> {
        self.patches.as_deref()
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_points(&self, f: usize) -> [Point; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Half the cross product of two edges; its norm is the face area and its
    /// direction follows the winding.
    pub fn face_area_vector(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_points(f);
        0.5 * (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        self.face_area_vector(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        self.face_area_vector(f).normalize()
    }

    /// Total mass, Σ multiplicity × area.
    pub fn total_mass(&self) -> f64 {
        sum::sum((0..self.faces.len()).map(|f| self.multiplicity[f] as f64 * self.face_area(f)))
    }

    /// Same combinatorics with vertices mapped through `map`.
    pub fn map_vertices(&self, map: impl Fn(&Point) -> Point) -> Result<Self, MeshError> {
        let mut out = self.clone();
        out.vertices = self.vertices.iter().map(map).collect();
        out.validate()?;
        Ok(out)
    }

    pub fn with_multiplicity(&self, multiplicity: Vec<u32>) -> Result<Self, MeshError> {
        let mut out = self.clone();
        out.multiplicity = multiplicity;
        out.validate()?;
        Ok(out)
    }

    /// Multiplies every multiplicity by `k`.
    pub fn scaled_multiplicity(&self, k: u32) -> Result<Self, MeshError> {
        self.with_multiplicity(self.multiplicity.iter().map(|m| m * k).collect())
    }

    pub fn with_orientation(&self, oriented: bool) -> Self {
        let mut out = self.clone();
        out.oriented = oriented;
        out
    }

    /// Reverses the winding of every face.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        for f in &mut out.faces {
            f.swap(1, 2);
        }
        out
    }

    /// Faces incident to each vertex, in face order.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v].push(fi);
            }
        }
        vf
    }

    pub fn edge_topology(&self) -> EdgeTopology {
        EdgeTopology::new(&self.faces)
    }

    /// Mean length of the edges of faces incident to vertex `v`.
    pub fn mean_edge_length_at_vertex(&self, v: usize, vertex_faces: &[Vec<usize>]) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for &f in &vertex_faces[v] {
            let p = self.face_points(f);
            for k in 0..3 {
                total += (p[(k + 1) % 3] - p[k]).norm();
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }

    pub fn mean_edge_length(&self) -> f64 {
        let topo = self.edge_topology();
        let n = topo.edge_count();
        if n == 0 {
            return 0.0;
        }
        sum::sum(topo.edges().iter().map(|e| (self.vertices[e[1]] - self.vertices[e[0]]).norm())) / n as f64
    }

    /// Closest point of the support to `p`: (point, face, distance).
    pub fn closest_point(&self, p: &Point) -> Option<(Point, usize, f64)> {
        let mut best: Option<(Point, usize, f64)> = None;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.face_points(f);
            let q = closest_point_on_triangle(p, &a, &b, &c);
            let d = (q - p).norm();
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((q, f, d));
            }
        }
        best
    }

    /// Index of the vertex nearest to `p`.
    pub fn nearest_vertex(&self, p: &Point) -> Option<usize> {
        (0..self.vertices.len()).min_by(|&i, &j| {
            (self.vertices[i] - p)
                .norm_squared()
                .total_cmp(&(self.vertices[j] - p).norm_squared())
        })
    }

    /// Axis-aligned bounding box (min, max).
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }
}

/// Closest point on triangle `abc` to `p` (Voronoi-region case analysis).
pub fn closest_point_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn load_varifold(path: impl AsRef<Path>) -> Result<DiscreteVarifold, MeshError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"))
    {
        DiscreteVarifold::from_obj_str(&text)
    } else {
        DiscreteVarifold::from_json_str(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Boundary,
    Manifold,
    Junction,
}

/// Edge → incident faces, derived deterministically from the face list.
#[derive(Clone, Debug)]
pub struct EdgeTopology {
    edges: Vec<[usize; 2]>,
    incident: Vec<Vec<usize>>,
    lookup: HashMap<[usize; 2], usize>,
    face_edges: Vec<[usize; 3]>,
}

impl EdgeTopology {
    pub fn new(faces: &[[usize; 3]]) -> Self {
        let mut keys: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| edge_key(f[k], f[(k + 1) % 3])))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let lookup: HashMap<[usize; 2], usize> =
            keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut incident = vec![Vec::new(); keys.len()];
        let mut face_edges = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let mut fe = [0; 3];
            for k in 0..3 {
                let e = lookup[&edge_key(f[k], f[(k + 1) % 3])];
                incident[e].push(fi);
                fe[k] = e;
            }
            face_edges.push(fe);
        }
        Self {
            edges: keys,
            incident,
            lookup,
            face_edges,
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn incident_faces(&self, e: usize) -> &[usize] {
        &self.incident[e]
    }

    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&edge_key(a, b)).copied()
    }

    /// Edge ids of face `f`, as (v0,v1), (v1,v2), (v2,v0).
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn kind(&self, e: usize) -> EdgeKind {
        match self.incident[e].len() {
            1 => EdgeKind::Boundary,
            2 => EdgeKind::Manifold,
            _ => EdgeKind::Junction,
        }
    }

    pub fn boundary_edges(&self) -> Vec<usize> {
        self.of_kind(EdgeKind::Boundary)
    }

    pub fn junction_edges(&self) -> Vec<usize> {
        self.of_kind(EdgeKind::Junction)
    }

    pub fn manifold_edges(&self) -> Vec<usize> {
        self.of_kind(EdgeKind::Manifold)
    }

    fn of_kind(&self, kind: EdgeKind) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.kind(e) == kind).collect()
    }

    /// Connected chains of junction edges, as lists of edge ids. Each chain is
    /// a maximal set of junction edges connected through shared vertices.
    pub fn junction_components(&self) -> Vec<Vec<usize>> {
        let junction = self.junction_edges();
        let mut by_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
        for &e in &junction {
            for v in self.edges[e] {
                by_vertex.entry(v).or_default().push(e);
            }
        }
        let mut seen: HashMap<usize, bool> = junction.iter().map(|&e| (e, false)).collect();
        let mut out = Vec::new();
        for &start in &junction {
            if seen[&start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen.insert(start, true);
            while let Some(e) = stack.pop() {
                comp.push(e);
                for v in self.edges[e] {
                    for &n in &by_vertex[&v] {
                        if !seen[&n] {
                            seen.insert(n, true);
                            stack.push(n);
                        }
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// What refinement knows about the edge a new vertex was split from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeContext {
    /// Sorted, deduplicated patch labels of the faces around the edge (empty
    /// when the mesh carries no patch labels).
    pub patches: Vec<u32>,
    /// The edge bounds exactly one face.
    pub boundary: bool,
}

/// Moves freshly inserted edge midpoints onto an underlying surface.
pub trait Projector {
    fn project(&self, p: Point, context: &EdgeContext) -> Point;
}

impl<F: Fn(Point) -> Point> Projector for F {
    fn project(&self, p: Point, _context: &EdgeContext) -> Point {
        self(p)
    }
}

/// Splits every face 4-to-1 through edge midpoints, `levels` times.
///
/// Multiplicity, patch labels and winding are inherited. Without a projector
/// the piecewise-linear surface (and its area) is unchanged.
pub fn refine(
    v: &DiscreteVarifold,
    levels: usize,
    projector: Option<&dyn Projector>,
) -> DiscreteVarifold {
    let mut cur = v.clone();
    for _ in 0..levels {
        cur = refine_once(&cur, projector);
    }
    cur
}

fn refine_once(v: &DiscreteVarifold, projector: Option<&dyn Projector>) -> DiscreteVarifold {
    let topo = v.edge_topology();
    let mut vertices = v.vertices.clone();
    let mut midpoint = vec![usize::MAX; topo.edge_count()];
    for (e, [a, b]) in topo.edges().iter().enumerate() {
        let mut m = Point::from((v.vertices[*a].coords + v.vertices[*b].coords) * 0.5);
        if let Some(proj) = projector {
            let faces = topo.incident_faces(e);
            let mut patches: Vec<u32> = match &v.patches {
                Some(p) => faces.iter().map(|&f| p[f]).collect(),
                None => Vec::new(),
            };
            patches.sort_unstable();
            patches.dedup();
            let ctx = EdgeContext {
                patches,
                boundary: faces.len() == 1,
            };
            m = proj.project(m, &ctx);
        }
        midpoint[e] = vertices.len();
        vertices.push(m);
    }
    let mut faces = Vec::with_capacity(4 * v.faces.len());
    let mut multiplicity = Vec::with_capacity(4 * v.faces.len());
    let mut patches = v.patches.as_ref().map(|_| Vec::with_capacity(4 * v.faces.len()));
    for (fi, f) in v.faces.iter().enumerate() {
        let [e01, e12, e20] = topo.face_edges(fi);
        let (m01, m12, m20) = (midpoint[e01], midpoint[e12], midpoint[e20]);
        let children = [
            [f[0], m01, m20],
            [m01, f[1], m12],
            [m20, m12, f[2]],
            [m01, m12, m20],
        ];
        for c in children {
            faces.push(c);
            multiplicity.push(v.multiplicity[fi]);
            if let (Some(out), Some(src)) = (patches.as_mut(), v.patches.as_ref()) {
                out.push(src[fi]);
            }
        }
    }
    DiscreteVarifold {
        vertices,
        faces,
        multiplicity,
        oriented: v.oriented,
        patches,
    }
}
