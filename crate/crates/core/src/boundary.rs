//! Boundary measures of meshes and conormal integrals over circles.

use std::f64::consts::PI;

use nalgebra::Rotation3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{DiscreteVarifold, Point, Vec3};
use crate::sum::sum;

#[derive(Debug, Error, PartialEq)]
pub enum BoundaryError {
    #[error("integrand singular: point lies on the circle")]
    Singular,
    #[error("closed form requires a conormal orthogonal to the circle plane")]
    NotPlaneOrthogonal,
    #[error("invalid circle: {0}")]
    InvalidCircle(String),
    #[error("need at least 16 quadrature samples, got {0}")]
    TooFewSamples(usize),
}

/// One boundary edge with its outward conormal in the incident face.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub face: usize,
    pub length: f64,
    pub conormal: Vec3,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct DiscreteBoundary {
    pub edges: Vec<BoundaryEdge>,
    /// Σ length over boundary edges (unweighted).
    pub total_length: f64,
}

impl DiscreteBoundary {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Per-edge conormal: the unit vector in the plane of the edge's unique face,
/// orthogonal to the edge and pointing away from the face.
pub fn boundary_measure(v: &DiscreteVarifold) -> DiscreteBoundary {
    let topo = v.edge_topology();
    let mut edges = Vec::new();
    for e in topo.boundary_edges() {
        let [a, b] = topo.edges()[e];
        let f = topo.incident_faces(e)[0];
        let c = v.faces()[f]
            .into_iter()
            .find(|&i| i != a && i != b)
            .expect("triangle has a third vertex");
        let (pa, pb, pc) = (v.vertices()[a], v.vertices()[b], v.vertices()[c]);
        let along = pb - pa;
        let length = along.norm();
        let t = along / length;
        let w = pc - pa;
        let conormal = -(w - w.dot(&t) * t).normalize();
        edges.push(BoundaryEdge {
            vertices: [a, b],
            face: f,
            length,
            conormal,
            multiplicity: v.multiplicity()[f],
        });
    }
    if edges.is_empty() {
        log::info!("mesh is closed: boundary measure is empty");
    }
    let total_length = sum(edges.iter().map(|e| e.length));
    DiscreteBoundary {
        edges,
        total_length,
    }
}

/// Conormal field carried by a circle.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conormal {
    /// ±(plane normal), the case the closed form covers.
    Normal { sign: f64 },
    /// A fixed unit vector; only the quadrature accepts it unless it happens
    /// to be parallel to the plane normal.
    Constant { direction: Vec3 },
    /// ± the in-plane outward radial direction.
    Radial { sign: f64 },
}

/// A circle with multiplicity and conormal field.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
    pub normal: Vec3,
    pub multiplicity: u32,
    pub conormal: Conormal,
}

impl Circle {
    pub fn new(center: Point, radius: f64, normal: Vec3, multiplicity: u32, conormal_sign: f64) -> Self {
        Self {
            center,
            radius,
            normal: normal.normalize(),
            multiplicity,
            conormal: Conormal::Normal {
                sign: conormal_sign.signum(),
            },
        }
    }

    fn validate(&self) -> Result<(), BoundaryError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(BoundaryError::InvalidCircle(format!("radius {}", self.radius)));
        }
        if !(self.normal.norm() > 0.0) || self.multiplicity == 0 {
            return Err(BoundaryError::InvalidCircle("zero normal or multiplicity".into()));
        }
        Ok(())
    }

    /// Orthonormal in-plane basis (u, w) with u × w = normal.
    fn basis(&self) -> (Vec3, Vec3) {
        let n = self.normal.normalize();
        let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = (seed - seed.dot(&n) * n).normalize();
        (u, n.cross(&u))
    }

    /// Point and conormal at parameter t ∈ [0, 2π).
    pub fn sample(&self, t: f64) -> (Point, Vec3) {
        let (u, w) = self.basis();
        let radial = t.cos() * u + t.sin() * w;
        let x = self.center + self.radius * radial;
        let nu = match self.conormal {
            Conormal::Normal { sign } => sign * self.normal.normalize(),
            Conormal::Constant { direction } => direction.normalize(),
            Conormal::Radial { sign } => sign * radial,
        };
        (x, nu)
    }

    fn normal_sign(&self) -> Option<f64> {
        let n = self.normal.normalize();
        match self.conormal {
            Conormal::Normal { sign } => Some(sign.signum()),
            Conormal::Constant { direction } => {
                let d = direction.normalize();
                let c = d.dot(&n);
                ((d - c * n).norm() < 1e-12).then_some(c.signum())
            }
            Conormal::Radial { .. } => None,
        }
    }

    fn on_circle(&self, x0: &Point) -> bool {
        let n = self.normal.normalize();
        let d = x0 - self.center;
        let height = d.dot(&n);
        let planar = (d - height * n).norm();
        let tol = 1e-12 * self.radius;
        height.abs() <= tol && (planar - self.radius).abs() <= tol
    }
}

#[derive(Serialize, Deserialize)]
struct CircleJson {
    center: [f64; 3],
    radius: f64,
    normal: [f64; 3],
    m: u32,
    conormal_sign: f64,
}

#[derive(Serialize, Deserialize)]
struct DatumJson {
    circles: Vec<CircleJson>,
}

/// Boundary circles whose conormal is ± the plane normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatumJson", into = "DatumJson")]
pub struct BoundaryDatum {
    pub circles: Vec<Circle>,
}

impl TryFrom<DatumJson> for BoundaryDatum {
    type Error = BoundaryError;

    fn try_from(j: DatumJson) -> Result<Self, BoundaryError> {
        let circles: Vec<Circle> = j
            .circles
            .into_iter()
            .map(|c| {
                if c.conormal_sign != 1.0 && c.conormal_sign != -1.0 {
                    return Err(BoundaryError::InvalidCircle(format!("conormal_sign {}", c.conormal_sign)));
                }
                let circle = Circle::new(
                    Point::from(c.center),
                    c.radius,
                    Vec3::from(c.normal),
                    c.m,
                    c.conormal_sign,
                );
                circle.validate()?;
                Ok(circle)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { circles })
    }
}

impl From<BoundaryDatum> for DatumJson {
    fn from(d: BoundaryDatum) -> Self {
        DatumJson {
            circles: d
                .circles
                .iter()
                .map(|c| CircleJson {
                    center: [c.center.x, c.center.y, c.center.z],
                    radius: c.radius,
                    normal: [c.normal.x, c.normal.y, c.normal.z],
                    m: c.multiplicity,
                    conormal_sign: c.normal_sign().unwrap_or(1.0),
                })
                .collect(),
        }
    }
}

impl BoundaryDatum {
    pub fn from_json_str(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| e.to_string())
    }

    /// Largest |⟨ν₀, tangent⟩| over `samples` points per circle.
    pub fn conormal_defect(&self, samples: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.circles {
            let (u, w) = c.basis();
            for k in 0..samples {
                let t = 2.0 * PI * k as f64 / samples as f64;
                let tangent = -t.sin() * u + t.cos() * w;
                worst = worst.max(c.sample(t).1.dot(&tangent).abs());
            }
        }
        worst
    }
}

/// Single-term closed form I(a) = -cπ / (√((1+a)²+c²) √((1-a)²+c²)).
pub fn single_term(a: f64, c: f64) -> f64 {
    -c * PI / ((((1.0 + a).powi(2) + c * c).sqrt()) * (((1.0 - a).powi(2) + c * c).sqrt()))
}

/// ∫_γ ⟨x - x₀, ν₀⟩ / |x - x₀|² dℋ¹ by the closed form, for conormals
/// orthogonal to the circle plane.
pub fn circle_conormal_integral(circle: &Circle, x0: &Point) -> Result<f64, BoundaryError> {
    circle.validate()?;
    let sign = circle.normal_sign().ok_or(BoundaryError::NotPlaneOrthogonal)?;
    if circle.on_circle(x0) {
        return Err(BoundaryError::Singular);
    }
    // rotate the normal to e₃, then spin about e₃ so x₀ lands in the xz-plane
    let n = circle.normal.normalize();
    let to_e3 = Rotation3::rotation_between(&n, &Vec3::z()).unwrap_or_else(|| {
        Rotation3::from_axis_angle(&Vec3::x_axis(), PI)
    });
    let local = to_e3 * (x0 - circle.center) / circle.radius;
    let a = (local.x * local.x + local.y * local.y).sqrt();
    let c = local.z;
    Ok(circle.multiplicity as f64 * sign * (single_term(a, c) + single_term(-a, c)))
}

/// Periodic trapezoid rule for the same integral; accepts any conormal field.
pub fn circle_conormal_integral_quad(circle: &Circle, x0: &Point, n_samples: usize) -> Result<f64, BoundaryError> {
    circle.validate()?;
    if n_samples < 16 {
        return Err(BoundaryError::TooFewSamples(n_samples));
    }
    if circle.on_circle(x0) {
        return Err(BoundaryError::Singular);
    }
    let dt = 2.0 * PI / n_samples as f64;
    let total = sum((0..n_samples).map(|k| {
        let (x, nu) = circle.sample(k as f64 * dt);
        let d = x - x0;
        d.dot(&nu) / d.norm_squared()
    }));
    Ok(circle.multiplicity as f64 * total * dt * circle.radius)
}

/// Σ over circles of the closed-form integrals.
pub fn datum_integral(circles: &[Circle], x0: &Point) -> Result<f64, BoundaryError> {
    let mut parts = Vec::with_capacity(circles.len());
    for c in circles {
        parts.push(circle_conormal_integral(c, x0)?);
    }
    Ok(sum(parts))
}

/// Grid-plus-polish search settings for [`sup_conormal_integral`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SupSearch {
    /// Grid points per axis.
    pub grid: usize,
    /// Bounding-box padding in multiples of the largest circle diameter.
    pub padding: f64,
    /// Local ascent iterations per seed.
    pub polish_iterations: usize,
    /// Number of best grid points that are polished.
    pub seeds: usize,
}

impl Default for SupSearch {
    fn default() -> Self {
        Self {
            grid: 41,
            padding: 2.0,
            polish_iterations: 200,
            seeds: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SupResult {
    pub value: f64,
    pub argmax: Point,
    pub evaluations: usize,
}

fn lex_less(a: &Point, b: &Point) -> bool {
    (a.x, a.y, a.z) < (b.x, b.y, b.z)
}

/// Better of two candidates: larger value, ties broken by lexicographic
/// order of the point.
fn better(a: (f64, Point), b: (f64, Point)) -> (f64, Point) {
    if a.0 > b.0 || (a.0 == b.0 && lex_less(&a.1, &b.1)) {
        a
    } else {
        b
    }
}

/// sup over x₀ ∉ γ of the summed conormal integral.
///
/// The grid covers the circles' bounding box padded by `padding` diameters;
/// outside it every term is bounded by m·2πr/dist, so for the default
/// padding the tail cannot exceed a quarter of the single-circle bound π.
pub fn sup_conormal_integral(circles: &[Circle], search: &SupSearch) -> Result<SupResult, BoundaryError> {
    if circles.is_empty() {
        return Ok(SupResult {
            value: 0.0,
            argmax: Point::origin(),
            evaluations: 0,
        });
    }
    for c in circles {
        c.validate()?;
        c.normal_sign().ok_or(BoundaryError::NotPlaneOrthogonal)?;
    }
    let mut lo = Point::from(Vec3::repeat(f64::INFINITY));
    let mut hi = Point::from(Vec3::repeat(f64::NEG_INFINITY));
    let mut diameter: f64 = 0.0;
    for c in circles {
        for k in 0..3 {
            lo[k] = lo[k].min(c.center[k] - c.radius);
            hi[k] = hi[k].max(c.center[k] + c.radius);
        }
        diameter = diameter.max(2.0 * c.radius);
    }
    let pad = search.padding * diameter;
    let n = search.grid.max(3);
    let eval = |p: &Point| datum_integral(circles, p).unwrap_or(f64::NEG_INFINITY);
    // offset the grid by an irrational fraction so no node sits on a circle
    let nodes: Vec<Point> = (0..n * n * n)
        .map(|idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            let f = |t: usize, axis: usize| {
                let s = (t as f64 + 0.5 * (0.6180339887498949 + axis as f64 * 0.1)) / n as f64;
                lo[axis] - pad + s * (hi[axis] - lo[axis] + 2.0 * pad)
            };
            Point::new(f(i, 0), f(j, 1), f(k, 2))
        })
        .collect();
    let values: Vec<f64> = nodes.par_iter().map(eval).collect();
    let mut order: Vec<usize> = (0..nodes.len()).filter(|&i| values[i].is_finite()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap()
            .then_with(|| (nodes[a].x, nodes[a].y, nodes[a].z).partial_cmp(&(nodes[b].x, nodes[b].y, nodes[b].z)).unwrap())
    });
    let spacing = (hi - lo).max() / n as f64 + 2.0 * pad / n as f64;
    let seeds: Vec<usize> = order.into_iter().take(search.seeds.max(1)).collect();
    let polished: Vec<(f64, Point, usize)> = seeds
        .par_iter()
        .map(|&i| polish(&eval, nodes[i], values[i], spacing, search.polish_iterations))
        .collect();
    let mut best = (f64::NEG_INFINITY, Point::origin());
    let mut evaluations = nodes.len();
    for (v, p, e) in polished {
        evaluations += e;
        best = better((v, p), best);
    }
    Ok(SupResult {
        value: best.0,
        argmax: best.1,
        evaluations,
    })
}

/// Compass search: try ± steps along each axis, halve the step when nothing
/// improves.
fn polish(eval: &(impl Fn(&Point) -> f64 + Sync), start: Point, value: f64, step: f64, iterations: usize) -> (f64, Point, usize) {
    let (mut p, mut v, mut h) = (start, value, step);
    let mut evals = 0;
    for _ in 0..iterations {
        let mut improved = false;
        for axis in 0..3 {
            for dir in [1.0, -1.0] {
                let mut q = p;
                q[axis] += dir * h;
                let w = eval(&q);
                evals += 1;
                if w > v {
                    p = q;
                    v = w;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
            if h < 1e-12 * step.max(1.0) {
                break;
            }
        }
    }
    (v, p, evals)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum Threshold {
    SixPi,
    EightPi,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::SixPi => 6.0 * PI,
            Threshold::EightPi => 8.0 * PI,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AdmissibilityReport {
    pub p_estimate: f64,
    pub sup: f64,
    pub argmax: Point,
    pub lhs: f64,
    pub threshold: f64,
    pub slack: f64,
    pub below_threshold: bool,
    pub p_below_4pi: bool,
    pub pass: bool,
}

/// P + 2·sup against the chosen threshold, together with the P < 4π hypothesis.
pub fn admissibility_check(
    p_estimate: f64,
    circles: &[Circle],
    threshold: Threshold,
    search: &SupSearch,
) -> Result<AdmissibilityReport, BoundaryError> {
    if !(p_estimate >= 0.0) {
        return Err(BoundaryError::InvalidCircle(format!("P estimate must be >= 0, got {p_estimate}")));
    }
    let s = sup_conormal_integral(circles, search)?;
    let lhs = p_estimate + 2.0 * s.value;
    let t = threshold.value();
    let below_threshold = lhs < t;
    let p_below_4pi = p_estimate < 4.0 * PI;
    Ok(AdmissibilityReport {
        p_estimate,
        sup: s.value,
        argmax: s.argmax,
        lhs,
        threshold: t,
        slack: t - lhs,
        below_threshold,
        p_below_4pi,
        pass: below_threshold && p_below_4pi,
    })
}
