//! Geodesic nets on the unit 2-sphere: stationary integral 1-varifolds made
//! of great-circle arcs meeting at balanced junctions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::SphericalLink;
use crate::mesh::{Point, Vec3};
use crate::sum::sum;

/// Vertices must be unit to this tolerance before they are renormalized.
const UNIT_TOL: f64 = 1e-9;
/// Arcs shorter than this abort a relaxation.
const COLLAPSE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("vertex {0} has norm {1}, expected 1")]
    NonUnitVertex(usize, f64),
    #[error("arc {0} references a missing vertex")]
    BadIndex(usize),
    #[error("arc {0} has coincident endpoints")]
    DegenerateArc(usize),
    #[error("arc {0} has zero multiplicity")]
    ZeroMultiplicity(usize),
    #[error("ambiguous geodesic: endpoints of arc {0} are antipodal")]
    AmbiguousGeodesic(usize),
    #[error("net is not connected")]
    Disconnected,
    #[error("arc {arc} collapsed to length {length:e} at iteration {iteration}")]
    ArcCollapse { arc: usize, length: f64, iteration: usize },
}

/// Great-circle distance, or its complement to 2π for the major arc.
pub fn arc_length(p: &Point, q: &Point, major: bool) -> Result<f64, NetError> {
    let c = p.coords.dot(&q.coords).clamp(-1.0, 1.0);
    if (p.coords + q.coords).norm() < 1e-12 {
        return Err(NetError::AmbiguousGeodesic(0));
    }
    let l = c.acos();
    Ok(if major { 2.0 * PI - l } else { l })
}

/// Unit tangent at `p` of the minor arc towards `q`.
fn minor_tangent(p: &Vec3, q: &Vec3) -> Vec3 {
    (q - p.dot(q) * p).normalize()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub a: usize,
    pub b: usize,
    pub multiplicity: u32,
    /// Take the long way round the great circle.
    pub major: bool,
}

impl Arc {
    pub fn minor(a: usize, b: usize) -> Self {
        Self {
            a,
            b,
            multiplicity: 1,
            major: false,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    vertices: Vec<[f64; 3]>,
    arcs: Vec<(usize, usize, u32)>,
    /// Indices of arcs that are major.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    major: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetJson", into = "NetJson")]
pub struct GeodesicNet {
    vertices: Vec<Point>,
    arcs: Vec<Arc>,
}

impl TryFrom<NetJson> for GeodesicNet {
    type Error = NetError;

    fn try_from(j: NetJson) -> Result<Self, NetError> {
        let mut arcs: Vec<Arc> = j
            .arcs
            .iter()
            .map(|&(a, b, multiplicity)| Arc {
                a,
                b,
                multiplicity,
                major: false,
            })
            .collect();
        for k in j.major {
            arcs.get_mut(k).ok_or(NetError::BadIndex(k))?.major = true;
        }
        GeodesicNet::new(j.vertices.iter().map(|v| Point::new(v[0], v[1], v[2])).collect(), arcs)
    }
}

impl From<GeodesicNet> for NetJson {
    fn from(n: GeodesicNet) -> Self {
        NetJson {
            vertices: n.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            arcs: n.arcs.iter().map(|a| (a.a, a.b, a.multiplicity)).collect(),
            major: n.arcs.iter().enumerate().filter(|(_, a)| a.major).map(|(k, _)| k).collect(),
        }
    }
}

impl GeodesicNet {
    /// Validates the net; vertices within 1e-9 of the sphere are renormalized.
    pub fn new(vertices: Vec<Point>, arcs: Vec<Arc>) -> Result<Self, NetError> {
        let vertices = vertices
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let n = p.coords.norm();
                if (n - 1.0).abs() > UNIT_TOL {
                    Err(NetError::NonUnitVertex(i, n))
                } else {
                    Ok(Point::from(p.coords / n))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (k, arc) in arcs.iter().enumerate() {
            if arc.a >= vertices.len() || arc.b >= vertices.len() {
                return Err(NetError::BadIndex(k));
            }
            if arc.multiplicity == 0 {
                return Err(NetError::ZeroMultiplicity(k));
            }
            let (p, q) = (vertices[arc.a], vertices[arc.b]);
            if arc.a == arc.b || (p - q).norm() < 1e-12 {
                return Err(NetError::DegenerateArc(k));
            }
            if (p.coords + q.coords).norm() < 1e-12 {
                return Err(NetError::AmbiguousGeodesic(k));
            }
        }
        Ok(Self { vertices, arcs })
    }

    pub fn from_json_str(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| e.to_string())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_length(&self, k: usize) -> f64 {
        let a = self.arcs[k];
        let l = self.vertices[a.a].coords.dot(&self.vertices[a.b].coords).clamp(-1.0, 1.0).acos();
        if a.major {
            2.0 * PI - l
        } else {
            l
        }
    }

    pub fn total_length(&self) -> f64 {
        sum((0..self.arcs.len()).map(|k| self.arcs[k].multiplicity as f64 * self.arc_length(k)))
    }

    /// Σ multiplicity × unit outgoing tangent at each vertex.
    pub fn forces(&self) -> Vec<Vec3> {
        let mut f = vec![Vec3::zeros(); self.vertices.len()];
        for a in &self.arcs {
            let (p, q) = (self.vertices[a.a].coords, self.vertices[a.b].coords);
            let sign = if a.major { -1.0 } else { 1.0 };
            let m = a.multiplicity as f64 * sign;
            f[a.a] += m * minor_tangent(&p, &q);
            f[a.b] += m * minor_tangent(&q, &p);
        }
        f
    }

    pub fn balance_residual(&self) -> f64 {
        self.forces().iter().map(|f| f.norm()).fold(0.0, f64::max)
    }

    pub fn rotated(&self, rotation: &Matrix3<f64>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| Point::from(rotation * p.coords)).collect(),
            arcs: self.arcs.clone(),
        }
    }

    /// Moves every vertex by `offset(i)` and renormalizes.
    pub fn perturbed(&self, offset: impl Fn(usize) -> Vec3) -> Result<Self, NetError> {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, p)| Point::from((p.coords + offset(i)).normalize()))
            .collect();
        Self::new(vertices, self.arcs.clone())
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for a in &self.arcs {
            adj[a.a].push(a.b);
            adj[a.b].push(a.a);
        }
        let used: Vec<usize> = (0..n).filter(|&i| !adj[i].is_empty()).collect();
        let Some(&start) = used.first() else {
            return false;
        };
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        used.iter().all(|&i| seen[i])
    }
}

/// Net with long arcs split so that every piece is a minor arc ≤ π/2.
struct Expanded {
    points: Vec<Vec3>,
    /// (a, b, multiplicity, original arc)
    edges: Vec<(usize, usize, f64, usize)>,
    primary: usize,
}

impl Expanded {
    fn new(net: &GeodesicNet) -> Self {
        let mut points: Vec<Vec3> = net.vertices.iter().map(|p| p.coords).collect();
        let primary = points.len();
        let mut edges = Vec::new();
        for (k, arc) in net.arcs.iter().enumerate() {
            let len = net.arc_length(k);
            let pieces = (len / (PI / 2.0)).ceil().max(1.0) as usize;
            let p = points[arc.a];
            let q = points[arc.b];
            let t = if arc.major { -minor_tangent(&p, &q) } else { minor_tangent(&p, &q) };
            let mut prev = arc.a;
            for s in 1..pieces {
                let angle = len * s as f64 / pieces as f64;
                points.push(angle.cos() * p + angle.sin() * t);
                let id = points.len() - 1;
                edges.push((prev, id, arc.multiplicity as f64, k));
                prev = id;
            }
            edges.push((prev, arc.b, arc.multiplicity as f64, k));
        }
        Self { points, edges, primary }
    }

    fn length(&self, pts: &[Vec3]) -> f64 {
        sum(self.edges.iter().map(|&(a, b, m, _)| m * pts[a].dot(&pts[b]).clamp(-1.0, 1.0).acos()))
    }

    fn shortest(&self, pts: &[Vec3]) -> (usize, f64) {
        self.edges
            .iter()
            .map(|&(a, b, _, k)| (k, pts[a].dot(&pts[b]).clamp(-1.0, 1.0).acos()))
            .fold((0, f64::INFINITY), |x, y| if y.1 < x.1 { y } else { x })
    }

    fn forces(&self, pts: &[Vec3]) -> Vec<Vec3> {
        let mut f = vec![Vec3::zeros(); pts.len()];
        for &(a, b, m, _) in &self.edges {
            f[a] += m * minor_tangent(&pts[a], &pts[b]);
            f[b] += m * minor_tangent(&pts[b], &pts[a]);
        }
        f
    }
}

/// Σ_i Π_i with Π_i the projection onto the tangent plane at p_i.
fn projector_sum(pts: &[Vec3]) -> Matrix3<f64> {
    pts.iter()
        .fold(Matrix3::zeros(), |acc, p| acc + Matrix3::identity() - p * p.transpose())
}

fn push(pts: &[Vec3], w: &Vec3) -> Vec<Vec3> {
    pts.iter().map(|p| (p + (w - p.dot(w) * p)).normalize()).collect()
}

/// Σ of all forces. For a net of geodesic arcs it equals ∫ x ds, and it
/// vanishes on every balanced net.
fn moment(e: &Expanded, pts: &[Vec3]) -> Vec3 {
    e.forces(pts).iter().fold(Vec3::zeros(), |a, f| a + f)
}

/// Pushes all points along a common tangential field until the moment
/// vanishes. Length has a maximum along these pushes at a balanced net, so
/// without this the descent slides off towards collapse.
fn recenter(e: &Expanded, pts: Vec<Vec3>) -> Vec<Vec3> {
    let mut pts = pts;
    for _ in 0..20 {
        let m = moment(e, &pts);
        if m.norm() < 1e-15 * e.edges.len() as f64 {
            break;
        }
        let h = 1e-7;
        let mut jac = Matrix3::zeros();
        for k in 0..3 {
            let mut w = Vec3::zeros();
            w[k] = h;
            let col = (moment(e, &push(&pts, &w)) - moment(e, &push(&pts, &(-w)))) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let Some(inv) = jac.try_inverse() else {
            break;
        };
        let step = -(inv * m);
        let next = push(&pts, &step);
        if moment(e, &next).norm() >= m.norm() {
            break;
        }
        pts = next;
    }
    pts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxMethod {
    /// Armijo descent on total length; accepted lengths never increase.
    LengthDescent,
    /// Damped Newton iteration on the balance equations, used when the net
    /// is a saddle of length and the descent leaves it.
    BalanceNewton,
}

#[derive(Clone, Copy, Debug)]
pub struct RelaxOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Retry with the Newton iteration when length descent fails.
    pub newton_fallback: bool,
}

impl RelaxOptions {
    pub fn new(max_iter: usize, tol: f64) -> Self {
        Self {
            max_iter,
            tol,
            newton_fallback: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub net: GeodesicNet,
    pub method: RelaxMethod,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub length: f64,
    /// Total length of each accepted iterate, starting from the recentered input.
    pub lengths: Vec<f64>,
}

/// Relaxes the vertex positions to a balanced net with the same combinatorics.
pub fn relax(net: &GeodesicNet, max_iter: usize, tol: f64) -> Result<Relaxation, NetError> {
    relax_with(net, &RelaxOptions::new(max_iter, tol))
}

pub fn relax_with(net: &GeodesicNet, opts: &RelaxOptions) -> Result<Relaxation, NetError> {
    if !net.is_connected() {
        return Err(NetError::Disconnected);
    }
    let e = Expanded::new(net);
    let descent = length_descent(&e, opts);
    let run = match descent {
        Ok(run) if run.converged || !opts.newton_fallback => run,
        Ok(_) | Err(_) if opts.newton_fallback => {
            log::info!("length descent did not reach a balanced net; trying Newton");
            match balance_newton(&e, opts) {
                Ok(run) if run.converged => run,
                newton => match descent {
                    Err(err) => return Err(err),
                    Ok(run) => newton.unwrap_or(run),
                },
            }
        }
        Ok(run) => run,
        Err(err) => return Err(err),
    };
    let vertices: Vec<Point> = run.points[..e.primary].iter().map(|p| Point::from(*p)).collect();
    let out = GeodesicNet::new(vertices, net.arcs.clone())?;
    Ok(Relaxation {
        residual: out.balance_residual(),
        length: out.total_length(),
        net: out,
        method: run.method,
        iterations: run.iterations,
        converged: run.converged,
        lengths: run.lengths,
    })
}

struct Run {
    points: Vec<Vec3>,
    method: RelaxMethod,
    iterations: usize,
    converged: bool,
    lengths: Vec<f64>,
}

fn max_norm(f: &[Vec3]) -> f64 {
    f.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn check_collapse(e: &Expanded, pts: &[Vec3], iteration: usize) -> Result<(), NetError> {
    let (arc, shortest) = e.shortest(pts);
    if shortest < COLLAPSE {
        return Err(NetError::ArcCollapse {
            arc,
            length: shortest,
            iteration,
        });
    }
    Ok(())
}

fn length_descent(e: &Expanded, opts: &RelaxOptions) -> Result<Run, NetError> {
    let mut pts = e.points.clone();
    if max_norm(&e.forces(&pts)) >= opts.tol {
        pts = recenter(e, pts);
    }
    let mut length = e.length(&pts);
    let mut lengths = vec![length];
    let mut iterations = 0;
    let mut converged = false;
    let mut prev: Option<(Vec<Vec3>, Vec<Vec3>)> = None;
    let mut alpha = 0.1;
    loop {
        let f = e.forces(&pts);
        let residual = max_norm(&f);
        if residual < opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        // remove the common push component of the force
        let m = f.iter().fold(Vec3::zeros(), |a, v| a + v);
        let u = projector_sum(&pts).try_inverse().map(|inv| inv * m).unwrap_or_else(Vec3::zeros);
        let d: Vec<Vec3> = pts.iter().zip(&f).map(|(p, fi)| fi - (u - p.dot(&u) * p)).collect();
        let dd = sum(d.iter().map(|v| v.norm_squared()));
        if let Some((pp, pd)) = &prev {
            // Barzilai–Borwein initial step
            let s: Vec<Vec3> = pts.iter().zip(pp).map(|(a, b)| a - b).collect();
            let ss = sum(s.iter().map(|v| v.norm_squared()));
            let sy = sum(s.iter().zip(d.iter().zip(pd)).map(|(si, (a, b))| -si.dot(&(a - b))));
            if sy > 0.0 {
                alpha = (ss / sy).clamp(1e-8, 1.0);
            }
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<Vec3> = pts.iter().zip(&d).map(|(p, di)| (p + alpha * di).normalize()).collect();
            let trial = recenter(e, trial);
            let l = e.length(&trial);
            if l <= length - 1e-4 * alpha * dd {
                accepted = Some((trial, l));
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        let Some((trial, l)) = accepted else {
            break;
        };
        check_collapse(e, &trial, iterations)?;
        prev = Some((std::mem::replace(&mut pts, trial), d));
        length = l;
        lengths.push(l);
        log::debug!("relax iteration {iterations}: length {l}, residual {residual:e}");
    }
    Ok(Run {
        points: pts,
        method: RelaxMethod::LengthDescent,
        iterations,
        converged,
        lengths,
    })
}

/// Orthonormal basis of the tangent plane at `p`.
fn tangent_basis(p: &Vec3) -> (Vec3, Vec3) {
    let axis = if p.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let a = p.cross(&axis).normalize();
    (a, p.cross(&a))
}

fn flatten(e: &Expanded, pts: &[Vec3], bases: &[(Vec3, Vec3)]) -> DVector<f64> {
    let f = e.forces(pts);
    DVector::from_iterator(2 * pts.len(), f.iter().zip(bases).flat_map(|(v, (a, b))| [v.dot(a), v.dot(b)]))
}

fn moved(pts: &[Vec3], bases: &[(Vec3, Vec3)], x: &DVector<f64>) -> Vec<Vec3> {
    pts.iter()
        .zip(bases)
        .enumerate()
        .map(|(i, (p, (a, b)))| (p + x[2 * i] * a + x[2 * i + 1] * b).normalize())
        .collect()
}

fn balance_newton(e: &Expanded, opts: &RelaxOptions) -> Result<Run, NetError> {
    let mut pts = e.points.clone();
    let mut lengths = vec![e.length(&pts)];
    let mut iterations = 0;
    let mut converged = false;
    let n = 2 * pts.len();
    loop {
        let residual = max_norm(&e.forces(&pts));
        if residual < opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let bases: Vec<(Vec3, Vec3)> = pts.iter().map(tangent_basis).collect();
        let f0 = flatten(e, &pts, &bases);
        let h = 1e-7;
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut x = DVector::zeros(n);
            x[k] = h;
            let plus = flatten(e, &moved(&pts, &bases, &x), &bases);
            x[k] = -h;
            let minus = flatten(e, &moved(&pts, &bases, &x), &bases);
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        // rotations leave the forces unchanged; the pseudo-inverse ignores them
        let Ok(step) = jac.svd(true, true).solve(&(-&f0), 1e-10) else {
            break;
        };
        let merit = f0.norm_squared();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = moved(&pts, &bases, &(t * &step));
            if flatten(e, &trial, &bases).norm_squared() < merit {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        let Some(trial) = accepted else {
            break;
        };
        check_collapse(e, &trial, iterations)?;
        pts = trial;
        lengths.push(e.length(&pts));
    }
    Ok(Run {
        points: pts,
        method: RelaxMethod::BalanceNewton,
        iterations,
        converged,
        lengths,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Below4Pi,
    Above4Pi,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StatedBound {
    /// length < value
    Below(f64),
    /// length > value
    Above(f64),
}

impl StatedBound {
    pub fn holds(&self, length: f64) -> bool {
        match *self {
            StatedBound::Below(b) => length < b,
            StatedBound::Above(b) => length > b,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CatalogueEntry {
    pub index: usize,
    pub name: String,
    pub arc_count: usize,
    pub expression: String,
    /// None when the printed formula does not evaluate to a real number.
    pub length: Option<f64>,
    pub comparison: Comparison,
    /// Bound stated alongside the formula, besides the comparison with 4π.
    pub stated_bound: Option<StatedBound>,
    pub formula_valid: bool,
    pub constructible: bool,
    pub combinatorics: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<GeodesicNet>,
}

impl CatalogueEntry {
    pub fn density(&self) -> Option<f64> {
        self.length.map(|l| l / (2.0 * PI))
    }
}

fn arcs_at_chord(points: &[Point], chord: f64) -> Vec<Arc> {
    let mut arcs = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if ((points[i] - points[j]).norm() - chord).abs() < 1e-9 {
                arcs.push(Arc::minor(i, j));
            }
        }
    }
    arcs
}

fn unit(x: f64, y: f64, z: f64) -> Point {
    Point::from(Vec3::new(x, y, z).normalize())
}

pub fn great_circle_net() -> GeodesicNet {
    let v = vec![unit(1.0, 0.0, 0.0), unit(0.0, 1.0, 0.0), unit(-1.0, 0.0, 0.0), unit(0.0, -1.0, 0.0)];
    let arcs = (0..4).map(|i| Arc::minor(i, (i + 1) % 4)).collect();
    GeodesicNet::new(v, arcs).unwrap()
}

/// Three half great circles from the north to the south pole, each split at
/// the equator.
pub fn three_half_circles_net() -> GeodesicNet {
    let mut v = vec![unit(0.0, 0.0, 1.0), unit(0.0, 0.0, -1.0)];
    let mut arcs = Vec::new();
    for k in 0..3 {
        let a = 2.0 * PI * k as f64 / 3.0;
        v.push(unit(a.cos(), a.sin(), 0.0));
        arcs.push(Arc::minor(0, 2 + k));
        arcs.push(Arc::minor(2 + k, 1));
    }
    GeodesicNet::new(v, arcs).unwrap()
}

pub fn tetrahedral_net() -> GeodesicNet {
    let v = vec![
        unit(1.0, 1.0, 1.0),
        unit(1.0, -1.0, -1.0),
        unit(-1.0, 1.0, -1.0),
        unit(-1.0, -1.0, 1.0),
    ];
    let arcs = arcs_at_chord(&v, (8.0f64 / 3.0).sqrt());
    GeodesicNet::new(v, arcs).unwrap()
}

pub fn cube_net() -> GeodesicNet {
    let mut v = Vec::new();
    for x in [1.0, -1.0] {
        for y in [1.0, -1.0] {
            for z in [1.0, -1.0] {
                v.push(unit(x, y, z));
            }
        }
    }
    let arcs = arcs_at_chord(&v, 2.0 / 3f64.sqrt());
    GeodesicNet::new(v, arcs).unwrap()
}

/// Prism over a regular n-gon: two n-gons at heights ±z joined by meridian
/// arcs, with z chosen so that all three arcs meet at 120°.
pub fn prism_net(n: usize) -> GeodesicNet {
    let build = |z: f64| -> GeodesicNet {
        let r = (1.0 - z * z).sqrt();
        let mut v = Vec::new();
        for side in [1.0, -1.0] {
            for k in 0..n {
                let a = 2.0 * PI * k as f64 / n as f64;
                v.push(Point::new(r * a.cos(), r * a.sin(), side * z));
            }
        }
        let mut arcs = Vec::new();
        for k in 0..n {
            arcs.push(Arc::minor(k, (k + 1) % n));
            arcs.push(Arc::minor(n + k, n + (k + 1) % n));
            arcs.push(Arc::minor(k, n + k));
        }
        GeodesicNet::new(v, arcs).unwrap()
    };
    // meridian component of the force at vertex 0; increasing in z
    let meridian = |z: f64| -> f64 {
        let net = build(z);
        let p = net.vertices[0].coords;
        let up = (Vec3::z() - p.z * p).normalize();
        net.forces()[0].dot(&up)
    };
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-9);
    if meridian(lo) > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if meridian(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(0.5 * (lo + hi))
}

pub fn dodecahedral_net() -> GeodesicNet {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut raw = Vec::new();
    for x in [1.0, -1.0] {
        for y in [1.0, -1.0] {
            for z in [1.0, -1.0] {
                raw.push(Vec3::new(x, y, z));
            }
        }
    }
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            raw.push(Vec3::new(0.0, a / phi, b * phi));
            raw.push(Vec3::new(a / phi, b * phi, 0.0));
            raw.push(Vec3::new(a * phi, 0.0, b / phi));
        }
    }
    let v: Vec<Point> = raw.iter().map(|p| Point::from(p / 3f64.sqrt())).collect();
    let arcs = arcs_at_chord(&v, 2.0 / (phi * 3f64.sqrt()));
    GeodesicNet::new(v, arcs).unwrap()
}

fn deg(x: f64) -> f64 {
    x * 2.0 * PI / 360.0
}

/// The ten stationary nets with multiplicity one and all densities < 2.
pub fn catalogue() -> Vec<CatalogueEntry> {
    let s5 = 5f64.sqrt();
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let item8 = 8.0 * 2.0 * (1.0 / s3).asin()
        + 8.0 * 2.0 * ((2.0 - s2).sqrt() / s3).asin()
        + 8.0 * 2.0 * ((2f64.powf(0.25) - 1.0).powi(2) / 6.0 + (2.0 - s2).powi(2) / 12.0).sqrt().asin();
    let item9 = (6.0 * 83.801_670_87 + 8.0 * 58.256_842_87 + 4.0 * 13.559_447_52) * deg(1.0);
    let item10 = 12.0 * 2.0 * (1.0 / s3).asin()
        + 6.0 * 2.0 * (3.0 - s6 / 6.0).sqrt().asin()
        + 3.0 * 2.0 * ((s3 - s2) / (2.0 * s3)).asin();
    let rows: Vec<(&str, usize, &str, f64, Option<StatedBound>, &str, Option<GeodesicNet>)> = vec![
        ("great circle", 1, "2π", 2.0 * PI, None, "one closed great circle", Some(great_circle_net())),
        (
            "three half circles",
            3,
            "3π",
            3.0 * PI,
            None,
            "three half great circles with common endpoints",
            Some(three_half_circles_net()),
        ),
        (
            "tetrahedron",
            6,
            "6·arccos(-1/3)",
            6.0 * (-1.0f64 / 3.0).acos(),
            Some(StatedBound::Below(11.5)),
            "1-skeleton of a regular tetrahedron",
            Some(tetrahedral_net()),
        ),
        (
            "cube",
            12,
            "12·arccos(1/3)",
            12.0 * (1.0f64 / 3.0).acos(),
            Some(StatedBound::Above(14.5)),
            "1-skeleton of a cube",
            Some(cube_net()),
        ),
        (
            "pentagonal prism",
            15,
            "10·arccos(√5/3) + 5·arccos((3 - 5√5/3)/(5 - √5))",
            10.0 * (s5 / 3.0).acos() + 5.0 * ((3.0 - 5.0 * s5 / 3.0) / (5.0 - s5)).acos(),
            Some(StatedBound::Above(16.0)),
            "prism over a regular pentagon",
            Some(prism_net(5)),
        ),
        (
            "triangular prism",
            9,
            "6·arccos(-1/3) + 3·arccos(7/9)",
            6.0 * (-1.0f64 / 3.0).acos() + 3.0 * (7.0f64 / 9.0).acos(),
            Some(StatedBound::Above(13.5)),
            "prism over a regular triangle",
            Some(prism_net(3)),
        ),
        (
            "dodecahedron",
            30,
            "30·arccos(1 - 8/(3(1+√5)²))",
            30.0 * (1.0 - 8.0 / (3.0 * (1.0 + s5).powi(2))).acos(),
            Some(StatedBound::Above(21.0)),
            "1-skeleton of a regular dodecahedron",
            Some(dodecahedral_net()),
        ),
        (
            "two quadrilaterals, eight pentagons",
            24,
            "16·arcsin(1/√3) + 16·arcsin(√(2-√2)/√3) + 16·arcsin(√((2^(1/4)-1)²/6 + (2-√2)²/12))",
            item8,
            Some(StatedBound::Above(20.0)),
            "2 regular quadrilaterals and 8 equal pentagons; each quadrilateral surrounded by 4 pentagons, each pentagon by 4 pentagons and 1 quadrilateral",
            None,
        ),
        (
            "four pentagons, four quadrilaterals",
            18,
            "(6·83.80167087° + 8·58.25684287° + 4·13.55944752°)·2π/360°",
            item9,
            Some(StatedBound::Above(17.5)),
            "4 equal pentagons and 4 equal quadrilaterals; each quadrilateral surrounded by 3 pentagons and 1 quadrilateral, each pentagon by 3 quadrilaterals and 2 pentagons",
            None,
        ),
        (
            "three quadrilaterals, six pentagons",
            21,
            "24·arcsin(1/√3) + 12·arcsin(√(3 - √6/6)) + 6·arcsin((√3 - √2)/(2√3))",
            item10,
            Some(StatedBound::Above(25.0)),
            "3 regular quadrilaterals and 6 equal pentagons; each quadrilateral surrounded by 4 pentagons, each pentagon by 2 quadrilaterals and 3 pentagons",
            None,
        ),
    ];
    rows.into_iter()
        .enumerate()
        .map(|(i, (name, arc_count, expression, value, stated_bound, combinatorics, net))| {
            let valid = value.is_finite();
            let comparison = match (valid, value < 4.0 * PI) {
                (true, true) => Comparison::Below4Pi,
                // an invalid formula keeps its stated comparison
                _ => Comparison::Above4Pi,
            };
            CatalogueEntry {
                index: i + 1,
                name: name.to_string(),
                arc_count,
                expression: expression.to_string(),
                length: valid.then_some(value),
                comparison,
                stated_bound,
                formula_valid: valid,
                constructible: net.is_some(),
                combinatorics: combinatorics.to_string(),
                net,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetMatch {
    Entry {
        index: usize,
        name: String,
        length: f64,
        density: f64,
        residual: f64,
    },
    /// No single catalogue net within 5% of 2π; possibly a sum of several.
    Composite { length: f64, density: f64, nearest: usize, residual: f64 },
}

impl NetMatch {
    pub fn label(&self) -> String {
        match self {
            NetMatch::Entry { name, .. } => name.clone(),
            NetMatch::Composite { .. } => "composite/unknown".into(),
        }
    }
}

/// Nearest catalogue net by total length.
pub fn match_length(length: f64) -> NetMatch {
    let entries = catalogue();
    let (entry, residual) = entries
        .iter()
        .filter_map(|e| e.length.map(|l| (e, (l - length).abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("catalogue has valid entries");
    if residual > 0.05 * 2.0 * PI {
        return NetMatch::Composite {
            length,
            density: length / (2.0 * PI),
            nearest: entry.index,
            residual,
        };
    }
    NetMatch::Entry {
        index: entry.index,
        name: entry.name.clone(),
        length: entry.length.unwrap(),
        density: entry.length.unwrap() / (2.0 * PI),
        residual,
    }
}

pub fn match_link(link: &SphericalLink) -> NetMatch {
    match_length(link.total_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_length_examples() {
        let e1 = Point::new(1.0, 0.0, 0.0);
        let e2 = Point::new(0.0, 1.0, 0.0);
        assert!((arc_length(&e1, &e2, false).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((arc_length(&e1, &e2, true).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(arc_length(&e1, &Point::new(-1.0, 0.0, 0.0), false), Err(NetError::AmbiguousGeodesic(0)));
        let a = unit(1.0, 1.0, 1.0);
        let b = unit(1.0, -1.0, -1.0);
        assert!((arc_length(&a, &b, false).unwrap() - (-1.0f64 / 3.0).acos()).abs() < 1e-15);
    }

    #[test]
    fn invalid_nets_are_rejected() {
        let e1 = Point::new(1.0, 0.0, 0.0);
        assert_eq!(
            GeodesicNet::new(vec![e1, Point::new(0.0, 2.0, 0.0)], vec![]),
            Err(NetError::NonUnitVertex(1, 2.0))
        );
        assert_eq!(GeodesicNet::new(vec![e1], vec![Arc::minor(0, 0)]), Err(NetError::DegenerateArc(0)));
        assert_eq!(
            GeodesicNet::new(vec![e1, -e1], vec![Arc::minor(0, 1)]),
            Err(NetError::AmbiguousGeodesic(0))
        );
        assert_eq!(GeodesicNet::new(vec![e1], vec![Arc::minor(0, 3)]), Err(NetError::BadIndex(0)));
    }

    #[test]
    fn major_arcs_reverse_the_tangent() {
        let v = vec![Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let mut arcs = vec![Arc::minor(0, 1), Arc::minor(0, 1)];
        arcs[1].major = true;
        let net = GeodesicNet::new(v, arcs).unwrap();
        assert!((net.total_length() - 2.0 * PI).abs() < 1e-14);
        assert!(net.balance_residual() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let mut net = cube_net();
        net.arcs[2].major = true;
        let s = serde_json::to_string(&net).unwrap();
        assert!(s.contains("\"major\":[2]"));
        let back = GeodesicNet::from_json_str(&s).unwrap();
        assert_eq!(back.arcs, net.arcs);
        let plain = GeodesicNet::from_json_str(r#"{"vertices": [[1,0,0],[0,1,0]], "arcs": [[0,1,2]]}"#).unwrap();
        assert_eq!(plain.arcs[0].multiplicity, 2);
    }

    #[test]
    fn moment_vanishes_exactly_on_balanced_nets() {
        let e = Expanded::new(&tetrahedral_net());
        assert!(moment(&e, &e.points).norm() < 1e-14);
    }
}
