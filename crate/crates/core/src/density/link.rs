//! Blow-up links: the intersection of a varifold with a small sphere,
//! radially projected to the unit sphere.
//!
//! Each face meets ∂B_r(x₀) in arcs of the circle where the sphere cuts the
//! face plane; those arcs are exact, so the reported length is exact for the
//! mesh. Arcs are chained through shared endpoints on mesh edges; endpoints
//! shared by three or more arcs are junctions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::{DiscreteVarifold, Point, Vec3};
use crate::sum::sum;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LinkOptions {
    /// Maximum angular step when sampling an arc in its face plane.
    pub max_step: f64,
    /// Junction endpoints closer than this many local edge lengths (measured
    /// before projection, capped at r/2) are merged into one junction.
    pub junction_merge: f64,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self {
            max_step: PI / 32.0,
            junction_merge: 3.0,
        }
    }
}

/// A chain of arcs on the unit sphere.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
    /// Multiplicity-weighted length of the arcs in the chain.
    pub length: f64,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SphericalLink {
    pub center: Point,
    pub radius: f64,
    pub polylines: Vec<Polyline>,
    pub total_length: f64,
    pub junction_count: usize,
    /// Junction positions on the unit sphere.
    pub junctions: Vec<Point>,
    pub components: usize,
    /// total_length / 2π.
    pub density: f64,
}

impl SphericalLink {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }
}

struct FaceArc {
    center: Point,
    rho: f64,
    u: Vec3,
    w: Vec3,
    start: f64,
    end: f64,
    multiplicity: u32,
    closed: bool,
}

impl FaceArc {
    fn at(&self, alpha: f64) -> Point {
        self.center + self.rho * (alpha.cos() * self.u + alpha.sin() * self.w)
    }
}

/// Intersection of interval lists on [0, 2π); each list is sorted and disjoint.
fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// [φ − β, φ + β] as pieces inside [0, 2π).
fn wrapped(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let tau = 2.0 * PI;
    let lo_n = lo.rem_euclid(tau);
    let hi_n = lo_n + (hi - lo);
    if hi_n <= tau {
        vec![(lo_n, hi_n)]
    } else {
        vec![(0.0, hi_n - tau), (lo_n, tau)]
    }
}

fn face_arcs(v: &DiscreteVarifold, f: usize, x0: &Point, r: f64) -> Vec<FaceArc> {
    let p = v.face_points(f);
    let r2 = r * r;
    if p.iter().all(|q| (q - x0).norm_squared() < r2) {
        return Vec::new();
    }
    let centroid = Point::from((p[0].coords + p[1].coords + p[2].coords) / 3.0);
    let spread = p.iter().map(|q| (q - centroid).norm()).fold(0.0, f64::max);
    if (centroid - x0).norm() > r + spread {
        return Vec::new();
    }
    let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let len = n.norm();
    if len == 0.0 {
        return Vec::new();
    }
    let n = n / len;
    let height = (x0 - p[0]).dot(&n);
    let rho2 = r2 - height * height;
    if rho2 <= 0.0 {
        return Vec::new();
    }
    let rho = rho2.sqrt();
    let center = x0 - height * n;
    let u = (p[1] - p[0]).normalize();
    let w = n.cross(&u);
    let mut set = vec![(0.0, 2.0 * PI)];
    let mut constrained = false;
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let m = n.cross(&(b - a)).normalize();
        let k = (center - a).dot(&m);
        let t = -k / rho;
        if t <= -1.0 {
            continue;
        }
        if t >= 1.0 {
            return Vec::new();
        }
        constrained = true;
        let phi = m.dot(&w).atan2(m.dot(&u));
        let beta = t.acos();
        set = intersect(&set, &wrapped(phi - beta, phi + beta));
        if set.is_empty() {
            return Vec::new();
        }
    }
    let multiplicity = v.multiplicity()[f];
    if !constrained {
        return vec![FaceArc {
            center,
            rho,
            u,
            w,
            start: 0.0,
            end: 2.0 * PI,
            multiplicity,
            closed: true,
        }];
    }
    // join a piece ending at 2π with one starting at 0
    if set.len() > 1 && set[0].0 == 0.0 && set[set.len() - 1].1 == 2.0 * PI {
        let first = set.remove(0);
        let last = set.last_mut().unwrap();
        last.1 = 2.0 * PI + first.1;
    }
    set.into_iter()
        .filter(|(lo, hi)| hi - lo > 1e-12)
        .map(|(start, end)| FaceArc {
            center,
            rho,
            u,
            w,
            start,
            end,
            multiplicity,
            closed: false,
        })
        .collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups points closer than `tol`; returns a representative index per point.
fn cluster(points: &[Point], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
    let mut uf = UnionFind::new(points.len());
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].x - points[i].x > tol {
                break;
            }
            if (points[j] - points[i]).norm() <= tol {
                uf.union(i, j);
            }
        }
    }
    (0..points.len()).map(|i| uf.find(i)).collect()
}

fn sample(arc: &FaceArc, x0: &Point, r: f64, max_step: f64, reverse: bool) -> Vec<Point> {
    let span = arc.end - arc.start;
    let steps = ((span / max_step).ceil() as usize).max(1);
    (0..=steps)
        .map(|k| {
            let t = if reverse { steps - k } else { k } as f64 / steps as f64;
            let p = arc.at(arc.start + t * span);
            Point::from(((p - x0) / r).normalize())
        })
        .collect()
}

/// Link of `v` at `x0` on the sphere of radius `r`.
pub fn spherical_link(v: &DiscreteVarifold, x0: &Point, r: f64, opts: &LinkOptions) -> SphericalLink {
    let per_face: Vec<Vec<FaceArc>> = (0..v.face_count())
        .into_par_iter()
        .map(|f| face_arcs(v, f, x0, r))
        .collect();
    let mut crossing_edges = Vec::new();
    let mut arcs = Vec::new();
    for (f, list) in per_face.into_iter().enumerate() {
        if !list.is_empty() {
            let [a, b, c] = v.face_points(f);
            crossing_edges.push(((a - b).norm() + (b - c).norm() + (c - a).norm()) / 3.0);
        }
        arcs.extend(list);
    }
    let lengths: Vec<f64> = arcs
        .iter()
        .map(|a| a.multiplicity as f64 * (a.end - a.start) * a.rho / r)
        .collect();
    let total_length = sum(lengths.iter().copied());

    // endpoints 2k, 2k+1 of arc k
    let open: Vec<usize> = (0..arcs.len()).filter(|&i| !arcs[i].closed).collect();
    let ends: Vec<Point> = open
        .iter()
        .flat_map(|&i| [arcs[i].at(arcs[i].start), arcs[i].at(arcs[i].end)])
        .collect();
    let node = cluster(&ends, 1e-9 * r);
    let mut incident: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (e, &n) in node.iter().enumerate() {
        incident.entry(n).or_default().push(e);
    }
    let degree = |n: usize| incident[&n].len();

    let mut polylines = Vec::new();
    let mut used = vec![false; open.len()];
    let walk = |start_end: usize, used: &mut Vec<bool>| -> Polyline {
        let mut points: Vec<Point> = Vec::new();
        let mut length = 0.0;
        let mut multiplicity = 0;
        let mut cur = start_end;
        loop {
            let k = cur / 2;
            used[k] = true;
            let arc = &arcs[open[k]];
            multiplicity = multiplicity.max(arc.multiplicity);
            let mut pts = sample(arc, x0, r, opts.max_step, cur % 2 == 1);
            if !points.is_empty() {
                pts.remove(0);
            }
            points.extend(pts);
            length += lengths[open[k]];
            let far = cur ^ 1;
            let n = node[far];
            if degree(n) != 2 {
                break;
            }
            let next = incident[&n].iter().copied().find(|&e| e != far).unwrap();
            if used[next / 2] {
                break;
            }
            cur = next;
        }
        Polyline {
            closed: false,
            points,
            length,
            multiplicity,
        }
    };
    for (&n, list) in &incident {
        if list.len() == 2 {
            continue;
        }
        for &e in list {
            if !used[e / 2] {
                let _ = n;
                polylines.push(walk(e, &mut used));
            }
        }
    }
    for k in 0..open.len() {
        if !used[k] {
            let mut p = walk(2 * k, &mut used);
            p.closed = true;
            polylines.push(p);
        }
    }
    for a in arcs.iter().filter(|a| a.closed) {
        polylines.push(Polyline {
            points: sample(a, x0, r, opts.max_step, false),
            closed: true,
            length: a.multiplicity as f64 * 2.0 * PI * a.rho / r,
            multiplicity: a.multiplicity,
        });
    }

    // junctions: nodes of degree ≥ 3, merged within the local resolution
    let junction_nodes: Vec<Point> = incident
        .iter()
        .filter(|(_, l)| l.len() >= 3)
        .map(|(&n, _)| ends[n])
        .collect();
    let h = if crossing_edges.is_empty() {
        0.0
    } else {
        sum(crossing_edges.iter().copied()) / crossing_edges.len() as f64
    };
    // never merge across more than a quarter of the sphere's diameter
    let merged = cluster(&junction_nodes, (opts.junction_merge * h).min(0.5 * r));
    let mut reps: Vec<usize> = merged.clone();
    reps.sort_unstable();
    reps.dedup();
    let junctions: Vec<Point> = reps
        .iter()
        .map(|&i| Point::from(((junction_nodes[i] - x0) / r).normalize()))
        .collect();

    // connected components over arcs
    let mut uf = UnionFind::new(open.len());
    for list in incident.values() {
        for w in list.windows(2) {
            uf.union(w[0] / 2, w[1] / 2);
        }
    }
    let mut roots: Vec<usize> = (0..open.len()).map(|k| uf.find(k)).collect();
    roots.sort_unstable();
    roots.dedup();
    let components = roots.len() + arcs.iter().filter(|a| a.closed).count();

    SphericalLink {
        center: *x0,
        radius: r,
        polylines,
        total_length,
        junction_count: junctions.len(),
        junctions,
        components,
        density: total_length / (2.0 * PI),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> DiscreteVarifold {
        DiscreteVarifold::new(
            vec![
                Point::new(-2.0, -2.0, 0.0),
                Point::new(2.0, -2.0, 0.0),
                Point::new(2.0, 2.0, 0.0),
                Point::new(-2.0, 2.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
            None,
            true,
        )
        .unwrap()
    }

    #[test]
    fn plane_link_is_a_great_circle() {
        let l = spherical_link(&plane(), &Point::new(0.3, 0.1, 0.0), 1.0, &LinkOptions::default());
        assert!((l.total_length - 2.0 * PI).abs() < 1e-12);
        assert_eq!(l.junction_count, 0);
        assert_eq!(l.components, 1);
        assert_eq!(l.polylines.len(), 1);
        assert!(l.polylines[0].closed);
        for p in &l.polylines[0].points {
            assert!((p.coords.norm() - 1.0).abs() < 1e-12);
            assert!(p.z.abs() < 1e-12);
        }
    }

    #[test]
    fn circle_inside_one_face() {
        let l = spherical_link(&plane(), &Point::new(1.0, -1.0, 0.0), 0.2, &LinkOptions::default());
        assert!((l.total_length - 2.0 * PI).abs() < 1e-12);
        assert_eq!(l.components, 1);
    }

    #[test]
    fn empty_when_sphere_misses() {
        let l = spherical_link(&plane(), &Point::new(0.0, 0.0, 5.0), 1.0, &LinkOptions::default());
        assert!(l.is_empty());
        assert_eq!(l.total_length, 0.0);
    }

    #[test]
    fn three_half_planes_meet_in_a_junction_pair() {
        // three half-planes bounded by the z-axis at 120°
        let mut vertices = vec![Point::new(0.0, 0.0, -2.0), Point::new(0.0, 0.0, 2.0)];
        let mut faces = Vec::new();
        for k in 0..3 {
            let a = 2.0 * PI * k as f64 / 3.0;
            let (c, s) = (2.0 * a.cos(), 2.0 * a.sin());
            vertices.push(Point::new(c, s, -2.0));
            vertices.push(Point::new(c, s, 2.0));
            let (p, q) = (2 + 2 * k, 3 + 2 * k);
            faces.push([0, p, q]);
            faces.push([0, q, 1]);
        }
        let v = DiscreteVarifold::new(vertices, faces, None, false).unwrap();
        // the faces are coarser than the sphere, so merging is switched off
        let opts = LinkOptions {
            junction_merge: 0.0,
            ..LinkOptions::default()
        };
        let l = spherical_link(&v, &Point::origin(), 1.0, &opts);
        assert!((l.total_length - 3.0 * PI).abs() < 1e-12);
        assert_eq!(l.junction_count, 2);
        assert_eq!(l.polylines.len(), 3);
        assert_eq!(l.components, 1);
    }
}
