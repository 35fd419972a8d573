//! Ball masses, density extrapolation, the monotonicity and Li–Yau checks,
//! and classification against the admissible densities below 2.

mod clip;
mod link;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{mean_curvature, willmore_from};
use crate::mesh::{DiscreteVarifold, Point};
use crate::sum::sum;

pub use clip::{triangle_ball_area, triangle_disk_area_2d};
pub use link::{spherical_link, LinkOptions, Polyline, SphericalLink};

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("point is {distance:e} from the support (tolerance {tolerance:e})")]
    OffSupport { distance: f64, tolerance: f64 },
    #[error("empty varifold")]
    Empty,
    #[error("radius ladder has fewer than two rungs above mesh resolution")]
    LadderTooShort,
    #[error("not a varifold density: {0}")]
    NotADensity(f64),
    #[error("need 0 < r < s, got r = {0}, s = {1}")]
    BadRadii(f64, f64),
}

/// μ(B_r(x₀)) by exact triangle–disk clipping.
pub fn ball_mass(v: &DiscreteVarifold, x0: &Point, r: f64) -> f64 {
    if !(r > 0.0) {
        return 0.0;
    }
    let parts: Vec<f64> = (0..v.face_count())
        .into_par_iter()
        .map(|f| v.multiplicity()[f] as f64 * triangle_ball_area(v.face_points(f), x0, r))
        .collect();
    sum(parts)
}

/// μ(B_r(x₀)) / (π r²).
pub fn mass_ratio(v: &DiscreteVarifold, x0: &Point, r: f64) -> f64 {
    ball_mass(v, x0, r) / (PI * r * r)
}

/// The three admissible densities below 2 in codimension one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibleDensity {
    One,
    ThreeHalves,
    Tetrahedral,
}

impl AdmissibleDensity {
    pub const ALL: [AdmissibleDensity; 3] = [Self::One, Self::ThreeHalves, Self::Tetrahedral];

    pub fn value(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::ThreeHalves => 1.5,
            Self::Tetrahedral => tetrahedral_density(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::One => "1",
            Self::ThreeHalves => "3/2",
            Self::Tetrahedral => "3·arccos(-1/3)/π",
        }
    }
}

/// 3·arccos(−1/3)/π, the density of the cone over the tetrahedral net.
pub fn tetrahedral_density() -> f64 {
    3.0 * (-1.0f64 / 3.0).acos() / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Admissible {
        value: AdmissibleDensity,
        residual: f64,
    },
    /// Θ ≥ 2 − tolerance: outside the range the admissible set covers.
    Unclassified,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Admissible { value, .. } => value.label(),
            Classification::Unclassified => ">=2 / unclassified",
        }
    }
}

/// Nearest admissible density. `ambient_dim` > 3 only admits {1, 3/2}.
pub fn classify_density_in(theta: f64, tolerance: f64, ambient_dim: usize) -> Result<Classification, DensityError> {
    if !(theta >= 0.5) {
        return Err(DensityError::NotADensity(theta));
    }
    if theta >= 2.0 - tolerance {
        return Ok(Classification::Unclassified);
    }
    let candidates: &[AdmissibleDensity] = if ambient_dim == 3 {
        &AdmissibleDensity::ALL
    } else {
        &AdmissibleDensity::ALL[..2]
    };
    let best = candidates
        .iter()
        .copied()
        .min_by(|a, b| (a.value() - theta).abs().total_cmp(&(b.value() - theta).abs()))
        .unwrap();
    if ambient_dim != 3 && (best.value() - theta).abs() > tolerance {
        return Ok(Classification::Unclassified);
    }
    Ok(Classification::Admissible {
        value: best,
        residual: (best.value() - theta).abs(),
    })
}

pub fn classify_density(theta: f64) -> Result<Classification, DensityError> {
    classify_density_in(theta, DensityOptions::default().tolerance, 3)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Largest radius in multiples of the mean edge length at x₀.
    pub r_max_factor: f64,
    /// Ladder ratio q (r_i = r_max qⁱ).
    pub ratio: f64,
    pub rungs: usize,
    /// Rungs below this multiple of the local edge length are dropped.
    pub min_rung_factor: f64,
    /// Maximum distance to the support, in multiples of the local edge length.
    pub support_tolerance: f64,
    /// Classification tolerance.
    pub tolerance: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            r_max_factor: 10.0,
            ratio: 0.5,
            rungs: 6,
            min_rung_factor: 0.25,
            support_tolerance: 0.5,
            tolerance: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// Θ + c r²: smooth sheets.
    Quadratic,
    /// Θ + c r: conical points.
    Linear,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DensityReport {
    pub center: Point,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub theta: f64,
    pub error: f64,
    pub model: FitModel,
    pub classification: Option<Classification>,
    pub dropped_rungs: usize,
    pub local_edge_length: f64,
}

/// Least-squares fit of y = Θ + c xᵖ; returns (Θ, rms residual).
fn fit(radii: &[f64], ratios: &[f64], power: i32) -> (f64, f64) {
    let n = radii.len() as f64;
    let xs: Vec<f64> = radii.iter().map(|r| r.powi(power)).collect();
    let mx = sum(xs.iter().copied()) / n;
    let my = sum(ratios.iter().copied()) / n;
    let sxx = sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = sum(xs.iter().zip(ratios).map(|(x, y)| (x - mx) * (y - my)));
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let theta = my - c * mx;
    let rss = sum(xs.iter().zip(ratios).map(|(x, y)| (y - theta - c * x).powi(2)));
    (theta, (rss / n).sqrt())
}

/// Θ²(μ, x₀) from mass ratios on a geometric radius ladder.
pub fn density(v: &DiscreteVarifold, x0: &Point) -> Result<DensityReport, DensityError> {
    density_with(v, x0, &DensityOptions::default())
}

pub fn density_with(v: &DiscreteVarifold, x0: &Point, opts: &DensityOptions) -> Result<DensityReport, DensityError> {
    let (_, face, dist) = v.closest_point(x0).ok_or(DensityError::Empty)?;
    let h = local_edge_length(v, face);
    let tolerance = opts.support_tolerance * h;
    if dist > tolerance {
        return Err(DensityError::OffSupport {
            distance: dist,
            tolerance,
        });
    }
    // balls reaching the boundary of the support would truncate the ratios
    let r_max = (opts.r_max_factor * h).min(boundary_distance(v, x0));
    let all: Vec<f64> = (0..opts.rungs).map(|i| r_max * opts.ratio.powi(i as i32)).collect();
    let floor = (opts.min_rung_factor * h).max(4.0 * dist);
    let radii: Vec<f64> = all.iter().copied().filter(|&r| r >= floor).collect();
    let dropped = all.len() - radii.len();
    if dropped > 0 {
        log::warn!("{dropped} radius rungs below mesh resolution dropped");
    }
    if radii.len() < 2 {
        return Err(DensityError::LadderTooShort);
    }
    let ratios: Vec<f64> = radii.par_iter().map(|&r| mass_ratio(v, x0, r)).collect();
    let (t2, res2) = fit(&radii, &ratios, 2);
    let (t1, res1) = fit(&radii, &ratios, 1);
    let (theta, model) = if res2 <= res1 {
        (t2, FitModel::Quadratic)
    } else {
        (t1, FitModel::Linear)
    };
    let theta = theta.max(0.0);
    let classification = classify_density_in(theta, opts.tolerance, 3).ok();
    Ok(DensityReport {
        center: *x0,
        radii,
        ratios,
        theta,
        error: 0.5 * (t2 - t1).abs(),
        model,
        classification,
        dropped_rungs: dropped,
        local_edge_length: h,
    })
}

/// Distance from `x0` to the boundary edges of `v` (∞ when closed).
fn boundary_distance(v: &DiscreteVarifold, x0: &Point) -> f64 {
    let topo = v.edge_topology();
    topo.boundary_edges()
        .into_iter()
        .map(|e| {
            let [i, j] = topo.edges()[e];
            let (a, b) = (v.vertices()[i], v.vertices()[j]);
            let d = b - a;
            let t = ((x0 - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
            (a + t * d - x0).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Mean length of the edges at the vertices of `face`.
fn local_edge_length(v: &DiscreteVarifold, face: usize) -> f64 {
    let [a, b, c] = v.face_points(face);
    ((a - b).norm() + (b - c).norm() + (c - a).norm()) / 3.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MonotonicityReport {
    pub center: Point,
    pub r: f64,
    pub s: f64,
    /// μ(B_r)/πr².
    pub lhs: f64,
    /// μ(B_s)/πs² + (1/16π)∫_{B_s}|H|².
    pub rhs: f64,
    pub curvature_term: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// μ(B_r)/πr² ≤ μ(B_s)/πs² + (1/16π)∫_{B_s}|H|² dμ, with slack ≥ −tolerance.
pub fn monotonicity_check(
    v: &DiscreteVarifold,
    x0: &Point,
    r: f64,
    s: f64,
    tolerance: f64,
) -> Result<MonotonicityReport, DensityError> {
    let field = mean_curvature(v);
    monotonicity_check_with(v, &field, x0, r, s, tolerance)
}

/// As [`monotonicity_check`], reusing a precomputed curvature field.
pub fn monotonicity_check_with(
    v: &DiscreteVarifold,
    field: &crate::curvature::CurvatureField,
    x0: &Point,
    r: f64,
    s: f64,
    tolerance: f64,
) -> Result<MonotonicityReport, DensityError> {
    if !(r > 0.0 && r < s) {
        return Err(DensityError::BadRadii(r, s));
    }
    let h2 = sum((0..v.vertex_count())
        .filter(|&i| field.class[i].in_energy() && (v.vertices()[i] - x0).norm() < s)
        .map(|i| field.mean_curvature[i].norm_squared() * field.vertex_area[i]));
    let lhs = mass_ratio(v, x0, r);
    let curvature_term = h2 / (16.0 * PI);
    let rhs = mass_ratio(v, x0, s) + curvature_term;
    let slack = rhs - lhs;
    Ok(MonotonicityReport {
        center: *x0,
        r,
        s,
        lhs,
        rhs,
        curvature_term,
        slack,
        tolerance,
        pass: slack >= -tolerance,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LiYauReport {
    pub densities: Vec<DensityReport>,
    pub theta_max: f64,
    pub argmax: usize,
    pub willmore: f64,
    pub willmore_over_4pi: f64,
    /// Θ_max − W/4π; the inequality holds when this is ≤ tolerance.
    pub excess: f64,
    /// |Θ_max − W/4π|, small when equality is attained.
    pub equality_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// max Θ over the sample points against W/4π.
pub fn li_yau_check(v: &DiscreteVarifold, samples: &[Point], tolerance: f64) -> Result<LiYauReport, DensityError> {
    if samples.is_empty() {
        return Err(DensityError::Empty);
    }
    let densities = samples
        .iter()
        .map(|p| density(v, p))
        .collect::<Result<Vec<_>, _>>()?;
    let (argmax, theta_max) = densities
        .iter()
        .enumerate()
        .map(|(i, d)| (i, d.theta))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let willmore = willmore_from(&mean_curvature(v));
    let w4 = willmore / (4.0 * PI);
    let excess = theta_max - w4;
    Ok(LiYauReport {
        densities,
        theta_max,
        argmax,
        willmore,
        willmore_over_4pi: w4,
        excess,
        equality_gap: excess.abs(),
        tolerance,
        pass: excess <= tolerance,
    })
}
