//! Discrete integral 2-varifolds: curvature energies, densities, blow-up
//! links, spherical geodesic nets and boundary conormal integrals.

pub mod boundary;
pub mod curvature;
pub mod density;
pub mod generators;
pub mod mesh;
pub mod nets;
pub mod sum;

pub use mesh::{DiscreteVarifold, MeshError, Point, Vec3};
