//! Convex bodies Ω, lattice windows and lattice-point counting.

pub mod constants;
pub mod lattice;
pub mod omega;
mod polytope;

pub use constants::{fit_constants, sandwich_holds};
pub use lattice::{count_lattice, critical_radii, enumerate_ball, BallProfile, LatticeCounter, LatticeWindow, Point};
pub use omega::{GeometricConstants, OmegaDescriptor, OmegaSpec, PExponent};
