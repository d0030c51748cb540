//! Discrete maximal operators over dilates of a convex body on Z^d, and numerical checks
//! of their endpoint regularity.

pub mod error;
pub mod function;
pub mod geometry;
pub mod maximal;
pub mod numeric;
pub mod random;
pub mod regularity;
pub mod verify;

pub use error::{Error, Result};
pub use function::SparseFunction;
pub use geometry::{LatticeWindow, OmegaDescriptor, OmegaSpec, PExponent};
pub use maximal::{Grid, Variant};
pub use random::{trial_rng, RandomFamily};
