//! Centered and non-centered discrete maximal operators.

mod centered;
mod grid;
mod noncentered;

use serde::{Deserialize, Serialize};

pub use centered::{centered_maximal_at, CenteredOperator, CenteredValue};
pub use grid::{
    maximal_grid, maximal_grid_with, radius_set_inclusion, Grid, GridOptions, InclusionReport,
    InclusionRow, DEFAULT_GRID_BUDGET,
};
pub use noncentered::{
    noncentered_is_exact, noncentered_maximal_at, NonCenteredOperator, NonCenteredOptions,
    NonCenteredValue,
};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{count_lattice, LatticeCounter, OmegaSpec};

/// Relative tolerance under which two averages count as equal.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Centered,
    #[serde(alias = "non-centered")]
    Noncentered,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "centered" => Ok(Variant::Centered),
            "noncentered" | "non-centered" | "uncentered" => Ok(Variant::Noncentered),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Centered => "centered",
            Variant::Noncentered => "noncentered",
        })
    }
}

/// Radii realizing `Mf(n)`. Each entry is the left end of a lattice cell `[r, r⁺)` on
/// which the average is maximal; `min_radius` is the smallest realizing radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSet {
    pub radii: Vec<f64>,
    pub min_radius: f64,
    /// Set for `f ≡ 0`, where every radius realizes the supremum.
    pub every_radius: bool,
}

impl RadiusSet {
    /// `self ⊆ other`, comparing radii to a relative tolerance.
    pub fn is_subset_of(&self, other: &RadiusSet) -> bool {
        if other.every_radius {
            return true;
        }
        if self.every_radius {
            return false;
        }
        self.radii.iter().all(|r| {
            other
                .radii
                .iter()
                .any(|s| (r - s).abs() <= TIE_TOL * r.abs().max(s.abs()).max(1.0))
        })
    }
}

/// Pairs `(x0, r)` whose balls contain `n` and attain `M̃f(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSet {
    pub pairs: Vec<(Vec<f64>, f64)>,
}

/// `A_r|f|(x0) = (1/N(x0, r)) Σ_{m ∈ Ω̄_r(x0)} |f(m)|`.
pub fn average(f: &SparseFunction, omega: &OmegaSpec, x0: &[f64], r: f64) -> Result<f64> {
    if x0.len() != omega.dim() || f.dim() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), got: x0.len() });
    }
    let integral = x0.iter().all(|c| c.fract() == 0.0);
    let count = if integral {
        LatticeCounter::new(omega, r).count_radius(r)
    } else {
        count_lattice(omega, x0, r)
    };
    if count == 0 {
        return Err(Error::EmptyBall { center: x0.to_vec(), radius: r });
    }
    let sum: f64 = f
        .iter()
        .filter(|(m, _)| omega.contains(m, x0, r))
        .map(|(_, v)| v.abs())
        .sum();
    Ok(sum / count as f64)
}
