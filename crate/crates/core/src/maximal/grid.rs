use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::centered::CenteredOperator;
use super::noncentered::{NonCenteredOperator, NonCenteredOptions};
use super::{RadiusSet, Variant};
use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{LatticeWindow, OmegaSpec, Point};

/// Largest number of grid points evaluated in one call.
pub const DEFAULT_GRID_BUDGET: u128 = 1 << 25;

/// Dense values on a window, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub window: LatticeWindow,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn zeros(window: LatticeWindow) -> Self {
        let len = window.len() as usize;
        Self { window, values: vec![0.0; len] }
    }

    pub fn get(&self, n: &[i64]) -> Option<f64> {
        self.window.index_of(n).map(|i| self.values[i])
    }

    /// Values along `axis` through the window, with the other coordinates fixed to `through`.
    pub fn line(&self, through: &[i64], axis: usize) -> Vec<f64> {
        let mut p = through.to_vec();
        (self.window.lo[axis]..=self.window.hi[axis])
            .map(|x| {
                p[axis] = x;
                self.get(&p).expect("line stays inside the window")
            })
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.window.points().zip(self.values.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    pub variant: Variant,
    pub noncentered: NonCenteredOptions,
    pub budget: u128,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Centered,
            noncentered: NonCenteredOptions::default(),
            budget: DEFAULT_GRID_BUDGET,
        }
    }
}

pub(crate) fn check_budget(window: &LatticeWindow, budget: u128) -> Result<()> {
    let points = window.len();
    if points > budget {
        return Err(Error::WindowTooLarge { points, budget });
    }
    Ok(())
}

/// The maximal function on every point of `window`.
pub fn maximal_grid(
    f: &SparseFunction,
    omega: &OmegaSpec,
    window: &LatticeWindow,
    variant: Variant,
) -> Result<Grid> {
    maximal_grid_with(f, omega, window, &GridOptions { variant, ..GridOptions::default() })
}

pub fn maximal_grid_with(
    f: &SparseFunction,
    omega: &OmegaSpec,
    window: &LatticeWindow,
    options: &GridOptions,
) -> Result<Grid> {
    if window.dim() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), got: window.dim() });
    }
    check_budget(window, options.budget)?;
    let len = window.len() as usize;
    let values: Vec<f64> = match options.variant {
        Variant::Centered => {
            let op = CenteredOperator::new(f, omega, Some(window))?;
            (0..len).into_par_iter().map(|i| op.eval(&window.point_at(i)).value).collect()
        }
        Variant::Noncentered => {
            let op = NonCenteredOperator::new(f, omega, options.noncentered, Some(window))?;
            (0..len).into_par_iter().map(|i| op.eval(&window.point_at(i)).value).collect()
        }
    };
    Ok(Grid { window: window.clone(), values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionRow {
    pub point: Point,
    pub included: bool,
    /// Gap between `Mf(n)` and the next best average of `f`.
    pub margin: f64,
    pub radii_f: RadiusSet,
    pub radii_g: RadiusSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub rows: Vec<InclusionRow>,
    pub all_included: bool,
    pub min_margin: f64,
}

/// Checks `R g(n) ⊆ R f(n)` for every `n` in the window (centered operator).
pub fn radius_set_inclusion(
    f: &SparseFunction,
    g: &SparseFunction,
    omega: &OmegaSpec,
    window: &LatticeWindow,
) -> Result<InclusionReport> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: g.dim() });
    }
    check_budget(window, DEFAULT_GRID_BUDGET)?;
    let op_f = CenteredOperator::new(f, omega, Some(window))?;
    let op_g = CenteredOperator::new(g, omega, Some(window))?;
    let rows: Vec<InclusionRow> = (0..window.len() as usize)
        .into_par_iter()
        .map(|i| {
            let n = window.point_at(i);
            let vf = op_f.eval(&n);
            let vg = op_g.eval(&n);
            InclusionRow {
                included: vg.radii.is_subset_of(&vf.radii),
                margin: vf.margin,
                radii_f: vf.radii,
                radii_g: vg.radii,
                point: n,
            }
        })
        .collect();
    let all_included = rows.iter().all(|r| r.included);
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(InclusionReport { rows, all_included, min_margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_grids() {
        let omega = OmegaSpec::cube(1);
        let f = SparseFunction::delta(vec![0]);
        let g = maximal_grid(&f, &omega, &LatticeWindow::centered(3, 1), Variant::Centered).unwrap();
        let expected = [1.0 / 7.0, 0.2, 1.0 / 3.0, 1.0, 1.0 / 3.0, 0.2, 1.0 / 7.0];
        for (a, b) in g.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let w = LatticeWindow::new(vec![0], vec![3]).unwrap();
        let g = maximal_grid(&f, &omega, &w, Variant::Noncentered).unwrap();
        for (a, b) in g.values.iter().zip([1.0, 0.5, 1.0 / 3.0, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_function_grid() {
        let g = maximal_grid(&SparseFunction::zero(2), &OmegaSpec::cross(2), &LatticeWindow::centered(2, 2), Variant::Centered)
            .unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = GridOptions { budget: 10, ..GridOptions::default() };
        let err = maximal_grid_with(&SparseFunction::delta(vec![0, 0]), &OmegaSpec::cube(2), &LatticeWindow::centered(2, 2), &opts);
        assert!(matches!(err, Err(Error::WindowTooLarge { points: 25, budget: 10 })));
    }

    #[test]
    fn inclusion_examples() {
        let omega = OmegaSpec::cube(1);
        let f = SparseFunction::delta(vec![0]);
        let w = LatticeWindow::centered(2, 1);
        assert!(radius_set_inclusion(&f, &f, &omega, &w).unwrap().all_included);
        let g = f.plus(&SparseFunction::delta(vec![5]).scaled(1e-9)).unwrap();
        assert!(radius_set_inclusion(&f, &g, &omega, &w).unwrap().all_included);
        let only = LatticeWindow::centered(0, 1);
        let g = SparseFunction::delta(vec![5]);
        assert!(!radius_set_inclusion(&f, &g, &omega, &only).unwrap().all_included);
    }
}
