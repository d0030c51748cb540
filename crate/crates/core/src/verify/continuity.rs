//! Perturbation experiment: `f_k = f + p_k` with `‖p_k‖₁ ↓ 0`, tracking the gradient gap,
//! the gap of gradient norms, and inclusion of realizing radius sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{LatticeWindow, OmegaSpec};
use crate::maximal::{maximal_grid, radius_set_inclusion, Grid, Variant};
use crate::regularity::{axis_l1_norm, gradient_norm, partial_derivative, GradientOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityOptions {
    /// Window on which `‖∇Mf_k − ∇Mf‖₁` is summed.
    pub gap_window: LatticeWindow,
    /// Window on which radius sets are compared.
    pub inclusion_window: LatticeWindow,
    /// Required size of the last gap.
    pub tolerance: f64,
}

impl ContinuityOptions {
    pub fn around(f: &SparseFunction, gap_margin: i64, inclusion_half: i64, tolerance: f64) -> Self {
        let d = f.dim();
        let hull = f.hull().unwrap_or_else(|| LatticeWindow::centered(0, d));
        Self {
            gap_window: hull.expanded(gap_margin),
            inclusion_window: LatticeWindow::centered(inclusion_half, d),
            tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub k: usize,
    pub l1: f64,
    pub linf: f64,
    /// `Σ_i ‖∂_i Mf_k − ∂_i Mf‖₁` on the gap window.
    pub gap: f64,
    /// `|‖∂_d Mf_k‖₁ − ‖∂_d Mf‖₁|` for the last axis; over Z in `d = 1`, on the gap
    /// window otherwise.
    pub norm_gap: f64,
    pub included: bool,
    pub past_k0: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub options: ContinuityOptions,
    pub rows: Vec<ContinuityRow>,
    /// `min_n ε(n)` over the inclusion window.
    pub min_margin: f64,
    /// First index after which every perturbation has sup norm below `min_margin / 3`.
    pub k0: Option<usize>,
    /// Whether the norm gaps come from exact full-lattice norms.
    pub norms_exact: bool,
    pub final_gap: f64,
    pub inclusion_past_k0: bool,
    pub pass: bool,
}

/// Norms must decrease strictly; a run of zero perturbations is allowed.
pub fn validate_schedule(schedule: &[SparseFunction]) -> Result<()> {
    for (i, w) in schedule.windows(2).enumerate() {
        let (a, b) = (w[0].l1_norm(), w[1].l1_norm());
        if b > a || (b == a && a > 0.0) {
            return Err(Error::Schedule { index: i + 1 });
        }
    }
    Ok(())
}

/// `‖∂_d Mf‖₁`: over all of Z in `d = 1`, on the gap window (already in `grid`) otherwise.
fn last_axis_norm(f: &SparseFunction, omega: &OmegaSpec, grid: &Grid) -> Result<(f64, bool)> {
    let d = omega.dim();
    if d == 1 {
        let g = gradient_norm(f, omega, &GradientOptions::default())?;
        return Ok((g.by_axis[0], g.exact));
    }
    Ok((axis_l1_norm(grid, d - 1), false))
}

fn gradient_gap(a: &Grid, b: &Grid) -> Result<f64> {
    let mut total = 0.0;
    for axis in 0..a.window.dim() {
        let da = partial_derivative(a, axis)?;
        let db = partial_derivative(b, axis)?;
        total += da.values.iter().zip(&db.values).map(|(x, y)| (x - y).abs()).sum::<f64>();
    }
    Ok(total)
}

pub fn continuity_experiment(
    f: &SparseFunction,
    schedule: &[SparseFunction],
    omega: &OmegaSpec,
    options: &ContinuityOptions,
) -> Result<ContinuityReport> {
    for p in schedule {
        if p.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: p.dim() });
        }
    }
    validate_schedule(schedule)?;

    let base_grid = maximal_grid(f, omega, &options.gap_window, Variant::Centered)?;
    let (base_norm, base_exact) = last_axis_norm(f, omega, &base_grid)?;
    let base_inclusion = radius_set_inclusion(f, f, omega, &options.inclusion_window)?;
    let min_margin = base_inclusion.min_margin;
    let threshold = min_margin / 3.0;
    let k0 = (0..=schedule.len()).find(|&k| schedule[k..].iter().all(|p| p.linf_norm() < threshold));

    let mut norms_exact = base_exact;
    let mut rows = Vec::with_capacity(schedule.len());
    for (k, p) in schedule.iter().enumerate() {
        let fk = f.plus(p)?;
        let grid = maximal_grid(&fk, omega, &options.gap_window, Variant::Centered)?;
        let gap = gradient_gap(&grid, &base_grid)?;
        let (norm, exact) = last_axis_norm(&fk, omega, &grid)?;
        norms_exact &= exact;
        let included = radius_set_inclusion(f, &fk, omega, &options.inclusion_window)?.all_included;
        rows.push(ContinuityRow {
            k: k + 1,
            l1: p.l1_norm(),
            linf: p.linf_norm(),
            gap,
            norm_gap: (norm - base_norm).abs(),
            included,
            past_k0: k0.is_some_and(|k0| k >= k0),
        });
    }
    let final_gap = rows.last().map_or(0.0, |r| r.gap);
    let inclusion_past_k0 = rows.iter().filter(|r| r.past_k0).all(|r| r.included);
    Ok(ContinuityReport {
        options: options.clone(),
        pass: final_gap <= options.tolerance && inclusion_past_k0,
        rows,
        min_margin,
        k0: k0.map(|k| k + 1),
        norms_exact,
        final_gap,
        inclusion_past_k0,
    })
}

/// The schedule `p_k = 2^{−k} δ_point`, `k = 1..=steps`.
pub fn geometric_schedule(point: &[i64], steps: usize) -> Vec<SparseFunction> {
    (1..=steps)
        .map(|k| SparseFunction::delta(point.to_vec()).scaled(0.5f64.powi(k as i32)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_validation() {
        let s = geometric_schedule(&[0], 4);
        assert!(validate_schedule(&s).is_ok());
        let zeros = vec![SparseFunction::zero(1); 3];
        assert!(validate_schedule(&zeros).is_ok());
        let bad = vec![SparseFunction::delta(vec![0]), SparseFunction::delta(vec![1])];
        assert!(matches!(validate_schedule(&bad), Err(Error::Schedule { index: 1 })));
    }

    #[test]
    fn zero_perturbations_give_zero_gaps() {
        let f = SparseFunction::delta(vec![0]);
        let zeros = vec![SparseFunction::zero(1); 3];
        let opts = ContinuityOptions::around(&f, 20, 5, 1e-12);
        let rep = continuity_experiment(&f, &zeros, &OmegaSpec::cube(1), &opts).unwrap();
        assert!(rep.rows.iter().all(|r| r.gap == 0.0 && r.norm_gap == 0.0 && r.included));
        assert!(rep.pass);
    }

    #[test]
    fn delta_with_distant_perturbation() {
        let f = SparseFunction::delta(vec![0]);
        let opts = ContinuityOptions::around(&f, 200, 2, 1e-6);
        let rep = continuity_experiment(&f, &geometric_schedule(&[5], 25), &OmegaSpec::cube(1), &opts).unwrap();
        assert!(rep.final_gap < 1e-6);
        assert!(rep.rows.windows(2).all(|w| w[1].gap <= w[0].gap));
        assert!(rep.pass);
    }
}
