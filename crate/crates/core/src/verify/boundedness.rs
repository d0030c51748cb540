//! Certified upper bounds for `‖∇Mf‖₁ / ‖f‖₁` and their comparison with `2 Σ_i C̃_i`.
//!
//! In `d = 1` the gradient norm is computed exactly. For `d >= 2` the support is placed in
//! a Euclidean ball `B_R(c)`; the gradient is summed exactly on the cube `|n − c|_∞ ≤ 2R`
//! and the remainder along each axis is bounded by
//! `2‖f‖₁ [3h(R) + 2(4R+1)^{d−1} / (C(λ⁻¹R − c₁)^d)]`, where `h(R) = Σ_{|n| ≥ R} ψ(|n|)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::summability::{c_tilde_bound, psi_tail, CTilde, SummabilityConstants};
use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{LatticeWindow, OmegaSpec};
use crate::maximal::{
    maximal_grid_with, noncentered_is_exact, Grid, GridOptions, NonCenteredOptions, Variant,
    DEFAULT_GRID_BUDGET,
};
use crate::random::{trial_rng, RandomFamily};
use crate::regularity::{gradient_norm, GradientOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessOptions {
    pub variant: Variant,
    pub noncentered: NonCenteredOptions,
    /// Smallest ball radius `R` used for `d >= 2`.
    pub min_radius: i64,
    /// Box truncation `T` for `C̃`.
    pub c_tilde_truncation: i64,
    pub budget: u128,
}

impl Default for BoundednessOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Centered,
            noncentered: NonCenteredOptions::default(),
            min_radius: 32,
            c_tilde_truncation: 1000,
            budget: DEFAULT_GRID_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisConstants {
    pub axis: usize,
    pub constants: SummabilityConstants,
    pub c_tilde: CTilde,
}

/// Constants shared by every certificate for one body and variant.
#[derive(Clone, Debug)]
pub struct BoundednessContext {
    omega: OmegaSpec,
    options: BoundednessOptions,
    axes: Vec<AxisConstants>,
    bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessCertificate {
    pub l1: f64,
    /// Gradient norm summed exactly (on the window for `d >= 2`, on Z for `d = 1`).
    pub gradient_norm: f64,
    /// Certified majorant of the part outside the window.
    pub tail: f64,
    /// `gradient_norm / l1`, a lower bound for the true ratio.
    pub ratio: f64,
    /// `(gradient_norm + tail) / l1`, an upper bound for the true ratio.
    pub ratio_upper: f64,
    pub bound: f64,
    pub radius: Option<i64>,
    pub window: LatticeWindow,
    /// False when the non-centered operator is only approximated on a center grid.
    pub exact: bool,
    pub pass: bool,
}

impl BoundednessContext {
    pub fn new(omega: &OmegaSpec, options: BoundednessOptions) -> Result<Self> {
        let axes = (0..omega.dim())
            .map(|axis| {
                let body = omega.normalized_along(axis)?;
                let constants = SummabilityConstants::for_variant(&body, options.variant);
                let c_tilde = c_tilde_bound(&constants, options.c_tilde_truncation)?;
                Ok(AxisConstants { axis, constants, c_tilde })
            })
            .collect::<Result<Vec<_>>>()?;
        let bound = 2.0 * axes.iter().map(|a| a.c_tilde.total).sum::<f64>();
        Ok(Self { omega: omega.clone(), options, axes, bound })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn axes(&self) -> &[AxisConstants] {
        &self.axes
    }

    pub fn omega(&self) -> &OmegaSpec {
        &self.omega
    }

    pub fn options(&self) -> &BoundednessOptions {
        &self.options
    }

    fn exact_operator(&self) -> bool {
        self.options.variant == Variant::Centered || noncentered_is_exact(&self.omega)
    }

    pub fn certify(&self, f: &SparseFunction) -> Result<BoundednessCertificate> {
        if f.dim() != self.omega.dim() {
            return Err(Error::DimensionMismatch { expected: self.omega.dim(), got: f.dim() });
        }
        if f.is_zero() {
            return Err(Error::InvalidInput("certificate needs a nonzero function".into()));
        }
        let l1 = f.l1_norm();
        if self.omega.dim() == 1 {
            let opts = GradientOptions {
                variant: self.options.variant,
                noncentered: self.options.noncentered,
                budget: self.options.budget,
                ..GradientOptions::default()
            };
            let g = gradient_norm(f, &self.omega, &opts)?;
            let ratio = g.value / l1;
            return Ok(BoundednessCertificate {
                l1,
                gradient_norm: g.value,
                tail: 0.0,
                ratio,
                ratio_upper: ratio,
                bound: self.bound,
                radius: None,
                window: g.window,
                exact: self.exact_operator(),
                pass: ratio <= self.bound,
            });
        }
        self.certify_ball(f, l1)
    }

    fn certify_ball(&self, f: &SparseFunction, l1: f64) -> Result<BoundednessCertificate> {
        let d = self.omega.dim();
        let hull = f.hull().expect("nonzero function");
        let center: Vec<i64> = hull.lo.iter().zip(&hull.hi).map(|(a, b)| (a + b).div_euclid(2)).collect();
        let support_radius = f
            .iter()
            .map(|(p, _)| p.iter().zip(&center).map(|(a, b)| ((a - b) as f64).powi(2)).sum::<f64>().sqrt())
            .fold(0.0f64, f64::max)
            .ceil() as i64;
        let mut r = support_radius.max(self.options.min_radius).max(1);
        while self.axes.iter().any(|a| r as f64 / a.constants.lambda <= a.constants.c2) {
            r += 1;
        }

        let window = LatticeWindow {
            lo: center.iter().map(|c| c - 2 * r).collect(),
            hi: center.iter().map(|c| c + 2 * r + 1).collect(),
        };
        let opts = GridOptions {
            variant: self.options.variant,
            noncentered: self.options.noncentered,
            budget: self.options.budget,
        };
        let grid = maximal_grid_with(f, &self.omega, &window, &opts)?;
        let inner = LatticeWindow {
            lo: window.lo.clone(),
            hi: center.iter().map(|c| c + 2 * r).collect(),
        };
        let gradient_norm: f64 = (0..d).map(|axis| inner_axis_sum(&grid, &inner, axis)).sum();

        let mut tail = 0.0;
        for a in &self.axes {
            let c = &a.constants;
            let h = psi_tail(c, r as f64, 4 * r)?;
            let edge = (4 * r + 1) as f64;
            let far = edge.powi(d as i32 - 1)
                / (c.volume * (r as f64 / c.lambda - c.c1).powi(d as i32));
            tail += 2.0 * l1 * (3.0 * h + 2.0 * far);
        }
        let ratio = gradient_norm / l1;
        let ratio_upper = (gradient_norm + tail) / l1;
        Ok(BoundednessCertificate {
            l1,
            gradient_norm,
            tail,
            ratio,
            ratio_upper,
            bound: self.bound,
            radius: Some(r),
            window,
            exact: self.exact_operator(),
            pass: ratio_upper <= self.bound,
        })
    }
}

/// `Σ |g(n + e_axis) − g(n)|` over `n` in `inner`, which sits inside the grid window with
/// one spare slice on the upper side of every axis.
fn inner_axis_sum(grid: &Grid, inner: &LatticeWindow, axis: usize) -> f64 {
    let shape = grid.window.shape();
    let stride: usize = shape[axis + 1..].iter().product();
    inner
        .points()
        .map(|p| {
            let i = grid.window.index_of(&p).expect("inner window");
            (grid.values[i + stride] - grid.values[i]).abs()
        })
        .sum()
}

pub fn boundedness_certificate(
    f: &SparseFunction,
    omega: &OmegaSpec,
    options: BoundednessOptions,
) -> Result<BoundednessCertificate> {
    BoundednessContext::new(omega, options)?.certify(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub trial: u64,
    pub support_size: usize,
    pub l1: f64,
    pub gradient_norm: f64,
    pub ratio: f64,
    pub ratio_upper: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dim: usize,
    pub variant: Variant,
    pub seed: u64,
    pub family: RandomFamily,
    pub c_tilde: Vec<AxisConstants>,
    pub bound: f64,
    pub rows: Vec<SweepRow>,
    pub max_ratio: f64,
    pub max_ratio_upper: f64,
    pub all_pass: bool,
}

/// Certificates for `trials` random functions; trial `t` uses stream `t` of `seed`.
pub fn boundedness_sweep(
    ctx: &BoundednessContext,
    family: &RandomFamily,
    trials: u64,
    seed: u64,
) -> Result<SweepReport> {
    let d = ctx.omega.dim();
    let rows: Vec<SweepRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let f = family.sample(d, &mut trial_rng(seed, trial));
            let c = ctx.certify(&f)?;
            Ok(SweepRow {
                trial,
                support_size: f.support_size(),
                l1: c.l1,
                gradient_norm: c.gradient_norm,
                ratio: c.ratio,
                ratio_upper: c.ratio_upper,
                pass: c.pass,
            })
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let max_ratio_upper = rows.iter().map(|r| r.ratio_upper).fold(0.0, f64::max);
    Ok(SweepReport {
        dim: d,
        variant: ctx.options.variant,
        seed,
        family: *family,
        c_tilde: ctx.axes.clone(),
        bound: ctx.bound,
        all_pass: rows.iter().all(|r| r.pass),
        rows,
        max_ratio,
        max_ratio_upper,
    })
}
