//! Fitting the lattice-count constants `c1`, `c2`.
//!
//! `c1` must satisfy `C (r - c1)_+^d <= N(x0, r) <= C (r + c1)^d` for every center and
//! radius, where `C = vol(Ω)` and `N(x0, r) = #(Ω̄_r(x0) ∩ Z^d)`. Between consecutive
//! jump radii `N` is constant, so the supremum over `r` of both one-sided gaps is
//! reached at the ends of each cell and can be computed exactly from the sorted key
//! profile. Centers are sampled on a fixed sub-lattice grid of offsets in `[0, 1)^d`.

use itertools::Itertools;

use super::lattice::BallProfile;
use super::omega::OmegaSpec;
use crate::error::{Error, Result};

/// Grid on which `c1` is rounded up.
const ROUNDING: f64 = 1e-3;

/// Radius up to which `c1` is certified when the caller does not choose one.
pub fn default_certification_radius(omega: &OmegaSpec) -> f64 {
    if omega.dim() <= 2 {
        50.0
    } else {
        10.0 * omega.lambda()
    }
}

/// Center offsets used when fitting: quarter-integers for `d <= 3`, half-integers above.
pub fn sample_offsets(d: usize) -> Vec<Vec<f64>> {
    let steps: &[f64] = if d <= 3 { &[0.0, 0.25, 0.5, 0.75] } else { &[0.0, 0.5] };
    (0..d)
        .map(|_| steps.iter().copied())
        .multi_cartesian_product()
        .collect()
}

/// Smallest `c1` that makes the sandwich hold for one center up to `r_max`.
pub fn sandwich_deviation(omega: &OmegaSpec, x0: &[f64], r_max: f64) -> f64 {
    let vol = omega.volume();
    let inv_d = 1.0 / omega.dim() as f64;
    let profile = BallProfile::new(omega, x0, r_max);
    let radii: Vec<f64> = profile.keys().iter().map(|&k| omega.key_to_radius(k)).collect();
    let cum = profile.cumulative();
    let equivalent = |n: u64| (n as f64 / vol).powf(inv_d);

    // cell before the first lattice point: N = 0 on [0, rho_0)
    let mut worst = radii.first().copied().unwrap_or(r_max).min(r_max);
    for i in 0..radii.len() {
        let rho = radii[i];
        if rho > r_max {
            break;
        }
        let upper_end = radii.get(i + 1).copied().unwrap_or(r_max).min(r_max);
        let eq = equivalent(cum[i]);
        worst = worst.max(eq - rho).max(upper_end - eq);
    }
    worst
}

/// Certified `(c1, c2)` for radii up to `r_max`, rounded up to a `1e-3` grid.
pub fn fit_constants(omega: &OmegaSpec, r_max: f64) -> Result<(f64, f64)> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::ConstantFit { r_max });
    }
    let worst = sample_offsets(omega.dim())
        .iter()
        .map(|x0| sandwich_deviation(omega, x0, r_max))
        .fold(0.0, f64::max);
    if !worst.is_finite() || worst >= r_max {
        return Err(Error::ConstantFit { r_max });
    }
    let c1 = (((worst - 1e-9) / ROUNDING).ceil() * ROUNDING).max(ROUNDING);
    let c2 = c1 + omega.volume().powf(-1.0 / omega.dim() as f64);
    Ok((c1, c2))
}

/// True if the sandwich bound with the fitted `c1` holds at `(x0, r)`.
pub fn sandwich_holds(omega: &OmegaSpec, x0: &[f64], r: f64) -> bool {
    let n = super::lattice::count_lattice(omega, x0, r) as f64;
    let d = omega.dim() as i32;
    let c = omega.volume();
    let c1 = omega.c1();
    let lower = c * (r - c1).max(0.0).powi(d);
    let upper = c * (r + c1).powi(d);
    lower <= n * (1.0 + 1e-12) && n <= upper * (1.0 + 1e-12)
}
