//! Brute-force oracles. They use only the gauge and plain loops over boxes, never the
//! counting tables or pruned enumeration of the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use maxlab::{trial_rng, OmegaSpec, SparseFunction};
use rand::Rng;

pub const TOL: f64 = 1e-12;

fn inside(omega: &OmegaSpec, m: &[i64], x0: &[f64], r: f64) -> bool {
    let v: Vec<f64> = m.iter().zip(x0).map(|(&a, b)| a as f64 - b).collect();
    omega.gauge(&v) <= r * (1.0 + 1e-12) + 1e-12
}

/// Every lattice point of the box `x0 ± (λ r + 1)` visited in row-major order.
fn box_points(omega: &OmegaSpec, x0: &[f64], r: f64) -> Vec<Vec<i64>> {
    let reach = omega.lambda() * r + 1.0;
    let ranges: Vec<(i64, i64)> = x0.iter().map(|c| ((c - reach).floor() as i64, (c + reach).ceil() as i64)).collect();
    let mut out = vec![vec![]];
    for (lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| (lo..=hi).map(move |x| {
                let mut q = p.clone();
                q.push(x);
                q
            }))
            .collect();
    }
    out
}

pub fn brute_count(omega: &OmegaSpec, x0: &[f64], r: f64) -> u64 {
    box_points(omega, x0, r).iter().filter(|m| inside(omega, m, x0, r)).count() as u64
}

pub fn brute_average(f: &SparseFunction, omega: &OmegaSpec, x0: &[f64], r: f64) -> Option<f64> {
    let count = brute_count(omega, x0, r);
    if count == 0 {
        return None;
    }
    let sum: f64 = f.iter().filter(|(m, _)| inside(omega, m, x0, r)).map(|(_, v)| v.abs()).sum();
    Some(sum / count as f64)
}

fn gauge_to(omega: &OmegaSpec, m: &[i64], x0: &[f64]) -> f64 {
    let v: Vec<f64> = m.iter().zip(x0).map(|(&a, b)| a as f64 - b).collect();
    omega.gauge(&v)
}

/// `Mf(n)` by averaging at every critical radius: the gauge distance to each support
/// point, and zero.
pub fn brute_centered(f: &SparseFunction, omega: &OmegaSpec, n: &[i64]) -> f64 {
    let x0: Vec<f64> = n.iter().map(|&c| c as f64).collect();
    let mut radii: Vec<f64> = f.iter().map(|(m, _)| gauge_to(omega, m, &x0)).collect();
    radii.push(0.0);
    radii
        .into_iter()
        .filter_map(|r| brute_average(f, omega, &x0, r))
        .fold(0.0, f64::max)
}

/// `M̃f(n)` in `d = 1`: every integer interval containing `n` is a ball, so maximize over
/// all intervals inside a range that covers `n` and the support.
pub fn brute_noncentered_line(f: &SparseFunction, n: i64) -> f64 {
    let (lo, hi) = f
        .iter()
        .fold((n, n), |(lo, hi), (p, _)| (lo.min(p[0]), hi.max(p[0])));
    let mut best = 0.0f64;
    for p in lo - 1..=n {
        for q in n..=hi + 1 {
            let sum: f64 = f.iter().filter(|(m, _)| (p..=q).contains(&m[0])).map(|(_, v)| v.abs()).sum();
            best = best.max(sum / (q - p + 1) as f64);
        }
    }
    best
}

/// `M̃f(n)` for the cube: balls with centers and radii on the half-integer grid, over a
/// range covering `n` and the support.
pub fn brute_noncentered_cube(f: &SparseFunction, omega: &OmegaSpec, n: &[i64]) -> f64 {
    let d = n.len();
    let hull = f.hull().expect("nonzero");
    let lo: Vec<i64> = (0..d).map(|i| hull.lo[i].min(n[i]) - 1).collect();
    let hi: Vec<i64> = (0..d).map(|i| hull.hi[i].max(n[i]) + 1).collect();
    let span = (0..d).map(|i| hi[i] - lo[i]).max().unwrap_or(0) + 1;
    let mut centers = vec![vec![]];
    for i in 0..d {
        centers = centers
            .into_iter()
            .flat_map(|c: Vec<f64>| (2 * lo[i]..=2 * hi[i]).map(move |h| {
                let mut c = c.clone();
                c.push(h as f64 / 2.0);
                c
            }))
            .collect();
    }
    let nf: Vec<f64> = n.iter().map(|&c| c as f64).collect();
    let mut best = 0.0f64;
    for x0 in &centers {
        let need = omega.gauge(&nf.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
        for h in 0..=2 * span {
            let r = h as f64 / 2.0;
            if r + 1e-12 < need {
                continue;
            }
            if let Some(a) = brute_average(f, omega, x0, r) {
                best = best.max(a);
            }
        }
    }
    best
}

/// Random function with `1..=max_support` points in `[-w, w]^d`, values in `[-1, 1] \ {0}`.
pub fn random_small<R: Rng>(rng: &mut R, d: usize, max_support: usize, w: i64) -> SparseFunction {
    let size = rng.random_range(1..=max_support);
    let mut pts = BTreeSet::new();
    while pts.len() < size {
        pts.insert((0..d).map(|_| rng.random_range(-w..=w)).collect::<Vec<i64>>());
    }
    let mut f = SparseFunction::zero(d);
    for p in pts {
        let mut v: f64 = rng.random_range(-1.0..1.0);
        if v == 0.0 {
            v = 0.5;
        }
        f.set(p, v).unwrap();
    }
    f
}

pub fn instance(seed: u64, trial: u64, d: usize, max_support: usize, w: i64) -> SparseFunction {
    random_small(&mut trial_rng(seed, trial), d, max_support, w)
}

pub fn bodies(d: usize) -> Vec<OmegaSpec> {
    if d == 1 {
        vec![OmegaSpec::cube(1)]
    } else {
        vec![OmegaSpec::cube(d), OmegaSpec::cross(d), OmegaSpec::euclidean(d)]
    }
}
