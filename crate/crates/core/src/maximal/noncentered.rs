//! Non-centered maximal function `M̃f(n) = sup { A_{(x0, r)}|f| : n ∈ Ω̄_r(x0) }`.
//!
//! * `d = 1`: every ball meets Z in an integer interval and every integer interval is
//!   such an intersection, so the supremum is a maximum over intervals whose endpoints
//!   lie in `{n} ∪ supp f` (shrinking to those endpoints never lowers the average).
//! * cube, `d >= 2`: a cube ball meets Z^d in a box whose side lengths differ by at most
//!   one, and each such box is realized by a center and radius on the half-integer grid.
//!   Boxes are searched per side pattern with placements reduced to the breakpoints where
//!   the box content can change; sums come from a summed-area table.
//! * other bodies, `d >= 2`: centers on `(1/q) Z^d` with every critical radius, a lower
//!   approximation of the true value.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::centered::CenteredOperator;
use super::{BallSet, TIE_TOL};
use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{BallProfile, LatticeWindow, OmegaSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonCenteredOptions {
    /// Center refinement for the approximate mode.
    pub refinement: u32,
    /// Fail instead of approximating.
    pub require_exact: bool,
}

impl Default for NonCenteredOptions {
    fn default() -> Self {
        Self { refinement: 4, require_exact: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonCenteredValue {
    pub value: f64,
    pub balls: BallSet,
    /// False when the value is a lower approximation.
    pub exact: bool,
}

/// True when `noncentered_maximal_at` is exact for this body.
pub fn noncentered_is_exact(omega: &OmegaSpec) -> bool {
    omega.dim() == 1 || omega.is_cube()
}

#[derive(Clone, Debug)]
pub struct NonCenteredOperator {
    omega: OmegaSpec,
    options: NonCenteredOptions,
    f: SparseFunction,
    l1: f64,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Line { coords: Vec<i64>, prefix: Vec<f64>, left_reach: f64 },
    Boxes(BoxSums),
    Grid(CenterGrid),
    Zero,
}

impl NonCenteredOperator {
    pub fn new(
        f: &SparseFunction,
        omega: &OmegaSpec,
        options: NonCenteredOptions,
        reach: Option<&LatticeWindow>,
    ) -> Result<Self> {
        let d = omega.dim();
        if f.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: f.dim() });
        }
        if options.require_exact && !noncentered_is_exact(omega) {
            return Err(Error::ExactnessUnavailable { dim: d });
        }
        if options.refinement == 0 {
            return Err(Error::InvalidOmega("center refinement must be positive".into()));
        }
        let abs = f.abs();
        let kind = if abs.is_zero() {
            Kind::Zero
        } else if d == 1 {
            let coords: Vec<i64> = abs.iter().map(|(p, _)| p[0]).collect();
            let mut prefix = vec![0.0];
            for (_, v) in abs.iter() {
                prefix.push(prefix.last().expect("nonempty") + v);
            }
            // Ω = (-a, 1) after normalization; a = -extents.lo
            let left_reach = -omega.extents()[0].0;
            Kind::Line { coords, prefix, left_reach }
        } else if omega.is_cube() {
            Kind::Boxes(BoxSums::new(&abs))
        } else {
            Kind::Grid(CenterGrid::new(&abs, omega, options.refinement, reach)?)
        };
        Ok(Self { omega: omega.clone(), options, l1: abs.l1_norm(), f: abs, kind })
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, Kind::Grid(_))
    }

    pub fn eval(&self, n: &[i64]) -> NonCenteredValue {
        match &self.kind {
            Kind::Zero => NonCenteredValue {
                value: 0.0,
                balls: BallSet { pairs: vec![(n.iter().map(|&c| c as f64).collect(), 0.0)] },
                exact: true,
            },
            Kind::Line { coords, prefix, left_reach } => {
                line_eval(coords, prefix, *left_reach, n[0])
            }
            Kind::Boxes(sums) => sums.eval(n, self.l1, &self.f),
            Kind::Grid(grid) => grid.eval(n, self.l1),
        }
    }

    pub fn options(&self) -> NonCenteredOptions {
        self.options
    }

    pub fn omega(&self) -> &OmegaSpec {
        &self.omega
    }
}

fn line_eval(coords: &[i64], prefix: &[f64], left_reach: f64, n: i64) -> NonCenteredValue {
    // interval sums over [p, q] via prefix sums on the sorted support
    let sum = |p: i64, q: i64| {
        let i = coords.partition_point(|&c| c < p);
        let j = coords.partition_point(|&c| c <= q);
        prefix[j] - prefix[i]
    };
    let lefts: Vec<i64> = std::iter::once(n).chain(coords.iter().copied().filter(|&c| c < n)).collect();
    let rights: Vec<i64> = std::iter::once(n).chain(coords.iter().copied().filter(|&c| c > n)).collect();
    let mut best = 0.0f64;
    let mut cands: Vec<(i64, i64, f64)> = Vec::with_capacity(lefts.len() * rights.len());
    for &p in &lefts {
        for &q in &rights {
            let avg = sum(p, q) / (q - p + 1) as f64;
            best = best.max(avg);
            cands.push((p, q, avg));
        }
    }
    let threshold = best * (1.0 - TIE_TOL);
    let mut pairs: Vec<(Vec<f64>, f64)> = cands
        .into_iter()
        .filter(|c| c.2 >= threshold)
        .map(|(p, q, _)| {
            // [x0 - a r, x0 + r] = [p, q]
            let r = (q - p) as f64 / (1.0 + left_reach);
            (vec![q as f64 - r], r)
        })
        .collect();
    pairs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0[0].total_cmp(&b.0[0])));
    NonCenteredValue { value: best, balls: BallSet { pairs }, exact: true }
}

/// Summed-area table over the support hull.
#[derive(Clone, Debug)]
struct BoxSums {
    hull: LatticeWindow,
    shape: Vec<usize>,
    table: Vec<f64>,
    axis_coords: Vec<Vec<i64>>,
}

impl BoxSums {
    fn new(f: &SparseFunction) -> Self {
        let hull = f.hull().expect("nonzero function");
        let d = hull.dim();
        let shape: Vec<usize> = hull.shape().iter().map(|s| s + 1).collect();
        let len: usize = shape.iter().product();
        let mut table = vec![0.0; len];
        let stride = strides(&shape);
        for (p, v) in f.iter() {
            let idx: usize = (0..d).map(|i| (p[i] - hull.lo[i] + 1) as usize * stride[i]).sum();
            table[idx] += v;
        }
        for axis in 0..d {
            for idx in 0..len {
                if (idx / stride[axis]) % shape[axis] > 0 {
                    table[idx] += table[idx - stride[axis]];
                }
            }
        }
        let axis_coords = (0..d)
            .map(|i| {
                f.iter()
                    .map(|(p, _)| p[i])
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        Self { hull, shape, table, axis_coords }
    }

    /// Sum over the box `lo..=hi`, clipped to the hull.
    fn sum(&self, lo: &[i64], hi: &[i64]) -> f64 {
        let d = lo.len();
        let mut a = vec![0usize; d];
        let mut b = vec![0usize; d];
        for i in 0..d {
            let l = lo[i].max(self.hull.lo[i]);
            let h = hi[i].min(self.hull.hi[i]);
            if l > h {
                return 0.0;
            }
            a[i] = (l - self.hull.lo[i]) as usize; // exclusive corner in shifted coordinates
            b[i] = (h - self.hull.lo[i] + 1) as usize;
        }
        let stride = strides(&self.shape);
        let mut total = 0.0;
        for mask in 0..1usize << d {
            let mut idx = 0;
            let mut sign = 1.0;
            for i in 0..d {
                if mask >> i & 1 == 1 {
                    idx += a[i] * stride[i];
                    sign = -sign;
                } else {
                    idx += b[i] * stride[i];
                }
            }
            total += sign * self.table[idx];
        }
        total
    }

    /// Left ends `p` of windows `[p, p + len - 1]` containing `n` at which the set of
    /// support coordinates covered can change.
    fn placements(&self, axis: usize, n: i64, len: i64) -> Vec<i64> {
        let lo = n - len + 1;
        let mut out: BTreeSet<i64> = [lo, n].into_iter().collect();
        for &c in &self.axis_coords[axis] {
            for p in [c + 1, c - len + 1] {
                if (lo..=n).contains(&p) {
                    out.insert(p);
                }
            }
        }
        out.into_iter().collect()
    }

    fn eval(&self, n: &[i64], l1: f64, f: &SparseFunction) -> NonCenteredValue {
        let d = n.len();
        // the centered cube average at radius 0 is a valid starting bound
        let mut best = f.get(n);
        let mut found: Vec<(Vec<i64>, Vec<i64>, f64)> = vec![(n.to_vec(), n.to_vec(), best)];
        let mut s: i64 = 1;
        loop {
            // every box with smallest side s has at least s^d points
            if l1 / (s as f64).powi(d as i32) < best * (1.0 - TIE_TOL) {
                break;
            }
            for pattern in (0..d).map(|_| [s, s + 1]).multi_cartesian_product() {
                if !pattern.contains(&s) {
                    continue;
                }
                let count: f64 = pattern.iter().map(|&l| l as f64).product();
                if l1 / count < best * (1.0 - TIE_TOL) {
                    continue;
                }
                let per_axis: Vec<Vec<i64>> =
                    (0..d).map(|i| self.placements(i, n[i], pattern[i])).collect();
                for lo in per_axis.iter().map(|v| v.iter().copied()).multi_cartesian_product() {
                    let hi: Vec<i64> = lo.iter().zip(&pattern).map(|(p, l)| p + l - 1).collect();
                    let avg = self.sum(&lo, &hi) / count;
                    if avg >= best * (1.0 - TIE_TOL) {
                        best = best.max(avg);
                        found.push((lo, hi, avg));
                    }
                }
            }
            s += 1;
        }
        let threshold = best * (1.0 - TIE_TOL);
        let mut boxes: Vec<(Vec<i64>, Vec<i64>)> = found
            .into_iter()
            .filter(|b| b.2 >= threshold)
            .map(|b| (b.0, b.1))
            .collect();
        boxes.sort();
        boxes.dedup();
        let pairs = boxes.iter().map(|(lo, hi)| box_to_ball(lo, hi)).collect();
        NonCenteredValue { value: best, balls: BallSet { pairs }, exact: true }
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut stride = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * shape[i + 1];
    }
    stride
}

/// Center and radius of a cube ball whose lattice points are exactly the box `lo..=hi`
/// (side lengths in `{s, s + 1}`).
pub(crate) fn box_to_ball(lo: &[i64], hi: &[i64]) -> (Vec<f64>, f64) {
    let sides: Vec<i64> = lo.iter().zip(hi).map(|(a, b)| b - a + 1).collect();
    let s = *sides.iter().min().expect("d >= 1");
    if sides.iter().all(|&l| l == s) {
        let r = (s - 1) as f64 / 2.0;
        (lo.iter().map(|&p| p as f64 + r).collect(), r)
    } else {
        let r = s as f64 / 2.0;
        let center = lo
            .iter()
            .zip(&sides)
            .map(|(&p, &l)| if l == s + 1 { p as f64 + r } else { p as f64 + r - 0.5 })
            .collect();
        (center, r)
    }
}

/// Approximate search over centers on `(1/q) Z^d`.
#[derive(Clone, Debug)]
struct CenterGrid {
    omega: OmegaSpec,
    q: u32,
    support: Vec<(Vec<i64>, f64)>,
    centered: CenteredOperator,
    /// One profile per fractional offset `k / q`, indexed row-major.
    profiles: Vec<BallProfile>,
    profile_radius: f64,
    /// Max gauge over the corners of `[-1/2, 1/2]^d`.
    delta: f64,
}

impl CenterGrid {
    fn new(f: &SparseFunction, omega: &OmegaSpec, q: u32, reach: Option<&LatticeWindow>) -> Result<Self> {
        let d = omega.dim();
        let centered = CenteredOperator::new(f, omega, reach)?;
        let delta = (0..1usize << d)
            .map(|mask| {
                let v: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { 0.5 } else { -0.5 }).collect();
                omega.gauge(&v)
            })
            .fold(0.0, f64::max);
        let hull = f.hull().expect("nonzero function");
        let region = reach.map_or(hull.clone(), |w| w.union(&hull));
        let profile_radius = super::centered::max_gauge_between(omega, &region, &region) + 2.0 * delta + 1.0;
        let offsets: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..q).map(|k| k as f64 / q as f64))
            .multi_cartesian_product()
            .collect();
        let profiles = offsets
            .iter()
            .map(|x0| BallProfile::new(omega, x0, profile_radius))
            .collect();
        Ok(Self {
            omega: omega.clone(),
            q,
            support: f.iter().map(|(p, v)| (p.clone(), v)).collect(),
            centered,
            profiles,
            profile_radius,
            delta,
        })
    }

    fn count(&self, center_num: &[i64], key: f64) -> Option<u64> {
        // center = center_num / q; the profile depends on the fractional part only
        let q = self.q as i64;
        let mut idx = 0usize;
        for &c in center_num {
            idx = idx * self.q as usize + c.rem_euclid(q) as usize;
        }
        self.profiles[idx].count(key)
    }

    fn eval(&self, n: &[i64], l1: f64) -> NonCenteredValue {
        let d = n.len();
        let q = self.q as f64;
        let base = self.centered.eval(n);
        let mut best = base.value;
        let mut found: Vec<(Vec<f64>, f64, f64)> = base
            .radii
            .radii
            .iter()
            .map(|&r| (n.iter().map(|&c| c as f64).collect(), r, base.value))
            .collect();

        // beyond r_cap every ball holds more than ‖f‖₁ / best lattice points
        let counter = self.centered.counter();
        let mut key = 0.0;
        loop {
            if (l1 / counter.count_key(key) as f64) < best * (1.0 - TIE_TOL) {
                break;
            }
            key = counter.next_key_after(key);
        }
        let r_cap = (self.omega.key_to_radius(key) + self.delta).min(self.profile_radius);

        let ext = self.omega.extents();
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|i| {
                let lo = n[i] as f64 - r_cap * ext[i].1;
                let hi = n[i] as f64 - r_cap * ext[i].0;
                ((lo * q).floor() as i64, (hi * q).ceil() as i64)
            })
            .collect();

        let mut keyed: Vec<(f64, f64)> = Vec::with_capacity(self.support.len());
        let mut x0 = vec![0.0; d];
        let mut diff = vec![0.0; d];
        for center_num in ranges.iter().map(|&(a, b)| a..=b).multi_cartesian_product() {
            for i in 0..d {
                x0[i] = center_num[i] as f64 / q;
                diff[i] = n[i] as f64 - x0[i];
            }
            let key_n = self.omega.real_key(&diff);
            if self.omega.key_to_radius(key_n) > r_cap {
                continue;
            }
            // every ball through n at this center holds at least N(x0, |n - x0|) points
            match self.count(&center_num, key_n) {
                Some(c) if l1 / c as f64 >= best * (1.0 - TIE_TOL) => {}
                _ => continue,
            }
            keyed.clear();
            for (m, w) in &self.support {
                for i in 0..d {
                    diff[i] = m[i] as f64 - x0[i];
                }
                keyed.push((self.omega.real_key(&diff).max(key_n), *w));
            }
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cum = 0.0;
            let mut i = 0;
            while i < keyed.len() {
                let k = keyed[i].0;
                let tol = self.omega.key_tolerance(k);
                while i < keyed.len() && keyed[i].0 <= k + tol {
                    cum += keyed[i].1;
                    i += 1;
                }
                if self.omega.key_to_radius(k) > r_cap {
                    break;
                }
                let Some(count) = self.count(&center_num, k) else { break };
                let avg = cum / count as f64;
                if avg >= best * (1.0 - TIE_TOL) {
                    best = best.max(avg);
                    found.push((x0.clone(), self.omega.key_to_radius(k), avg));
                }
                if l1 / (count as f64) < best * (1.0 - TIE_TOL) {
                    break;
                }
            }
        }
        let threshold = best * (1.0 - TIE_TOL);
        let pairs = found
            .into_iter()
            .filter(|b| b.2 >= threshold)
            .map(|b| (b.0, b.1))
            .collect();
        NonCenteredValue { value: best, balls: BallSet { pairs }, exact: false }
    }
}

/// `M̃f(n)` with realizing balls.
pub fn noncentered_maximal_at(
    f: &SparseFunction,
    omega: &OmegaSpec,
    n: &[i64],
    options: NonCenteredOptions,
) -> Result<NonCenteredValue> {
    if n.len() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), got: n.len() });
    }
    let reach = LatticeWindow { lo: n.to_vec(), hi: n.to_vec() };
    Ok(NonCenteredOperator::new(f, omega, options, Some(&reach))?.eval(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::enumerate_ball;

    fn exact(f: &SparseFunction, omega: &OmegaSpec, n: &[i64]) -> NonCenteredValue {
        noncentered_maximal_at(f, omega, n, NonCenteredOptions { refinement: 4, require_exact: true }).unwrap()
    }

    #[test]
    fn delta_line() {
        let f = SparseFunction::delta(vec![0]);
        let omega = OmegaSpec::cube(1);
        for n in -10i64..=10 {
            let v = exact(&f, &omega, &[n]);
            assert!((v.value - 1.0 / (n.abs() + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_plane_cube() {
        let f = SparseFunction::delta(vec![0, 0]);
        let v = exact(&f, &OmegaSpec::cube(2), &[1, 0]);
        assert!((v.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn realizing_balls_contain_n_and_attain_the_value() {
        let f = SparseFunction::from_entries(
            2,
            [(vec![0, 0], 1.0), (vec![2, 1], 0.5), (vec![-1, 3], 2.0)],
        )
        .unwrap();
        let omega = OmegaSpec::cube(2);
        for n in [[0, 0], [1, 1], [4, -2], [-1, 2]] {
            let v = exact(&f, &omega, &n);
            assert!(!v.balls.pairs.is_empty());
            for (x0, r) in &v.balls.pairs {
                let pts = enumerate_ball(&omega, x0, *r);
                assert!(pts.iter().any(|p| p == &n.to_vec()));
                let avg = pts.iter().map(|p| f.get(p)).sum::<f64>() / pts.len() as f64;
                assert!((avg - v.value).abs() <= 1e-12 * v.value);
            }
        }
    }

    #[test]
    fn box_realization() {
        for (lo, hi) in [
            (vec![0, 0], vec![0, 1]),
            (vec![-2, 3], vec![1, 5]),
            (vec![1, 1, 1], vec![3, 3, 3]),
            (vec![0, 0, 0], vec![3, 2, 3]),
        ] {
            let (x0, r) = box_to_ball(&lo, &hi);
            let mut pts = enumerate_ball(&OmegaSpec::cube(lo.len()), &x0, r);
            pts.sort();
            let w = LatticeWindow::new(lo.clone(), hi.clone()).unwrap();
            let expected: Vec<Vec<i64>> = w.points().collect();
            assert_eq!(pts, expected, "{lo:?}..{hi:?}");
        }
    }

    #[test]
    fn exactness_request_is_enforced() {
        let f = SparseFunction::delta(vec![0, 0]);
        let err = noncentered_maximal_at(
            &f,
            &OmegaSpec::euclidean(2),
            &[1, 0],
            NonCenteredOptions { refinement: 4, require_exact: true },
        );
        assert!(matches!(err, Err(Error::ExactnessUnavailable { dim: 2 })));
    }

    #[test]
    fn approximation_dominates_centered_and_refines() {
        let f = SparseFunction::from_entries(2, [(vec![0, 0], 1.0), (vec![3, 1], 1.0)]).unwrap();
        let omega = OmegaSpec::euclidean(2);
        let n = [1, 1];
        let c = super::super::centered_maximal_at(&f, &omega, &n).unwrap().value;
        let v2 = noncentered_maximal_at(&f, &omega, &n, NonCenteredOptions { refinement: 2, require_exact: false }).unwrap();
        let v4 = noncentered_maximal_at(&f, &omega, &n, NonCenteredOptions { refinement: 4, require_exact: false }).unwrap();
        assert!(!v4.exact);
        assert!(v2.value >= c);
        assert!(v4.value >= v2.value);
    }
}
