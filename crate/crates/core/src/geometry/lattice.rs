//! Lattice points of Z^d, rectangular windows, and lattice-point counts in Ω-balls.

use serde::{Deserialize, Serialize};

use super::omega::{OmegaSpec, Shape, MEMBERSHIP_TOL};
use crate::error::{Error, Result};

pub type Point = Vec<i64>;

/// Inclusive box `lo <= n <= hi` in Z^d, iterated row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeWindow {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl LatticeWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidWindow(format!(
                "bounds of dimension {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidWindow(format!("empty window {lo:?}..{hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// `[-half, half]^d`.
    pub fn centered(half: i64, d: usize) -> Self {
        Self { lo: vec![-half; d], hi: vec![half; d] }
    }

    /// Parses `a:b` (applied to every axis) or `a:b,c:d,...`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for part in &parts {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidWindow(format!("expected lo:hi, got {part:?}")))?;
            let a: i64 = a.trim().parse().map_err(|_| Error::InvalidWindow(format!("bad bound {a:?}")))?;
            let b: i64 = b.trim().parse().map_err(|_| Error::InvalidWindow(format!("bad bound {b:?}")))?;
            lo.push(a);
            hi.push(b);
        }
        if parts.len() == 1 {
            lo = vec![lo[0]; d];
            hi = vec![hi[0]; d];
        } else if parts.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: parts.len() });
        }
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as usize).collect()
    }

    pub fn len(&self) -> u128 {
        self.shape().iter().map(|&s| s as u128).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        n.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let shape = self.shape();
        let mut idx = 0usize;
        for i in 0..n.len() {
            idx = idx * shape[i] + (n[i] - self.lo[i]) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Point {
        let shape = self.shape();
        let mut p = vec![0; shape.len()];
        for i in (0..shape.len()).rev() {
            p[i] = self.lo[i] + (idx % shape[i]) as i64;
            idx /= shape[i];
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len() as usize).map(move |i| self.point_at(i))
    }

    /// The window with `hi[axis]` lowered by one: the domain of a forward difference.
    pub fn shrink_upper(&self, axis: usize) -> Result<Self> {
        let mut hi = self.hi.clone();
        hi[axis] -= 1;
        Self::new(self.lo.clone(), hi)
    }

    /// Smallest window containing both.
    pub fn union(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect(),
        }
    }

    pub fn expanded(&self, by: i64) -> Self {
        Self {
            lo: self.lo.iter().map(|a| a - by).collect(),
            hi: self.hi.iter().map(|a| a + by).collect(),
        }
    }
}

#[derive(Clone, Copy)]
enum Separable {
    Max,
    Sum,
    SumSq,
    SumPow(f64),
    Opaque,
}

impl Separable {
    fn of(omega: &OmegaSpec) -> Self {
        match omega.shape {
            Shape::Cube => Separable::Max,
            Shape::Cross => Separable::Sum,
            Shape::Euclid => Separable::SumSq,
            Shape::Lp(p) => Separable::SumPow(p),
            Shape::Polytope(_) => Separable::Opaque,
        }
    }

    fn term(self, t: f64) -> f64 {
        match self {
            Separable::Max | Separable::Sum => t.abs(),
            Separable::SumSq => t * t,
            Separable::SumPow(p) => t.abs().powf(p),
            Separable::Opaque => 0.0,
        }
    }

    fn combine(self, acc: f64, term: f64) -> f64 {
        match self {
            Separable::Max => acc.max(term),
            _ => acc + term,
        }
    }

    /// Bound on the accumulator implied by `key <= key_limit`.
    fn acc_limit(self, key_limit: f64) -> f64 {
        match self {
            Separable::SumPow(p) => key_limit.powf(p) * (1.0 + 1e-12),
            _ => key_limit,
        }
    }
}

/// Integer range of axis `i` that can meet `x0 + r Ω̄`.
fn axis_ranges(omega: &OmegaSpec, x0: &[f64], r: f64) -> Vec<(i64, i64)> {
    let slack = 1e-9 * r.max(1.0);
    omega
        .extents()
        .iter()
        .zip(x0)
        .map(|((lo, hi), c)| {
            ((c + r * lo - slack).ceil() as i64, (c + r * hi + slack).floor() as i64)
        })
        .collect()
}

/// Calls `visit(m, key)` for every lattice point of the closed ball `Ω̄_r(x0)`, where
/// `key = omega.real_key(m - x0)`.
pub(crate) fn for_each_in_ball(
    omega: &OmegaSpec,
    x0: &[f64],
    r: f64,
    visit: &mut dyn FnMut(&[i64], f64),
) {
    let ranges = axis_ranges(omega, x0, r);
    walk(omega, x0, &ranges, omega.key_limit(r), visit);
}

fn walk(
    omega: &OmegaSpec,
    x0: &[f64],
    ranges: &[(i64, i64)],
    key_limit: f64,
    visit: &mut dyn FnMut(&[i64], f64),
) {
    let sep = Separable::of(omega);
    let acc_limit = sep.acc_limit(key_limit);
    let d = ranges.len();
    let mut point = vec![0i64; d];
    let mut diff = vec![0f64; d];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        axis: usize,
        acc: f64,
        omega: &OmegaSpec,
        sep: Separable,
        x0: &[f64],
        ranges: &[(i64, i64)],
        key_limit: f64,
        acc_limit: f64,
        point: &mut [i64],
        diff: &mut [f64],
        visit: &mut dyn FnMut(&[i64], f64),
    ) {
        if axis == point.len() {
            let key = match sep {
                Separable::Max | Separable::Sum | Separable::SumSq => acc,
                _ => omega.real_key(diff),
            };
            if key <= key_limit {
                visit(point, key);
            }
            return;
        }
        let (lo, hi) = ranges[axis];
        for m in lo..=hi {
            let t = m as f64 - x0[axis];
            let next = sep.combine(acc, sep.term(t));
            if next > acc_limit {
                continue;
            }
            point[axis] = m;
            diff[axis] = t;
            rec(axis + 1, next, omega, sep, x0, ranges, key_limit, acc_limit, point, diff, visit);
        }
    }

    rec(0, 0.0, omega, sep, x0, ranges, key_limit, acc_limit, &mut point, &mut diff, visit);
}

/// All lattice points of the closed ball `Ω̄_r(x0)`.
pub fn enumerate_ball(omega: &OmegaSpec, x0: &[f64], r: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for_each_in_ball(omega, x0, r, &mut |m, _| out.push(m.to_vec()));
    out
}

/// `#(Ω̄_r(x0) ∩ Z^d)`.
pub fn count_lattice(omega: &OmegaSpec, x0: &[f64], r: f64) -> u64 {
    let mut n = 0u64;
    for_each_in_ball(omega, x0, r, &mut |_, _| n += 1);
    n
}

/// Radii at which `r ↦ Σ_{m ∈ Ω̄_r(x0)} f(m)` can change: gauge distances to the support,
/// plus `0` when `x0` is a lattice point. Sorted, with near-equal values merged.
pub fn critical_radii(omega: &OmegaSpec, x0: &[f64], support: &[Point]) -> Vec<f64> {
    let mut radii: Vec<f64> = support
        .iter()
        .map(|m| {
            let v: Vec<f64> = m.iter().zip(x0).map(|(&a, b)| a as f64 - b).collect();
            omega.gauge(&v)
        })
        .collect();
    if x0.iter().all(|c| c.fract() == 0.0) {
        radii.push(0.0);
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= MEMBERSHIP_TOL * a.abs().max(1.0));
    radii
}

/// Sorted distinct keys of lattice points around a fixed center, with cumulative
/// counts: `cum[i] = #{m : key(m - x0) <= keys[i]}`.
#[derive(Clone, Debug)]
pub struct BallProfile {
    keys: Vec<f64>,
    cum: Vec<u64>,
    key_max: f64,
    tol_exact: bool,
}

impl BallProfile {
    pub fn new(omega: &OmegaSpec, x0: &[f64], r_max: f64) -> Self {
        let mut raw: Vec<(f64, u64)> = Vec::new();
        let integral_center = x0.iter().all(|c| c.fract() == 0.0);
        let sign_symmetric = !matches!(omega.shape, Shape::Polytope(_));
        if integral_center && sign_symmetric {
            // one orthant, weighted by the number of sign patterns
            let ranges: Vec<(i64, i64)> = axis_ranges(omega, &vec![0.0; x0.len()], r_max)
                .into_iter()
                .map(|(_, hi)| (0, hi))
                .collect();
            let zero = vec![0.0; x0.len()];
            walk(omega, &zero, &ranges, omega.key_limit(r_max), &mut |m, key| {
                let nonzero = m.iter().filter(|&&c| c != 0).count();
                raw.push((key, 1u64 << nonzero));
            });
        } else {
            for_each_in_ball(omega, x0, r_max, &mut |_, key| raw.push((key, 1)));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut keys = Vec::new();
        let mut cum = Vec::new();
        let mut total = 0u64;
        for (key, w) in raw {
            total += w;
            if keys.last() == Some(&key) {
                *cum.last_mut().expect("parallel vectors") = total;
            } else {
                keys.push(key);
                cum.push(total);
            }
        }
        Self { keys, cum, key_max: omega.key_limit(r_max), tol_exact: omega.is_exact() }
    }

    pub fn keys(&self) -> &[f64] {
        &self.keys
    }

    pub fn cumulative(&self) -> &[u64] {
        &self.cum
    }

    /// Largest key covered by the table.
    pub fn key_max(&self) -> f64 {
        self.key_max
    }

    fn tol(&self, key: f64) -> f64 {
        if self.tol_exact {
            0.0
        } else {
            MEMBERSHIP_TOL * key.abs().max(1.0)
        }
    }

    /// Count of points with key at most `key`, or `None` beyond the table.
    pub fn count(&self, key: f64) -> Option<u64> {
        if key > self.key_max {
            return None;
        }
        let lim = key + self.tol(key);
        let i = self.keys.partition_point(|&k| k <= lim);
        Some(if i == 0 { 0 } else { self.cum[i - 1] })
    }

    /// Smallest tabulated key strictly larger than `key`.
    pub fn next_key_after(&self, key: f64) -> Option<f64> {
        let lim = key + self.tol(key);
        let i = self.keys.partition_point(|&k| k <= lim);
        self.keys.get(i).copied()
    }
}

/// Lattice counts `N(r) = #(Ω̄_r(n) ∩ Z^d)` for integer centers, which do not depend on `n`.
#[derive(Clone, Debug)]
pub struct LatticeCounter {
    omega: OmegaSpec,
    table: Option<BallProfile>,
}

impl LatticeCounter {
    /// Tabulates counts up to radius `r_table` (closed forms need no table).
    pub fn new(omega: &OmegaSpec, r_table: f64) -> Self {
        let table = match omega.shape {
            Shape::Cube | Shape::Cross => None,
            _ => Some(BallProfile::new(omega, &vec![0.0; omega.dim()], r_table.max(1.0))),
        };
        Self { omega: omega.clone(), table }
    }

    pub fn omega(&self) -> &OmegaSpec {
        &self.omega
    }

    /// Number of lattice points `v` with `lattice_key(v) <= key`.
    pub fn count_key(&self, key: f64) -> u64 {
        let d = self.omega.dim() as u32;
        match self.omega.shape {
            Shape::Cube => {
                let k = key.floor() as u128;
                (2 * k + 1).checked_pow(d).map_or(u64::MAX, |v| v.min(u64::MAX as u128) as u64)
            }
            Shape::Cross => cross_count(key.floor() as u64, d as u64),
            _ => {
                let table = self.table.as_ref().expect("table exists for tabulated shapes");
                match table.count(key) {
                    Some(n) => n,
                    None => {
                        let r = self.omega.key_to_radius(key);
                        count_lattice(&self.omega, &vec![0.0; self.omega.dim()], r)
                    }
                }
            }
        }
    }

    pub fn count_radius(&self, r: f64) -> u64 {
        match self.omega.shape {
            Shape::Cube | Shape::Cross => self.count_key((r + 1e-12 * r.max(1.0)).floor()),
            _ => self.count_key(self.omega.radius_to_key(r)),
        }
    }

    /// Smallest lattice key strictly above `key`: the next radius at which `N` jumps.
    pub fn next_key_after(&self, key: f64) -> f64 {
        match self.omega.shape {
            Shape::Cube | Shape::Cross => key.floor() + 1.0,
            _ => {
                let table = self.table.as_ref().expect("table exists for tabulated shapes");
                if let Some(k) = table.next_key_after(key) {
                    return k;
                }
                let mut r = self.omega.key_to_radius(key).max(1.0) * 1.5 + 1.0;
                loop {
                    let profile = BallProfile::new(&self.omega, &vec![0.0; self.omega.dim()], r);
                    if let Some(k) = profile.next_key_after(key) {
                        return k;
                    }
                    r *= 2.0;
                }
            }
        }
    }
}

/// `#{v in Z^d : |v|_1 <= k} = sum_i 2^i C(d, i) C(k, i)`.
fn cross_count(k: u64, d: u64) -> u64 {
    let mut total: u128 = 0;
    let mut binom_d: u128 = 1;
    let mut binom_k: u128 = 1;
    for i in 0..=d.min(k) {
        if i > 0 {
            binom_d = binom_d * (d - i + 1) as u128 / i as u128;
            binom_k = binom_k * (k - i + 1) as u128 / i as u128;
        }
        total = total.saturating_add((binom_d * binom_k).saturating_mul(1u128 << i));
    }
    total.min(u64::MAX as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::omega::PExponent;

    fn brute_count(omega: &OmegaSpec, x0: &[f64], r: f64) -> u64 {
        let b = (r * omega.lambda()).ceil() as i64 + 2;
        let w = LatticeWindow::new(
            x0.iter().map(|c| c.floor() as i64 - b).collect(),
            x0.iter().map(|c| c.ceil() as i64 + b).collect(),
        )
        .unwrap();
        w.points()
            .filter(|m| {
                let diff: Vec<f64> = m.iter().zip(x0).map(|(&a, c)| a as f64 - c).collect();
                omega.gauge(&diff) <= r * (1.0 + 1e-12)
            })
            .count() as u64
    }

    #[test]
    fn window_indexing_round_trips() {
        let w = LatticeWindow::new(vec![-1, 2], vec![1, 4]).unwrap();
        assert_eq!(w.len(), 9);
        for (i, p) in w.points().enumerate() {
            assert_eq!(w.index_of(&p), Some(i));
        }
        assert_eq!(w.point_at(1), vec![-1, 3]);
        assert!(LatticeWindow::new(vec![1], vec![0]).is_err());
    }

    #[test]
    fn window_parse() {
        assert_eq!(LatticeWindow::parse("-3:3", 2).unwrap(), LatticeWindow::centered(3, 2));
        let w = LatticeWindow::parse("0:1, -2:2", 2).unwrap();
        assert_eq!(w.lo, vec![0, -2]);
        assert!(LatticeWindow::parse("0:1,0:1,0:1", 2).is_err());
    }

    #[test]
    fn closed_form_counts_match_enumeration() {
        for d in 1..=4 {
            let cube = OmegaSpec::cube(d);
            let cross = OmegaSpec::cross(d);
            let cc = LatticeCounter::new(&cube, 1.0);
            let xc = LatticeCounter::new(&cross, 1.0);
            for k in 0..6 {
                let r = k as f64;
                assert_eq!(cc.count_radius(r), count_lattice(&cube, &vec![0.0; d], r));
                assert_eq!(xc.count_radius(r), count_lattice(&cross, &vec![0.0; d], r));
            }
        }
    }

    #[test]
    fn counts_match_brute_force() {
        let shapes = [
            OmegaSpec::euclidean(2),
            OmegaSpec::euclidean(3),
            OmegaSpec::lp(PExponent::Finite(3.0), 2).unwrap(),
            OmegaSpec::cross(3),
        ];
        for omega in &shapes {
            let d = omega.dim();
            let counter = LatticeCounter::new(omega, 6.0);
            for &r in &[0.0, 0.5, 1.0, 2f64.sqrt(), 2.2, 3.0, 5.0, 7.5] {
                let zero = vec![0.0; d];
                assert_eq!(counter.count_radius(r), brute_count(omega, &zero, r), "r={r}");
                let x0: Vec<f64> = (0..d).map(|i| 0.3 + 0.25 * i as f64).collect();
                assert_eq!(count_lattice(omega, &x0, r), brute_count(omega, &x0, r));
            }
        }
    }

    #[test]
    fn euclidean_d2_known_values() {
        let omega = OmegaSpec::euclidean(2);
        let c = LatticeCounter::new(&omega, 10.0);
        // Gauss circle problem: N(1)=5, N(sqrt 2)=9, N(2)=13, N(5)=81
        assert_eq!(c.count_radius(1.0), 5);
        assert_eq!(c.count_radius(2f64.sqrt()), 9);
        assert_eq!(c.count_radius(2.0), 13);
        assert_eq!(c.count_radius(5.0), 81);
        assert_eq!(c.next_key_after(2.0), 4.0);
        assert_eq!(c.next_key_after(1e4), 10001.0);
    }

    #[test]
    fn profile_matches_counter() {
        let omega = OmegaSpec::euclidean(3);
        let p = BallProfile::new(&omega, &[0.0; 3], 4.0);
        let c = LatticeCounter::new(&omega, 2.0);
        for (&k, &n) in p.keys().iter().zip(p.cumulative()) {
            assert_eq!(c.count_key(k), n);
        }
    }
}
