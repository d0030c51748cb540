//! Exact centered maximal function `Mf(n) = sup_r A_r|f|(n)`.
//!
//! The partial sum `S(r) = sum_{m ∈ Ω̄_r(n)} |f(m)|` only changes at gauge distances of
//! support points, and on each such cell the average is largest at the left end, where
//! `N(r)` is smallest. Scanning support keys in order and stopping once
//! `‖f‖₁ / N(r)` drops below the best average found gives the exact supremum.

use super::{RadiusSet, TIE_TOL};
use crate::error::Result;
use crate::function::SparseFunction;
use crate::geometry::{LatticeCounter, LatticeWindow, OmegaSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct CenteredValue {
    pub value: f64,
    pub radii: RadiusSet,
    /// `Mf(n)` minus the largest average over radii outside the realizing set.
    pub margin: f64,
}

/// Reusable evaluator: keeps `|f|`, its norm and a lattice counter sized for a window.
#[derive(Clone, Debug)]
pub struct CenteredOperator {
    omega: OmegaSpec,
    points: Vec<Vec<i64>>,
    weights: Vec<f64>,
    l1: f64,
    counter: LatticeCounter,
}

impl CenteredOperator {
    /// `reach` is the region of centers that will be queried; it sizes the count table.
    pub fn new(f: &SparseFunction, omega: &OmegaSpec, reach: Option<&LatticeWindow>) -> Result<Self> {
        if f.dim() != omega.dim() {
            return Err(crate::Error::DimensionMismatch { expected: omega.dim(), got: f.dim() });
        }
        let (points, weights): (Vec<_>, Vec<_>) =
            f.iter().map(|(p, v)| (p.clone(), v.abs())).unzip();
        let r_table = match (f.hull(), reach) {
            (Some(h), Some(w)) => max_gauge_between(omega, &h, w),
            (Some(h), None) => max_gauge_between(omega, &h, &h),
            _ => 1.0,
        };
        Ok(Self {
            omega: omega.clone(),
            points,
            weights,
            l1: f.l1_norm(),
            counter: LatticeCounter::new(omega, r_table + 1.0),
        })
    }

    pub fn omega(&self) -> &OmegaSpec {
        &self.omega
    }

    pub fn counter(&self) -> &LatticeCounter {
        &self.counter
    }

    /// Support keys relative to `n`, sorted, with equal keys merged.
    fn groups(&self, n: &[i64]) -> Vec<(f64, f64)> {
        let mut keyed: Vec<(f64, f64)> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(m, &w)| {
                let v: Vec<i64> = m.iter().zip(n).map(|(a, b)| a - b).collect();
                (self.omega.lattice_key(&v), w)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut groups: Vec<(f64, f64)> = Vec::with_capacity(keyed.len());
        for (k, w) in keyed {
            match groups.last_mut() {
                Some(last) if k - last.0 <= self.omega.key_tolerance(last.0) => last.1 += w,
                _ => groups.push((k, w)),
            }
        }
        groups
    }

    pub fn eval(&self, n: &[i64]) -> CenteredValue {
        if self.points.is_empty() {
            return CenteredValue {
                value: 0.0,
                radii: RadiusSet { radii: vec![0.0], min_radius: 0.0, every_radius: true },
                margin: f64::INFINITY,
            };
        }
        let groups = self.groups(n);

        // cumulative sums and averages at the left end of every support cell
        let mut cells: Vec<(f64, f64, f64)> = Vec::new(); // (key, cum, average)
        let mut cum = 0.0;
        let mut best = 0.0f64;
        for &(key, w) in &groups {
            let count = self.counter.count_key(key) as f64;
            if self.l1 / count < best * (1.0 - TIE_TOL) {
                break;
            }
            cum += w;
            let avg = cum / count;
            best = best.max(avg);
            cells.push((key, cum, avg));
        }

        let threshold = best * (1.0 - TIE_TOL);
        let realizing: Vec<f64> = cells
            .iter()
            .filter(|c| c.2 >= threshold)
            .map(|c| self.omega.key_to_radius(c.0))
            .collect();

        // second-largest average over every radius outside the realizing cells
        let mut second = if groups[0].0 > 0.0 { 0.0 } else { f64::NEG_INFINITY };
        for (i, &(key, cum, avg)) in cells.iter().enumerate() {
            if avg < threshold {
                second = second.max(avg);
            } else {
                let next = self.counter.next_key_after(key);
                let next_support = groups.get(i + 1).map(|g| g.0);
                if next_support.is_none_or(|s| next < s - self.omega.key_tolerance(s)) {
                    second = second.max(cum / self.counter.count_key(next) as f64);
                }
            }
        }
        // keep scanning past the truncation point until nothing can beat `second`
        let mut cum_tail = cells.last().map_or(0.0, |c| c.1);
        for &(key, w) in groups.iter().skip(cells.len()) {
            let count = self.counter.count_key(key) as f64;
            if self.l1 / count <= second {
                break;
            }
            cum_tail += w;
            second = second.max(cum_tail / count);
        }
        let second = second.max(0.0);

        CenteredValue {
            value: best,
            radii: RadiusSet {
                min_radius: realizing[0],
                radii: realizing,
                every_radius: false,
            },
            margin: best - second,
        }
    }
}

/// Largest gauge distance between a point of `a` and a point of `b`.
pub(crate) fn max_gauge_between(omega: &OmegaSpec, a: &LatticeWindow, b: &LatticeWindow) -> f64 {
    let d = omega.dim();
    let mut best = 0.0f64;
    for mask_a in 0..1usize << d {
        for mask_b in 0..1usize << d {
            let v: Vec<f64> = (0..d)
                .map(|i| {
                    let x = if mask_a >> i & 1 == 1 { a.hi[i] } else { a.lo[i] };
                    let y = if mask_b >> i & 1 == 1 { b.hi[i] } else { b.lo[i] };
                    (x - y) as f64
                })
                .collect();
            best = best.max(omega.gauge(&v));
        }
    }
    best
}

/// `Mf(n)` together with its realizing radii.
pub fn centered_maximal_at(f: &SparseFunction, omega: &OmegaSpec, n: &[i64]) -> Result<CenteredValue> {
    if n.len() != omega.dim() {
        return Err(crate::Error::DimensionMismatch { expected: omega.dim(), got: n.len() });
    }
    let reach = LatticeWindow { lo: n.to_vec(), hi: n.to_vec() };
    Ok(CenteredOperator::new(f, omega, Some(&reach))?.eval(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_profile() {
        let omega = OmegaSpec::cube(1);
        let f = SparseFunction::delta(vec![0]);
        for n in -20i64..=20 {
            let v = centered_maximal_at(&f, &omega, &[n]).unwrap();
            assert!((v.value - 1.0 / (2 * n.abs() + 1) as f64).abs() < 1e-15);
            assert_eq!(v.radii.min_radius, n.abs() as f64);
        }
    }

    #[test]
    fn delta_in_the_plane() {
        let v = centered_maximal_at(&SparseFunction::delta(vec![0, 0]), &OmegaSpec::cube(2), &[2, 1]).unwrap();
        assert!((v.value - 1.0 / 25.0).abs() < 1e-15);
        assert_eq!(v.radii.radii, vec![2.0]);
    }

    #[test]
    fn zero_function() {
        let v = centered_maximal_at(&SparseFunction::zero(2), &OmegaSpec::euclidean(2), &[3, 0]).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.radii.radii, vec![0.0]);
        assert!(v.radii.every_radius);
    }

    #[test]
    fn margin_of_delta() {
        // at n = 0: best radius 0 (value 1), next best radius 1 (value 1/3)
        let v = centered_maximal_at(&SparseFunction::delta(vec![0]), &OmegaSpec::cube(1), &[0]).unwrap();
        assert!((v.margin - 2.0 / 3.0).abs() < 1e-15);
        // at n = 2: radius 2 gives 1/5, radius 3 gives 1/7, radii < 2 give 0
        let v = centered_maximal_at(&SparseFunction::delta(vec![0]), &OmegaSpec::cube(1), &[2]).unwrap();
        assert!((v.margin - (1.0 / 5.0 - 1.0 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn ties_are_all_reported() {
        // f = δ_{-1} + δ_1 + 2δ_3 at n = 0: r=1 gives 2/3, r=3 gives 4/7 < 2/3
        let f = SparseFunction::from_entries(1, [(vec![-1], 1.0), (vec![1], 1.0), (vec![3], 2.0)]).unwrap();
        let v = centered_maximal_at(&f, &OmegaSpec::cube(1), &[0]).unwrap();
        assert_eq!(v.radii.radii, vec![1.0]);
        // f = δ_0 + 3δ_1: r=0 → 1, r=1 → 4/3
        let f = SparseFunction::from_entries(1, [(vec![0], 1.0), (vec![1], 3.0), (vec![-3], 2.0)]).unwrap();
        let v = centered_maximal_at(&f, &OmegaSpec::cube(1), &[0]).unwrap();
        assert!((v.value - 4.0 / 3.0).abs() < 1e-15);
        // tie: δ_0 + 2δ_1 gives r=0 → 1 and r=1 → 1
        let f = SparseFunction::from_entries(1, [(vec![0], 1.0), (vec![1], 2.0)]).unwrap();
        let v = centered_maximal_at(&f, &OmegaSpec::cube(1), &[0]).unwrap();
        assert_eq!(v.radii.radii, vec![0.0, 1.0]);
        assert_eq!(v.radii.min_radius, 0.0);
    }
}
