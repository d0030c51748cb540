//! H-representation helpers for convex polytopes `{x : a_i . x <= b_i}`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

const EPS: f64 = 1e-12;

/// Box half-width used to detect unbounded directions during vertex enumeration.
const FAR_BOX: f64 = 1e7;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct HalfSpaces {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl HalfSpaces {
    pub fn dim(&self) -> usize {
        self.normals.first().map_or(0, Vec::len)
    }

    /// `max_i (a_i . x) / b_i`, clamped at zero. Requires all offsets positive.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| dot(a, x) / b)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|b| b * factor).collect(),
        }
    }

    fn feasible(&self, x: &[f64]) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, b)| dot(a, x) <= b + 1e-9 * b.abs().max(1.0))
    }

    /// All vertices, deduplicated. Solves every `d`-subset of active constraints.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        vertices_of(&self.normals, &self.offsets, |x| self.feasible(x))
    }

    /// True when the recession cone `{v : A v <= 0}` is trivial.
    pub fn is_bounded(&self) -> bool {
        let d = self.dim();
        let mut normals = self.normals.clone();
        let mut offsets = self.offsets.clone();
        for axis in 0..d {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; d];
                e[axis] = sign;
                normals.push(e);
                offsets.push(FAR_BOX);
            }
        }
        let boxed = HalfSpaces { normals, offsets };
        let verts = boxed.vertices();
        !verts.is_empty()
            && verts
                .iter()
                .all(|v| v.iter().all(|c| c.abs() < 0.5 * FAR_BOX))
    }

    /// Lasserre's recursive facet formula.
    pub fn volume(&self) -> f64 {
        let rows: Vec<(Vec<f64>, f64)> = self
            .normals
            .iter()
            .cloned()
            .zip(self.offsets.iter().copied())
            .collect();
        lasserre(rows, self.dim())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vertices_of(
    normals: &[Vec<f64>],
    offsets: &[f64],
    feasible: impl Fn(&[f64]) -> bool,
) -> Vec<Vec<f64>> {
    let d = normals.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for subset in (0..normals.len()).combinations(d) {
        let a = DMatrix::from_fn(d, d, |i, j| normals[subset[i]][j]);
        let b = DVector::from_iterator(d, subset.iter().map(|&i| offsets[i]));
        let Some(x) = a.lu().solve(&b) else { continue };
        let x: Vec<f64> = x.iter().copied().collect();
        if x.iter().any(|c| !c.is_finite()) || !feasible(&x) {
            continue;
        }
        let dup = out
            .iter()
            .any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9));
        if !dup {
            out.push(x);
        }
    }
    out
}

fn normalize_rows(rows: Vec<(Vec<f64>, f64)>) -> Option<Vec<(Vec<f64>, f64)>> {
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows.len());
    for (a, b) in rows {
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < EPS {
            if b < -1e-10 {
                return None;
            }
            continue;
        }
        let a: Vec<f64> = a.iter().map(|x| x / norm).collect();
        let b = b / norm;
        let dup = kept.iter().any(|(ka, kb)| {
            (kb - b).abs() < 1e-10 && ka.iter().zip(&a).all(|(p, q)| (p - q).abs() < 1e-10)
        });
        if !dup {
            kept.push((a, b));
        }
    }
    Some(kept)
}

fn lasserre(rows: Vec<(Vec<f64>, f64)>, dim: usize) -> f64 {
    let Some(rows) = normalize_rows(rows) else {
        return 0.0;
    };
    if dim == 1 {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (a, b) in &rows {
            if a[0] > 0.0 {
                hi = hi.min(b / a[0]);
            } else {
                lo = lo.max(b / a[0]);
            }
        }
        return (hi - lo).max(0.0);
    }
    let mut total = 0.0;
    for (i, (ai, bi)) in rows.iter().enumerate() {
        let pivot = (0..dim)
            .max_by(|&p, &q| ai[p].abs().total_cmp(&ai[q].abs()))
            .expect("dim >= 1");
        let apj = ai[pivot];
        let projected: Vec<(Vec<f64>, f64)> = rows
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, (ar, br))| {
                let factor = ar[pivot] / apj;
                let a: Vec<f64> = (0..dim)
                    .filter(|&l| l != pivot)
                    .map(|l| ar[l] - factor * ai[l])
                    .collect();
                (a, br - factor * bi)
            })
            .collect();
        let facet = lasserre(projected, dim - 1);
        total += bi / apj.abs() * facet;
    }
    total / dim as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(d: usize) -> HalfSpaces {
        let mut normals = Vec::new();
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; d];
                a[i] = s;
                normals.push(a);
            }
        }
        HalfSpaces { offsets: vec![1.0; 2 * d], normals }
    }

    fn cross(d: usize) -> HalfSpaces {
        let normals: Vec<Vec<f64>> = (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        HalfSpaces { offsets: vec![1.0; normals.len()], normals }
    }

    #[test]
    fn cube_volumes() {
        for d in 1..=4 {
            let v = cube(d).volume();
            assert!((v - f64::powi(2.0, d as i32)).abs() < 1e-9, "d={d} v={v}");
        }
    }

    #[test]
    fn cross_polytope_volumes() {
        assert!((cross(2).volume() - 2.0).abs() < 1e-9);
        assert!((cross(3).volume() - 8.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_and_duplicate_rows_do_not_change_volume() {
        let mut p = cube(2);
        p.normals.push(vec![1.0, 0.0]);
        p.offsets.push(1.0);
        p.normals.push(vec![1.0, 1.0]);
        p.offsets.push(5.0);
        assert!((p.volume() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn off_center_triangle() {
        // x >= -1, y >= -1, x + y <= 1: right triangle with legs 3
        let p = HalfSpaces {
            normals: vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
            offsets: vec![1.0, 1.0, 1.0],
        };
        assert!((p.volume() - 4.5).abs() < 1e-9);
        assert_eq!(p.vertices().len(), 3);
        assert!(p.is_bounded());
    }

    #[test]
    fn detects_unbounded() {
        let p = HalfSpaces {
            normals: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]],
            offsets: vec![1.0, 1.0, 1.0],
        };
        assert!(!p.is_bounded());
        assert!(cube(3).is_bounded());
    }

    #[test]
    fn gauge_of_cube_is_max_norm() {
        let c = cube(2);
        assert_eq!(c.gauge(&[2.0, -3.0]), 3.0);
        assert_eq!(c.gauge(&[0.0, 0.0]), 0.0);
    }
}
