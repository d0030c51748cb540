//! Finitely supported functions on Z^d.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatticeWindow, Point};

/// `f : Z^d -> R` with finite support. Zero values are never stored.
/// Serializes as `{"dim": d, "entries": [[point, value], ...]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "SparseRepr", try_from = "SparseRepr")]
pub struct SparseFunction {
    dim: usize,
    entries: BTreeMap<Point, f64>,
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    dim: usize,
    entries: Vec<(Point, f64)>,
}

impl From<SparseFunction> for SparseRepr {
    fn from(f: SparseFunction) -> Self {
        Self { dim: f.dim, entries: f.entries.into_iter().collect() }
    }
}

impl TryFrom<SparseRepr> for SparseFunction {
    type Error = Error;

    fn try_from(r: SparseRepr) -> Result<Self> {
        if r.dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Self::from_entries(r.dim, r.entries)
    }
}

impl SparseFunction {
    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: BTreeMap::new() }
    }

    pub fn delta(point: Point) -> Self {
        let mut f = Self::zero(point.len());
        f.entries.insert(point, 1.0);
        f
    }

    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, f64)>,
    {
        let mut f = Self::zero(dim);
        for (p, v) in entries {
            f.add_at(p, v)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, n: &[i64]) -> f64 {
        self.entries.get(n).copied().unwrap_or(0.0)
    }

    /// Sets `f(n) = value`, replacing any previous value.
    pub fn set(&mut self, n: Point, value: f64) -> Result<()> {
        self.check(&n, value)?;
        if value == 0.0 {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, value);
        }
        Ok(())
    }

    /// `f(n) += value`.
    pub fn add_at(&mut self, n: Point, value: f64) -> Result<()> {
        self.check(&n, value)?;
        let v = self.get(&n) + value;
        self.set(n, v)
    }

    fn check(&self, n: &[i64], value: f64) -> Result<()> {
        if n.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: n.len() });
        }
        if !value.is_finite() {
            return Err(Error::NonFinite { point: n.to_vec(), value });
        }
        Ok(())
    }

    /// Support points and values in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.entries.iter().map(|(p, &v)| (p, v))
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().fold(0.0, |s, v| s + v.abs())
    }

    pub fn linf_norm(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn abs(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|(p, v)| (p.clone(), v.abs())).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|(p, v)| (p.clone(), v * c)).collect(),
        }
    }

    /// `n -> f(n - v)`.
    pub fn shifted(&self, v: &[i64]) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|(p, &x)| (p.iter().zip(v).map(|(a, b)| a + b).collect(), x))
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut out = self.clone();
        for (p, v) in other.iter() {
            out.add_at(p.clone(), v)?;
        }
        Ok(out)
    }

    /// Bounding box of the support.
    pub fn hull(&self) -> Option<LatticeWindow> {
        let mut it = self.entries.keys();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in it {
            for i in 0..self.dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Some(LatticeWindow { lo, hi })
    }

    /// Text format: a `dim d` header, then one `n_1 ... n_d value` line per entry.
    /// Blank lines and `#` comments are ignored; repeated points accumulate.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_dim(text, None)
    }

    /// Like [`SparseFunction::parse`], with a fallback dimension for files without header.
    pub fn parse_with_dim(text: &str, default_dim: Option<usize>) -> Result<Self> {
        let mut f: Option<Self> = default_dim.map(Self::zero);
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            if let Some(rest) = line.strip_prefix("dim") {
                if seen_header {
                    return Err(parse_err("duplicate dim header".into()));
                }
                let d: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("bad dimension {:?}", rest.trim())))?;
                if d == 0 {
                    return Err(parse_err("dimension must be positive".into()));
                }
                if let Some(g) = &f {
                    if !g.is_zero() {
                        return Err(parse_err("dim header must precede entries".into()));
                    }
                }
                f = Some(Self::zero(d));
                seen_header = true;
                continue;
            }
            let g = f
                .as_mut()
                .ok_or_else(|| parse_err("missing `dim d` header".into()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != g.dim + 1 {
                return Err(parse_err(format!(
                    "expected {} fields, found {}",
                    g.dim + 1,
                    fields.len()
                )));
            }
            let point = fields[..g.dim]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|_| parse_err(format!("bad coordinate {s:?}"))))
                .collect::<Result<Point>>()?;
            let value: f64 = fields[g.dim]
                .parse()
                .map_err(|_| parse_err(format!("bad value {:?}", fields[g.dim])))?;
            if !value.is_finite() {
                return Err(parse_err(format!("non-finite value {value}")));
            }
            g.add_at(point, value)?;
        }
        f.ok_or(Error::Parse { line: 0, message: "empty input without `dim d` header".into() })
    }

    /// Inverse of [`SparseFunction::parse`]; values use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = format!("dim {}\n", self.dim);
        for (p, v) in self.iter() {
            for c in p {
                let _ = write!(out, "{c} ");
            }
            let _ = writeln!(out, "{v:?}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let f = SparseFunction::from_entries(
            2,
            [(vec![0, 1], 0.5), (vec![-3, 7], 1.0 / 3.0), (vec![2, 2], -2.25)],
        )
        .unwrap();
        assert_eq!(SparseFunction::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn json_round_trip() {
        let f = SparseFunction::from_entries(2, [(vec![0, 1], 0.5), (vec![-3, 7], 1.0 / 3.0)]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"dim":2,"entries":[[[-3,7],0.3333333333333333],[[0,1],0.5]]}"#);
        assert_eq!(serde_json::from_str::<SparseFunction>(&text).unwrap(), f);
        assert!(serde_json::from_str::<SparseFunction>(r#"{"dim":1,"entries":[[[0,1],1.0]]}"#).is_err());
        assert!(serde_json::from_str::<SparseFunction>(r#"{"dim":0,"entries":[]}"#).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = SparseFunction::parse("dim 2\n0 0 1\n1 x 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = SparseFunction::parse("dim 1\n0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = SparseFunction::parse("0 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(SparseFunction::parse("dim 1\n0 nan\n").is_err());
    }

    #[test]
    fn header_only_is_zero() {
        let f = SparseFunction::parse("# nothing here\ndim 3\n").unwrap();
        assert!(f.is_zero());
        assert_eq!(f.dim(), 3);
        assert!(SparseFunction::parse_with_dim("", Some(2)).unwrap().is_zero());
    }

    #[test]
    fn arithmetic() {
        let f = SparseFunction::delta(vec![0]);
        let g = f.plus(&SparseFunction::delta(vec![0]).scaled(-1.0)).unwrap();
        assert!(g.is_zero());
        assert_eq!(f.shifted(&[4]).get(&[4]), 1.0);
        let h = SparseFunction::from_entries(1, [(vec![-2], -1.0), (vec![5], 2.0)]).unwrap();
        assert_eq!(h.l1_norm(), 3.0);
        assert_eq!(h.hull().unwrap(), LatticeWindow { lo: vec![-2], hi: vec![5] });
    }
}
