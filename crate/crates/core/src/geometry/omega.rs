//! The convex body Ω, its gauge, and the geometric constants derived from it.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::constants::{default_certification_radius, fit_constants};
use super::polytope::HalfSpaces;
use crate::error::{Error, Result};

/// Relative tolerance for ball membership; ties count as inside (closed ball).
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Exponent of an l^p ball. JSON accepts a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PRepr", into = "PRepr")]
pub enum PExponent {
    One,
    Two,
    Infinity,
    Finite(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PRepr {
    Num(f64),
    Text(String),
}

impl TryFrom<PRepr> for PExponent {
    type Error = String;

    fn try_from(value: PRepr) -> std::result::Result<Self, Self::Error> {
        match value {
            PRepr::Num(p) => PExponent::from_value(p),
            PRepr::Text(s) => s.parse(),
        }
    }
}

impl From<PExponent> for PRepr {
    fn from(p: PExponent) -> Self {
        match p {
            PExponent::Infinity => PRepr::Text("inf".into()),
            other => PRepr::Num(other.value()),
        }
    }
}

impl std::str::FromStr for PExponent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(PExponent::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| format!("invalid exponent {s:?}"))?;
                PExponent::from_value(p)
            }
        }
    }
}

impl PExponent {
    pub fn from_value(p: f64) -> std::result::Result<Self, String> {
        if p.is_infinite() && p > 0.0 {
            Ok(PExponent::Infinity)
        } else if !(p >= 1.0) {
            Err(format!("exponent p = {p} does not give a convex ball"))
        } else if p == 1.0 {
            Ok(PExponent::One)
        } else if p == 2.0 {
            Ok(PExponent::Two)
        } else {
            Ok(PExponent::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            PExponent::One => 1.0,
            PExponent::Two => 2.0,
            PExponent::Infinity => f64::INFINITY,
            PExponent::Finite(p) => p,
        }
    }
}

/// Serializable description of Ω, before normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OmegaDescriptor {
    Lp {
        p: PExponent,
        d: usize,
    },
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        d: usize,
    },
}

impl OmegaDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            OmegaDescriptor::Lp { d, .. } | OmegaDescriptor::Polytope { d, .. } => *d,
        }
    }

    /// An l^p ball from a short name: `cube`/`linf`, `cross`/`l1`, `euclidean`/`l2`, or
    /// `lp:<p>` / `l<p>` for other exponents.
    pub fn from_name(name: &str, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidOmega("dimension must be positive".into()));
        }
        let lower = name.trim().to_ascii_lowercase();
        let p = match lower.as_str() {
            "cube" | "linf" | "l-inf" | "max" => PExponent::Infinity,
            "cross" | "diamond" | "l1" => PExponent::One,
            "euclidean" | "ball" | "l2" => PExponent::Two,
            other => {
                let exp = other
                    .strip_prefix("lp:")
                    .or_else(|| other.strip_prefix('l'))
                    .ok_or_else(|| Error::InvalidOmega(format!("unknown body {name:?}")))?;
                exp.parse().map_err(Error::InvalidOmega)?
            }
        };
        Ok(OmegaDescriptor::Lp { p, d })
    }
}

impl std::fmt::Display for OmegaDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OmegaDescriptor::Lp { p, d } => match p {
                PExponent::Infinity => write!(f, "cube d={d}"),
                PExponent::One => write!(f, "l1 ball d={d}"),
                PExponent::Two => write!(f, "l2 ball d={d}"),
                PExponent::Finite(p) => write!(f, "l{p} ball d={d}"),
            },
            OmegaDescriptor::Polytope { offsets, d, .. } => {
                write!(f, "polytope with {} half-spaces d={d}", offsets.len())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Shape {
    /// l^∞ ball; also used for every l^p ball in d = 1.
    Cube,
    /// l^1 ball.
    Cross,
    Euclid,
    Lp(f64),
    Polytope(HalfSpaces),
}

/// Constants that every bound downstream is stated in terms of.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstants {
    /// d-dimensional volume of Ω.
    pub volume: f64,
    /// Euclidean circumradius of the closed body.
    pub lambda: f64,
    /// Lattice-count deviation constant, certified for radii up to `certified_radius`.
    pub c1: f64,
    /// Solves `volume * (c2 - c1)^d = 1`.
    pub c2: f64,
    pub certified_radius: f64,
}

/// A normalized convex body: open, bounded, convex, `0 ∈ int Ω`, `gauge(e_d) = 1`.
#[derive(Clone, Debug)]
pub struct OmegaSpec {
    descriptor: OmegaDescriptor,
    pub(crate) shape: Shape,
    dim: usize,
    scale: f64,
    extents: Vec<(f64, f64)>,
    constants: GeometricConstants,
}

impl PartialEq for OmegaSpec {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor == other.descriptor && self.constants == other.constants
    }
}

impl OmegaSpec {
    /// l^∞ ball `(-1, 1)^d`.
    pub fn cube(d: usize) -> Self {
        Self::lp(PExponent::Infinity, d).expect("the cube is a valid body for d >= 1")
    }

    /// l^1 ball.
    pub fn cross(d: usize) -> Self {
        Self::lp(PExponent::One, d).expect("the l1 ball is a valid body for d >= 1")
    }

    /// Euclidean ball.
    pub fn euclidean(d: usize) -> Self {
        Self::lp(PExponent::Two, d).expect("the l2 ball is a valid body for d >= 1")
    }

    pub fn lp(p: PExponent, d: usize) -> Result<Self> {
        Self::from_descriptor(&OmegaDescriptor::Lp { p, d })
    }

    pub fn polytope(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        let d = normals.first().map_or(0, Vec::len);
        Self::from_descriptor(&OmegaDescriptor::Polytope { normals, offsets, d })
    }

    pub fn from_descriptor(descriptor: &OmegaDescriptor) -> Result<Self> {
        Self::build(descriptor, None)
    }

    /// Like [`OmegaSpec::from_descriptor`] but certifies `c1` up to `r_max`.
    pub fn with_certified_radius(descriptor: &OmegaDescriptor, r_max: f64) -> Result<Self> {
        Self::build(descriptor, Some(r_max))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let descriptor: OmegaDescriptor = serde_json::from_str(text)?;
        Self::from_descriptor(&descriptor)
    }

    fn build(descriptor: &OmegaDescriptor, r_max: Option<f64>) -> Result<Self> {
        let mut omega = Self::geometry_only(descriptor)?;
        let r_max = r_max.unwrap_or_else(|| default_certification_radius(&omega));
        let (c1, c2) = fit_constants(&omega, r_max)?;
        omega.constants.c1 = c1;
        omega.constants.c2 = c2;
        omega.constants.certified_radius = r_max;
        Ok(omega)
    }

    /// Everything except the fitted lattice-count constants.
    pub(crate) fn geometry_only(descriptor: &OmegaDescriptor) -> Result<Self> {
        let dim = descriptor.dim();
        if dim == 0 {
            return Err(Error::InvalidOmega("dimension must be positive".into()));
        }
        let (shape, scale) = match descriptor {
            OmegaDescriptor::Lp { p, .. } => {
                let shape = if dim == 1 {
                    Shape::Cube
                } else {
                    match p {
                        PExponent::Infinity => Shape::Cube,
                        PExponent::One => Shape::Cross,
                        PExponent::Two => Shape::Euclid,
                        PExponent::Finite(p) => Shape::Lp(*p),
                    }
                };
                (shape, 1.0)
            }
            OmegaDescriptor::Polytope { normals, offsets, .. } => {
                let raw = validate_polytope(normals, offsets, dim)?;
                let mut e_d = vec![0.0; dim];
                e_d[dim - 1] = 1.0;
                let scale = raw.gauge(&e_d);
                if !(scale > 0.0) {
                    return Err(Error::InvalidOmega("e_d direction is unbounded".into()));
                }
                (Shape::Polytope(raw.scaled(scale)), scale)
            }
        };
        let (volume, lambda, extents) = shape_geometry(&shape, dim)?;
        Ok(Self {
            descriptor: descriptor.clone(),
            shape,
            dim,
            scale,
            extents,
            constants: GeometricConstants {
                volume,
                lambda,
                c1: f64::NAN,
                c2: f64::NAN,
                certified_radius: 0.0,
            },
        })
    }

    /// Rescales Ω so that `e_axis` lies on its boundary. The family of dilates, hence
    /// every maximal operator, is unchanged; only the constants move.
    pub fn normalized_along(&self, axis: usize) -> Result<Self> {
        assert!(axis < self.dim, "axis out of range");
        let Shape::Polytope(h) = &self.shape else {
            // l^p balls are invariant under coordinate permutations
            return Ok(self.clone());
        };
        let mut e = vec![0.0; self.dim];
        e[axis] = 1.0;
        let s = h.gauge(&e);
        let shape = Shape::Polytope(h.scaled(s));
        let (volume, lambda, extents) = shape_geometry(&shape, self.dim)?;
        let mut out = Self {
            descriptor: self.descriptor.clone(),
            shape,
            dim: self.dim,
            scale: self.scale * s,
            extents,
            constants: GeometricConstants {
                volume,
                lambda,
                c1: f64::NAN,
                c2: f64::NAN,
                certified_radius: 0.0,
            },
        };
        let r_max = self.constants.certified_radius;
        let (c1, c2) = fit_constants(&out, r_max)?;
        out.constants.c1 = c1;
        out.constants.c2 = c2;
        out.constants.certified_radius = r_max;
        Ok(out)
    }

    pub fn descriptor(&self) -> &OmegaDescriptor {
        &self.descriptor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Factor applied to the input body to put `e_d` on the boundary.
    pub fn normalization_scale(&self) -> f64 {
        self.scale
    }

    pub fn constants(&self) -> GeometricConstants {
        self.constants
    }

    pub fn volume(&self) -> f64 {
        self.constants.volume
    }

    pub fn lambda(&self) -> f64 {
        self.constants.lambda
    }

    pub fn c1(&self) -> f64 {
        self.constants.c1
    }

    pub fn c2(&self) -> f64 {
        self.constants.c2
    }

    /// Per-axis `(min, max)` of the closed body.
    pub fn extents(&self) -> &[(f64, f64)] {
        &self.extents
    }

    /// True for bodies whose lattice gauges are compared in integer arithmetic.
    pub fn is_exact(&self) -> bool {
        matches!(self.shape, Shape::Cube | Shape::Cross | Shape::Euclid)
    }

    pub fn is_cube(&self) -> bool {
        matches!(self.shape, Shape::Cube)
    }

    /// Minkowski functional `inf{t > 0 : x/t ∈ Ω̄}`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Cube => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Shape::Cross => x.iter().map(|v| v.abs()).sum(),
            Shape::Euclid => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Shape::Lp(p) => x.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p),
            Shape::Polytope(h) => h.gauge(x),
        }
    }

    /// Order-preserving key of the gauge of an integer displacement. Exact for the
    /// cube, l1 and l2 balls (the l2 key is the squared norm).
    pub fn lattice_key(&self, v: &[i64]) -> f64 {
        match &self.shape {
            Shape::Cube => v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64,
            Shape::Cross => v.iter().map(|c| c.unsigned_abs()).sum::<u64>() as f64,
            Shape::Euclid => v.iter().map(|&c| (c as i128 * c as i128) as u128).sum::<u128>() as f64,
            _ => {
                let x: Vec<f64> = v.iter().map(|&c| c as f64).collect();
                self.gauge(&x)
            }
        }
    }

    /// Key of a displacement from a real center, in the same units as `lattice_key`.
    pub fn real_key(&self, x: &[f64]) -> f64 {
        match self.shape {
            Shape::Euclid => x.iter().map(|v| v * v).sum(),
            _ => self.gauge(x),
        }
    }

    pub fn key_to_radius(&self, key: f64) -> f64 {
        match self.shape {
            Shape::Euclid => key.sqrt(),
            _ => key,
        }
    }

    pub fn radius_to_key(&self, r: f64) -> f64 {
        match self.shape {
            Shape::Euclid => r * r,
            _ => r,
        }
    }

    /// Inclusive upper key for the closed ball of radius `r`.
    pub fn key_limit(&self, r: f64) -> f64 {
        self.radius_to_key(r + MEMBERSHIP_TOL * r.max(1.0))
    }

    /// Tolerance under which two keys are considered the same radius.
    pub fn key_tolerance(&self, key: f64) -> f64 {
        if self.is_exact() {
            0.0
        } else {
            MEMBERSHIP_TOL * key.abs().max(1.0)
        }
    }

    /// `m ∈ Ω̄_r(x0)`, i.e. `gauge(m - x0) <= r` (ties inside).
    pub fn contains(&self, m: &[i64], x0: &[f64], r: f64) -> bool {
        let diff: Vec<f64> = m.iter().zip(x0).map(|(&a, b)| a as f64 - b).collect();
        self.real_key(&diff) <= self.key_limit(r)
    }
}

fn validate_polytope(normals: &[Vec<f64>], offsets: &[f64], dim: usize) -> Result<HalfSpaces> {
    if normals.len() != offsets.len() {
        return Err(Error::InvalidOmega(format!(
            "{} normals but {} offsets",
            normals.len(),
            offsets.len()
        )));
    }
    if normals.len() <= dim {
        return Err(Error::InvalidOmega("need more than d half-spaces".into()));
    }
    for (a, b) in normals.iter().zip(offsets) {
        if a.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: a.len() });
        }
        if a.iter().chain(std::iter::once(b)).any(|v| !v.is_finite()) {
            return Err(Error::InvalidOmega("non-finite half-space data".into()));
        }
        if !(*b > 0.0) {
            return Err(Error::InvalidOmega("every offset must be positive (0 ∈ int Ω)".into()));
        }
    }
    let h = HalfSpaces { normals: normals.to_vec(), offsets: offsets.to_vec() };
    if !h.is_bounded() {
        return Err(Error::InvalidOmega("polytope is unbounded".into()));
    }
    Ok(h)
}

fn shape_geometry(shape: &Shape, dim: usize) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let d = dim as f64;
    let unit = vec![(-1.0, 1.0); dim];
    Ok(match shape {
        Shape::Cube => (2f64.powi(dim as i32), d.sqrt(), unit),
        Shape::Cross => {
            let factorial: f64 = (1..=dim).map(|k| k as f64).product();
            (2f64.powi(dim as i32) / factorial, 1.0, unit)
        }
        Shape::Euclid => (
            std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0),
            1.0,
            unit,
        ),
        Shape::Lp(p) => {
            let volume = (2.0 * gamma(1.0 + 1.0 / p)).powi(dim as i32) / gamma(1.0 + d / p);
            let lambda = if *p <= 2.0 { 1.0 } else { d.powf(0.5 - 1.0 / p) };
            (volume, lambda, unit)
        }
        Shape::Polytope(h) => {
            let verts = h.vertices();
            let lambda = verts
                .iter()
                .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            let extents = (0..dim)
                .map(|i| {
                    verts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v[i]), hi.max(v[i]))
                    })
                })
                .collect();
            let volume = h.volume();
            if !(volume > 0.0) {
                return Err(Error::InvalidOmega("polytope has zero volume".into()));
            }
            (volume, lambda.max(1.0), extents)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_examples() {
        assert_eq!(OmegaSpec::euclidean(2).gauge(&[3.0, 4.0]), 5.0);
        assert_eq!(OmegaSpec::cube(2).gauge(&[2.0, -3.0]), 3.0);
        for omega in [OmegaSpec::cube(3), OmegaSpec::cross(3), OmegaSpec::euclidean(3)] {
            assert_eq!(omega.gauge(&[0.0; 3]), 0.0);
        }
    }

    #[test]
    fn lambda_examples() {
        assert!((OmegaSpec::cube(2).lambda() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(OmegaSpec::euclidean(4).lambda(), 1.0);
        assert_eq!(OmegaSpec::cross(3).lambda(), 1.0);
    }

    #[test]
    fn volumes() {
        assert_eq!(OmegaSpec::cube(3).volume(), 8.0);
        assert!((OmegaSpec::cross(3).volume() - 8.0 / 6.0).abs() < 1e-12);
        assert!((OmegaSpec::euclidean(2).volume() - std::f64::consts::PI).abs() < 1e-12);
        let l3 = OmegaSpec::lp(PExponent::Finite(3.0), 2).unwrap();
        // area of the l3 unit disk: 4 Γ(4/3)^2 / Γ(5/3)
        let expected = 4.0 * gamma(4.0 / 3.0).powi(2) / gamma(5.0 / 3.0);
        assert!((l3.volume() - expected).abs() < 1e-12);
    }

    #[test]
    fn descriptor_json_round_trip() {
        let desc: OmegaDescriptor = serde_json::from_str(r#"{"kind":"lp","p":"inf","d":2}"#).unwrap();
        assert_eq!(desc, OmegaDescriptor::Lp { p: PExponent::Infinity, d: 2 });
        let back = serde_json::to_string(&desc).unwrap();
        assert_eq!(back, r#"{"kind":"lp","p":"inf","d":2}"#);
        let desc: OmegaDescriptor = serde_json::from_str(r#"{"kind":"lp","p":1,"d":3}"#).unwrap();
        assert_eq!(desc, OmegaDescriptor::Lp { p: PExponent::One, d: 3 });
        assert!(serde_json::from_str::<OmegaDescriptor>(r#"{"kind":"lp","p":0.5,"d":3}"#).is_err());
    }

    #[test]
    fn polytope_is_normalized_so_e_d_is_on_the_boundary() {
        // square [-2,2]^2 given with unit normals and offsets 2
        let omega = OmegaSpec::polytope(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![2.0, 2.0, 2.0, 2.0],
        )
        .unwrap();
        assert!((omega.gauge(&[0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((omega.normalization_scale() - 0.5).abs() < 1e-15);
        assert!((omega.volume() - 4.0).abs() < 1e-9);
        assert!((omega.lambda() - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(omega.gauge(&[2.0, -3.0]), 3.0);
    }

    #[test]
    fn polytope_rejections() {
        let err = OmegaSpec::polytope(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 1.0, 1.0],
        );
        assert!(err.is_err());
        let err = OmegaSpec::polytope(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, -1.0, 1.0, 1.0],
        );
        assert!(err.is_err());
    }

    #[test]
    fn lattice_keys_are_exact() {
        let e = OmegaSpec::euclidean(2);
        assert_eq!(e.lattice_key(&[3, 4]), 25.0);
        assert_eq!(e.key_to_radius(25.0), 5.0);
        assert_eq!(OmegaSpec::cross(2).lattice_key(&[-3, 4]), 7.0);
        assert_eq!(OmegaSpec::cube(2).lattice_key(&[-3, 4]), 4.0);
    }

    #[test]
    fn sqrt_radius_ties_are_inside() {
        let e = OmegaSpec::euclidean(2);
        let r = 3f64.sqrt();
        assert!(e.contains(&[1, 1], &[0.0, 0.0], 2f64.sqrt()));
        let e3 = OmegaSpec::euclidean(3);
        assert!(e3.contains(&[1, 1, 1], &[0.0; 3], r));
        assert!(!e3.contains(&[1, 1, 1], &[0.0; 3], r * (1.0 - 1e-9)));
    }
}
