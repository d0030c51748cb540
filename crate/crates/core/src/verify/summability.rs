//! The summability functional bounding the contribution of one point mass to the
//! gradient norm, its maximizing sequence `a_j = j`, and the constant `C̃(d, Ω)`.
//!
//! With `x = λ⁻¹(|n'|² + a_j²)^{1/2}` and gap `g = a_j − a_{j−1}` each summand is
//! `cap(x − c₁) − min{1/(C(c₂+g+c₁)^d), 1/(C(x+g+c₁)^d)}` where `cap(y)` is
//! `min{1/(C max(y,0)^d), 1}`. A term without predecessor has infinite gap.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::OmegaSpec;
use crate::maximal::Variant;
use crate::numeric::{compensated_sum, unit_sphere_area};
use crate::random::trial_rng;

/// Insertion cases draw from streams disjoint from the random-sequence trials.
const INSERTION_STREAM: u64 = 1 << 40;

/// Relative slack for floating point comparisons of truncated sums.
pub const SUM_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityConstants {
    pub dim: usize,
    pub volume: f64,
    pub c1: f64,
    pub c2: f64,
    pub lambda: f64,
}

impl SummabilityConstants {
    pub fn of(omega: &OmegaSpec) -> Self {
        Self {
            dim: omega.dim(),
            volume: omega.volume(),
            c1: omega.c1(),
            c2: omega.c2(),
            lambda: omega.lambda(),
        }
    }

    /// The non-centered argument runs with `2λ` in place of `λ`.
    pub fn for_variant(omega: &OmegaSpec, variant: Variant) -> Self {
        let mut c = Self::of(omega);
        if variant == Variant::Noncentered {
            c.lambda *= 2.0;
        }
        c
    }

    fn recip(&self, y: f64) -> f64 {
        1.0 / (self.volume * y.powi(self.dim as i32))
    }

    fn capped_recip(&self, y: f64) -> f64 {
        if y <= 0.0 {
            1.0
        } else {
            self.recip(y).min(1.0)
        }
    }

    /// One summand at scaled distance `x`; `gap = None` for the first term of a sequence.
    pub fn term(&self, x: f64, gap: Option<i64>) -> f64 {
        let head = self.capped_recip(x - self.c1);
        let sub = match gap {
            None => 0.0,
            Some(g) => {
                let g = g as f64;
                self.recip(self.c2 + g + self.c1).min(self.recip(x + g + self.c1))
            }
        };
        head - sub
    }

    /// The telescoped summand `1/(C(u)^d) − 1/(C(u+1+2c₁)^d)`, `u = λ⁻¹ρ − c₁`, valid for `λ⁻¹ρ > c₂`.
    pub fn psi(&self, rho: f64) -> f64 {
        let u = rho / self.lambda - self.c1;
        self.recip(u) - self.recip(u + 1.0 + 2.0 * self.c1)
    }

    /// Certified majorant of `Σ_{n ∈ Z^d, |n| ≥ r} ψ(|n|)`, comparing each summand with an
    /// integral over its unit cell.
    pub fn tail_majorant(&self, r: f64) -> Result<f64> {
        let d = self.dim as f64;
        let h = d.sqrt() / 2.0;
        let u0 = (r - 2.0 * h) / self.lambda - self.c1;
        if u0 <= 0.0 || r / self.lambda < self.c2 {
            return Err(Error::Truncation(format!(
                "radius {r} too small for a tail majorant (needs λ⁻¹r ≥ c₂ and a positive margin)"
            )));
        }
        let k = 1.0 + (self.lambda * self.c1 + h) / (self.lambda * u0);
        let bound = unit_sphere_area(self.dim) * d * (1.0 + 2.0 * self.c1) / self.volume
            * self.lambda.powi(self.dim as i32)
            * k.powi(self.dim as i32 - 1)
            / u0;
        if !bound.is_finite() {
            return Err(Error::Numerical(format!("tail majorant overflow at r = {r}")));
        }
        Ok(bound)
    }

    /// Certified majorant of `Σ_{|n|_∞ > t} ψ(|n|)`. The unit cells of those points fill
    /// `|y|_∞ ≥ t + ½`; in polar coordinates the radial integral is bounded as in
    /// [`Self::tail_majorant`] and the angular factor is `κ_d = ∫_{S^{d−1}} |θ|_∞ dσ`,
    /// known exactly for `d ≤ 2` and bounded by the sphere area otherwise.
    pub fn box_tail_majorant(&self, t: i64) -> Result<f64> {
        let d = self.dim as f64;
        let h = d.sqrt() / 2.0;
        let inner = t as f64 + 0.5;
        let u0 = (inner - h) / self.lambda - self.c1;
        if u0 <= 0.0 || inner / self.lambda < self.c2 {
            return Err(Error::Truncation(format!("box half-width {t} too small for a tail majorant")));
        }
        let kappa = match self.dim {
            1 => 2.0,
            2 => 4.0 * std::f64::consts::SQRT_2,
            _ => unit_sphere_area(self.dim),
        };
        let k = 1.0 + (self.lambda * self.c1 + h) / (self.lambda * u0);
        let bound = kappa * d * (1.0 + 2.0 * self.c1) / self.volume
            * self.lambda.powi(self.dim as i32)
            * k.powi(self.dim as i32 - 1)
            / u0;
        if !bound.is_finite() {
            return Err(Error::Numerical(format!("tail majorant overflow at t = {t}")));
        }
        Ok(bound)
    }
}

/// Points of `[0, t]^m` with the number of sign patterns they stand for.
fn orthant_point(index: usize, m: usize, t: i64) -> (Vec<i64>, f64) {
    let side = (t + 1) as usize;
    let mut idx = index;
    let mut p = vec![0i64; m];
    let mut weight = 1.0;
    for c in p.iter_mut().rev() {
        *c = (idx % side) as i64;
        idx /= side;
        if *c != 0 {
            weight *= 2.0;
        }
    }
    (p, weight)
}

fn orthant_len(m: usize, t: i64) -> Result<usize> {
    ((t + 1) as usize)
        .checked_pow(m as u32)
        .ok_or_else(|| Error::Truncation(format!("truncation {t} too large in dimension {m}")))
}

/// Sum of `term(n)` over `|n|_∞ ≤ t` for a radially symmetric summand in dimension `m`.
fn radial_box_sum<F>(m: usize, t: i64, term: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let len = orthant_len(m, t)?;
    let parts: Vec<f64> = (0..len)
        .into_par_iter()
        .map(|i| {
            let (p, w) = orthant_point(i, m, t);
            let sq: i64 = p.iter().map(|c| c * c).sum();
            w * term(sq as f64)
        })
        .collect();
    Ok(compensated_sum(parts))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityInput {
    pub a_seq: Vec<i64>,
    pub constants: SummabilityConstants,
    /// `n'` ranges over `|n'|_∞ ≤ truncation`.
    pub truncation: i64,
}

impl SummabilityInput {
    pub fn new(a_seq: Vec<i64>, constants: SummabilityConstants, truncation: i64) -> Result<Self> {
        if a_seq.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("sequence must be strictly increasing".into()));
        }
        if truncation < 1 {
            return Err(Error::Truncation(format!("truncation must be positive, got {truncation}")));
        }
        Ok(Self { a_seq, constants, truncation })
    }

    /// The maximizing sequence `a_j = j`, `|j| ≤ half`.
    pub fn consecutive(half: i64, constants: SummabilityConstants, truncation: i64) -> Result<Self> {
        Self::new((-half..=half).collect(), constants, truncation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityValue {
    /// The sum over `|n'|_∞ ≤ T` and the given terms.
    pub value: f64,
    /// Majorant of the omitted `|n'|_∞ > T` part (zero for `d = 1`).
    pub tail_bound: f64,
}

/// Sum over one fixed `|n'|²` of all sequence terms.
fn line_sum(c: &SummabilityConstants, seq: &[i64], n_sq: f64) -> f64 {
    compensated_sum(seq.iter().enumerate().map(|(j, &a)| {
        let x = (n_sq + (a as f64).powi(2)).sqrt() / c.lambda;
        let gap = (j > 0).then(|| a - seq[j - 1]);
        c.term(x, gap)
    }))
}

pub fn summability_sum(input: &SummabilityInput) -> Result<SummabilityValue> {
    let c = &input.constants;
    let m = c.dim - 1;
    let value = radial_box_sum(m, input.truncation, |sq| line_sum(c, &input.a_seq, sq))?;
    let tail_bound = if m == 0 { 0.0 } else { c.tail_majorant((input.truncation + 1) as f64)? };
    if !value.is_finite() {
        return Err(Error::Numerical("summability sum is not finite".into()));
    }
    Ok(SummabilityValue { value, tail_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CTilde {
    pub truncation: i64,
    /// `#{n : λ⁻¹|n| ≤ c₂}`.
    pub head: u64,
    /// `Σ ψ` over `λ⁻¹|n| > c₂`, `|n|_∞ ≤ T`.
    pub body: f64,
    /// Majorant of the `|n|_∞ > T` part.
    pub tail: f64,
    pub total: f64,
}

fn head_radius_sq(c: &SummabilityConstants) -> f64 {
    (c.lambda * c.c2).powi(2) * (1.0 + SUM_REL_TOL)
}

pub fn c_tilde_bound(constants: &SummabilityConstants, truncation: i64) -> Result<CTilde> {
    let c = constants;
    let head_sq = head_radius_sq(c);
    if head_sq.sqrt() > truncation as f64 {
        return Err(Error::Truncation(format!("truncation {truncation} inside the head region")));
    }
    let head = radial_box_sum(c.dim, truncation, |sq| if sq <= head_sq { 1.0 } else { 0.0 })?.round() as u64;
    let body = radial_box_sum(c.dim, truncation, |sq| if sq <= head_sq { 0.0 } else { c.psi(sq.sqrt()) })?;
    let tail = c.box_tail_majorant(truncation)?;
    Ok(CTilde { truncation, head, body, tail, total: head as f64 + body + tail })
}

/// Certified majorant of `h(R) = Σ_{|n| ≥ R} ψ(|n|)`: an exact sum inside `|n|_∞ ≤ t` plus
/// the integral tail beyond.
pub fn psi_tail(constants: &SummabilityConstants, r: f64, t: i64) -> Result<f64> {
    let c = constants;
    if r / c.lambda <= c.c2 {
        return Err(Error::Truncation(format!("radius {r} does not exceed λc₂")));
    }
    let r_sq = r * r;
    let inner = radial_box_sum(c.dim, t, |sq| if sq >= r_sq { c.psi(sq.sqrt()) } else { 0.0 })?;
    Ok(inner + c.box_tail_majorant(t)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsertionCase {
    pub sequence: Vec<i64>,
    pub inserted: i64,
    pub before: f64,
    pub after: f64,
    pub holds: bool,
}

/// Inserting one new term never decreases the truncated sum.
pub fn insertion_check(
    constants: &SummabilityConstants,
    sequence: &[i64],
    inserted: i64,
    truncation: i64,
) -> Result<InsertionCase> {
    if sequence.contains(&inserted) {
        return Err(Error::InvalidInput(format!("{inserted} already in the sequence")));
    }
    let mut refined = sequence.to_vec();
    refined.push(inserted);
    refined.sort_unstable();
    let before = summability_sum(&SummabilityInput::new(sequence.to_vec(), *constants, truncation)?)?.value;
    let after = summability_sum(&SummabilityInput::new(refined, *constants, truncation)?)?.value;
    Ok(InsertionCase {
        sequence: sequence.to_vec(),
        inserted,
        before,
        after,
        holds: after >= before * (1.0 - SUM_REL_TOL),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceCase {
    pub trial: u64,
    pub len: usize,
    pub value: f64,
    /// `S_T({a_j}) ≤ S_T({j})` without slack.
    pub strict: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub constants: SummabilityConstants,
    pub truncation: i64,
    pub half_range: i64,
    pub seed: u64,
    pub reference: f64,
    /// Majorant of everything the reference truncation omits.
    pub slack: f64,
    pub sequences: Vec<SequenceCase>,
    pub insertions: Vec<InsertionCase>,
    pub all_pass: bool,
}

fn random_sequence<R: Rng>(rng: &mut R, half: i64) -> Vec<i64> {
    let density: f64 = rng.random_range(0.05..=1.0);
    let mut seq: Vec<i64> = (-half..=half).filter(|_| rng.random::<f64>() < density).collect();
    if seq.is_empty() {
        seq.push(rng.random_range(-half..=half));
    }
    seq
}

/// A short sequence with a gap of at least 2 somewhere, plus a point to insert. One case in
/// five inserts outside the current range.
fn random_insertion<R: Rng>(rng: &mut R, half: i64) -> (Vec<i64>, i64) {
    loop {
        let len = rng.random_range(2..=8usize);
        let mut seq: Vec<i64> = Vec::with_capacity(len);
        let mut a = rng.random_range(-half..=half / 2);
        for _ in 0..len {
            seq.push(a);
            a += rng.random_range(1..=6);
        }
        seq.retain(|&x| x <= half);
        let gaps: Vec<usize> = (1..seq.len()).filter(|&i| seq[i] - seq[i - 1] >= 2).collect();
        if rng.random_range(0..5) == 0 {
            let first = seq[0];
            let last = *seq.last().expect("nonempty");
            let outside = if rng.random::<bool>() { first - rng.random_range(1..=4) } else { last + rng.random_range(1..=4) };
            return (seq, outside);
        }
        if !gaps.is_empty() {
            let i = gaps[rng.random_range(0..gaps.len())];
            let x = rng.random_range(seq[i - 1] + 1..seq[i]);
            return (seq, x);
        }
    }
}

/// Random sequences drawn from `[−J, J]` against `a_j = j`, and random single insertions.
pub fn summability_lemma_check(
    constants: &SummabilityConstants,
    truncation: i64,
    half_range: i64,
    sequences: u64,
    insertions: u64,
    seed: u64,
) -> Result<SummabilityReport> {
    let reference_input = SummabilityInput::consecutive(half_range, *constants, truncation)?;
    let reference = summability_sum(&reference_input)?.value;
    let reach = if constants.dim == 1 { half_range } else { truncation.min(half_range) };
    let slack = constants.tail_majorant((reach + 1) as f64)? + SUM_REL_TOL * reference;

    let sequences: Vec<SequenceCase> = (0..sequences)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let seq = random_sequence(&mut rng, half_range);
            let len = seq.len();
            let value = summability_sum(&SummabilityInput::new(seq, *constants, truncation)?)?.value;
            Ok(SequenceCase {
                trial,
                len,
                value,
                strict: value <= reference,
                holds: value <= reference + slack,
            })
        })
        .collect::<Result<_>>()?;

    let insertions: Vec<InsertionCase> = (0..insertions)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, INSERTION_STREAM + trial);
            let (seq, x) = random_insertion(&mut rng, half_range);
            insertion_check(constants, &seq, x, truncation)
        })
        .collect::<Result<_>>()?;

    let all_pass = sequences.iter().all(|s| s.holds) && insertions.iter().all(|c| c.holds);
    Ok(SummabilityReport {
        constants: *constants,
        truncation,
        half_range,
        seed,
        reference,
        slack,
        sequences,
        insertions,
        all_pass,
    })
}
