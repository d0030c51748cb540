//! A function in `l¹(Z)` whose maximal function has a derivative outside every `l^p`,
//! `p < 1`: the values `f(n) = 1/(n log²(n+1))` placed at rapidly separating points `a_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{LatticeWindow, OmegaSpec};
use crate::maximal::CenteredOperator;
use crate::numeric::compensated_sum;

/// Absolute tolerance of the three identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Terms summed exactly before the integral tail takes over in the norm bounds.
pub const NORM_TERMS: u64 = 1_000_000;
/// Exponents whose partial sums are reported.
pub const EXPONENTS: [f64; 3] = [0.9, 0.95, 1.0];

pub fn remark2_f(n: u64) -> f64 {
    let x = n as f64;
    1.0 / (x * (x + 1.0).ln().powi(2))
}

/// Bracket `[lower, upper]` around `Σ_{n ≥ 1} f(n)`: the partial sum up to `N0` is a lower
/// bound; adding `∫_{N0}^∞ f ≤ (1 + 1/N0)/log(N0+1)` gives the upper one.
pub fn remark2_norm_bounds(n0: u64) -> (f64, f64) {
    let partial = compensated_sum((1..=n0).map(remark2_f));
    let x = n0 as f64;
    let tail = (1.0 + 1.0 / x) / (x + 1.0).ln();
    let rounding = 1e-12 * partial;
    (partial - rounding, partial + tail + rounding)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark2Output {
    pub f_vals: Vec<f64>,
    pub a_seq: Vec<i64>,
    pub g: SparseFunction,
    /// Upper bound for `‖f‖₁` used in every condition.
    pub l1_upper: f64,
    /// Lower bound for `‖f‖₁`.
    pub l1_lower: f64,
}

/// Smallest gap `G` (at least `min_gap`) with `f > L/(2G+1)` and `f/3 > L/(2(G+1)+1)`.
fn smallest_gap(f: f64, l1: f64, min_gap: i64) -> Result<i64> {
    let ok = |g: i64| f > l1 / (2 * g + 1) as f64 && f / 3.0 > l1 / (2 * (g + 1) + 1) as f64;
    let estimate = ((3.0 * l1 / f - 3.0) / 2.0).floor() as i64 - 2;
    let mut g = estimate.max(min_gap);
    let limit = g.saturating_add(1_000);
    while !ok(g) {
        g += 1;
        if g > limit {
            return Err(Error::Construction(format!("no admissible gap for f = {f}")));
        }
    }
    // the conditions are monotone in G, so step back to the smallest admissible value
    while g > min_gap && ok(g - 1) {
        g -= 1;
    }
    Ok(g)
}

/// Greedy choice of `1 = a_1 < a_2 < …` for `n_terms` terms.
pub fn remark2_construct(n_terms: usize) -> Result<Remark2Output> {
    if n_terms < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 terms, got {n_terms}")));
    }
    let (l1_lower, l1_upper) = remark2_norm_bounds(NORM_TERMS);
    let f_vals: Vec<f64> = (1..=n_terms as u64).map(remark2_f).collect();
    let mut a_seq = vec![1i64];

    // a_2: (i) a_2 >= 4, (iii) and (iv) for f(1), (v) and (vi) for f(2)
    let f1 = f_vals[0];
    let mut a2 = 4i64;
    loop {
        let g = a2 - 1;
        let iii = f1 > l1_upper / (2 * g + 1) as f64;
        let iv = f1 / 3.0 > l1_upper / (2 * (g - 1) + 1) as f64;
        if iii && iv && g >= smallest_gap(f_vals[1], l1_upper, 1)? {
            break;
        }
        a2 += 1;
    }
    a_seq.push(a2);

    // a_{n+1}: (ii) growth of gaps by more than 2, (v) and (vi) for f(n+1)
    for next in 2..n_terms {
        let prev_gap = a_seq[next - 1] - a_seq[next - 2];
        let gap = smallest_gap(f_vals[next], l1_upper, prev_gap + 3)?;
        let a = a_seq[next - 1]
            .checked_add(gap)
            .ok_or_else(|| Error::Construction("sequence overflows i64".into()))?;
        a_seq.push(a);
    }

    let g = SparseFunction::from_entries(1, a_seq.iter().zip(&f_vals).map(|(&a, &v)| (vec![a], v)))?;
    Ok(Remark2Output { f_vals, a_seq, g, l1_upper, l1_lower })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// All six conditions, evaluated with `‖f‖₁` replaced by `l1_upper`.
pub fn remark2_conditions(out: &Remark2Output) -> Vec<ConditionCheck> {
    let a = &out.a_seq;
    let f = &out.f_vals;
    let l1 = out.l1_upper;
    let mut checks = Vec::new();
    let mut push = |condition: &str, n: usize, lhs: f64, rhs: f64| {
        checks.push(ConditionCheck { condition: condition.into(), n, lhs, rhs, holds: lhs > rhs });
    };
    if a.len() >= 2 {
        push("i", 2, a[1] as f64, 3.0);
        let g = (a[1] - a[0]) as f64;
        push("iii", 1, f[0], l1 / (2.0 * g + 1.0));
        push("iv", 1, f[0] / 3.0, l1 / (2.0 * (g - 1.0) + 1.0));
    }
    for n in 2..=a.len() {
        let g = (a[n - 1] - a[n - 2]) as f64;
        if n + 1 <= a.len() {
            let next = (a[n] - a[n - 1]) as f64;
            push("ii", n, next, g + 2.0);
        }
        push("v", n, f[n - 1], l1 / (2.0 * g + 1.0));
        push("vi", n, f[n - 1] / 3.0, l1 / (2.0 * (g + 1.0) + 1.0));
    }
    checks
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark2Row {
    pub n: usize,
    pub a_n: i64,
    pub f_n: f64,
    pub mg_at: f64,
    pub mg_after: f64,
    /// `|Mg(a_n + 1) − Mg(a_n)|`.
    pub derivative: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSums {
    pub p: f64,
    pub sums: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remark2Report {
    pub rows: Vec<Remark2Row>,
    pub conditions: Vec<ConditionCheck>,
    pub identity_checks: usize,
    pub failures: Vec<usize>,
    pub partial_sums: Vec<PartialSums>,
    /// Partial sums for `p = 0.9` strictly increase.
    pub growth: bool,
    /// `(2/3) · l1_lower`, below `(2/3)‖g‖₁`.
    pub p1_limit: f64,
    pub p1_bounded: bool,
    pub all_pass: bool,
}

pub fn remark2_verify(out: &Remark2Output, omega: &OmegaSpec) -> Result<Remark2Report> {
    if omega.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: omega.dim() });
    }
    if !omega.is_cube() {
        return Err(Error::InvalidOmega("the construction uses the interval (−1, 1)".into()));
    }
    let last = *out.a_seq.last().ok_or_else(|| Error::InvalidInput("empty construction".into()))?;
    let reach = LatticeWindow::new(vec![out.a_seq[0]], vec![last + 1])?;
    let op = CenteredOperator::new(&out.g, omega, Some(&reach))?;
    let rows: Vec<Remark2Row> = out
        .a_seq
        .iter()
        .zip(&out.f_vals)
        .enumerate()
        .map(|(i, (&a, &f))| {
            let mg_at = op.eval(&[a]).value;
            let mg_after = op.eval(&[a + 1]).value;
            let derivative = (mg_after - mg_at).abs();
            let holds = (mg_at - f).abs() <= IDENTITY_TOL
                && (mg_after - f / 3.0).abs() <= IDENTITY_TOL
                && (derivative - 2.0 * f / 3.0).abs() <= IDENTITY_TOL;
            Remark2Row { n: i + 1, a_n: a, f_n: f, mg_at, mg_after, derivative, holds }
        })
        .collect();
    let failures: Vec<usize> = rows.iter().filter(|r| !r.holds).map(|r| r.n).collect();
    let conditions = remark2_conditions(out);

    let partial_sums: Vec<PartialSums> = EXPONENTS
        .iter()
        .map(|&p| {
            let mut acc = 0.0;
            let sums = rows
                .iter()
                .map(|r| {
                    acc += r.derivative.powf(p);
                    acc
                })
                .collect();
            PartialSums { p, sums }
        })
        .collect();
    let growth = partial_sums[0].sums.windows(2).all(|w| w[1] > w[0]);
    let p1_limit = 2.0 / 3.0 * out.l1_lower;
    let p1_bounded = partial_sums[2].sums.iter().all(|&s| s <= p1_limit);
    let all_pass = failures.is_empty() && conditions.iter().all(|c| c.holds) && growth && p1_bounded;
    Ok(Remark2Report {
        identity_checks: 3 * rows.len(),
        rows,
        conditions,
        failures,
        partial_sums,
        growth,
        p1_limit,
        p1_bounded,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_bracket_is_tight() {
        let (lo, hi) = remark2_norm_bounds(10_000);
        assert!(lo < hi && hi - lo < 0.11);
        let (lo2, hi2) = remark2_norm_bounds(100_000);
        assert!(lo2 >= lo && hi2 <= hi);
    }

    #[test]
    fn construction_conditions() {
        let out = remark2_construct(6).unwrap();
        assert_eq!(out.a_seq[0], 1);
        assert!(out.a_seq[1] >= 4);
        for w in out.a_seq.windows(3) {
            assert!(w[2] - w[1] > w[1] - w[0] + 2);
        }
        assert!(remark2_conditions(&out).iter().all(|c| c.holds));
        let sum: f64 = out.f_vals.iter().sum();
        assert!((out.g.l1_norm() - sum).abs() < 1e-15);
        assert!(remark2_construct(1).is_err());
    }

    #[test]
    fn identities_at_the_first_term() {
        let out = remark2_construct(3).unwrap();
        let report = remark2_verify(&out, &OmegaSpec::cube(1)).unwrap();
        let f1 = 1.0 / 2f64.ln().powi(2);
        assert!((report.rows[0].mg_at - f1).abs() < 1e-12);
        assert!((report.rows[0].derivative - 2.0 * f1 / 3.0).abs() < 1e-12);
        assert!(report.all_pass);
        assert!(remark2_verify(&out, &OmegaSpec::cube(2)).is_err());
    }

    #[test]
    fn greedy_gaps_are_minimal() {
        let out = remark2_construct(5).unwrap();
        // shrinking any chosen gap by one breaks a condition
        for i in 2..out.a_seq.len() {
            let mut shorter = out.clone();
            for a in &mut shorter.a_seq[i..] {
                *a -= 1;
            }
            assert!(remark2_conditions(&shorter).iter().any(|c| !c.holds), "term {}", i + 1);
        }
    }
}
