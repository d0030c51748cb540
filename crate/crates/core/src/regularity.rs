//! Discrete gradients, l1 gradient norms, total variation and the local-extrema
//! decomposition of a maximal function restricted to a line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::geometry::{LatticeCounter, LatticeWindow, OmegaSpec, Point};
use crate::maximal::{
    maximal_grid_with, CenteredOperator, Grid, GridOptions, NonCenteredOptions, Variant,
    DEFAULT_GRID_BUDGET,
};

/// Forward difference `g(n + e_axis) - g(n)`; the window loses its last slice along `axis`.
pub fn partial_derivative(g: &Grid, axis: usize) -> Result<Grid> {
    if axis >= g.window.dim() {
        return Err(Error::InvalidWindow(format!("axis {axis} out of range")));
    }
    let window = g.window.shrink_upper(axis).map_err(|_| {
        Error::InvalidWindow(format!("window has extent 1 along axis {axis}; derivative is empty"))
    })?;
    let shape = g.window.shape();
    let stride: usize = shape[axis + 1..].iter().product();
    let values = window
        .points()
        .map(|p| {
            let i = g.window.index_of(&p).expect("sub-window");
            g.values[i + stride] - g.values[i]
        })
        .collect();
    Ok(Grid { window, values })
}

/// Forward difference of a finitely supported function, exact on all of Z^d.
pub fn partial_derivative_sparse(f: &SparseFunction, axis: usize) -> Result<SparseFunction> {
    if axis >= f.dim() {
        return Err(Error::InvalidWindow(format!("axis {axis} out of range")));
    }
    let mut out = SparseFunction::zero(f.dim());
    for (p, v) in f.iter() {
        let mut q = p.clone();
        q[axis] -= 1;
        // f(p) appears as +f(p) at p - e_axis and -f(p) at p
        out.add_at(q, v)?;
        out.add_at(p.clone(), -v)?;
    }
    Ok(out)
}

/// `Σ_n |∂_axis g(n)|` over pairs inside the window.
pub fn axis_l1_norm(g: &Grid, axis: usize) -> f64 {
    partial_derivative(g, axis).map_or(0.0, |dg| dg.values.iter().map(|v| v.abs()).sum())
}

/// `Σ_n Σ_i |∂_i g(n)|` over pairs inside the window.
pub fn gradient_l1_norm(g: &Grid) -> f64 {
    (0..g.window.dim()).map(|i| axis_l1_norm(g, i)).sum()
}

/// `Σ_l |g(l+1) - g(l)|`.
pub fn total_variation_1d(g: &[f64]) -> f64 {
    g.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    pub variant: Variant,
    pub noncentered: NonCenteredOptions,
    /// Initial margin around the support hull.
    pub start_margin: i64,
    /// Relative change under which two successive windows count as converged.
    pub rel_tol: f64,
    pub budget: u128,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Centered,
            noncentered: NonCenteredOptions::default(),
            start_margin: 8,
            rel_tol: 1e-6,
            budget: DEFAULT_GRID_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientNorm {
    pub value: f64,
    /// Per-axis contributions; they sum to `value`.
    pub by_axis: Vec<f64>,
    pub window: LatticeWindow,
    /// The value on the previous (half-margin) window, when doubling was used.
    pub previous: Option<f64>,
    pub converged: bool,
    /// True when `value` is the full-lattice norm rather than a windowed estimate.
    pub exact: bool,
}

/// `‖∇Mf‖₁` on a fixed window.
pub fn windowed_gradient_norm(
    f: &SparseFunction,
    omega: &OmegaSpec,
    window: &LatticeWindow,
    variant: Variant,
    noncentered: NonCenteredOptions,
) -> Result<(Grid, Vec<f64>)> {
    let opts = GridOptions { variant, noncentered, ..GridOptions::default() };
    let grid = maximal_grid_with(f, omega, window, &opts)?;
    let by_axis = (0..window.dim()).map(|i| axis_l1_norm(&grid, i)).collect();
    Ok((grid, by_axis))
}

/// `‖∇Mf‖₁` over all of Z^d.
///
/// In `d = 1` the maximal function is monotone outside the support hull and tends to
/// zero, so the norm is the windowed variation plus the two boundary values: exact.
/// For `d >= 2` the window around the hull is doubled until two successive values agree
/// to `rel_tol`, or the point budget runs out (`converged = false`).
pub fn gradient_norm(f: &SparseFunction, omega: &OmegaSpec, opts: &GradientOptions) -> Result<GradientNorm> {
    let d = omega.dim();
    let Some(hull) = f.hull() else {
        return Ok(GradientNorm {
            value: 0.0,
            by_axis: vec![0.0; d],
            window: LatticeWindow::centered(0, d),
            previous: None,
            converged: true,
            exact: true,
        });
    };
    if d == 1 {
        let window = hull.expanded(1);
        let (grid, _) = windowed_gradient_norm(f, omega, &window, opts.variant, opts.noncentered)?;
        let value = total_variation_1d(&grid.values)
            + grid.values.first().expect("nonempty")
            + grid.values.last().expect("nonempty");
        return Ok(GradientNorm {
            value,
            by_axis: vec![value],
            window,
            previous: None,
            converged: true,
            exact: true,
        });
    }
    let mut margin = opts.start_margin.max(1);
    let mut previous: Option<f64> = None;
    loop {
        let window = hull.expanded(margin);
        let next = hull.expanded(2 * margin);
        let (_, by_axis) = windowed_gradient_norm(f, omega, &window, opts.variant, opts.noncentered)?;
        let value: f64 = by_axis.iter().sum();
        let converged = previous.is_some_and(|p| (value - p).abs() <= opts.rel_tol * value);
        if converged || next.len() > opts.budget {
            return Ok(GradientNorm { value, by_axis, window, previous, converged, exact: false });
        }
        previous = Some(value);
        margin *= 2;
    }
}

/// Local maxima and minima of a sequence, as indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremaSequence {
    pub maxima: Vec<usize>,
    pub minima: Vec<usize>,
}

impl ExtremaSequence {
    /// Strict interleaving `a_1 < b_1 < a_2 < ... < a_K`.
    pub fn alternates(&self) -> bool {
        if self.maxima.is_empty() {
            return self.minima.is_empty();
        }
        if self.maxima.len() != self.minima.len() + 1 {
            return false;
        }
        self.minima
            .iter()
            .enumerate()
            .all(|(j, &b)| self.maxima[j] < b && b < self.maxima[j + 1])
    }
}

/// Local extrema with the conventions `g(a-1) <= g(a) > g(a+1)` and
/// `g(b-1) >= g(b) < g(b+1)`, evaluated on interior indices.
///
/// Between two maxima with no minimum in between the sequence is non-increasing, so only
/// the first (larger) is kept; likewise for minima. Minima before the first or after the
/// last maximum are dropped, so the result always reads max, min, max, ..., max.
pub fn extract_extrema(g: &[f64]) -> Result<ExtremaSequence> {
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { point: vec![i as i64], value: g[i] });
    }
    #[derive(PartialEq)]
    enum Kind {
        Max,
        Min,
    }
    let mut marks: Vec<(usize, Kind)> = Vec::new();
    for i in 1..g.len().saturating_sub(1) {
        let kind = if g[i - 1] <= g[i] && g[i + 1] < g[i] {
            Kind::Max
        } else if g[i - 1] >= g[i] && g[i + 1] > g[i] {
            Kind::Min
        } else {
            continue;
        };
        if marks.last().is_some_and(|(_, k)| *k == kind) {
            continue;
        }
        marks.push((i, kind));
    }
    while marks.first().is_some_and(|m| m.1 == Kind::Min) {
        marks.remove(0);
    }
    while marks.last().is_some_and(|m| m.1 == Kind::Min) {
        marks.pop();
    }
    let mut out = ExtremaSequence::default();
    for (i, kind) in marks {
        match kind {
            Kind::Max => out.maxima.push(i),
            Kind::Min => out.minima.push(i),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Fixed coordinates of the line (all axes but `axis`).
    pub line: Point,
    pub axis: usize,
    pub lo: i64,
    pub hi: i64,
    /// Windowed `Σ_l |∂ Mf(n', l)|`.
    pub lhs: f64,
    /// `2 Σ_j (Mf(n', a_j) - Mf(n', b_j))`.
    pub rhs: f64,
    pub gap: f64,
    /// Certified bound on `Mf` at and beyond both window ends.
    pub eps_tail: f64,
    pub tol: f64,
    pub extrema: ExtremaSequence,
    pub passed: bool,
}

/// Upper bound for `Mf(n)` from `A_r f(n) <= ‖f‖₁ / N(r)` and `A_r f(n) = 0` while the
/// ball misses the support.
pub fn centered_decay_bound(f: &SparseFunction, omega: &OmegaSpec, counter: &LatticeCounter, n: &[i64]) -> f64 {
    let key = f
        .iter()
        .map(|(m, _)| {
            let v: Vec<i64> = m.iter().zip(n).map(|(a, b)| a - b).collect();
            omega.lattice_key(&v)
        })
        .fold(f64::INFINITY, f64::min);
    if key.is_infinite() {
        return 0.0;
    }
    f.l1_norm() / counter.count_key(key) as f64
}

/// Checks `Σ_l |∂_axis Mf| = 2 Σ_j {Mf(a_j) - Mf(b_j)}` on one line over `lo..=hi`.
/// The boundary terms are at most `2 eps_tail`; the check allows `4 eps_tail`.
pub fn variation_identity_check(
    f: &SparseFunction,
    omega: &OmegaSpec,
    line: &[i64],
    axis: usize,
    lo: i64,
    hi: i64,
) -> Result<IdentityReport> {
    let d = omega.dim();
    if line.len() + 1 != d || axis >= d {
        return Err(Error::DimensionMismatch { expected: d - 1, got: line.len() });
    }
    if lo >= hi {
        return Err(Error::InvalidWindow(format!("empty line window {lo}..{hi}")));
    }
    let point = |l: i64| {
        let mut p = line.to_vec();
        p.insert(axis, l);
        p
    };
    let window = LatticeWindow { lo: point(lo), hi: point(hi) };
    let op = CenteredOperator::new(f, omega, Some(&window))?;
    let values: Vec<f64> = (lo..=hi).map(|l| op.eval(&point(l)).value).collect();
    let lhs = total_variation_1d(&values);
    let extrema = extract_extrema(&values)?;
    let rhs = 2.0 * extrema.maxima.iter().map(|&a| values[a]).sum::<f64>()
        - 2.0 * extrema.minima.iter().map(|&b| values[b]).sum::<f64>();
    let eps_tail = centered_decay_bound(f, omega, op.counter(), &point(lo))
        .max(centered_decay_bound(f, omega, op.counter(), &point(hi)));
    let gap = (lhs - rhs).abs();
    let tol = 4.0 * eps_tail;
    Ok(IdentityReport {
        line: line.to_vec(),
        axis,
        lo,
        hi,
        lhs,
        rhs,
        gap,
        eps_tail,
        tol,
        passed: gap <= tol + 1e-12 * lhs.max(1.0),
        extrema,
    })
}
