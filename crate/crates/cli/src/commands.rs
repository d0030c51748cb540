//! One function per subcommand. Each returns whether its checks passed; errors abort.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use maxlab::geometry::{count_lattice, sandwich_holds};
use maxlab::maximal::{maximal_grid_with, GridOptions, NonCenteredOptions, DEFAULT_GRID_BUDGET};
use maxlab::regularity::{axis_l1_norm, gradient_norm, variation_identity_check, GradientOptions};
use maxlab::verify::{
    boundedness_certificate, boundedness_sweep, continuity_experiment, geometric_schedule,
    remark2_construct, remark2_verify, summability_lemma_check, summability_sum, AxisConstants,
    BoundednessContext, BoundednessOptions, ContinuityOptions, SummabilityConstants,
    SummabilityInput, SweepReport, SweepRow,
};
use maxlab::{trial_rng, Grid, LatticeWindow, OmegaSpec, RandomFamily, SparseFunction};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format};
use crate::output::{emit, json_bytes, num, Table};

/// Margin around the support hull when no window is given.
pub const DEFAULT_MARGIN: i64 = 8;
/// Point budget of `gradient-norm` unless overridden.
pub const DEFAULT_GRADIENT_BUDGET: u128 = 1 << 20;

pub fn read_function(path: &Path, dim: usize) -> Result<SparseFunction> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f = SparseFunction::parse_with_dim(&text, Some(dim)).with_context(|| format!("in {}", path.display()))?;
    if f.dim() != dim {
        bail!("{} holds a {}-dimensional function but the body is {dim}-dimensional", path.display(), f.dim());
    }
    Ok(f)
}

/// Dimension declared by the header of a function file, if any.
pub fn peek_dim(path: &Path) -> Result<Option<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SparseFunction::parse(&text).ok().map(|f| f.dim()))
}

fn noncentered(cfg: &ExperimentConfig) -> NonCenteredOptions {
    NonCenteredOptions { refinement: cfg.truncation.q, require_exact: false }
}

fn default_window(f: &SparseFunction, cfg: &ExperimentConfig) -> LatticeWindow {
    cfg.window.clone().unwrap_or_else(|| match f.hull() {
        Some(h) => h.expanded(DEFAULT_MARGIN),
        None => LatticeWindow::centered(DEFAULT_MARGIN, cfg.dim),
    })
}

fn key_value_csv(rows: &[(String, String)]) -> Result<Vec<u8>> {
    let mut t = Table::new(["quantity", "value"])?;
    for (k, v) in rows {
        t.row([k, v])?;
    }
    t.into_bytes()
}

#[derive(Serialize)]
struct MaximalOutput<'a> {
    config: &'a ExperimentConfig,
    l1: f64,
    windowed_gradient_norm: f64,
    /// Largest value on the window boundary.
    boundary_max: f64,
    converged: bool,
    grid: Grid,
}

pub fn maximal(cfg: &ExperimentConfig, input: &Path, budget: Option<u128>) -> Result<bool> {
    let omega = cfg.omega_spec()?;
    let f = read_function(input, cfg.dim)?;
    if f.is_zero() {
        eprintln!("warning: {} defines the zero function; the grid is identically zero", input.display());
    }
    let window = default_window(&f, cfg);
    let opts = GridOptions {
        variant: cfg.variant,
        noncentered: noncentered(cfg),
        budget: budget.unwrap_or(DEFAULT_GRID_BUDGET),
    };
    let grid = maximal_grid_with(&f, &omega, &window, &opts)?;
    let windowed: f64 = (0..cfg.dim).map(|i| axis_l1_norm(&grid, i)).sum();
    let boundary_max = grid
        .points()
        .filter(|(n, _)| n.iter().enumerate().any(|(i, &x)| x == window.lo[i] || x == window.hi[i]))
        .map(|(_, v)| v)
        .fold(0.0, f64::max);
    let l1 = f.l1_norm();
    let converged = boundary_max <= cfg.tolerances.convergence * l1;
    eprintln!(
        "l1 = {l1}, windowed gradient norm = {windowed}, boundary max = {boundary_max:e}, converged = {converged}"
    );
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&MaximalOutput {
            config: cfg,
            l1,
            windowed_gradient_norm: windowed,
            boundary_max,
            converged,
            grid,
        })?,
        Format::Csv => {
            let mut header: Vec<String> = (1..=cfg.dim).map(|i| format!("n{i}")).collect();
            header.push("value".into());
            let mut t = Table::new(&header)?;
            for (n, v) in grid.points() {
                let mut cells: Vec<String> = n.iter().map(|c| c.to_string()).collect();
                cells.push(num(v));
                t.row(&cells)?;
            }
            t.into_bytes()?
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(true)
}

pub fn gradient(cfg: &ExperimentConfig, input: &Path, budget: Option<u128>) -> Result<bool> {
    let omega = cfg.omega_spec()?;
    let f = read_function(input, cfg.dim)?;
    let opts = GradientOptions {
        variant: cfg.variant,
        noncentered: noncentered(cfg),
        rel_tol: cfg.tolerances.convergence,
        budget: budget.unwrap_or(DEFAULT_GRADIENT_BUDGET),
        ..GradientOptions::default()
    };
    let g = match &cfg.window {
        Some(w) => {
            let (_, by_axis) =
                maxlab::regularity::windowed_gradient_norm(&f, &omega, w, cfg.variant, noncentered(cfg))?;
            maxlab::regularity::GradientNorm {
                value: by_axis.iter().sum(),
                by_axis,
                window: w.clone(),
                previous: None,
                converged: false,
                exact: false,
            }
        }
        None => gradient_norm(&f, &omega, &opts)?,
    };
    let l1 = f.l1_norm();
    eprintln!("l1 = {l1}, gradient norm = {}, converged = {}, exact = {}", g.value, g.converged, g.exact);
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&json!({ "config": cfg, "l1": l1, "gradient_norm": g }))?,
        Format::Csv => {
            let mut rows = vec![("l1".to_string(), num(l1)), ("gradient_norm".into(), num(g.value))];
            for (i, v) in g.by_axis.iter().enumerate() {
                rows.push((format!("axis_{i}"), num(*v)));
            }
            rows.push(("previous".into(), g.previous.map(num).unwrap_or_default()));
            rows.push(("converged".into(), g.converged.to_string()));
            rows.push(("exact".into(), g.exact.to_string()));
            rows.push(("window_lo".into(), format!("{:?}", g.window.lo)));
            rows.push(("window_hi".into(), format!("{:?}", g.window.hi)));
            key_value_csv(&rows)?
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(true)
}

fn boundedness_context(cfg: &ExperimentConfig, omega: &OmegaSpec) -> Result<BoundednessContext> {
    let options = BoundednessOptions {
        variant: cfg.variant,
        noncentered: noncentered(cfg),
        c_tilde_truncation: cfg.truncation.t,
        ..BoundednessOptions::default()
    };
    Ok(BoundednessContext::new(omega, options)?)
}

pub struct SweepArgs {
    pub input: Option<PathBuf>,
    pub family: RandomFamily,
}

pub fn sweep(cfg: &ExperimentConfig, args: &SweepArgs) -> Result<bool> {
    let omega = cfg.omega_spec()?;
    let ctx = boundedness_context(cfg, &omega)?;
    let report = match &args.input {
        Some(path) => {
            let f = read_function(path, cfg.dim)?;
            let c = boundedness_certificate(&f, &omega, ctx.options().clone())?;
            let row = SweepRow {
                trial: 0,
                support_size: f.support_size(),
                l1: c.l1,
                gradient_norm: c.gradient_norm,
                ratio: c.ratio,
                ratio_upper: c.ratio_upper,
                pass: c.pass,
            };
            SweepReport {
                dim: cfg.dim,
                variant: cfg.variant,
                seed: cfg.seed.unwrap_or(0),
                family: args.family,
                c_tilde: ctx.axes().to_vec(),
                bound: ctx.bound(),
                max_ratio: row.ratio,
                max_ratio_upper: row.ratio_upper,
                all_pass: row.pass,
                rows: vec![row],
            }
        }
        None => {
            let seed = cfg.require_seed()?;
            boundedness_sweep(&ctx, &args.family, cfg.trials_or(100), seed)?
        }
    };
    eprintln!(
        "{} trials: max ratio {} (certified {}), bound {}, all pass = {}",
        report.rows.len(),
        report.max_ratio,
        report.max_ratio_upper,
        report.bound,
        report.all_pass
    );
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&json!({ "config": cfg, "report": report }))?,
        Format::Csv => {
            let mut t = Table::new(["trial", "support_size", "l1", "gradient_norm", "ratio", "ratio_upper", "bound", "pass"])?;
            for r in &report.rows {
                t.row([
                    r.trial.to_string(),
                    r.support_size.to_string(),
                    num(r.l1),
                    num(r.gradient_norm),
                    num(r.ratio),
                    num(r.ratio_upper),
                    num(report.bound),
                    r.pass.to_string(),
                ])?;
            }
            t.row([
                "summary".to_string(),
                String::new(),
                String::new(),
                String::new(),
                num(report.max_ratio),
                num(report.max_ratio_upper),
                num(report.bound),
                report.all_pass.to_string(),
            ])?;
            t.into_bytes()?
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(report.all_pass)
}

pub struct ContinuityArgs {
    pub input: Option<PathBuf>,
    pub perturb: Option<Vec<i64>>,
    pub steps: usize,
    pub gap_margin: Option<i64>,
    pub inclusion_half: i64,
}

/// `δ_0 + δ_{3 e_1}`.
fn default_continuity_function(d: usize) -> SparseFunction {
    let mut far = vec![0; d];
    far[0] = 3;
    SparseFunction::from_entries(d, [(vec![0; d], 1.0), (far, 1.0)]).expect("finite values")
}

fn run_continuity(cfg: &ExperimentConfig, args: &ContinuityArgs) -> Result<maxlab::verify::ContinuityReport> {
    let omega = cfg.omega_spec()?;
    let f = match &args.input {
        Some(p) => read_function(p, cfg.dim)?,
        None => default_continuity_function(cfg.dim),
    };
    let point = match &args.perturb {
        Some(p) if p.len() != cfg.dim => bail!("perturbation point has {} coordinates, expected {}", p.len(), cfg.dim),
        Some(p) => p.clone(),
        None => {
            let mut e1 = vec![0; cfg.dim];
            e1[0] = 1;
            e1
        }
    };
    let margin = args.gap_margin.unwrap_or(if cfg.dim == 1 { 1000 } else { 16 });
    let mut options = ContinuityOptions::around(&f, margin, args.inclusion_half, cfg.tolerances.convergence);
    if let Some(w) = &cfg.window {
        options.inclusion_window = w.clone();
    }
    let schedule = geometric_schedule(&point, args.steps);
    Ok(continuity_experiment(&f, &schedule, &omega, &options)?)
}

pub fn continuity(cfg: &ExperimentConfig, args: &ContinuityArgs) -> Result<bool> {
    let report = run_continuity(cfg, args)?;
    eprintln!(
        "final gap {:e} (tol {:e}), k0 = {:?}, inclusion past k0 = {}, pass = {}",
        report.final_gap, cfg.tolerances.convergence, report.k0, report.inclusion_past_k0, report.pass
    );
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&json!({ "config": cfg, "report": report }))?,
        Format::Csv => {
            let mut t = Table::new(["k", "l1", "linf", "gap", "norm_gap", "included", "past_k0"])?;
            for r in &report.rows {
                t.row([
                    r.k.to_string(),
                    num(r.l1),
                    num(r.linf),
                    num(r.gap),
                    num(r.norm_gap),
                    r.included.to_string(),
                    r.past_k0.to_string(),
                ])?;
            }
            t.into_bytes()?
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(report.pass)
}

pub fn summability(cfg: &ExperimentConfig, sequence: Option<&[i64]>) -> Result<bool> {
    let omega = cfg.omega_spec()?;
    let ctx = boundedness_context(cfg, &omega)?;
    let axes: Vec<AxisConstants> = ctx.axes().to_vec();
    let mut rows: Vec<(String, String)> = Vec::new();
    for a in &axes {
        let c = &a.c_tilde;
        rows.push((format!("c_tilde_head[{}]", a.axis), c.head.to_string()));
        rows.push((format!("c_tilde_body[{}]", a.axis), num(c.body)));
        rows.push((format!("c_tilde_tail[{}]", a.axis), num(c.tail)));
        rows.push((format!("c_tilde[{}]", a.axis), num(c.total)));
    }
    rows.push(("bound".into(), num(ctx.bound())));
    let mut seq_json = Value::Null;
    if let Some(seq) = sequence {
        let constants = axes[0].constants;
        let value = summability_sum(&SummabilityInput::new(seq.to_vec(), constants, cfg.truncation.t)?)?;
        let half = seq.iter().map(|a| a.abs()).max().unwrap_or(0).max(cfg.truncation.j);
        let reference = summability_sum(&SummabilityInput::consecutive(half, constants, cfg.truncation.t)?)?;
        rows.push(("sequence_value".into(), num(value.value)));
        rows.push(("sequence_tail_bound".into(), num(value.tail_bound)));
        rows.push(("consecutive_value".into(), num(reference.value)));
        rows.push(("consecutive_half_range".into(), half.to_string()));
        eprintln!("S(sequence) = {}, S(consecutive, |j| <= {half}) = {}", value.value, reference.value);
        seq_json = json!({ "value": value, "consecutive": reference, "consecutive_half_range": half });
    }
    eprintln!("bound 2 sum_i C~_i = {}", ctx.bound());
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&json!({ "config": cfg, "axes": axes, "bound": ctx.bound(), "sequence": seq_json }))?,
        Format::Csv => key_value_csv(&rows)?,
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(true)
}

pub fn remark2(cfg: &ExperimentConfig, terms: usize) -> Result<bool> {
    let out = remark2_construct(terms)?;
    let report = remark2_verify(&out, &OmegaSpec::cube(1))?;
    eprintln!(
        "a = {:?}; {} identity checks, {} failures; pass = {}",
        out.a_seq,
        report.identity_checks,
        report.failures.len(),
        report.all_pass
    );
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&json!({ "config": cfg, "construction": out, "report": report }))?,
        Format::Csv => {
            let mut t = Table::new(["n", "a_n", "f_n", "mg_at", "mg_after", "derivative", "holds"])?;
            for r in &report.rows {
                t.row([
                    r.n.to_string(),
                    r.a_n.to_string(),
                    num(r.f_n),
                    num(r.mg_at),
                    num(r.mg_after),
                    num(r.derivative),
                    r.holds.to_string(),
                ])?;
            }
            t.into_bytes()?
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(report.all_pass)
}

pub fn constants(cfg: &ExperimentConfig) -> Result<bool> {
    let omega = cfg.omega_spec()?;
    let c = omega.constants();
    let mut rows = vec![
        ("body".to_string(), omega.descriptor().to_string()),
        ("dim".into(), cfg.dim.to_string()),
        ("volume".into(), num(c.volume)),
        ("lambda".into(), num(c.lambda)),
        ("c1".into(), num(c.c1)),
        ("c2".into(), num(c.c2)),
        ("certified_radius".into(), num(c.certified_radius)),
        ("normalization_scale".into(), num(omega.normalization_scale())),
    ];
    let ctx = boundedness_context(cfg, &omega)?;
    for a in ctx.axes() {
        rows.push((format!("c_tilde[{}]", a.axis), num(a.c_tilde.total)));
    }
    rows.push(("bound".into(), num(ctx.bound())));
    eprintln!("{}: c1 = {}, c2 = {}, bound = {}", omega.descriptor(), c.c1, c.c2, ctx.bound());
    let bytes = match cfg.format_or(Format::Csv) {
        Format::Json => json_bytes(&json!({
            "config": cfg,
            "constants": c,
            "normalization_scale": omega.normalization_scale(),
            "axes": ctx.axes(),
            "bound": ctx.bound(),
        }))?,
        Format::Csv => key_value_csv(&rows)?,
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Identity,
    Summability,
    Boundedness,
    Remark2,
    Continuity,
    All,
}

impl Suite {
    const EACH: [Suite; 6] =
        [Suite::Geometry, Suite::Identity, Suite::Summability, Suite::Boundedness, Suite::Remark2, Suite::Continuity];

    fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Identity => "identity",
            Suite::Summability => "summability",
            Suite::Boundedness => "boundedness",
            Suite::Remark2 => "remark2",
            Suite::Continuity => "continuity",
            Suite::All => "all",
        }
    }

    fn randomized(self) -> bool {
        matches!(self, Suite::Identity | Suite::Summability | Suite::Boundedness)
    }
}

#[derive(Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    /// What each checked quantity is compared against.
    pub tolerance: Value,
    /// Windows, truncations and tail bounds behind the numbers.
    pub truncation: Value,
    pub details: Value,
    pub seconds: f64,
}

#[derive(Serialize)]
pub struct VerificationReport<'a> {
    pub command: &'static str,
    pub config: &'a ExperimentConfig,
    pub suites: Vec<SuiteResult>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
    pub seconds: f64,
}

pub struct VerifyArgs {
    pub suites: Vec<Suite>,
    pub terms: usize,
    pub continuity: ContinuityArgs,
}

pub fn verify(cfg: &ExperimentConfig, args: &VerifyArgs) -> Result<bool> {
    let start = Instant::now();
    let mut selected: Vec<Suite> = if args.suites.is_empty() || args.suites.contains(&Suite::All) {
        Suite::EACH.to_vec()
    } else {
        args.suites.clone()
    };
    selected.dedup();
    if selected.iter().any(|s| s.randomized()) {
        cfg.require_seed()?;
    }
    let mut suites = Vec::new();
    for suite in selected {
        let t0 = Instant::now();
        let (pass, tolerance, truncation, details) = match suite {
            Suite::Geometry => geometry_suite(cfg)?,
            Suite::Identity => identity_suite(cfg)?,
            Suite::Summability => summability_suite(cfg)?,
            Suite::Boundedness => boundedness_suite(cfg)?,
            Suite::Remark2 => remark2_suite(args.terms)?,
            Suite::Continuity => continuity_suite(cfg, &args.continuity)?,
            Suite::All => unreachable!("expanded above"),
        };
        let seconds = t0.elapsed().as_secs_f64();
        eprintln!("[{}] {} ({seconds:.2}s)", if pass { "PASS" } else { "FAIL" }, suite.name());
        suites.push(SuiteResult { name: suite.name(), pass, tolerance, truncation, details, seconds });
    }
    let failed = suites.iter().filter(|s| !s.pass).count();
    let report = VerificationReport {
        command: "verify",
        config: cfg,
        passed: suites.len() - failed,
        failed,
        pass: failed == 0,
        suites,
        seconds: start.elapsed().as_secs_f64(),
    };
    let bytes = match cfg.format_or(Format::Json) {
        Format::Json => json_bytes(&report)?,
        Format::Csv => {
            let mut t = Table::new(["suite", "pass", "seconds"])?;
            for s in &report.suites {
                t.row([s.name.to_string(), s.pass.to_string(), format!("{:.3}", s.seconds)])?;
            }
            t.into_bytes()?
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(report.pass)
}

type SuiteOutcome = (bool, Value, Value, Value);

/// Sandwich bounds on held-out centers and radii, plus the exact cube count formula.
fn geometry_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    let omega = cfg.omega_spec()?;
    let c = omega.constants();
    let d = cfg.dim;
    // centers off the fitting grid, radii off every fitting breakpoint
    let offsets = [0.0, 0.1, 0.37, 0.62, 0.9];
    let centers: Vec<Vec<f64>> = (0..offsets.len().pow(d as u32))
        .map(|mut i| {
            (0..d)
                .map(|_| {
                    let x = offsets[i % offsets.len()];
                    i /= offsets.len();
                    x
                })
                .collect()
        })
        .collect();
    let mut checked = 0u64;
    let mut failures = Vec::new();
    let mut r = 0.013;
    while r <= c.certified_radius {
        for x0 in &centers {
            checked += 1;
            if !sandwich_holds(&omega, x0, r) {
                failures.push(json!({ "center": x0, "radius": r }));
            }
        }
        r += 0.377;
    }
    let mut count_mismatches = 0u64;
    if omega.is_cube() {
        let origin = vec![0.0; d];
        for k in 0..=200 {
            let r = k as f64 * 0.1;
            let expected = (2 * r.floor() as u64 + 1).pow(d as u32);
            if count_lattice(&omega, &origin, r) != expected {
                count_mismatches += 1;
            }
        }
    }
    let pass = failures.is_empty() && count_mismatches == 0;
    Ok((
        pass,
        json!({ "sandwich": "C (r - c1)_+^d <= N(x0, r) <= C (r + c1)^d, relative 1e-12", "cube_count": "exact" }),
        json!({ "certified_radius": c.certified_radius, "radius_step": 0.377 }),
        json!({
            "body": omega.descriptor().to_string(),
            "c1": c.c1,
            "c2": c.c2,
            "volume": c.volume,
            "lambda": c.lambda,
            "sandwich_checked": checked,
            "sandwich_failures": failures,
            "cube_count_mismatches": count_mismatches,
        }),
    ))
}

/// Variation identity on random lines through random functions.
fn identity_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    let omega = cfg.omega_spec()?;
    let seed = cfg.require_seed()?;
    let trials = cfg.trials_or(100);
    let family = RandomFamily::default();
    let margin = 40;
    let factor = cfg.tolerances.identity;
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let f = family.sample(cfg.dim, &mut rng);
        let hull = f.hull().expect("the family has nonempty support");
        let axis = rng.random_range(0..cfg.dim);
        let line: Vec<i64> = (0..cfg.dim)
            .filter(|&i| i != axis)
            .map(|i| rng.random_range(hull.lo[i]..=hull.hi[i]))
            .collect();
        let r = variation_identity_check(&f, &omega, &line, axis, hull.lo[axis] - margin, hull.hi[axis] + margin)?;
        let tol = factor * r.eps_tail;
        if r.gap > tol {
            failures.push(json!({ "trial": trial, "gap": r.gap, "tol": tol }));
        }
        if tol > 0.0 {
            worst = worst.max(r.gap / tol);
        }
    }
    Ok((
        failures.is_empty(),
        json!({ "gap": format!("<= {factor} eps_tail") }),
        json!({
            "operator": "centered",
            "line_window": format!("support hull +- {margin}"),
            "eps_tail": "||f||_1 / N(r) at the window ends",
        }),
        json!({ "trials": trials, "max_gap_over_tol": worst, "failures": failures }),
    ))
}

fn summability_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    let omega = cfg.omega_spec()?;
    let seed = cfg.require_seed()?;
    let trials = cfg.trials_or(200);
    let constants = SummabilityConstants::for_variant(&omega, cfg.variant);
    let t = cfg.truncation;
    let report = summability_lemma_check(&constants, t.t, t.j, trials, trials, seed)?;
    Ok((
        report.all_pass,
        json!({ "sequence": "S(a) <= S(consecutive) + slack", "slack": report.slack, "insertion": "monotone up to the same slack" }),
        json!({ "T": t.t, "J": t.j }),
        serde_json::to_value(&report)?,
    ))
}

fn boundedness_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
    let omega = cfg.omega_spec()?;
    let seed = cfg.require_seed()?;
    let ctx = boundedness_context(cfg, &omega)?;
    let report = boundedness_sweep(&ctx, &RandomFamily::default(), cfg.trials_or(100), seed)?;
    Ok((
        report.all_pass,
        json!({ "ratio_upper": format!("<= {}", report.bound) }),
        json!({
            "c_tilde_T": cfg.truncation.t,
            "window": "exact in d = 1; ball of radius R around the support with a certified tail for d >= 2",
        }),
        serde_json::to_value(&report)?,
    ))
}

fn remark2_suite(terms: usize) -> Result<SuiteOutcome> {
    let out = remark2_construct(terms)?;
    let report = remark2_verify(&out, &OmegaSpec::cube(1))?;
    Ok((
        report.all_pass,
        json!({ "identities": maxlab::verify::remark2::IDENTITY_TOL }),
        json!({ "terms": terms, "norm_terms": maxlab::verify::remark2::NORM_TERMS }),
        json!({ "a_seq": out.a_seq, "report": report }),
    ))
}

fn continuity_suite(cfg: &ExperimentConfig, args: &ContinuityArgs) -> Result<SuiteOutcome> {
    let report = run_continuity(cfg, args)?;
    Ok((
        report.pass,
        json!({ "final_gap": cfg.tolerances.convergence }),
        json!({
            "operator": "centered",
            "steps": args.steps,
            "gap_window": report.options.gap_window,
            "inclusion_window": report.options.inclusion_window,
            "norms_exact": report.norms_exact,
        }),
        serde_json::to_value(&report)?,
    ))
}
