//! Acceptance checks. Each criterion prints one PASS/FAIL line with its pinned tolerance;
//! the binary exits nonzero if any criterion fails.

mod common;

use std::time::Instant;

use common::{brute_centered, instance, TOL};
use maxlab::geometry::constants::sample_offsets;
use maxlab::geometry::{count_lattice, sandwich_holds, LatticeCounter};
use maxlab::maximal::{maximal_grid, CenteredOperator, Variant};
use maxlab::regularity::{gradient_norm, partial_derivative_sparse, variation_identity_check, GradientOptions};
use maxlab::verify::*;
use maxlab::{trial_rng, LatticeWindow, OmegaSpec, RandomFamily, SparseFunction};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn delta_closed_form() -> Outcome {
    let tol = 1e-12;
    let f = SparseFunction::delta(vec![0]);
    let g = maximal_grid(&f, &OmegaSpec::cube(1), &LatticeWindow::centered(100, 1), Variant::Centered).unwrap();
    let err = g
        .points()
        .map(|(p, v)| (v - 1.0 / (2 * p[0].abs() + 1) as f64).abs())
        .fold(0.0, f64::max);
    outcome(err <= tol, format!("max |Mf(n) - 1/(2|n|+1)| = {err:.1e} over |n| <= 100 (tol {tol:.0e})"))
}

fn cube_count_formula() -> Outcome {
    let mut rng = trial_rng(2, 0);
    let mut mismatches = 0;
    for d in 1..=3usize {
        let omega = OmegaSpec::cube(d);
        let counter = LatticeCounter::new(&omega, 20.0);
        for _ in 0..200 {
            let r: f64 = rng.random_range(0.0..=20.0);
            let expected = (2 * r.floor() as u64 + 1).pow(d as u32);
            if counter.count_radius(r) != expected || count_lattice(&omega, &vec![0.0; d], r) != expected {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over 3 x 200 radii in [0, 20] (exact)"))
}

fn sandwich_bounds() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut rng = trial_rng(3, 0);
    for d in 1..=2usize {
        for omega in [OmegaSpec::cube(d), OmegaSpec::cross(d), OmegaSpec::euclidean(d)] {
            let mut centers = sample_offsets(d);
            centers.extend((0..20).map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect()));
            for x0 in &centers {
                let mut r = 0.013;
                while r <= 50.0 {
                    checked += 1;
                    if !sandwich_holds(&omega, x0, r) {
                        failures.push(format!("{} {x0:?} r={r}", omega.descriptor()));
                    }
                    r += 0.377;
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} of {checked} held-out (x0, r) pairs violate the sandwich (rel tol 1e-12){}",
            failures.len(),
            failures.first().map(|s| format!("; first: {s}")).unwrap_or_default()
        ),
    )
}

/// Returns the serialized comparison table for the determinism check.
fn oracle_equivalence() -> (Outcome, String) {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for trial in 0..200u64 {
        let d = 1 + (trial % 2) as usize;
        let f = instance(4, trial, d, 8, if d == 1 { 12 } else { 4 });
        let omega = match trial % 3 {
            0 => OmegaSpec::cube(d),
            1 => OmegaSpec::cross(d),
            _ => OmegaSpec::euclidean(d),
        };
        let window = f.hull().unwrap().expanded(2);
        let op = CenteredOperator::new(&f, &omega, Some(&window)).unwrap();
        let values: Vec<f64> = maximal_grid(&f, &omega, &window, Variant::Centered).unwrap().values;
        for (i, n) in window.points().enumerate().step_by(5) {
            let fast = op.eval(&n).value;
            let slow = brute_centered(&f, &omega, &n);
            worst = worst.max((fast - slow).abs()).max((values[i] - slow).abs());
            rows.push((trial, n, fast, slow));
        }
    }
    let o = outcome(worst <= TOL, format!("{} points on 200 instances, max |fast - brute| = {worst:.1e} (tol 1e-12)", rows.len()));
    (o, serde_json::to_string(&rows).unwrap())
}

fn noncentered_variation() -> Outcome {
    let slack = 1e-9;
    let omega = OmegaSpec::cube(1);
    let opts = GradientOptions { variant: Variant::Noncentered, ..GradientOptions::default() };
    let family = RandomFamily::default();
    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..1000u64 {
        let f = family.sample(1, &mut trial_rng(5, trial));
        let var_mf = gradient_norm(&f, &omega, &opts).unwrap();
        assert!(var_mf.exact);
        let var_f = partial_derivative_sparse(&f, 0).unwrap().l1_norm();
        worst_excess = worst_excess.max(var_mf.value - var_f);
    }
    let delta = SparseFunction::delta(vec![0]);
    let var_delta = gradient_norm(&delta, &omega, &opts).unwrap().value;
    let delta_ok = (var_delta - 2.0).abs() <= 1e-12;
    outcome(
        worst_excess <= slack && delta_ok,
        format!(
            "max Var(M~f) - Var(f) = {worst_excess:.2e} over 1000 f (slack {slack:.0e}); Var(M~delta) = {var_delta} vs 2"
        ),
    )
}

fn sum_identity() -> Outcome {
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    for trial in 0..100u64 {
        let d = 1 + (trial % 2) as usize;
        let omega = if trial % 4 < 2 { OmegaSpec::cube(d) } else { OmegaSpec::cross(d) };
        let f = instance(6, trial, d, 8, 8);
        let mut rng = trial_rng(6, 1000 + trial);
        let (line, axis) = if d == 1 {
            (vec![], 0)
        } else {
            let axis = rng.random_range(0..2usize);
            let pts: Vec<&Vec<i64>> = f.iter().map(|(p, _)| p).collect();
            let p = pts[rng.random_range(0..pts.len())];
            (vec![p[1 - axis]], axis)
        };
        let hull = f.hull().unwrap();
        let r = variation_identity_check(&f, &omega, &line, axis, hull.lo[axis] - 40, hull.hi[axis] + 40).unwrap();
        if !r.passed {
            failures += 1;
        }
        if r.tol > 0.0 {
            worst_ratio = worst_ratio.max(r.gap / r.tol);
        }
    }
    outcome(failures == 0, format!("{failures} of 100 lines exceed 4 eps_tail; max gap / (4 eps_tail) = {worst_ratio:.3}"))
}

fn summability() -> (Outcome, String) {
    let truncation = 1000;
    let mut reports = Vec::new();
    let mut pass = true;
    let mut parts = Vec::new();
    for d in 1..=2usize {
        let c = SummabilityConstants::of(&OmegaSpec::cube(d));
        let rep = summability_lemma_check(&c, truncation, 100, 200, 500, 7).unwrap();
        let ins_fail = rep.insertions.iter().filter(|i| !i.holds).count();
        let seq_fail = rep.sequences.iter().filter(|s| !s.holds).count();
        pass &= rep.all_pass;
        parts.push(format!("d={d}: {ins_fail}/500 insertion and {seq_fail}/200 sequence failures (slack {:.2e})", rep.slack));
        reports.push(rep);
    }
    (outcome(pass, format!("T = {truncation}, J = 100; {}", parts.join("; "))), serde_json::to_string(&reports).unwrap())
}

fn boundedness() -> (Outcome, String) {
    let mut reports = Vec::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for omega in [OmegaSpec::cube(1), OmegaSpec::cube(2), OmegaSpec::cross(2)] {
        let ctx = BoundednessContext::new(&omega, BoundednessOptions::default()).unwrap();
        let rep = boundedness_sweep(&ctx, &RandomFamily::default(), 500, 8).unwrap();
        pass &= rep.all_pass;
        parts.push(format!(
            "{}: max ratio {:.3} (certified {:.3}) <= {:.3}",
            omega.descriptor(),
            rep.max_ratio,
            rep.max_ratio_upper,
            rep.bound
        ));
        reports.push(rep);
    }
    (outcome(pass, format!("500 f each; {}", parts.join("; "))), serde_json::to_string(&reports).unwrap())
}

fn sharpness_construction() -> Outcome {
    let out = remark2_construct(10).unwrap();
    let rep = remark2_verify(&out, &OmegaSpec::cube(1)).unwrap();
    let conditions_ok = rep.conditions.iter().all(|c| c.holds);
    let max_err = rep
        .rows
        .iter()
        .map(|r| {
            (r.mg_at - r.f_n).abs().max((r.mg_after - r.f_n / 3.0).abs()).max((r.derivative - 2.0 * r.f_n / 3.0).abs())
        })
        .fold(0.0, f64::max);
    outcome(
        rep.all_pass && conditions_ok,
        format!(
            "a = {:?}; {} conditions hold: {conditions_ok}; {} identities, max error {max_err:.1e} (tol 1e-12); p=0.9 sums increase: {}; p=1 sum {:.4} <= {:.4}",
            out.a_seq,
            rep.conditions.len(),
            rep.identity_checks,
            rep.growth,
            rep.partial_sums[2].sums.last().unwrap(),
            rep.p1_limit
        ),
    )
}

fn continuity() -> Outcome {
    let f = SparseFunction::from_entries(1, [(vec![0], 1.0), (vec![3], 1.0)]).unwrap();
    let schedule = geometric_schedule(&[1], 30);
    let options = ContinuityOptions::around(&f, 1000, 10, 1e-6);
    let rep = continuity_experiment(&f, &schedule, &OmegaSpec::cube(1), &options).unwrap();
    outcome(
        rep.pass,
        format!(
            "gap at k=30 = {:.2e} (tol 1e-6, window hull +- 1000); k0 = {:?} from min margin {:.3e}; inclusion on |n| <= 10 for k >= k0: {}",
            rep.final_gap, rep.k0, rep.min_margin, rep.inclusion_past_k0
        ),
    )
}

fn with_threads<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(job)
}

fn determinism() -> Outcome {
    let runs = |threads| {
        with_threads(threads, || (oracle_equivalence().1, summability().1, boundedness().1))
    };
    let a = runs(1);
    let b = runs(4);
    let same = [a.0 == b.0, a.1 == b.1, a.2 == b.2];
    outcome(
        same.iter().all(|&s| s),
        format!("criteria 4, 7, 8 byte-identical with 1 and 4 threads: {same:?}"),
    )
}

fn main() {
    type Check = Box<dyn Fn() -> Outcome>;
    let checks: Vec<(&str, Check)> = vec![
        ("delta closed form", Box::new(delta_closed_form)),
        ("cube lattice count", Box::new(cube_count_formula)),
        ("sandwich bounds", Box::new(sandwich_bounds)),
        ("centered oracle equivalence", Box::new(|| oracle_equivalence().0)),
        ("non-centered variation in d=1", Box::new(noncentered_variation)),
        ("extrema sum identity", Box::new(sum_identity)),
        ("summability lemma", Box::new(|| summability().0)),
        ("boundedness certificate", Box::new(|| boundedness().0)),
        ("sharpness construction", Box::new(sharpness_construction)),
        ("continuity under perturbation", Box::new(continuity)),
        ("determinism across thread counts", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{status}] {:>2}. {name}: {} ({:.2}s)", i + 1, o.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria pass", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
