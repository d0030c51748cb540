mod common;

use common::TOL;
use maxlab::maximal::{maximal_grid, Variant};
use maxlab::regularity::{extract_extrema, gradient_l1_norm, total_variation_1d, windowed_gradient_norm};
use maxlab::{LatticeWindow, OmegaSpec, SparseFunction};
use proptest::prelude::*;

fn function(d: usize, max_points: usize, w: i64) -> impl Strategy<Value = SparseFunction> {
    prop::collection::vec((prop::collection::vec(-w..=w, d), -4.0f64..4.0), 1..=max_points)
        .prop_map(move |entries| SparseFunction::from_entries(d, entries).unwrap())
        .prop_filter("nonzero", |f| !f.is_zero())
}

fn body(d: usize) -> impl Strategy<Value = OmegaSpec> {
    if d == 1 {
        Just(OmegaSpec::cube(1)).boxed()
    } else {
        prop_oneof![Just(OmegaSpec::cube(d)), Just(OmegaSpec::cross(d)), Just(OmegaSpec::euclidean(d))].boxed()
    }
}

fn case() -> impl Strategy<Value = (SparseFunction, OmegaSpec)> {
    (1usize..=2).prop_flat_map(|d| (function(d, 6, 6), body(d)))
}

fn grid(f: &SparseFunction, omega: &OmegaSpec, variant: Variant) -> Vec<f64> {
    let w = LatticeWindow::centered(8, omega.dim());
    maximal_grid(f, omega, &w, variant).unwrap().values
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Centered), Just(Variant::Noncentered)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn positive_homogeneity((f, omega) in case(), c in -5.0f64..5.0) {
        let base = grid(&f, &omega, Variant::Centered);
        let scaled = grid(&f.scaled(c), &omega, Variant::Centered);
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!(close(c.abs() * a, *b));
        }
    }

    #[test]
    fn sublinearity((f, omega) in case(), seed in 0u64..1000) {
        let g = common::instance(seed, 0, omega.dim(), 5, 6);
        let sum = f.plus(&g).unwrap();
        let (mf, mg, ms) = (grid(&f, &omega, Variant::Centered), grid(&g, &omega, Variant::Centered), grid(&sum, &omega, Variant::Centered));
        for i in 0..mf.len() {
            prop_assert!(ms[i] <= mf[i] + mg[i] + TOL);
        }
    }

    #[test]
    fn translation_equivariance((f, omega) in case(), shift in prop::collection::vec(-5i64..=5, 2)) {
        let d = omega.dim();
        let v = &shift[..d];
        let w = LatticeWindow::centered(6, d);
        let moved = maximal_grid(&f.shifted(v), &omega, &w, Variant::Centered).unwrap();
        let back = LatticeWindow {
            lo: w.lo.iter().zip(v).map(|(a, b)| a - b).collect(),
            hi: w.hi.iter().zip(v).map(|(a, b)| a - b).collect(),
        };
        let orig = maximal_grid(&f, &omega, &back, Variant::Centered).unwrap();
        prop_assert_eq!(moved.values, orig.values);
    }

    #[test]
    fn pointwise_domination(f in (1usize..=2).prop_flat_map(|d| function(d, 6, 6))) {
        let omega = OmegaSpec::cube(f.dim());
        let w = LatticeWindow::centered(8, f.dim());
        let centered = grid(&f, &omega, Variant::Centered);
        let nc = grid(&f, &omega, Variant::Noncentered);
        for ((p, m), n) in w.points().zip(&centered).zip(&nc) {
            prop_assert!(*m >= f.get(&p).abs() - TOL);
            prop_assert!(*n >= *m - TOL);
        }
    }

    #[test]
    fn one_dimensional_gradient_is_total_variation(f in function(1, 6, 10), v in variant()) {
        let omega = OmegaSpec::cube(1);
        let g = maximal_grid(&f, &omega, &LatticeWindow::centered(15, 1), v).unwrap();
        prop_assert!(close(gradient_l1_norm(&g), total_variation_1d(&g.values)));
    }

    #[test]
    fn gradient_norm_grows_with_the_window((f, omega) in case(), a in 1i64..6, b in 1i64..6) {
        let (small, large) = (a.min(b), a.max(b) + 1);
        let hull = f.hull().unwrap();
        let (_, s) = windowed_gradient_norm(&f, &omega, &hull.expanded(small), Variant::Centered, Default::default()).unwrap();
        let (_, l) = windowed_gradient_norm(&f, &omega, &hull.expanded(large), Variant::Centered, Default::default()).unwrap();
        prop_assert!(s.iter().sum::<f64>() <= l.iter().sum::<f64>() + TOL);
    }

    #[test]
    fn extrema_alternate_and_satisfy_definitions(values in prop::collection::vec(0u8..5, 0..40)) {
        let g: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let ex = extract_extrema(&g).unwrap();
        prop_assert!(ex.alternates());
        for &a in &ex.maxima {
            prop_assert!(a > 0 && a + 1 < g.len());
            prop_assert!(g[a - 1] <= g[a] && g[a + 1] < g[a]);
        }
        for &b in &ex.minima {
            prop_assert!(b > 0 && b + 1 < g.len());
            prop_assert!(g[b - 1] >= g[b] && g[b + 1] > g[b]);
        }
    }

    #[test]
    fn text_round_trip(f in (1usize..=3).prop_flat_map(|d| function(d, 12, 1000))) {
        prop_assert_eq!(SparseFunction::parse(&f.to_text()).unwrap(), f);
    }
}
