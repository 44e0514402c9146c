use num_rational::Rational64;
use proptest::prelude::*;
use wiener_meter::horizon::{holder_metrics, metric_d, metric_d_r};
use wiener_meter::path_sets::{holder_seminorm, separation};
use wiener_meter::{
    chebyshev_tail, two_sided_probability, DyadicGrid, EstimateResult, GridPath, IncrementVector, LongPath,
    PathSetSpec, SeedSpec,
};

fn grid(a: f64, n: u32) -> DyadicGrid {
    DyadicGrid::new(a, n).unwrap()
}

fn path(a: f64, n: u32) -> impl Strategy<Value = GridPath<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1usize << n).prop_map(move |v| GridPath::new(grid(a, n), v).unwrap())
}

fn long_path(horizon: usize, level: u32) -> impl Strategy<Value = LongPath<f64>> {
    prop::collection::vec(-2.0f64..2.0, horizon << level)
        .prop_map(move |v| LongPath::new(horizon, level, v).unwrap())
}

proptest! {
    #[test]
    fn project_cumulate_round_trip_exact_in_rationals(
        nums in prop::collection::vec(-1000i64..1000, 8),
        den in 1i64..50,
    ) {
        let g = grid(1.0, 3);
        let levels: Vec<Rational64> = nums.iter().map(|x| Rational64::new(*x, den)).collect();
        let p = GridPath::new(g, levels).unwrap();
        prop_assert_eq!(p.project().cumulate(), p.clone());
        let inc = IncrementVector::new(g, p.project().increments().to_vec()).unwrap();
        prop_assert_eq!(inc.cumulate().project(), inc);
        // refinement is piecewise linear, so restricting back is exact
        prop_assert_eq!(p.refine(6).unwrap().restrict(3).unwrap(), p);
    }

    #[test]
    fn project_cumulate_round_trip_f64(p in path(2.0, 5)) {
        let back = p.project().cumulate();
        for (x, y) in back.levels().iter().zip(p.levels()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn grid_images_are_nested_across_levels(p in path(1.0, 6), m in 0.5f64..3.0, lam in 1.0f64..6.0) {
        // a member at a fine level is a member at every coarser level
        for spec in [
            PathSetSpec::<f64>::sup_ball(m),
            PathSetSpec::holder_ball(0.25, lam),
            PathSetSpec::intersection(vec![PathSetSpec::sup_ball(m), PathSetSpec::holder_ball(0.3, lam)]),
        ] {
            if spec.member_path(&p).unwrap() {
                for n in 1..6 {
                    prop_assert!(spec.member_path(&p.restrict(n).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn membership_is_monotone_in_the_radius(p in path(1.0, 4), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let inner = PathSetSpec::<f64>::sup_ball(lo).member_path(&p).unwrap();
        prop_assert!(!inner || PathSetSpec::<f64>::sup_ball(hi).member_path(&p).unwrap());
        let inner = PathSetSpec::<f64>::holder_ball(0.2, lo).member_path(&p).unwrap();
        prop_assert!(!inner || PathSetSpec::<f64>::holder_ball(0.2, hi).member_path(&p).unwrap());
    }

    #[test]
    fn seminorm_and_sup_norm_are_homogeneous(p in path(1.0, 5), c in -4.0f64..4.0) {
        let scaled = p.scale(c);
        prop_assert!((scaled.sup_norm() - c.abs() * p.sup_norm()).abs() <= 1e-12);
        let h = holder_seminorm(&p, 0.25, 1.0).unwrap().seminorm;
        let hs = holder_seminorm(&scaled, 0.25, 1.0).unwrap().seminorm;
        prop_assert!((hs - c.abs() * h).abs() <= 1e-10 * (1.0 + h));
    }

    #[test]
    fn separated_sets_share_no_member(p in path(1.0, 3), shift in 0.0f64..6.0, r in 0.1f64..1.5) {
        let g = grid(1.0, 3);
        let a = PathSetSpec::tube(GridPath::zero(g), r);
        let b = PathSetSpec::tube(GridPath::from_fn(g, |_| shift), r);
        if separation(&a, &b, &g).unwrap() > 0.0 {
            prop_assert!(!(a.member_path(&p).unwrap() && b.member_path(&p).unwrap()));
        }
    }

    #[test]
    fn chebyshev_bound_dominates_tail(x in 0.01f64..20.0, p in 0.5f64..12.0) {
        prop_assert!(chebyshev_tail(x, p).unwrap() >= 1.0 - two_sided_probability(x) - 1e-15);
    }

    #[test]
    fn wilson_interval_contains_the_estimate(hits in 0u64..=5000, extra in 0u64..5000) {
        let n = (hits + extra).max(1000);
        let e = EstimateResult::from_counts(1.0, Some(1), 2, hits.min(n), n, SeedSpec::new(0, 0));
        prop_assert!(0.0 <= e.ci_low && e.ci_low <= e.p_hat && e.p_hat <= e.ci_high && e.ci_high <= 1.0);
    }

    #[test]
    fn metric_axioms(
        f in long_path(6, 3),
        g in long_path(6, 3),
        h in long_path(6, 3),
    ) {
        let d = |x: &LongPath, y: &LongPath| metric_d(x, y, 6).unwrap().value;
        prop_assert_eq!(d(&f, &g), d(&g, &f));
        prop_assert_eq!(d(&f, &f), 0.0);
        prop_assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h) + 1e-12);
        prop_assert!(d(&f, &g) <= 1.0);
        let a = |x: &LongPath, y: &LongPath| holder_metrics(x, y, 0.25, 6).unwrap();
        let (fg, gh, fh) = (a(&f, &g), a(&g, &h), a(&f, &h));
        prop_assert_eq!(fg.d_alpha.value, a(&g, &f).d_alpha.value);
        prop_assert_eq!(fg.d_alpha_star.value, a(&g, &f).d_alpha_star.value);
        prop_assert!(fh.d_alpha.value <= fg.d_alpha.value + gh.d_alpha.value + 1e-12);
        prop_assert!(fh.d_alpha_star.value <= fg.d_alpha_star.value + gh.d_alpha_star.value + 1e-12);
        let mut prev = 0.0;
        for r in 1..=6 {
            let v = metric_d_r(&f, &g, r).unwrap();
            prop_assert!(v.value >= prev);
            prop_assert!(d(&f, &g) - v.value <= v.tail_bound + 1e-15);
            prev = v.value;
        }
    }

    #[test]
    fn threshold_identity(f in long_path(8, 2), g in long_path(8, 2), lam in 0.0f64..1.0) {
        let full = metric_d(&f, &g, 8).unwrap().value;
        let any = (1..=8).any(|r| metric_d_r(&f, &g, r).unwrap().value > lam);
        prop_assert_eq!(full > lam, any);
    }

    #[test]
    fn truncation_preimages_are_nested(f in long_path(5, 2), g in long_path(5, 2), r in 1usize..5) {
        // equal on [0, r+1] forces equal on [0, r]
        let g2 = LongPath::new(5, 2, f.values()[..(r + 1) * 4].iter().chain(&g.values()[(r + 1) * 4..]).copied().collect()).unwrap();
        prop_assert_eq!(f.truncate(r + 1).unwrap(), g2.truncate(r + 1).unwrap());
        prop_assert_eq!(f.truncate(r).unwrap(), g2.truncate(r).unwrap());
    }
}
