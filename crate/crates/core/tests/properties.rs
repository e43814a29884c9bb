//! Property tests for the invariants that hold across the whole input
//! space rather than at hand-picked points.

use gsm::evaluation::normalize_support;
use gsm::*;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn arb_hspec() -> impl Strategy<Value = HSpec> {
    prop_oneof![
        (0.0f64..3.0, 0.1f64..5.0).prop_map(|(p, c)| HSpec::TruncPower { p, c }),
        (0.0f64..3.0).prop_map(|p| HSpec::TruncPower { p, c: f64::INFINITY }),
        (0.1f64..4.0).prop_map(|c| HSpec::Log1pTrunc { c }),
        (0.05f64..3.0, 0.1f64..10.0).prop_map(|(lam, gam)| HSpec::Mcp { lam, gam }),
        (0.05f64..3.0, 2.1f64..8.0).prop_map(|(lam, gam)| HSpec::Scad { lam, gam }),
        (0.1f64..4.0).prop_map(|v| HSpec::Constant { v }),
    ]
}

proptest! {
    #[test]
    fn weight_functions_nonnegative_and_nondecreasing(
        spec in arb_hspec(),
        x1 in 1e-8f64..50.0,
        x2 in 1e-8f64..50.0,
    ) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let (v_lo, d_lo) = spec.eval(lo).unwrap();
        let (v_hi, d_hi) = spec.eval(hi).unwrap();
        prop_assert!(v_lo >= 0.0 && v_hi >= 0.0);
        prop_assert!(d_lo >= 0.0 && d_hi >= 0.0);
        prop_assert!(v_lo <= v_hi + 1e-12 * v_lo.abs().max(1.0));
    }

    #[test]
    fn weight_round_trips_through_text(spec in arb_hspec()) {
        let text = spec.to_string();
        let back: HSpec = text.parse().unwrap();
        prop_assert_eq!(back, spec);
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero(z in -100.0f64..100.0, lam in 0.0f64..50.0) {
        let s = soft_threshold(z, lam);
        prop_assert!(s.abs() <= z.abs());
        prop_assert!(s == 0.0 || s.signum() == z.signum());
        prop_assert!((z.abs() - s.abs() - lam).abs() < 1e-12 || s == 0.0);
    }

    #[test]
    fn roc_curves_are_monotone_with_endpoints(
        raw in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 0..40)
    ) {
        let curve = RocCurve::from_points(raw);
        prop_assert_eq!(*curve.points.first().unwrap(), (0.0, 0.0));
        prop_assert_eq!(curve.points.last().unwrap().1, 1.0);
        for w in curve.points.windows(2) {
            prop_assert!(w[1].0 >= w[0].0);
            prop_assert!(w[1].1 >= w[0].1);
        }
        let auc = curve.auc();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&auc));
    }

    #[test]
    fn confusion_is_encoding_invariant(
        edges in proptest::collection::btree_set((0usize..6, 0usize..6), 1..10),
        est_edges in proptest::collection::btree_set((0usize..6, 0usize..6), 0..10),
    ) {
        let truth: BTreeSet<(usize, usize)> =
            edges.into_iter().filter(|&(i, j)| i != j).collect();
        prop_assume!(!truth.is_empty());
        let est: BTreeSet<(usize, usize)> =
            est_edges.into_iter().filter(|&(i, j)| i != j).collect();
        // Ordered encoding: both (i, j) and (j, i) present.
        let mut truth_ordered = truth.clone();
        let mut est_ordered = est.clone();
        for &(i, j) in &truth {
            truth_ordered.insert((j, i));
        }
        for &(i, j) in &est {
            est_ordered.insert((j, i));
        }
        let a = confusion(&est, &truth, 6).unwrap();
        let b = confusion(&est_ordered, &truth_ordered, 6).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(
            normalize_support(&truth_ordered),
            normalize_support(&truth)
        );
    }
}
