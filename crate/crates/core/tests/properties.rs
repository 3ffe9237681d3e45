use proptest::prelude::*;

use preisach_core::pal::{
    pal_eval_naive, pal_eval_staircase, HalfPlaneGrid, IncrementalPal, TriangularMeasure,
};
use preisach_core::pda::{Channel, NestedIntervalCoder};
use preisach_core::rfim::streaming_non_dominated_sum;
use preisach_core::scalar::ratio;
use preisach_core::{relay_replay, Rational, ReducedMemory, RelayState, RelayThresholds};

fn quarters(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-32i32..=32).prop_map(|k| f64::from(k) / 4.0), 1..max_len)
}

fn measure(side: usize) -> impl Strategy<Value = TriangularMeasure<f64>> {
    prop::collection::vec(-1.0f64..1.0, side * (side + 1) / 2).prop_map(move |w| {
        let grid = HalfPlaneGrid::new(side, 1.0, -5.0).unwrap();
        let mut it = w.into_iter();
        TriangularMeasure::from_fn(grid, |_, _| it.next().unwrap())
    })
}

proptest! {
    #[test]
    fn memory_invariants_hold(u in quarters(200)) {
        let mut rm = ReducedMemory::new();
        for &x in &u {
            rm.update(x);
            prop_assert!(rm.check_invariants().is_ok(), "{:?}", rm.check_invariants());
            prop_assert_eq!(*rm.last().unwrap(), x);
            prop_assert!(rm.ops().within_amortised_bound());
        }
    }

    #[test]
    fn relay_read_matches_replay(u in quarters(120), a in -36i32..=36, w in 0i32..=20) {
        let th = RelayThresholds::new(f64::from(a) / 4.0, f64::from(a - w) / 4.0).unwrap();
        let rm = ReducedMemory::from_samples(&u);
        prop_assert_eq!(rm.relay_read(&th), relay_replay(&u, &th, RelayState::Off));
    }

    #[test]
    fn duplicated_samples_change_nothing(u in quarters(80), reps in prop::collection::vec(1usize..4, 80)) {
        let dense: Vec<f64> = u.iter().zip(&reps).flat_map(|(&x, &k)| std::iter::repeat_n(x, k)).collect();
        let (a, b) = (ReducedMemory::from_samples(&u), ReducedMemory::from_samples(&dense));
        prop_assert_eq!(a.corners(), b.corners());
    }

    #[test]
    fn range_is_max_minus_min(u in quarters(150)) {
        let hi = u.iter().copied().fold(f64::MIN, f64::max);
        let lo = u.iter().copied().fold(f64::MAX, f64::min);
        prop_assert_eq!(ReducedMemory::from_samples(&u).range().unwrap(), hi - lo);
    }

    #[test]
    fn pal_paths_agree(m in measure(10), u in quarters(60)) {
        let mut inc = IncrementalPal::new(&m);
        let mut rm = ReducedMemory::new();
        for &x in &u {
            rm.update(x);
            let naive = pal_eval_naive(&m, &rm);
            prop_assert!((naive - pal_eval_staircase(&m, &rm)).abs() <= 1e-9);
            prop_assert!((naive - *inc.push(x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn rational_pal_paths_agree(w in prop::collection::vec(-6i64..=6, 21), u in prop::collection::vec(-16i64..=16, 1..40)) {
        let grid = HalfPlaneGrid::new(6, ratio(1, 2), ratio(-2, 1)).unwrap();
        let mut it = w.into_iter();
        let m = TriangularMeasure::from_fn(grid, |_, _| ratio(it.next().unwrap(), 3));
        let u: Vec<Rational> = u.into_iter().map(|k| ratio(k, 4)).collect();
        let mut inc = IncrementalPal::new(&m);
        let mut rm = ReducedMemory::new();
        for x in &u {
            rm.update(x.clone());
            let naive = pal_eval_naive(&m, &rm);
            prop_assert_eq!(&naive, &pal_eval_staircase(&m, &rm));
            prop_assert_eq!(&naive, inc.push(x.clone()));
        }
    }

    #[test]
    fn channel_decodes_like_a_list(ops in prop::collection::vec(0usize..=3, 1..200)) {
        let mut ch = Channel::new(NestedIntervalCoder::new(3, 16).unwrap());
        let mut stack = Vec::new();
        for op in ops {
            if op == 0 {
                if stack.pop().is_some() {
                    ch.pop_signals().unwrap();
                } else {
                    prop_assert!(ch.pop_signals().is_err());
                }
            } else if stack.len() < 16 {
                ch.push_signals(op).unwrap();
                stack.push(op);
            }
            prop_assert_eq!(ch.decode_stack().unwrap(), stack.clone());
        }
    }

    #[test]
    fn non_dominated_sum_matches_scan(s in prop::collection::vec(-20i32..20, 0..60)) {
        let s: Vec<f64> = s.into_iter().map(f64::from).collect();
        let got = streaming_non_dominated_sum(&s);
        for (end, &v) in got.iter().enumerate() {
            let want: f64 = (0..=end).filter(|&t| s[t + 1..=end].iter().all(|&y| y <= s[t])).map(|t| s[t]).sum();
            prop_assert_eq!(v, want);
        }
    }
}
