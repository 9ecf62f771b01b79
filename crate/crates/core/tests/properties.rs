use dslab::bounds::{best_upper_bound, default_c, upper_bound_blocked};
use dslab::envelope::{lower_envelope, merge, Segment, Q};
use dslab::random::rng;
use dslab::sequence::{
    canonicalize, ds_order, ds_order_naive, greedy_partition, verify_decomposition_orders, BlockedSequence, Sequence,
    SequenceJson,
};
use dslab::tree::{build_tree, check_nesting, count_feathers, Strategy};
use proptest::prelude::*;

fn seq_strategy() -> impl proptest::strategy::Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..6, 0..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn json_round_trip(v in seq_strategy()) {
        let s = Sequence::new(v.clone());
        let j = SequenceJson::from_sequence(&s);
        let text = j.to_json();
        prop_assert_eq!(SequenceJson::parse(&text).unwrap(), j.clone());
        let b = greedy_partition(&v, None);
        let jb = SequenceJson::from_blocked(&b);
        let back = SequenceJson::parse(&jb.to_json()).unwrap().to_blocked().unwrap();
        prop_assert_eq!(back.flat(), b.flat());
        prop_assert_eq!(back.num_blocks(), b.num_blocks());
    }

    #[test]
    fn canonical_json_is_byte_stable(v in seq_strategy()) {
        let c = canonicalize(&v);
        let a = SequenceJson::from_sequence(&Sequence::new(c.clone())).to_json();
        let b = SequenceJson::parse(&a).unwrap().to_json();
        prop_assert_eq!(a, b);
        prop_assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn order_matches_naive(v in seq_strategy()) {
        prop_assert_eq!(ds_order(&v), ds_order_naive(&v));
        prop_assert_eq!(ds_order(&canonicalize(&v)), ds_order(&v));
    }

    #[test]
    fn greedy_blocks_are_distinct(v in seq_strategy()) {
        let b = greedy_partition(&v, None);
        prop_assert_eq!(b.flat(), v.as_slice());
        for blk in b.blocks() {
            let mut x = blk.to_vec();
            x.sort_unstable();
            x.dedup();
            prop_assert_eq!(x.len(), blk.len());
        }
    }

    #[test]
    fn decomposition_orders_hold(seed in any::<u64>(), order in 3usize..=5) {
        let mut r = rng(seed);
        let b = dslab::random::random_ds_blocked(&mut r, 8, order, 16);
        prop_assume!(b.num_blocks() > 0);
        let w = dslab::random::random_widths(&mut r, b.num_blocks());
        prop_assert!(verify_decomposition_orders(&b, &w, order).unwrap().ok());
    }

    #[test]
    fn trees_satisfy_nesting(seed in any::<u64>(), order in 3usize..=5, k in 0usize..3) {
        let mut r = rng(seed);
        let b: BlockedSequence = dslab::random::random_ds_blocked(&mut r, 8, order, 24).drop_rare(2);
        prop_assume!(b.num_blocks() >= 2);
        let s = [Strategy::Halving, Strategy::Ackermann { i: 2, c: 3 }, Strategy::Permissible { r: 1 }][k];
        let t = build_tree(&b, s).unwrap();
        prop_assert!(check_nesting(&t).ok());
        let f = count_feathers(&t);
        prop_assert_eq!(f.occurrences as usize, b.len());
    }

    #[test]
    fn envelope_is_pointwise_minimal(raw in prop::collection::vec((0i64..40, 1i64..20, -9i64..10, -20i64..20), 1..25)) {
        let segs: Vec<Segment> = raw
            .iter()
            .map(|&(x, w, a, b)| Segment {
                x1: Some(Q::from_integer(x.into())),
                x2: Some(Q::from_integer((x + w).into())),
                a: Q::new(a.into(), 3.into()),
                b: Q::from_integer(b.into()),
            })
            .collect();
        let e = lower_envelope(&segs).unwrap();
        prop_assert!(e.check_minimal(&segs, &mut rng(1), 10).is_empty());
        let t = e.transcript();
        prop_assert!(ds_order(&t.sequence()) <= 3);
        prop_assert_eq!(t.breakpoints.len() + 1, t.pieces.len());
        let cut = raw.len() / 2;
        if cut > 0 {
            let left = lower_envelope(&segs[..cut]).unwrap();
            // the right half was built with local ids
            let right = lower_envelope(&segs[cut..]).unwrap();
            let shifted = dslab::envelope::Envelope {
                pieces: right.pieces.into_iter().map(|mut p| { p.id = p.id.map(|i| i + cut); p }).collect(),
            };
            prop_assert_eq!(merge(&segs, &left, &shifted), e);
        }
    }

    #[test]
    fn best_bound_is_at_most_every_level(s in 1u32..=7, n in 1u64..5000, m in 1u64..300) {
        let best = best_upper_bound(s, n, m).unwrap();
        let c = default_c(s);
        for i in 1..=6 {
            prop_assert!(best.bound <= upper_bound_blocked(s, n, m, c, i).unwrap());
        }
        let more = best_upper_bound(s, n + 1, m).unwrap();
        prop_assert!(best.bound <= more.bound);
    }
}
