use super::*;
use crate::constructions::{s4, s5};
use crate::random::{random_ds_blocked, rng};
use crate::sequence::BlockedSequence;

fn blocked(blocks: &[&[Sym]]) -> BlockedSequence {
    BlockedSequence::from_blocks(blocks.iter().map(|b| b.to_vec())).unwrap()
}

const STRATEGIES: [Strategy; 4] = [
    Strategy::Halving,
    Strategy::Permissible { r: 1 },
    Strategy::Permissible { r: 2 },
    Strategy::Ackermann { i: 2, c: 2 },
];

/// Anatomy by the definitions, from scratch: quadratic in the projection.
fn naive_feathers(t: &DerivTree, a: Sym) -> Vec<NodeId> {
    let d = t.dense(a).unwrap();
    let cr = t.crown(a).unwrap();
    let has = |v: NodeId| t.dense_block(v).is_some_and(|b| b.contains(&d));
    let nodes: Vec<NodeId> = (0..t.num_nodes() as NodeId).filter(|&v| has(v)).collect();
    let pparent = |v: NodeId| {
        let mut u = t.parent(v);
        while let Some(x) = u {
            if has(x) {
                return Some(x);
            }
            u = t.parent(x);
        }
        None
    };
    let kids = |v: NodeId| nodes.iter().copied().filter(|&c| pparent(c) == Some(v)).collect::<Vec<_>>();
    let mut wing = Vec::new();
    for (h, left) in [(cr.left_head, true), (cr.right_head, false)] {
        let mut v = h;
        loop {
            wing.push(v);
            let k = kids(v);
            match if left { k.first() } else { k.last() } {
                Some(&c) => v = c,
                None => break,
            }
        }
    }
    let mut out = Vec::new();
    for &v in &nodes {
        let Some(p) = pparent(v) else { continue };
        if wing.contains(&v) || !wing.contains(&p) {
            continue;
        }
        let dove = t.is_ancestor(cr.left_head, v);
        let mut f = v;
        loop {
            let k = kids(f);
            match if dove { k.last() } else { k.first() } {
                Some(&c) => f = c,
                None => break,
            }
        }
        out.push(f);
    }
    out.sort_unstable();
    out
}

#[test]
fn strategy_parsing() {
    assert_eq!("halving".parse::<Strategy>().unwrap(), Strategy::Halving);
    assert_eq!("ackermann:2,3".parse::<Strategy>().unwrap(), Strategy::Ackermann { i: 2, c: 3 });
    assert_eq!("permissible:2".parse::<Strategy>().unwrap(), Strategy::Permissible { r: 2 });
    assert!("permissible:0".parse::<Strategy>().is_err());
    assert!("binary".parse::<Strategy>().is_err());
    for s in STRATEGIES {
        assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
    }
}

#[test]
fn base_case_tree() {
    let t = build_tree(&blocked(&[&[0, 1], &[0, 1]]), Strategy::Halving).unwrap();
    assert_eq!(t.num_nodes(), 3);
    for a in [0, 1] {
        let c = t.crown(a).unwrap();
        assert_eq!((c.crown, c.left_head, c.right_head), (0, 1, 2));
        let an = project_anatomy(&t, a).unwrap();
        assert!(an.is_wingtip(1) && an.is_wingtip(2));
        assert!(an.feathers().is_empty());
    }
    assert_eq!(count_feathers(&t).total(), 0);
    assert!(check_nesting(&t).ok());
}

#[test]
fn rejects_bad_input() {
    assert!(build_tree(&blocked(&[&[0, 1], &[0]]), Strategy::Halving).is_err());
    assert!(build_tree(&blocked(&[&[0]]), Strategy::Halving).is_err());
    let t = build_tree_dropping_singletons(&blocked(&[&[0, 1], &[0]]), Strategy::Halving).unwrap();
    assert_eq!(t.sequence().len(), 2);
    let t = build_tree(&blocked(&[&[0, 1], &[0, 1]]), Strategy::Halving).unwrap();
    assert!(project_anatomy(&t, 7).is_err());
}

#[test]
fn halving_32_blocks_has_depth_5() {
    let blocks: Vec<Vec<Sym>> = (0..32).map(|k| vec![k % 2]).collect();
    let b = BlockedSequence::from_blocks(blocks).unwrap();
    let t = build_tree(&b, Strategy::Halving).unwrap();
    assert_eq!(t.depth(), 5);
    assert_eq!(t.num_nodes(), 63);
    assert!(t.leaves().iter().all(|&v| t.is_leaf(v)));
}

#[test]
fn three_blocks_under_halving() {
    let t = build_tree(&blocked(&[&[0, 1], &[0], &[0, 1]]), Strategy::Halving).unwrap();
    let an = project_anatomy(&t, 0).unwrap();
    assert_eq!(an.leaves().len(), 3);
    assert!(an.crown < an.left_head);
    assert!(t.is_ancestor(an.crown, an.left_head) && an.crown != an.left_head);
}

#[test]
fn leaves_carry_input_blocks() {
    let mut r = rng(11);
    for s in STRATEGIES {
        for _ in 0..20 {
            let b = random_ds_blocked(&mut r, 8, 4, 32).drop_rare(2);
            if b.num_blocks() < 2 {
                continue;
            }
            let t = build_tree(&b, s).unwrap();
            assert_eq!(t.leaves().len(), b.num_blocks());
            for (k, &v) in t.leaves().iter().enumerate() {
                assert_eq!(t.block(v).unwrap(), b.block(k));
            }
            assert_eq!(t.sequence(), b);
            // pre-order ids
            for v in 1..t.num_nodes() as NodeId {
                assert!(t.parent(v).unwrap() < v);
            }
        }
    }
}

#[test]
fn crowns_have_two_heads_holding_the_symbol() {
    let mut r = rng(12);
    for s in STRATEGIES {
        let b = random_ds_blocked(&mut r, 10, 4, 32).drop_rare(2);
        if b.num_blocks() < 2 {
            continue;
        }
        let t = build_tree(&b, s).unwrap();
        for (a, _) in b.multiplicities() {
            let c = t.crown(a).unwrap();
            assert_eq!(t.children(c.crown), &[c.left_head, c.right_head]);
            assert!(t.block(c.left_head).unwrap().contains(&a));
            assert!(t.block(c.right_head).unwrap().contains(&a));
        }
    }
}

#[test]
fn projection_invariants() {
    let mut r = rng(13);
    for s in STRATEGIES {
        for _ in 0..10 {
            let b = random_ds_blocked(&mut r, 8, 5, 32).drop_rare(2);
            if b.num_blocks() < 2 {
                continue;
            }
            let t = build_tree(&b, s).unwrap();
            for (a, _) in b.multiplicities() {
                let an = project_anatomy(&t, a).unwrap();
                for &v in &an.nodes {
                    // parent is the nearest strict ancestor holding a
                    let mut u = t.parent(v);
                    while let Some(x) = u {
                        if t.block(x).is_some_and(|blk| blk.contains(&a)) {
                            break;
                        }
                        u = t.parent(x);
                    }
                    assert_eq!(an.parent(v), Some(u.unwrap_or(an.crown)));
                }
                let tips: Vec<_> = an.nodes.iter().filter(|&&v| an.is_wingtip(v)).collect();
                assert_eq!(tips.len(), 2);
                for f in an.feathers() {
                    assert!(!an.is_wingtip(f));
                    assert!(t.is_leaf(f));
                }
                assert_eq!(an.feathers(), naive_feathers(&t, a));
            }
        }
    }
}

#[test]
fn two_occurrences_are_both_wingtips() {
    let b = blocked(&[&[0, 1], &[1], &[2, 1], &[2], &[0, 1]]);
    for s in STRATEGIES {
        let t = build_tree(&b, s).unwrap();
        let an = project_anatomy(&t, 0).unwrap();
        assert!(an.leaves().iter().all(|&v| an.is_wingtip(v)));
    }
}

#[test]
fn feathers_match_naive_on_s4() {
    let b = s4(2, 2, 1 << 20).unwrap();
    for s in STRATEGIES {
        let t = build_tree(&b, s).unwrap();
        let mut total = 0;
        for (a, _) in b.multiplicities() {
            let naive = naive_feathers(&t, a);
            assert_eq!(project_anatomy(&t, a).unwrap().feathers(), naive);
            total += naive.len() as u64;
        }
        assert_eq!(count_feathers(&t).total(), total);
        assert!(total <= (b.len() - 2 * b.alphabet_size()) as u64);
    }
}

#[test]
fn nested_in_block_examples() {
    let s = blocked(&[&[0], &[1], &[0, 1], &[1], &[0]]);
    assert_eq!(nested_in_block(&s, 0, 1, 2), Nesting::Nested);
    let s = blocked(&[&[0], &[1], &[0, 1], &[0], &[1]]);
    assert_eq!(nested_in_block(&s, 0, 1, 2), Nesting::Interleaved);
    let s = blocked(&[&[1], &[0, 1], &[0], &[1]]);
    assert_eq!(nested_in_block(&s, 0, 1, 1), Nesting::Inapplicable);
}

#[test]
fn nesting_and_l_node_on_random_sequences() {
    let mut r = rng(14);
    for order in 3..=5 {
        for s in STRATEGIES {
            for _ in 0..40 {
                let b = random_ds_blocked(&mut r, 10, order, 32).drop_rare(2);
                if b.num_blocks() < 2 {
                    continue;
                }
                let t = build_tree(&b, s).unwrap();
                let rep = check_nesting(&t);
                assert!(rep.ok(), "{s} {:?} on {:?}", rep.violations, b);
                assert_eq!(check_l_node_property(&t), 0);
                let audit = feather_audit(&t);
                if let Some(a) = audit {
                    assert!(a.consistent(), "{a:?}");
                }
            }
        }
    }
}

#[test]
fn ensemble_on_random_sequences() {
    let mut r = rng(15);
    for order in 3..=5 {
        for s in STRATEGIES {
            for _ in 0..30 {
                let b = random_ds_blocked(&mut r, 10, order, 32).drop_rare(2);
                if b.num_blocks() < 2 {
                    continue;
                }
                let e = build_ensemble(&b, s).unwrap();
                let rep = check_nesting5(&e);
                assert!(rep.ok(), "{s} {:?} on {:?}", rep.violations, b);
                assert!(e.report.all.sums_to_total());
                assert_eq!(e.report.all.total as usize, b.len());
                assert_eq!(e.report.unresolved, 0);
                for (a, _) in b.multiplicities() {
                    let feathers = project_anatomy(&e.tree, a).unwrap().feathers();
                    for v in classify_double_feathers(&e, a) {
                        assert!(feathers.contains(&v));
                    }
                }
            }
        }
    }
}

#[test]
fn superimposed_shapes_match() {
    let b = s4(2, 3, 1 << 20).unwrap();
    let e = build_ensemble(&b, Strategy::Permissible { r: 1 }).unwrap();
    let leaves: std::collections::HashSet<NodeId> = e.tree.leaves().iter().copied().collect();
    let mut checked = 0;
    for x in e.interval_roots() {
        let (sup, at) = e.superimposed(x, true).unwrap();
        if at.iter().all(|v| leaves.contains(v)) {
            assert_eq!(sup.shape_string(0), e.tree.shape_string(x));
            checked += 1;
        }
        assert_eq!(sup.leaves().len(), at.len());
    }
    assert!(checked > 0);
}

#[test]
fn base_case_ensemble_is_trivial() {
    let e = build_ensemble(&blocked(&[&[0, 1], &[1, 0]]), Strategy::Permissible { r: 1 }).unwrap();
    assert_eq!(e.report.double_feathers, 0);
    assert_eq!(e.report.superimposed_trees, 0);
}

#[test]
fn fixtures_satisfy_nesting() {
    for (i, j) in [(1, 2), (2, 2), (2, 3), (1, 3)] {
        let b = s4(i, j, 1 << 20).unwrap();
        for s in STRATEGIES {
            let t = build_tree(&b, s).unwrap();
            assert!(check_nesting(&t).ok());
        }
    }
    let b = s5(1, 2, 1 << 20).unwrap();
    for s in STRATEGIES {
        let e = build_ensemble(&b, s).unwrap();
        assert!(check_nesting(&e.tree).ok());
        assert!(check_nesting5(&e).ok());
    }
}

