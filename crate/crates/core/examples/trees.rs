//! Derivation trees, the anatomy of a projection, feathers and nesting.
use dslab::constructions::s4;
use dslab::tree::{build_ensemble, build_tree, check_nesting, check_nesting5, count_feathers, project_anatomy, Strategy};

fn main() {
    let b = s4(2, 2, 1 << 20).unwrap();
    for strategy in [Strategy::Halving, Strategy::Ackermann { i: 2, c: 3 }, Strategy::Permissible { r: 1 }] {
        let t = build_tree(&b, strategy).unwrap();
        println!("{strategy}: {} nodes, depth {}, feathers {:?}", t.num_nodes(), t.depth(), count_feathers(&t));
        println!("  nesting violations: {}", check_nesting(&t).violation_count);
    }
    let t = build_tree(&b, Strategy::Halving).unwrap();
    let a = project_anatomy(&t, 0).unwrap();
    println!("symbol 0: wingtips {} and {}, feathers at {:?}", a.left_wingtip(), a.right_wingtip(), a.feathers());
    let e = build_ensemble(&b, Strategy::Permissible { r: 1 }).unwrap();
    println!("ensemble: {:?}", e.report);
    println!("order-5 nesting violations: {}", check_nesting5(&e).violation_count);
}
