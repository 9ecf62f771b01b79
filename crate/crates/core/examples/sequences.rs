//! DS order, alternations, blocks and the interval decomposition.
use dslab::sequence::{canonicalize, decompose, ds_order, greedy_partition, max_alternation, verify_decomposition_orders};

fn main() {
    let s = vec![7, 3, 7, 9, 7, 9, 3, 9];
    let c = canonicalize(&s);
    let (len, w) = max_alternation(&c);
    println!("sequence {s:?} canonical {c:?}");
    println!("longest alternation {len} ({w:?}), ds order {}", ds_order(&c));

    let b = greedy_partition(&c, None);
    println!("greedy blocks: {:?}", b.blocks().collect::<Vec<_>>());
    let d = decompose(&b, &[2, b.num_blocks() - 2]).unwrap();
    println!("global symbols {:?}, contracted {:?}", d.global_alphabet, d.contracted.blocks().collect::<Vec<_>>());
    println!("decomposition orders ok: {}", verify_decomposition_orders(&b, &[2, b.num_blocks() - 2], 3).unwrap().ok());
}
