//! The order-4 and order-5 lower-bound sequences and their statistics.
use dslab::constructions::{predict_stats, s4, s5};
use dslab::sequence::ds_order;

fn main() {
    for (i, j) in [(1, 3), (2, 1), (2, 2)] {
        let b = s4(i, j, 1 << 20).unwrap();
        let st = predict_stats(4, i, j).unwrap();
        println!(
            "S4({i},{j}): {} symbols, {} blocks, length {}, multiplicity {:?}, predicted {}, ds order {}",
            b.alphabet_size(),
            b.num_blocks(),
            b.len(),
            b.uniform_multiplicity(),
            st.to_json(),
            ds_order(b.flat())
        );
    }
    let b = s5(1, 3, 1 << 20).unwrap();
    println!("S5(1,3) blocks: {:?}", b.blocks().collect::<Vec<_>>());
    let st = predict_stats(5, 2, 2).unwrap();
    println!("S5(2,2) predicted {} (N >= j B / xi: {})", st.to_json(), st.alphabet_lower_bound_holds());
}
