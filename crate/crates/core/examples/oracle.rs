//! Exact extremal values by exhaustive search.
use dslab::oracle::{lambda_blocked_exact, lambda_by_deepening, lambda_exact, SearchBudget};

fn main() {
    for s in 3..=4 {
        for n in 1..=5 {
            let r = lambda_exact(s, n, SearchBudget::default()).unwrap();
            println!("lambda_{s}({n}) = {} (exact {}), witness {:?}", r.value, r.exact, r.witness.flat());
        }
    }
    let r = lambda_blocked_exact(3, 4, 5, SearchBudget::default()).unwrap();
    println!("lambda_3(4,5) = {}, blocks {:?}", r.value, r.witness.blocks().collect::<Vec<_>>());
    println!("lambda_3(3) by iterative deepening: {:?}", lambda_by_deepening(3, 3, 1_000_000).map(|x| x.0));
    let r = lambda_exact(5, 6, SearchBudget::nodes(100_000)).unwrap();
    println!("lambda_5(6) >= {} (exact {})", r.value, r.exact);
}
