//! The Ackermann hierarchy and its inverse.
use dslab::ackermann::{ackermann, alpha, alpha2, alpha2_exact};

fn main() {
    for i in 1..=3 {
        let row: Vec<String> = (1..=4).map(|j| ackermann(i, j, u64::MAX).unwrap().to_string()).collect();
        println!("a({i}, 1..4) = {}", row.join(", "));
    }
    for n in [10u64, 1_000, 1_000_000, u64::MAX] {
        println!("alpha({n}) = {}", alpha(n).unwrap());
    }
    println!("alpha(10^6, 10) = {} (exact route {})", alpha2(1_000_000, 10).unwrap(), alpha2_exact(1_000_000, 10));
}
