//! Closed-form upper bounds and the recurrence inequality suite.
use dslab::bounds::{best_upper_bound, check_feather_ineqs, check_happiness, mu, nu, upper_bound_blocked};

fn main() {
    for s in 4..=7 {
        println!("mu_{s},1..3 = {} {} {}", mu(s, 1).unwrap(), mu(s, 2).unwrap(), mu(s, 3).unwrap());
    }
    println!("nu_5,1 = {}", nu(5, 1).unwrap());
    let (n, m) = (1_000_000, 4096);
    for i in 1..=4 {
        println!("lambda_4({n},{m}) <= {} at level {i}", upper_bound_blocked(4, n, m, 3, i).unwrap());
    }
    let best = best_upper_bound(4, n, m).unwrap();
    println!("best: {} (level {}, iota {}, j {}, alpha {})", best.bound, best.i, best.iota, best.j, best.alpha);
    let h = check_happiness(12, 12).unwrap();
    let f = check_feather_ineqs(20).unwrap();
    println!("inequalities: {} checked, {} failures, notes {:?}", h.checked + f.checked, h.failures.len() + f.failures.len(), f.notes);
}
