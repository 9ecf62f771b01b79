//! Exhaustive ground truth at desk scale: exact `λ_s(n)` and `λ_s(n,m)`,
//! minimum feather counts over all derivation trees of a tiny sequence,
//! and the known small values.
//!
//! The extremal search runs on a relabeling-invariant state: symbols are
//! named by recency (0 = most recent), and the state holds the number of
//! runs of every pair of used symbols, the size of the open block and the
//! blocks still available. Appending the symbol of rank `x` adds one run to
//! every pair it forms with a more recent symbol and makes it the most
//! recent; a fresh symbol has two runs with every used symbol.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, limit, Result};
use crate::sequence::{canonicalize_blocked, decompose, ds_order, project_blocked, BlockedSequence, Sequence, Sym};
use crate::tree::{build_ensemble, build_tree_relaxed, count_feathers, Strategy};

/// Limits on an exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBudget {
    /// Distinct states expanded.
    pub max_nodes: u64,
    /// Maximum sequence length explored.
    pub max_depth: Option<usize>,
    /// Wall-clock cap; results then depend on machine speed.
    pub max_secs: Option<f64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 100_000_000, max_depth: None, max_secs: None }
    }
}

impl SearchBudget {
    pub fn nodes(max_nodes: u64) -> Self {
        SearchBudget { max_nodes, ..Default::default() }
    }
}

/// Outcome of an extremal search. When `exact` is false the value is the
/// length of the witness, a lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extremal {
    pub value: u64,
    pub exact: bool,
    pub nodes: u64,
    pub witness: BlockedSequence,
}

pub const MAX_N: usize = 8;
pub const MAX_S: usize = 6;
pub const MAX_M: usize = 31;

struct Search {
    n: usize,
    cap: u8,
    sparse: bool,
    memo: HashMap<u128, u8>,
    budget: SearchBudget,
    start: Instant,
    nodes: u64,
    exhausted: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct State {
    k: usize,
    /// Open block size (blocked mode).
    b: usize,
    /// Blocks left after the open one (blocked mode).
    left: usize,
    /// runs[x][y] for x > y, packed at `pair(x, y)`.
    runs: [u8; MAX_N * (MAX_N - 1) / 2],
}

fn pair(x: usize, y: usize) -> usize {
    let (x, y) = if x > y { (x, y) } else { (y, x) };
    x * (x - 1) / 2 + y
}

impl State {
    fn key(&self) -> u128 {
        let mut key = self.k as u128 | (self.b as u128) << 4 | (self.left as u128) << 8;
        let mut shift = 13;
        for &r in &self.runs[..self.k * self.k.saturating_sub(1) / 2] {
            key |= (r as u128) << shift;
            shift += 3;
        }
        key
    }

    /// Appends the used symbol of rank `x`.
    fn append_used(&self, x: usize, cap: u8) -> Option<State> {
        let mut out = *self;
        for y in 0..x {
            let r = self.runs[pair(x, y)] + 1;
            if r > cap {
                return None;
            }
            out.runs[pair(x, y)] = r;
        }
        // ranks 0..x shift down by one, x moves to 0
        let perm = |r: usize| if r == x { 0 } else if r < x { r + 1 } else { r };
        let mut runs = [0u8; MAX_N * (MAX_N - 1) / 2];
        for u in 1..self.k {
            for v in 0..u {
                runs[pair(perm(u), perm(v))] = out.runs[pair(u, v)];
            }
        }
        out.runs = runs;
        out.b += 1;
        Some(out)
    }

    fn append_new(&self, cap: u8) -> Option<State> {
        if cap < 2 && self.k > 0 {
            return None;
        }
        let mut out = *self;
        let mut runs = [0u8; MAX_N * (MAX_N - 1) / 2];
        for u in 1..self.k {
            for v in 0..u {
                runs[pair(u + 1, v + 1)] = self.runs[pair(u, v)];
            }
        }
        for y in 1..=self.k {
            runs[pair(y, 0)] = 2;
        }
        out.runs = runs;
        out.k += 1;
        out.b += 1;
        Some(out)
    }
}

enum Move {
    Used(usize),
    New,
    Close,
}

impl Search {
    fn moves(&self, st: &State) -> Vec<(Move, State)> {
        let mut out = Vec::new();
        let lo = if self.sparse { st.b.min(1) } else { st.b };
        for x in lo..st.k {
            if let Some(ns) = st.append_used(x, self.cap) {
                out.push((Move::Used(x), ns));
            }
        }
        if st.k < self.n {
            if let Some(ns) = st.append_new(self.cap) {
                out.push((Move::New, ns));
            }
        }
        if !self.sparse && st.b > 0 && st.left > 0 {
            out.push((Move::Close, State { b: 0, left: st.left - 1, ..*st }));
        }
        out
    }

    fn out_of_budget(&mut self, depth: usize) -> bool {
        if self.exhausted {
            return true;
        }
        if self.nodes >= self.budget.max_nodes
            || self.budget.max_depth.is_some_and(|d| depth >= d)
            || (self.nodes % 4096 == 0
                && self.budget.max_secs.is_some_and(|s| self.start.elapsed().as_secs_f64() > s))
        {
            self.exhausted = true;
        }
        self.exhausted
    }

    fn value(&mut self, st: &State, depth: usize) -> u8 {
        let key = st.key();
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        if self.out_of_budget(depth) {
            self.memo.insert(key, 0);
            return 0;
        }
        self.nodes += 1;
        let mut best = 0;
        for (mv, ns) in self.moves(st) {
            let gain = if matches!(mv, Move::Close) { 0 } else { 1 };
            best = best.max(gain + self.value(&ns, depth + gain as usize));
        }
        self.memo.insert(key, best);
        best
    }

    /// Follows optimal moves, preferring the smallest symbol, then closing.
    fn witness(&mut self, root: State) -> BlockedSequence {
        let mut st = root;
        let mut recency: Vec<Sym> = Vec::new();
        let mut blocks: Vec<Vec<Sym>> = vec![Vec::new()];
        let mut depth = 0;
        loop {
            let target = self.value(&st, depth);
            if target == 0 {
                break;
            }
            let mut choice: Option<(Sym, Move, State)> = None;
            for (mv, ns) in self.moves(&st) {
                let (sym, gain) = match mv {
                    Move::Used(x) => (recency[x], 1),
                    Move::New => (recency.len() as Sym, 1),
                    Move::Close => (Sym::MAX, 0),
                };
                if gain + self.value(&ns, depth + gain as usize) == target
                    && choice.as_ref().map_or(true, |c| sym < c.0)
                {
                    choice = Some((sym, mv, ns));
                }
            }
            let (sym, mv, ns) = choice.expect("an optimal move exists");
            match mv {
                Move::Used(x) => {
                    recency.remove(x);
                    recency.insert(0, sym);
                }
                Move::New => recency.insert(0, sym),
                Move::Close => {
                    blocks.push(Vec::new());
                    st = ns;
                    continue;
                }
            }
            blocks.last_mut().unwrap().push(sym);
            depth += 1;
            st = ns;
        }
        let mut out = BlockedSequence::empty();
        for b in blocks.iter().filter(|b| !b.is_empty() || !self.sparse) {
            out.push_block_unchecked(b);
        }
        out
    }
}

fn run(s: usize, n: usize, m: Option<usize>, budget: SearchBudget) -> Result<Extremal> {
    if s < 1 || n < 1 || m == Some(0) {
        return invalid("need s, n, m >= 1");
    }
    if n > MAX_N || s > MAX_S || m.is_some_and(|m| m > MAX_M) {
        return limit(format!("exhaustive search supports n <= {MAX_N}, s <= {MAX_S}, m <= {MAX_M}"));
    }
    let mut search = Search {
        n,
        cap: (s + 1) as u8,
        sparse: m.is_none(),
        memo: HashMap::new(),
        budget,
        start: Instant::now(),
        nodes: 0,
        exhausted: false,
    };
    let root = State { k: 0, b: 0, left: m.map_or(0, |m| m - 1), runs: [0; MAX_N * (MAX_N - 1) / 2] };
    let value = search.value(&root, 0) as u64;
    let exact = !search.exhausted;
    let mut witness = search.witness(root);
    if m.is_none() {
        let flat = witness.flat().to_vec();
        witness = BlockedSequence::empty();
        for x in flat {
            witness.push_block_unchecked(&[x]);
        }
    }
    debug_assert_eq!(witness.len() as u64, value);
    Ok(Extremal { value, exact, nodes: search.nodes, witness })
}

/// `λ_s(n)`: longest repetition-free order-`s` sequence over `n` symbols.
/// The witness has one block per symbol.
pub fn lambda_exact(s: usize, n: usize, budget: SearchBudget) -> Result<Extremal> {
    run(s, n, None, budget)
}

/// `λ_s(n,m)`: longest order-`s` sequence over `n` symbols split into at
/// most `m` blocks of distinct symbols.
pub fn lambda_blocked_exact(s: usize, n: usize, m: usize, budget: SearchBudget) -> Result<Extremal> {
    run(s, n, Some(m), budget)
}

/// `λ_s(n)` by iterative deepening over explicit sequences in canonical
/// form: an independent code path for cross-checking. `None` when the
/// budget runs out.
pub fn lambda_by_deepening(s: usize, n: usize, max_nodes: u64) -> Option<(u64, Sequence)> {
    fn dfs(seq: &mut Vec<Sym>, n: usize, s: usize, target: usize, nodes: &mut u64, max: u64) -> Option<bool> {
        *nodes += 1;
        if *nodes > max {
            return None;
        }
        if seq.len() == target {
            return Some(true);
        }
        let used = seq.iter().map(|&x| x as usize + 1).max().unwrap_or(0);
        for c in 0..n.min(used + 1) as Sym {
            if seq.last() == Some(&c) {
                continue;
            }
            seq.push(c);
            if ds_order(seq) <= s && dfs(seq, n, s, target, nodes, max)? {
                return Some(true);
            }
            seq.pop();
        }
        Some(false)
    }
    let mut nodes = 0;
    let mut best = Vec::new();
    for target in 1.. {
        let mut seq = Vec::new();
        if dfs(&mut seq, n, s, target, &mut nodes, max_nodes)? {
            best = seq;
        } else {
            break;
        }
    }
    Some((best.len() as u64, Sequence::new(best)))
}

/// Minimum feather count over every derivation tree of `b`: all recursive
/// interval partitions with between 2 and `m - 1` intervals. `None` when
/// the budget (in distinct subproblems) runs out.
pub fn min_feathers_exact(b: &BlockedSequence, max_nodes: u64) -> Result<Option<u64>> {
    if b.num_blocks() > 16 {
        return limit("min_feathers_exact supports at most 16 blocks");
    }
    let mut memo = HashMap::new();
    let mut nodes = 0;
    Ok(min_feathers_rec(&canonicalize_blocked(b), &mut memo, &mut nodes, max_nodes, None))
}

/// Feather count of the tree built with `strategy`, evaluated through the
/// same decomposition as [`min_feathers_exact`].
pub fn feathers_by_decomposition(b: &BlockedSequence, strategy: Strategy) -> u64 {
    let mut memo = HashMap::new();
    let mut nodes = 0;
    min_feathers_rec(&canonicalize_blocked(b), &mut memo, &mut nodes, u64::MAX, Some(strategy)).expect("no budget")
}

fn compositions(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..1 << (m - 1) {
        let parts = mask.count_ones() as usize + 1;
        if parts < 2 || parts >= m {
            continue;
        }
        let mut widths = Vec::with_capacity(parts);
        let mut w = 1;
        for k in 0..m - 1 {
            if mask >> k & 1 == 1 {
                widths.push(w);
                w = 1;
            } else {
                w += 1;
            }
        }
        widths.push(w);
        out.push(widths);
    }
    out
}

/// Feathers contributed at one composition by global symbols below a
/// wingtip of the global tree: every occurrence in the first and last
/// interval of a global symbol except its first and last one.
fn wingtip_feathers(b: &BlockedSequence, widths: &[usize]) -> u64 {
    // symbols are dense after canonicalization
    let n = b.flat().iter().map(|&a| a as usize + 1).max().unwrap_or(0);
    let (mut first, mut last) = (vec![usize::MAX; n], vec![0usize; n]);
    let (mut in_first, mut in_last) = (vec![0u64; n], vec![0u64; n]);
    let mut k = 0;
    for (q, &w) in widths.iter().enumerate() {
        for _ in 0..w {
            for &a in b.block(k) {
                let a = a as usize;
                if first[a] == usize::MAX {
                    first[a] = q;
                }
                if first[a] == q {
                    in_first[a] += 1;
                }
                if last[a] != q {
                    last[a] = q;
                    in_last[a] = 0;
                }
                in_last[a] += 1;
            }
            k += 1;
        }
    }
    (0..n).filter(|&a| first[a] != usize::MAX && first[a] != last[a]).map(|a| in_first[a] + in_last[a] - 2).sum()
}

fn min_feathers_rec(
    b: &BlockedSequence,
    memo: &mut HashMap<(Vec<Sym>, Vec<usize>, Option<Strategy>), u64>,
    nodes: &mut u64,
    max: u64,
    plan: Option<Strategy>,
) -> Option<u64> {
    let m = b.num_blocks();
    if m <= 2 || b.is_empty() {
        return Some(0);
    }
    // symbols with at most two occurrences are never feathers, and the
    // tree shape depends on the widths alone
    if b.multiplicities().iter().any(|&(_, k)| k <= 2) {
        let keep: std::collections::HashSet<Sym> =
            b.multiplicities().into_iter().filter(|&(_, k)| k > 2).map(|(a, _)| a).collect();
        let reduced = canonicalize_blocked(&project_blocked(b, |a| keep.contains(&a)));
        return min_feathers_rec(&reduced, memo, nodes, max, plan);
    }
    let starts: Vec<usize> = (0..m).map(|k| b.block_start(k)).collect();
    let key = (b.flat().to_vec(), starts, plan);
    if let Some(&v) = memo.get(&key) {
        return Some(v);
    }
    *nodes += 1;
    if *nodes > max {
        return None;
    }
    let options: Vec<(Vec<usize>, Option<Strategy>, Option<Strategy>)> = match plan {
        Some(st) => {
            let (w, h, l) = crate::tree::partition_for(m, st);
            vec![(w, Some(h), Some(l))]
        }
        None => compositions(m).into_iter().map(|w| (w, None, None)).collect(),
    };
    let mut ranked: Vec<(u64, Vec<usize>, Option<Strategy>, Option<Strategy>)> =
        options.into_iter().map(|(w, h, l)| (wingtip_feathers(b, &w), w, h, l)).collect();
    ranked.sort_by_key(|r| r.0);
    let mut best = u64::MAX;
    for (tips, widths, hat_plan, local_plan) in ranked {
        if tips >= best {
            break;
        }
        let d = decompose(b, &widths).expect("widths sum to m");
        let mut total = tips + min_feathers_rec(&canonicalize_blocked(&d.contracted), memo, nodes, max, hat_plan)?;
        for l in &d.local {
            if total >= best {
                break;
            }
            total += min_feathers_rec(&canonicalize_blocked(l), memo, nodes, max, local_plan)?;
        }
        best = best.min(total);
    }
    memo.insert(key, best);
    Some(best)
}

/// Minimum double-feather count over trees built with every permissible
/// width `2^r`, `1 <= r < ceil(log2 m)`.
pub fn min_double_feathers_permissible(b: &BlockedSequence) -> Result<u64> {
    let m = b.num_blocks();
    let log2 = usize::BITS - (m.max(2) - 1).leading_zeros();
    let mut best = u64::MAX;
    for r in 1..log2.max(2) {
        let e = build_ensemble(b, Strategy::Permissible { r })?;
        best = best.min(e.report.double_feathers);
    }
    Ok(best)
}

/// Feather count of the relaxed tree (symbols occurring once allowed).
pub fn strategy_feathers(b: &BlockedSequence, strategy: Strategy) -> u64 {
    count_feathers(&build_tree_relaxed(b, strategy)).total()
}

/// One regression entry of [`verify_known`].
#[derive(Clone, Debug, Serialize)]
pub struct KnownCheck {
    pub what: String,
    pub expected: u64,
    pub got: u64,
    pub exact: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct KnownReport {
    pub checks: Vec<KnownCheck>,
    pub failures: Vec<String>,
}

impl KnownReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn push(&mut self, what: String, expected: u64, r: &Extremal) {
        if !r.exact || r.value != expected {
            self.failures.push(format!("{what}: expected {expected}, got {} (exact: {})", r.value, r.exact));
        }
        self.checks.push(KnownCheck { what, expected, got: r.value, exact: r.exact });
    }
}

/// The order-1 extremal blocked witness `[1..n][n]^(m-1)`.
pub fn order1_witness(n: usize, m: usize) -> BlockedSequence {
    let mut b = BlockedSequence::empty();
    b.push_block_unchecked(&(0..n as Sym).collect::<Vec<_>>());
    for _ in 1..m {
        b.push_block_unchecked(&[n as Sym - 1]);
    }
    b
}

/// The order-2 witness `1 2 1 3 1 ... 1 n 1`.
pub fn order2_witness(n: usize) -> Sequence {
    let mut v = vec![0];
    for a in 1..n as Sym {
        v.push(a);
        v.push(0);
    }
    Sequence::new(v)
}

/// Checks `λ_1(n) = n`, `λ_2(n) = 2n-1` for `n <= nmax` and
/// `λ_1(n,m) = n+m-1`, `λ_2(n,m) = 2n+m-2` for `n, m <= bmax`, `m >= 2`,
/// plus the validity and length of the extremal witnesses.
pub fn verify_known(nmax: usize, bmax: usize, budget: SearchBudget) -> Result<KnownReport> {
    let mut r = KnownReport::default();
    for n in 1..=nmax {
        r.push(format!("lambda_1({n})"), n as u64, &lambda_exact(1, n, budget)?);
        r.push(format!("lambda_2({n})"), 2 * n as u64 - 1, &lambda_exact(2, n, budget)?);
        let w = order2_witness(n);
        if w.len() != 2 * n - 1 || ds_order(w.as_slice()) > 2 || w.has_repetition() {
            r.failures.push(format!("order-2 witness for n={n} is not extremal"));
        }
    }
    for n in 1..=bmax {
        for m in 2..=bmax {
            r.push(format!("lambda_1({n},{m})"), (n + m - 1) as u64, &lambda_blocked_exact(1, n, m, budget)?);
            r.push(format!("lambda_2({n},{m})"), (2 * n + m - 2) as u64, &lambda_blocked_exact(2, n, m, budget)?);
            let w = order1_witness(n, m);
            if w.len() != n + m - 1 || ds_order(w.flat()) > 1 || w.num_blocks() != m {
                r.failures.push(format!("order-1 witness for n={n}, m={m} is not extremal"));
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_ds_blocked, rng};

    fn exact(s: usize, n: usize) -> u64 {
        let r = lambda_exact(s, n, SearchBudget::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.witness.len() as u64, r.value);
        assert!(ds_order(r.witness.flat()) <= s);
        assert!(!r.witness.to_sequence().has_repetition());
        r.value
    }

    fn blocked(s: usize, n: usize, m: usize) -> u64 {
        let r = lambda_blocked_exact(s, n, m, SearchBudget::default()).unwrap();
        assert!(r.exact);
        assert_eq!(r.witness.len() as u64, r.value);
        assert!(r.witness.num_blocks() <= m);
        assert!(ds_order(r.witness.flat()) <= s);
        r.value
    }

    #[test]
    fn small_orders() {
        for n in 1..=7 {
            assert_eq!(exact(1, n), n as u64);
            assert_eq!(exact(2, n), 2 * n as u64 - 1);
        }
        assert_eq!(exact(3, 2), 4);
        assert_eq!(exact(3, 3), 8);
    }

    #[test]
    fn blocked_small_orders() {
        for n in 1..=5 {
            assert_eq!(blocked(3, n, 1), n as u64);
            assert_eq!(blocked(3, n, 2), 2 * n as u64);
            for m in 2..=5 {
                assert_eq!(blocked(1, n, m), (n + m - 1) as u64);
                assert_eq!(blocked(2, n, m), (2 * n + m - 2) as u64);
            }
        }
        assert_eq!(blocked(2, 3, 4), 8);
        assert_eq!(blocked(2, 5, 3), 11);
    }

    #[test]
    fn deepening_agrees() {
        for (s, n) in [(1, 4), (2, 4), (3, 3), (3, 4), (4, 3)] {
            let (v, w) = lambda_by_deepening(s, n, 10_000_000).unwrap();
            assert_eq!(v, exact(s, n), "s={s} n={n}");
            assert!(ds_order(w.as_slice()) <= s);
        }
    }

    #[test]
    fn witness_is_lexicographically_least_order1() {
        let r = lambda_exact(2, 3, SearchBudget::default()).unwrap();
        assert_eq!(r.witness.flat(), &[0, 1, 0, 2, 0]);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = lambda_exact(3, 6, SearchBudget::nodes(50)).unwrap();
        assert!(!r.exact);
        assert_eq!(r.witness.len() as u64, r.value);
        assert!(ds_order(r.witness.flat()) <= 3);
    }

    #[test]
    fn known_values() {
        let r = verify_known(7, 5, SearchBudget::default()).unwrap();
        assert!(r.ok(), "{:?}", r.failures);
    }

    #[test]
    fn decomposition_matches_built_trees() {
        let mut g = rng(11);
        for s in 3..=5 {
            for _ in 0..60 {
                let b = random_ds_blocked(&mut g, 6, s, 8);
                for st in [Strategy::Halving, Strategy::Permissible { r: 1 }, Strategy::Ackermann { i: 2, c: 2 }] {
                    let direct = strategy_feathers(&b, st);
                    assert_eq!(feathers_by_decomposition(&b, st), direct, "{st} on {:?}", b);
                    let min = min_feathers_exact(&b, 1_000_000).unwrap().unwrap();
                    assert!(min <= direct);
                }
            }
        }
    }

    #[test]
    fn two_blocks_have_no_feathers() {
        let b = BlockedSequence::from_blocks([vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        assert_eq!(min_feathers_exact(&b, 10).unwrap(), Some(0));
        assert_eq!(min_double_feathers_permissible(&b).unwrap(), 0);
    }
}
