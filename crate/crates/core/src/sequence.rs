//! Sequences, blocked sequences and interval decompositions.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, limit, Error, Result};

pub type Sym = u32;

const NONE: u32 = u32::MAX;

/// A plain sequence of symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequence {
    syms: Vec<Sym>,
}

impl Sequence {
    pub fn new(syms: Vec<Sym>) -> Self {
        Sequence { syms }
    }

    pub fn as_slice(&self) -> &[Sym] {
        &self.syms
    }

    pub fn into_vec(self) -> Vec<Sym> {
        self.syms
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    /// Number of distinct symbols.
    pub fn alphabet_size(&self) -> usize {
        distinct(&self.syms)
    }

    pub fn has_repetition(&self) -> bool {
        self.syms.windows(2).any(|w| w[0] == w[1])
    }
}

impl From<Vec<Sym>> for Sequence {
    fn from(v: Vec<Sym>) -> Self {
        Sequence::new(v)
    }
}

/// A sequence partitioned into blocks of pairwise distinct symbols.
/// Empty blocks are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BlockedSequence {
    syms: Vec<Sym>,
    starts: Vec<usize>,
}

impl BlockedSequence {
    pub fn empty() -> Self {
        BlockedSequence { syms: Vec::new(), starts: vec![0] }
    }

    pub fn from_blocks<I, B>(blocks: I) -> Result<Self>
    where
        I: IntoIterator<Item = B>,
        B: AsRef<[Sym]>,
    {
        let mut out = BlockedSequence::empty();
        for b in blocks {
            out.push_block(b.as_ref())?;
        }
        Ok(out)
    }

    /// Builds from a flat vector and block start offsets without checking
    /// block distinctness.
    pub(crate) fn from_raw(syms: Vec<Sym>, starts: Vec<usize>) -> Self {
        debug_assert_eq!(starts.first(), Some(&0));
        debug_assert_eq!(starts.last(), Some(&syms.len()));
        BlockedSequence { syms, starts }
    }

    pub fn push_block(&mut self, block: &[Sym]) -> Result<()> {
        if block.len() > 1 {
            let mut seen = HashSet::with_capacity(block.len());
            for &x in block {
                if !seen.insert(x) {
                    return invalid(format!("symbol {x} repeated inside a block"));
                }
            }
        }
        self.syms.extend_from_slice(block);
        self.starts.push(self.syms.len());
        Ok(())
    }

    pub(crate) fn push_block_unchecked(&mut self, block: &[Sym]) {
        self.syms.extend_from_slice(block);
        self.starts.push(self.syms.len());
    }

    pub fn num_blocks(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn block(&self, k: usize) -> &[Sym] {
        &self.syms[self.starts[k]..self.starts[k + 1]]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[Sym]> + '_ {
        (0..self.num_blocks()).map(move |k| self.block(k))
    }

    pub fn block_start(&self, k: usize) -> usize {
        self.starts[k]
    }

    pub fn flat(&self) -> &[Sym] {
        &self.syms
    }

    pub fn to_sequence(&self) -> Sequence {
        Sequence::new(self.syms.clone())
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        distinct(&self.syms)
    }

    /// Occurrence count of every symbol, sorted by symbol.
    pub fn multiplicities(&self) -> Vec<(Sym, usize)> {
        let mut m: HashMap<Sym, usize> = HashMap::new();
        for &x in &self.syms {
            *m.entry(x).or_default() += 1;
        }
        let mut v: Vec<_> = m.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// The common multiplicity if every symbol occurs equally often.
    pub fn uniform_multiplicity(&self) -> Option<usize> {
        let m = self.multiplicities();
        let first = m.first()?.1;
        m.iter().all(|&(_, c)| c == first).then_some(first)
    }

    /// The common block length if all blocks have the same length.
    pub fn uniform_block_length(&self) -> Option<usize> {
        let first = self.block(0).len();
        self.blocks().all(|b| b.len() == first).then_some(first)
    }

    /// Removes every symbol occurring fewer than `min` times, keeping blocks.
    pub fn drop_rare(&self, min: usize) -> BlockedSequence {
        let counts: HashMap<Sym, usize> = self.multiplicities().into_iter().collect();
        project_blocked(self, |x| counts[&x] >= min)
    }
}

fn distinct(s: &[Sym]) -> usize {
    s.iter().collect::<HashSet<_>>().len()
}

/// On-disk form: `{"symbols":[...],"blocks":[[...],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SequenceJson {
    pub symbols: Vec<Sym>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<Sym>>>,
}

impl SequenceJson {
    pub fn from_sequence(s: &Sequence) -> Self {
        SequenceJson { symbols: s.syms.clone(), blocks: None }
    }

    pub fn from_blocked(b: &BlockedSequence) -> Self {
        SequenceJson {
            symbols: b.syms.clone(),
            blocks: Some(b.blocks().map(|x| x.to_vec()).collect()),
        }
    }

    /// Blocked view; a missing `blocks` field is read greedily.
    pub fn to_blocked(&self) -> Result<BlockedSequence> {
        match &self.blocks {
            None => Ok(greedy_partition(&self.symbols, None)),
            Some(blocks) => {
                let b = BlockedSequence::from_blocks(blocks)?;
                if b.flat() != self.symbols.as_slice() {
                    return Err(Error::Malformed(
                        "blocks do not concatenate to symbols".into(),
                    ));
                }
                Ok(b)
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence serialization")
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }
}

/// Relabels symbols to `0, 1, ...` by first appearance.
pub fn canonicalize(s: &[Sym]) -> Vec<Sym> {
    dense_relabel(s).0
}

pub fn canonicalize_blocked(b: &BlockedSequence) -> BlockedSequence {
    BlockedSequence::from_raw(canonicalize(&b.syms), b.starts.clone())
}

/// Dense relabeling plus the inverse map.
pub(crate) fn dense_relabel(s: &[Sym]) -> (Vec<Sym>, Vec<Sym>) {
    let mut map: HashMap<Sym, Sym> = HashMap::new();
    let mut back = Vec::new();
    let out = s
        .iter()
        .map(|&x| {
            *map.entry(x).or_insert_with(|| {
                back.push(x);
                (back.len() - 1) as Sym
            })
        })
        .collect();
    (out, back)
}

pub fn project(s: &[Sym], keep: impl Fn(Sym) -> bool) -> Vec<Sym> {
    s.iter().copied().filter(|&x| keep(x)).collect()
}

/// Projection that keeps every block, including ones that become empty.
pub fn project_blocked(b: &BlockedSequence, keep: impl Fn(Sym) -> bool) -> BlockedSequence {
    let mut syms = Vec::new();
    let mut starts = Vec::with_capacity(b.starts.len());
    starts.push(0);
    for blk in b.blocks() {
        syms.extend(blk.iter().copied().filter(|&x| keep(x)));
        starts.push(syms.len());
    }
    BlockedSequence::from_raw(syms, starts)
}

/// Drops the later of two adjacent equal symbols (only possible across
/// block boundaries).
pub fn sparsify(b: &BlockedSequence) -> Sequence {
    let mut out: Vec<Sym> = Vec::with_capacity(b.len());
    for &x in b.flat() {
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    Sequence::new(out)
}

/// Fewest blocks by greedy extension, optionally capping block length.
pub fn greedy_partition(s: &[Sym], cap: Option<usize>) -> BlockedSequence {
    let cap = cap.unwrap_or(usize::MAX).max(1);
    let mut out = BlockedSequence::empty();
    let mut cur: Vec<Sym> = Vec::new();
    let mut in_cur: HashSet<Sym> = HashSet::new();
    for &x in s {
        if in_cur.contains(&x) || cur.len() >= cap {
            out.push_block_unchecked(&cur);
            cur.clear();
            in_cur.clear();
        }
        cur.push(x);
        in_cur.insert(x);
    }
    if !cur.is_empty() {
        out.push_block_unchecked(&cur);
    }
    out
}

/// True when every `k` consecutive symbols are distinct.
pub fn is_k_sparse(s: &[Sym], k: usize) -> bool {
    let mut last: HashMap<Sym, usize> = HashMap::new();
    for (i, &x) in s.iter().enumerate() {
        if let Some(&p) = last.get(&x) {
            if i - p < k {
                return false;
            }
        }
        last.insert(x, i);
    }
    true
}

/// Occurrence lists over densely relabeled symbols.
pub(crate) struct Occurrences {
    start: Vec<usize>,
    pos: Vec<u32>,
}

impl Occurrences {
    pub(crate) fn new(dense: &[Sym], n: usize) -> Self {
        let mut start = vec![0usize; n + 1];
        for &x in dense {
            start[x as usize + 1] += 1;
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut pos = vec![0u32; dense.len()];
        for (i, &x) in dense.iter().enumerate() {
            pos[fill[x as usize]] = i as u32;
            fill[x as usize] += 1;
        }
        Occurrences { start, pos }
    }

    pub(crate) fn of(&self, a: Sym) -> &[u32] {
        &self.pos[self.start[a as usize]..self.start[a as usize + 1]]
    }
}

/// Number of runs in the projection onto two sorted position lists.
fn runs_of(pa: &[u32], pb: &[u32]) -> usize {
    if pa.is_empty() || pb.is_empty() {
        return (!pa.is_empty()) as usize + (!pb.is_empty()) as usize;
    }
    let (small, large) = if pa.len() <= pb.len() { (pa, pb) } else { (pb, pa) };
    // runs of `small`: distinct gaps of `large` that contain it
    let mut small_runs = 0;
    let mut prev_rank = usize::MAX;
    for &p in small {
        let r = large.partition_point(|&x| x < p);
        if r != prev_rank {
            small_runs += 1;
            prev_rank = r;
        }
    }
    // runs of `large`: gaps of `small` that contain it
    let mut large_runs = 0;
    let mut lo = 0u32;
    for k in 0..=small.len() {
        let hi = if k < small.len() { small[k] } else { u32::MAX };
        let i = large.partition_point(|&x| x < lo);
        if i < large.len() && large[i] < hi && (k == 0 || large[i] > small[k - 1]) {
            large_runs += 1;
        }
        if k < small.len() {
            lo = small[k];
        }
    }
    small_runs + large_runs
}

/// Length of the longest alternation `a b a b ...` (or `b a b a ...`).
pub fn longest_alternation(s: &[Sym], a: Sym, b: Sym) -> usize {
    if a == b {
        return s.contains(&a) as usize;
    }
    let mut runs = 0;
    let mut last = None;
    for &x in s {
        if (x == a || x == b) && last != Some(x) {
            runs += 1;
            last = Some(x);
        }
    }
    runs
}

/// A pair realizing an alternation of the given length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AltWitness {
    pub a: Sym,
    pub b: Sym,
    pub length: usize,
}

/// Longest alternation over all pairs of distinct symbols.
pub fn max_alternation(s: &[Sym]) -> (usize, Option<AltWitness>) {
    alternation_search(s, usize::MAX)
}

/// First witness of an alternation of length at least `len`, if any.
pub fn find_alternation(s: &[Sym], len: usize) -> Option<AltWitness> {
    let (best, w) = alternation_search(s, len);
    if best >= len {
        w
    } else {
        None
    }
}

fn alternation_search(s: &[Sym], stop: usize) -> (usize, Option<AltWitness>) {
    let (dense, back) = dense_relabel(s);
    let n = back.len();
    if n < 2 {
        return (n.min(1), None);
    }
    let wit = |a: Sym, b: Sym, length| {
        Some(AltWitness { a: back[a as usize].min(back[b as usize]), b: back[a as usize].max(back[b as usize]), length })
    };
    let first_two = {
        let a = dense[0];
        let b = *dense.iter().find(|&&x| x != a).unwrap();
        (a, b)
    };
    let mut best = 2;
    let mut best_w = wit(first_two.0, first_two.1, 2);
    if best >= stop {
        return (best, best_w);
    }

    let mut next = vec![NONE; dense.len()];
    let mut last = vec![NONE; n];
    for i in (0..dense.len()).rev() {
        let x = dense[i] as usize;
        next[i] = last[x];
        last[x] = i as u32;
    }
    // internal gaps (q, p) with something inside
    let mut gaps: Vec<(u32, u32)> = Vec::new();
    for (q, &p) in next.iter().enumerate() {
        if p != NONE && p as usize > q + 1 {
            gaps.push((p, q as u32));
        }
    }
    if let Some(&(p, q)) = gaps.first() {
        best = 3;
        best_w = wit(dense[q as usize], dense[q as usize + 1], 3);
        let _ = p;
    } else {
        return (best, best_w);
    }
    if best >= stop {
        return (best, best_w);
    }

    let occ = Occurrences::new(&dense, n);
    gaps.sort_unstable_by(|x, y| y.cmp(x));
    let mut points: Vec<u32> = (0..dense.len() as u32).filter(|&x| next[x as usize] != NONE).collect();
    points.sort_unstable_by_key(|&x| std::cmp::Reverse(next[x as usize]));
    let mut active: BTreeSet<u32> = BTreeSet::new();
    let mut pi = 0;
    for &(p, q) in &gaps {
        while pi < points.len() && next[points[pi] as usize] > p {
            active.insert(points[pi]);
            pi += 1;
        }
        let a = dense[q as usize];
        for &x in active.range(q + 1..p) {
            let b = dense[x as usize];
            let r = runs_of(occ.of(a), occ.of(b));
            if r > best {
                best = r;
                best_w = wit(a, b, r);
                if best >= stop {
                    return (best, best_w);
                }
            }
        }
    }
    (best, best_w)
}

/// Smallest `s >= 1` such that no alternation of length `s + 2` occurs.
pub fn ds_order(s: &[Sym]) -> usize {
    max_alternation(s).0.saturating_sub(1).max(1)
}

/// Witness that `ds_order(s) > order`, if there is one.
pub fn order_violation(s: &[Sym], order: usize) -> Option<AltWitness> {
    find_alternation(s, order + 2)
}

/// Quadratic reference implementation of `ds_order`.
pub fn ds_order_naive(s: &[Sym]) -> usize {
    let alpha: Vec<Sym> = s.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut best = 0;
    for (i, &a) in alpha.iter().enumerate() {
        for &b in &alpha[i + 1..] {
            best = best.max(longest_alternation(s, a, b));
        }
    }
    best.saturating_sub(1).max(1)
}

pub const MAX_PATTERN_SYMBOLS: usize = 8;

/// Whether `s` contains a subsequence equal to `pattern` up to an
/// injective relabeling.
pub fn contains_pattern(s: &[Sym], pattern: &[Sym]) -> Result<bool> {
    let (pat, pback) = dense_relabel(pattern);
    if pback.len() > MAX_PATTERN_SYMBOLS {
        return limit(format!(
            "pattern has {} symbols, limit is {MAX_PATTERN_SYMBOLS}",
            pback.len()
        ));
    }
    if pat.is_empty() {
        return Ok(true);
    }
    let (dense, back) = dense_relabel(s);
    let occ = Occurrences::new(&dense, back.len());
    let mut map = vec![NONE; pback.len()];
    let mut used = vec![false; back.len()];
    Ok(match_from(&dense, &occ, &pat, 0, 0, &mut map, &mut used))
}

fn match_from(
    s: &[Sym],
    occ: &Occurrences,
    pat: &[Sym],
    k: usize,
    from: usize,
    map: &mut [u32],
    used: &mut [bool],
) -> bool {
    if k == pat.len() {
        return true;
    }
    let want = pat[k] as usize;
    if map[want] != NONE {
        let list = occ.of(map[want]);
        let i = list.partition_point(|&x| (x as usize) < from);
        return i < list.len() && match_from(s, occ, pat, k + 1, list[i] as usize + 1, map, used);
    }
    // earliest occurrence of each unused symbol dominates later ones
    let mut tried: HashSet<Sym> = HashSet::new();
    for (i, &x) in s.iter().enumerate().skip(from) {
        if used[x as usize] || !tried.insert(x) {
            continue;
        }
        map[want] = x;
        used[x as usize] = true;
        let ok = match_from(s, occ, pat, k + 1, i + 1, map, used);
        used[x as usize] = false;
        map[want] = NONE;
        if ok {
            return true;
        }
    }
    false
}

/// The derived sequences of one interval decomposition.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub widths: Vec<usize>,
    /// Block index where each interval starts, plus a final sentinel.
    pub bounds: Vec<usize>,
    pub local_alphabets: Vec<Vec<Sym>>,
    pub global_alphabet: Vec<Sym>,
    /// Local symbols of each interval.
    pub local: Vec<BlockedSequence>,
    /// Global symbols of each interval.
    pub global: Vec<BlockedSequence>,
    /// Global symbols whose first occurrence lies in the interval.
    pub first: Vec<BlockedSequence>,
    /// Global symbols whose last occurrence lies in the interval.
    pub last: Vec<BlockedSequence>,
    /// Global symbols occurring both before and after the interval.
    pub middle: Vec<BlockedSequence>,
    /// One block per interval listing its global symbols by first appearance.
    pub contracted: BlockedSequence,
}

impl Decomposition {
    pub fn num_intervals(&self) -> usize {
        self.widths.len()
    }
}

/// Splits `b` into consecutive intervals of the given widths.
pub fn decompose(b: &BlockedSequence, widths: &[usize]) -> Result<Decomposition> {
    if widths.iter().sum::<usize>() != b.num_blocks() {
        return invalid(format!(
            "widths sum to {} but the sequence has {} blocks",
            widths.iter().sum::<usize>(),
            b.num_blocks()
        ));
    }
    if widths.iter().any(|&w| w == 0) {
        return invalid("interval widths must be positive");
    }
    let mut bounds = vec![0];
    for &w in widths {
        bounds.push(bounds.last().unwrap() + w);
    }
    let q_of_block: Vec<usize> = (0..widths.len())
        .flat_map(|q| std::iter::repeat(q).take(widths[q]))
        .collect();
    // first and last interval of each symbol
    let mut span: HashMap<Sym, (usize, usize)> = HashMap::new();
    for (k, blk) in b.blocks().enumerate() {
        let q = q_of_block[k];
        for &x in blk {
            span.entry(x).and_modify(|e| e.1 = q).or_insert((q, q));
        }
    }
    let mq = widths.len();
    let mut local_alphabets = vec![Vec::new(); mq];
    let mut global_alphabet = Vec::new();
    let mut seen = HashSet::new();
    for &x in b.flat() {
        if seen.insert(x) {
            let (f, l) = span[&x];
            if f == l {
                local_alphabets[f].push(x);
            } else {
                global_alphabet.push(x);
            }
        }
    }
    let interval = |q: usize, keep: &dyn Fn(Sym) -> bool| {
        let mut out = BlockedSequence::empty();
        for k in bounds[q]..bounds[q + 1] {
            let blk: Vec<Sym> = b.block(k).iter().copied().filter(|&x| keep(x)).collect();
            out.push_block_unchecked(&blk);
        }
        out
    };
    let mut local = Vec::with_capacity(mq);
    let mut global = Vec::with_capacity(mq);
    let mut first = Vec::with_capacity(mq);
    let mut last = Vec::with_capacity(mq);
    let mut middle = Vec::with_capacity(mq);
    let mut contracted = BlockedSequence::empty();
    for q in 0..mq {
        let sp = |x: Sym| span[&x];
        local.push(interval(q, &|x| sp(x).0 == sp(x).1));
        global.push(interval(q, &|x| sp(x).0 != sp(x).1));
        first.push(interval(q, &|x| sp(x).0 != sp(x).1 && sp(x).0 == q));
        last.push(interval(q, &|x| sp(x).0 != sp(x).1 && sp(x).1 == q));
        middle.push(interval(q, &|x| sp(x).0 < q && q < sp(x).1));
        let mut order = Vec::new();
        let mut inq = HashSet::new();
        for &x in global[q].flat() {
            if inq.insert(x) {
                order.push(x);
            }
        }
        contracted.push_block_unchecked(&order);
    }
    Ok(Decomposition {
        widths: widths.to_vec(),
        bounds,
        local_alphabets,
        global_alphabet,
        local,
        global,
        first,
        last,
        middle,
        contracted,
    })
}

/// Outcome of checking the order bounds of derived sequences.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DecompositionReport {
    pub intervals: usize,
    pub violations: Vec<String>,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that first and last parts have order at most `s - 1` and the
/// middle parts order at most `s - 2`, given that `b` has order `s`.
pub fn verify_decomposition_orders(
    b: &BlockedSequence,
    widths: &[usize],
    s: usize,
) -> Result<DecompositionReport> {
    if s < 3 {
        return invalid("order must be at least 3");
    }
    if let Some(w) = order_violation(b.flat(), s) {
        return invalid(format!(
            "input has order above {s} (pair {},{} alternates {})",
            w.a, w.b, w.length
        ));
    }
    let d = decompose(b, widths)?;
    let mut rep = DecompositionReport { intervals: d.num_intervals(), violations: Vec::new() };
    let mut check = |name: &str, q: usize, seq: &BlockedSequence, bound: usize| {
        if let Some(w) = order_violation(seq.flat(), bound) {
            rep.violations.push(format!(
                "{name}[{q}] exceeds order {bound}: pair {},{} alternates {}",
                w.a, w.b, w.length
            ));
        }
    };
    for q in 0..d.num_intervals() {
        check("first", q, &d.first[q], s - 1);
        check("last", q, &d.last[q], s - 1);
        check("middle", q, &d.middle[q], s - 2);
    }
    Ok(rep)
}
