use serde::Serialize;

use super::anatomy::LeafLabels;
use super::build::partition;
use super::ensemble::TreeEnsemble;
use super::{build_tree_relaxed, DerivTree, Side, NIL};
use crate::sequence::{decompose, BlockedSequence, Occurrences, Sym};

/// How two symbols of a block relate around it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Nesting {
    Nested,
    Interleaved,
    Inapplicable,
}

/// Neighbouring occurrences of a symbol around one of its positions.
struct Around {
    first: u32,
    prev: u32,
    next: u32,
    last: u32,
}

fn around(occ: &[u32], p: u32) -> Option<Around> {
    let i = occ.binary_search(&p).ok()?;
    if i == 0 || i + 1 == occ.len() {
        return None;
    }
    Some(Around { first: occ[0], prev: occ[i - 1], next: occ[i + 1], last: occ[occ.len() - 1] })
}

fn classify(a: &Around, b: &Around) -> Nesting {
    let ab_before = a.first < b.prev;
    let ba_before = b.first < a.prev;
    let ab_after = a.next < b.last;
    let ba_after = b.next < a.last;
    if (ab_before && ba_after) || (ba_before && ab_after) {
        Nesting::Nested
    } else {
        Nesting::Interleaved
    }
}

/// Whether `a` and `b` are nested in block `k`: the sequence contains
/// `ab β ba` or `ba β ab` where `β` is the block.
pub fn nested_in_block(s: &BlockedSequence, a: Sym, b: Sym, k: usize) -> Nesting {
    if a == b || k >= s.num_blocks() {
        return Nesting::Inapplicable;
    }
    let positions = |x: Sym| -> Vec<u32> {
        s.flat().iter().enumerate().filter(|&(_, &y)| y == x).map(|(i, _)| i as u32).collect()
    };
    let start = s.block_start(k);
    let blk = s.block(k);
    let (Some(ia), Some(ib)) = (blk.iter().position(|&x| x == a), blk.iter().position(|&x| x == b)) else {
        return Nesting::Inapplicable;
    };
    match (around(&positions(a), (start + ia) as u32), around(&positions(b), (start + ib) as u32)) {
        (Some(x), Some(y)) => classify(&x, &y),
        _ => Nesting::Inapplicable,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestingViolation {
    pub block: usize,
    pub a: Sym,
    pub b: Sym,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct NestingReport {
    pub pairs_checked: u64,
    pub violation_count: u64,
    /// The first few violations.
    pub violations: Vec<NestingViolation>,
}

impl NestingReport {
    pub fn ok(&self) -> bool {
        self.violation_count == 0
    }
}

const KEEP: usize = 100;

fn check_pairs(t: &DerivTree, labels: &LeafLabels, eligible: impl Fn(u8) -> bool, same_side: bool) -> NestingReport {
    let seq = &t.seq;
    let occ = Occurrences::new(seq.flat(), t.alphabet());
    let mut report = NestingReport::default();
    let mut cand: Vec<(u32, Around, u8)> = Vec::new();
    for k in 0..seq.num_blocks() {
        cand.clear();
        let start = seq.block_start(k);
        for (i, &a) in seq.block(k).iter().enumerate() {
            let p = start + i;
            let f = labels.flags[p];
            if f & LeafLabels::SINGLE != 0 || !eligible(f) {
                continue;
            }
            if let Some(ar) = around(occ.of(a), p as u32) {
                cand.push((a, ar, f & (LeafLabels::DOVE | LeafLabels::HAWK)));
            }
        }
        for x in 0..cand.len() {
            for y in x + 1..cand.len() {
                if same_side && cand[x].2 != cand[y].2 {
                    continue;
                }
                report.pairs_checked += 1;
                if classify(&cand[x].1, &cand[y].1) != Nesting::Nested {
                    report.violation_count += 1;
                    if report.violations.len() < KEEP {
                        let l = &t.labels;
                        report.violations.push(NestingViolation {
                            block: k,
                            a: l[cand[x].0 as usize],
                            b: l[cand[y].0 as usize],
                        });
                    }
                }
            }
        }
    }
    report
}

/// Every pair of non-wingtip, non-feather symbols sharing a leaf block
/// must be nested there.
pub fn check_nesting(t: &DerivTree) -> NestingReport {
    let labels = t.leaf_labels();
    check_pairs(t, &labels, |f| f & (LeafLabels::WINGTIP | LeafLabels::FEATHER) == 0, false)
}

/// The order-5 refinement: non-wingtip, non-double-feather symbols on the
/// same side (both doves or both hawks) must be nested.
pub fn check_nesting5(e: &TreeEnsemble) -> NestingReport {
    check_pairs(&e.tree, &e.labels, |f| f & (LeafLabels::WINGTIP | LeafLabels::DFEATHER) == 0, true)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FeatherCounts {
    pub occurrences: u64,
    pub wingtips: u64,
    pub dove_feathers: u64,
    pub hawk_feathers: u64,
}

impl FeatherCounts {
    pub fn total(&self) -> u64 {
        self.dove_feathers + self.hawk_feathers
    }

    pub fn side(&self, side: Option<Side>) -> u64 {
        match side {
            Some(Side::Dove) => self.dove_feathers,
            Some(Side::Hawk) => self.hawk_feathers,
            None => self.total(),
        }
    }
}

pub(crate) fn tally(labels: &LeafLabels) -> FeatherCounts {
    let mut c = FeatherCounts::default();
    for &f in &labels.flags {
        c.occurrences += 1;
        if f & (LeafLabels::WINGTIP | LeafLabels::SINGLE) != 0 {
            c.wingtips += 1;
        }
        if f & LeafLabels::FEATHER != 0 {
            if f & LeafLabels::DOVE != 0 {
                c.dove_feathers += 1;
            } else {
                c.hawk_feathers += 1;
            }
        }
    }
    c
}

pub fn count_feathers(t: &DerivTree) -> FeatherCounts {
    tally(&t.leaf_labels())
}

/// Checks the ancestor property: on a leaf-to-root path through
/// `u, v, x, y` (bottom to top, `x = y` allowed) with `u, x` in the
/// projection onto `a`, `v` in the projection onto `b` and `b` in the
/// block of `y`, `a` is in the block of `v`. Returns the number of
/// offending `(u, a, v)` triples.
pub fn check_l_node_property(t: &DerivTree) -> u64 {
    let crown_of = |s: Sym| t.crowns[s as usize].map(|c| c.crown);
    let in_proj = |v: u32, s: Sym| crown_of(s) == Some(v) || t.dense_block(v).is_some_and(|b| b.contains(&s));
    let holds = |v: u32, s: Sym| t.dense_block(v).is_some_and(|b| b.contains(&s));
    let mut bad = 0;
    for &u in t.leaves() {
        let mut path = Vec::new();
        let mut v = t.parent[u as usize];
        while v != NIL {
            path.push(v);
            v = t.parent[v as usize];
        }
        let ub = t.dense_block(u).unwrap_or(&[]);
        let mut syms: Vec<Sym> = path.iter().flat_map(|&v| t.dense_block(v).unwrap_or(&[]).to_vec()).collect();
        syms.extend(path.iter().flat_map(|&v| (0..t.alphabet() as Sym).filter(move |&s| crown_of(s) == Some(v))));
        syms.sort_unstable();
        syms.dedup();
        for &a in ub {
            for &b in &syms {
                if a == b {
                    continue;
                }
                let Some(top_b) = path.iter().rposition(|&y| holds(y, b)) else { continue };
                let Some(ix) = (0..=top_b).rev().find(|&i| in_proj(path[i], a)) else { continue };
                for &v in &path[..ix] {
                    if in_proj(v, b) && !t.dense_block(v).is_some_and(|blk| blk.contains(&a)) {
                        bad += 1;
                    }
                }
            }
        }
    }
    bad
}

/// Splits the feathers of a tree along its top-level decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct FeatherAudit {
    pub total: u64,
    /// Feathers among local symbols, as labelled in the whole tree.
    pub local: u64,
    /// The same, counted in separately built local trees.
    pub local_rebuilt: u64,
    /// Global feathers below a feather of the global tree.
    pub type_i: u64,
    /// Global feathers below a wingtip of the global tree.
    pub type_ii: u64,
    /// Feathers of the separately built global tree.
    pub global_tree_feathers: u64,
    /// Global feathers as labelled in the whole tree.
    pub global: u64,
    /// Length of the first-appearance plus last-appearance sequences.
    pub first_last_len: u64,
    pub n_hat: u64,
    pub m_hat: u64,
    pub m: u64,
}

impl FeatherAudit {
    pub fn consistent(&self) -> bool {
        self.total == self.local + self.global
            && self.local == self.local_rebuilt
            && self.global == self.type_i + self.type_ii
            && self.type_i == self.global_tree_feathers
            && self.type_ii <= self.first_last_len
    }
}

/// Audits the feather decomposition at the root composition. `None` when
/// the tree is a base case.
pub fn feather_audit(t: &DerivTree) -> Option<FeatherAudit> {
    let seq = &t.seq;
    let m = seq.num_blocks();
    if m < 3 {
        return None;
    }
    let (widths, hat_strat, local_strat) = partition(m, t.strategy);
    let d = decompose(seq, &widths).ok()?;
    let labels = t.leaf_labels();
    let global: std::collections::HashSet<Sym> = d.global_alphabet.iter().copied().collect();

    let mut local_rebuilt = 0;
    for (q, l) in d.local.iter().enumerate() {
        if widths[q] >= 2 {
            local_rebuilt += tally(&build_tree_relaxed(l, local_strat).leaf_labels()).total();
        }
    }
    let hat = build_tree_relaxed(&d.contracted, hat_strat);
    let hat_labels = hat.leaf_labels();
    let occ = Occurrences::new(seq.flat(), t.alphabet());

    let mut interval = vec![0usize; seq.len()];
    let edge = |k: usize| if k == m { seq.len() } else { seq.block_start(k) };
    for (q, w) in d.bounds.windows(2).enumerate() {
        interval[edge(w[0])..edge(w[1])].fill(q);
    }

    let (mut local, mut global_f, mut type_i, mut type_ii) = (0, 0, 0, 0);
    for (p, &a) in seq.flat().iter().enumerate() {
        let is_feather = labels.flags[p] & LeafLabels::FEATHER != 0;
        if !global.contains(&a) {
            local += is_feather as u64;
            continue;
        }
        global_f += is_feather as u64;
        let q = interval[p];
        let hf = hat_labels.flags[hat.flat_position(q, a).expect("global symbol in contracted block")];
        let dove = hf & LeafLabels::DOVE != 0;
        let os = occ.of(a);
        let p = p as u32;
        if hf & LeafLabels::FEATHER != 0 {
            // the rightmost (dove) or leftmost (hawk) child of a global feather
            let mut in_q = os.iter().copied().filter(|&x| interval[x as usize] == q);
            let edge = if dove { in_q.last() } else { in_q.next() };
            type_i += (edge == Some(p)) as u64;
        } else if hf & LeafLabels::WINGTIP != 0 {
            let tip = if dove { os[0] } else { os[os.len() - 1] };
            type_ii += (tip != p) as u64;
        }
    }
    let first_last_len = d.first.iter().chain(d.last.iter()).map(|b| b.len() as u64).sum();
    Some(FeatherAudit {
        total: tally(&labels).total(),
        local,
        local_rebuilt,
        type_i,
        type_ii,
        global_tree_feathers: tally(&hat_labels).total(),
        global: global_f,
        first_last_len,
        n_hat: d.global_alphabet.len() as u64,
        m_hat: widths.len() as u64,
        m: m as u64,
    })
}
