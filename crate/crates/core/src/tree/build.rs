use std::collections::HashMap;

use super::{Composition, Crown, DerivTree, Strategy, NIL};
use crate::ackermann::{ackermann, min_j};
use crate::sequence::{dense_relabel, BlockedSequence, Sym};

/// Interval widths for `m >= 3` blocks, plus the strategies for the
/// global tree and the local trees.
pub(crate) fn partition(m: usize, strat: Strategy) -> (Vec<usize>, Strategy, Strategy) {
    debug_assert!(m >= 3);
    let log2 = usize::BITS - (m - 1).leading_zeros(); // ceil(log2 m)
    match strat {
        Strategy::Halving => (vec![m.div_ceil(2), m / 2], strat, strat),
        Strategy::Permissible { r } => {
            let w = 1usize << r.min(log2 - 1);
            (uniform(m, w), strat, strat)
        }
        Strategy::Ackermann { i, c } => {
            let j = min_j(i, c, m as u64);
            if i == 1 || j == 1 {
                let w = 1usize << (log2 - 1);
                return (vec![w, m - w], strat, strat);
            }
            let base = ackermann(i, j - 1, u64::MAX).ok().and_then(|v| v.exact()).expect("below m");
            let w = (base as usize).pow(c);
            (uniform(m, w), Strategy::Ackermann { i: i - 1, c }, strat)
        }
    }
}

fn uniform(m: usize, w: usize) -> Vec<usize> {
    let mut out = vec![w; m / w];
    if m % w != 0 {
        out.push(m % w);
    }
    out
}

struct Level {
    syms: Vec<Sym>,
    starts: Vec<usize>,
}

impl Level {
    fn num_blocks(&self) -> usize {
        self.starts.len() - 1
    }

    fn block(&self, k: usize) -> &[Sym] {
        &self.syms[self.starts[k]..self.starts[k + 1]]
    }

    fn with_blocks() -> Self {
        Level { syms: Vec::new(), starts: vec![0] }
    }

    fn close(&mut self) {
        self.starts.push(self.syms.len());
    }
}

struct Builder {
    parent: Vec<u32>,
    first_child: Vec<u32>,
    last_child: Vec<u32>,
    next_sibling: Vec<u32>,
    blk_start: Vec<u32>,
    blk_len: Vec<u32>,
    pool: Vec<Sym>,
    crowns: Vec<Option<Crown>>,
    comps: Vec<Composition>,
    x_of: Vec<(u32, u32)>,
    stamp: Vec<u32>,
    seen: Vec<u32>,
    first: Vec<u32>,
    last: Vec<u32>,
    epoch: u32,
}

impl Builder {
    fn node(&mut self, parent: u32) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(parent);
        self.first_child.push(NIL);
        self.last_child.push(NIL);
        self.next_sibling.push(NIL);
        self.blk_start.push(0);
        self.blk_len.push(NIL);
        self.x_of.push((NIL, NIL));
        if parent != NIL {
            let p = parent as usize;
            if self.last_child[p] == NIL {
                self.first_child[p] = id;
            } else {
                self.next_sibling[self.last_child[p] as usize] = id;
            }
            self.last_child[p] = id;
        }
        id
    }

    fn tick(&mut self) -> u32 {
        self.epoch += 1;
        self.epoch
    }

    fn rec(&mut self, lv: &Level, strat: Strategy, root: u32) -> Vec<u32> {
        let m = lv.num_blocks();
        if m == 1 {
            return vec![root];
        }
        if m == 2 {
            let (c1, c2) = (self.node(root), self.node(root));
            let e = self.tick();
            for &a in lv.block(0) {
                self.seen[a as usize] = e;
            }
            for &a in lv.block(1) {
                if self.seen[a as usize] == e {
                    self.crowns[a as usize] = Some(Crown { crown: root, left_head: c1, right_head: c2 });
                }
            }
            return vec![c1, c2];
        }

        let (widths, hat_strat, local_strat) = partition(m, strat);
        let mut bounds = vec![0usize];
        for w in &widths {
            bounds.push(bounds.last().unwrap() + w);
        }
        let e = self.tick();
        for q in 0..widths.len() {
            for k in bounds[q]..bounds[q + 1] {
                for &a in lv.block(k) {
                    let a = a as usize;
                    if self.stamp[a] != e {
                        self.stamp[a] = e;
                        self.first[a] = q as u32;
                    }
                    self.last[a] = q as u32;
                }
            }
        }
        let mut hat = Level::with_blocks();
        let mut locals = Vec::with_capacity(widths.len());
        for q in 0..widths.len() {
            let tag = self.tick();
            let mut local = Level::with_blocks();
            for k in bounds[q]..bounds[q + 1] {
                for &a in lv.block(k) {
                    let ai = a as usize;
                    if self.first[ai] != self.last[ai] {
                        if self.seen[ai] != tag {
                            self.seen[ai] = tag;
                            hat.syms.push(a);
                        }
                    } else {
                        local.syms.push(a);
                    }
                }
                local.close();
            }
            hat.close();
            locals.push(local);
        }

        let xs = self.rec(&hat, hat_strat, root);
        debug_assert_eq!(xs.len(), widths.len());
        let cid = self.comps.len() as u32;
        self.comps.push(Composition {
            xs: xs.clone(),
            widths: widths.iter().map(|&w| w as u32).collect(),
            local_strategy: local_strat,
        });
        let mut leaves = Vec::with_capacity(m);
        for (q, local) in locals.iter().enumerate() {
            let x = xs[q];
            if widths[q] >= 2 {
                let blk = hat.block(q);
                self.blk_start[x as usize] = self.pool.len() as u32;
                self.blk_len[x as usize] = blk.len() as u32;
                self.pool.extend_from_slice(blk);
                self.x_of[x as usize] = (cid, q as u32);
            }
            leaves.extend(self.rec(local, local_strat, x));
        }
        leaves
    }
}

pub(crate) fn build(b: &BlockedSequence, strategy: Strategy) -> DerivTree {
    let (dense, labels) = dense_relabel(b.flat());
    let n = labels.len();
    let m = b.num_blocks();
    let mut starts: Vec<usize> = (0..m).map(|k| b.block_start(k)).collect();
    starts.push(b.len());

    let mut bd = Builder {
        parent: Vec::new(),
        first_child: Vec::new(),
        last_child: Vec::new(),
        next_sibling: Vec::new(),
        blk_start: Vec::new(),
        blk_len: Vec::new(),
        pool: dense.clone(),
        crowns: vec![None; n],
        comps: Vec::new(),
        x_of: Vec::new(),
        stamp: vec![0; n],
        seen: vec![0; n],
        first: vec![0; n],
        last: vec![0; n],
        epoch: 0,
    };
    let root = bd.node(NIL);
    let level = Level { syms: dense.clone(), starts: starts.clone() };
    let leaves = bd.rec(&level, strategy, root);
    for (k, &v) in leaves.iter().enumerate() {
        bd.blk_start[v as usize] = starts[k] as u32;
        bd.blk_len[v as usize] = (starts[k + 1] - starts[k]) as u32;
    }

    // renumber in pre-order
    let total = bd.parent.len();
    let mut order = Vec::with_capacity(total);
    let mut stack = vec![root];
    let mut kids = Vec::new();
    while let Some(v) = stack.pop() {
        order.push(v);
        kids.clear();
        let mut c = bd.first_child[v as usize];
        while c != NIL {
            kids.push(c);
            c = bd.next_sibling[c as usize];
        }
        stack.extend(kids.iter().rev());
    }
    let mut new_id = vec![0u32; total];
    for (k, &v) in order.iter().enumerate() {
        new_id[v as usize] = k as u32;
    }
    let re = |v: u32| if v == NIL { NIL } else { new_id[v as usize] };

    let mut parent = vec![NIL; total];
    let mut block_start = vec![0u32; total];
    let mut block_len = vec![NIL; total];
    let mut x_of = vec![(NIL, NIL); total];
    let mut counts = vec![0u32; total + 1];
    for (k, &v) in order.iter().enumerate() {
        let v = v as usize;
        parent[k] = re(bd.parent[v]);
        block_start[k] = bd.blk_start[v];
        block_len[k] = bd.blk_len[v];
        x_of[k] = bd.x_of[v];
        if parent[k] != NIL {
            counts[parent[k] as usize + 1] += 1;
        }
    }
    for k in 0..total {
        counts[k + 1] += counts[k];
    }
    // children of a node are contiguous in pre-order visiting order
    let child_start = counts;
    let mut fill = child_start.clone();
    let mut child_list = vec![0u32; total.saturating_sub(1)];
    for k in 1..total {
        let p = parent[k] as usize;
        child_list[fill[p] as usize] = k as u32;
        fill[p] += 1;
    }
    let mut subtree = vec![1u32; total];
    for k in (1..total).rev() {
        subtree[parent[k] as usize] += subtree[k];
    }
    let crowns = bd
        .crowns
        .iter()
        .map(|c| c.map(|c| Crown { crown: re(c.crown), left_head: re(c.left_head), right_head: re(c.right_head) }))
        .collect();
    let mut comps = bd.comps;
    for c in comps.iter_mut() {
        for x in c.xs.iter_mut() {
            *x = re(*x);
        }
    }
    let index: HashMap<Sym, Sym> = labels.iter().enumerate().map(|(k, &x)| (x, k as Sym)).collect();

    DerivTree {
        strategy,
        seq: BlockedSequence::from_raw(dense, starts),
        labels,
        index,
        parent,
        child_start,
        child_list,
        subtree,
        block_start,
        block_len,
        pool: bd.pool,
        leaves: leaves.into_iter().map(re).collect(),
        crowns,
        comps,
        x_of,
    }
}

/// Level leaves of the local tree hanging below `x`, built on `m` blocks
/// with `strat`, found by replaying the partition on shapes alone.
pub(crate) fn level_leaves(t: &DerivTree, x: u32, m: usize, strat: Strategy, out: &mut Vec<u32>) {
    match m {
        1 => out.push(x),
        2 => out.extend_from_slice(t.children(x)),
        _ => {
            let (widths, hat_strat, local_strat) = partition(m, strat);
            let mut xs = Vec::with_capacity(widths.len());
            level_leaves(t, x, widths.len(), hat_strat, &mut xs);
            for (q, &xq) in xs.iter().enumerate() {
                level_leaves(t, xq, widths[q], local_strat, out);
            }
        }
    }
}
