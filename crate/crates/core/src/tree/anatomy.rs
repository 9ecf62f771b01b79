use rayon::prelude::*;
use serde::Serialize;

use super::{DerivTree, NodeId, NIL};
use crate::error::{invalid, Result};
use crate::sequence::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Dove,
    Hawk,
}

const WING: u8 = 1;
const QUILL: u8 = 2;
const FEATHER: u8 = 4;
const WINGTIP: u8 = 8;

/// Anatomy of one symbol's projection, indexed by position in `nodes`.
struct Analysis {
    ppar: Vec<u32>,
    dove: Vec<bool>,
    role: Vec<u8>,
    wi: Vec<u32>,
    qu: Vec<u32>,
    fe: Vec<u32>,
    tips: [u32; 2],
}

fn analyze(t: &DerivTree, nodes: &[NodeId], left_head: NodeId) -> Analysis {
    let len = nodes.len();
    let mut ppar = vec![NIL; len];
    let mut stack: Vec<u32> = Vec::new();
    for k in 0..len {
        while let Some(&top) = stack.last() {
            if t.is_ancestor(nodes[top as usize], nodes[k]) {
                break;
            }
            stack.pop();
        }
        ppar[k] = stack.last().copied().unwrap_or(NIL);
        stack.push(k as u32);
    }
    let mut first_child = vec![NIL; len];
    let mut last_child = vec![NIL; len];
    let mut dove = vec![false; len];
    let mut heads = [NIL; 2];
    for k in 0..len {
        let p = ppar[k];
        if p == NIL {
            let left = nodes[k] == left_head;
            heads[!left as usize] = k as u32;
            dove[k] = left;
        } else {
            let p = p as usize;
            dove[k] = dove[p];
            if first_child[p] == NIL {
                first_child[p] = k as u32;
            }
            last_child[p] = k as u32;
        }
    }
    debug_assert!(heads[0] != NIL && heads[1] != NIL, "projection needs two heads");

    let mut role = vec![0u8; len];
    let mut tips = [NIL; 2];
    for (side, &h) in heads.iter().enumerate() {
        let mut k = h;
        loop {
            role[k as usize] |= WING;
            let next = if side == 0 { first_child[k as usize] } else { last_child[k as usize] };
            if next == NIL {
                break;
            }
            k = next;
        }
        role[k as usize] |= WINGTIP;
        tips[side] = k;
    }

    let mut wi = vec![NIL; len];
    let mut qu = vec![NIL; len];
    let mut fe = vec![NIL; len];
    for k in 0..len {
        let p = ppar[k];
        if p == NIL || role[k] & WING != 0 {
            continue;
        }
        if role[p as usize] & WING != 0 {
            role[k] |= QUILL;
            qu[k] = k as u32;
            wi[k] = p;
            let mut f = k as u32;
            loop {
                let next = if dove[k] { last_child[f as usize] } else { first_child[f as usize] };
                if next == NIL {
                    break;
                }
                f = next;
            }
            fe[k] = f;
        } else {
            qu[k] = qu[p as usize];
            wi[k] = wi[p as usize];
            fe[k] = fe[p as usize];
        }
    }
    for k in 0..len {
        if role[k] & QUILL != 0 {
            role[fe[k] as usize] |= FEATHER;
        }
    }
    Analysis { ppar, dove, role, wi, qu, fe, tips }
}

/// The projection of a tree onto one symbol, with its anatomy.
#[derive(Clone, Debug)]
pub struct ProjectionAnatomy {
    pub symbol: Sym,
    pub crown: NodeId,
    pub left_head: NodeId,
    pub right_head: NodeId,
    /// Nodes whose block contains the symbol, in pre-order.
    pub nodes: Vec<NodeId>,
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    dove: Vec<bool>,
    role: Vec<u8>,
    wi: Vec<u32>,
    qu: Vec<u32>,
    fe: Vec<u32>,
    tips: [u32; 2],
}

/// Projects `t` onto symbol `a`.
pub fn project_anatomy(t: &DerivTree, a: Sym) -> Result<ProjectionAnatomy> {
    let Some(d) = t.dense(a) else {
        return invalid(format!("symbol {a} does not occur"));
    };
    let Some(cr) = t.crowns[d as usize] else {
        return invalid(format!("symbol {a} occurs only once"));
    };
    let nodes: Vec<NodeId> = (0..t.num_nodes() as NodeId)
        .filter(|&v| t.dense_block(v).is_some_and(|b| b.contains(&d)))
        .collect();
    let an = analyze(t, &nodes, cr.left_head);
    let mut children = vec![Vec::new(); nodes.len()];
    for (k, &p) in an.ppar.iter().enumerate() {
        if p != NIL {
            children[p as usize].push(k as u32);
        }
    }
    Ok(ProjectionAnatomy {
        symbol: a,
        crown: cr.crown,
        left_head: cr.left_head,
        right_head: cr.right_head,
        nodes,
        parent: an.ppar,
        children,
        dove: an.dove,
        role: an.role,
        wi: an.wi,
        qu: an.qu,
        fe: an.fe,
        tips: an.tips,
    })
}

impl ProjectionAnatomy {
    fn pos(&self, v: NodeId) -> Option<usize> {
        self.nodes.binary_search(&v).ok()
    }

    fn node(&self, k: u32) -> Option<NodeId> {
        (k != NIL).then(|| self.nodes[k as usize])
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v == self.crown || self.pos(v).is_some()
    }

    /// Parent in the projection; heads map to the crown.
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let k = self.pos(v)?;
        Some(self.node(self.parent[k]).unwrap_or(self.crown))
    }

    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        if v == self.crown {
            return vec![self.left_head, self.right_head];
        }
        self.pos(v).map(|k| self.children[k].iter().map(|&c| self.nodes[c as usize]).collect()).unwrap_or_default()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&k| self.children[k].is_empty()).map(|k| self.nodes[k]).collect()
    }

    pub fn side(&self, v: NodeId) -> Option<Side> {
        self.pos(v).map(|k| if self.dove[k] { Side::Dove } else { Side::Hawk })
    }

    pub fn left_wingtip(&self) -> NodeId {
        self.nodes[self.tips[0] as usize]
    }

    pub fn right_wingtip(&self) -> NodeId {
        self.nodes[self.tips[1] as usize]
    }

    fn has(&self, v: NodeId, flag: u8) -> bool {
        self.pos(v).is_some_and(|k| self.role[k] & flag != 0)
    }

    pub fn is_wingtip(&self, v: NodeId) -> bool {
        self.has(v, WINGTIP)
    }

    pub fn is_wing(&self, v: NodeId) -> bool {
        self.has(v, WING)
    }

    pub fn is_quill(&self, v: NodeId) -> bool {
        self.has(v, QUILL)
    }

    pub fn is_feather(&self, v: NodeId) -> bool {
        self.has(v, FEATHER)
    }

    /// Head ancestral to `v`.
    pub fn he(&self, v: NodeId) -> Option<NodeId> {
        Some(if self.side(v)? == Side::Dove { self.left_head } else { self.right_head })
    }

    /// The other head.
    pub fn other_he(&self, v: NodeId) -> Option<NodeId> {
        Some(if self.side(v)? == Side::Dove { self.right_head } else { self.left_head })
    }

    /// Wingtip below `he(v)`.
    pub fn wt(&self, v: NodeId) -> Option<NodeId> {
        Some(if self.side(v)? == Side::Dove { self.left_wingtip() } else { self.right_wingtip() })
    }

    pub fn other_wt(&self, v: NodeId) -> Option<NodeId> {
        Some(if self.side(v)? == Side::Dove { self.right_wingtip() } else { self.left_wingtip() })
    }

    /// Nearest wing ancestor; `None` on the wings.
    pub fn wi(&self, v: NodeId) -> Option<NodeId> {
        self.node(self.wi[self.pos(v)?])
    }

    pub fn qu(&self, v: NodeId) -> Option<NodeId> {
        self.node(self.qu[self.pos(v)?])
    }

    pub fn fe(&self, v: NodeId) -> Option<NodeId> {
        self.node(self.fe[self.pos(v)?])
    }

    pub fn feathers(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&k| self.role[k] & FEATHER != 0).map(|k| self.nodes[k]).collect()
    }

    /// One of `wingtip`, `wing`, `quill`, `feather`, `plain`. A node that
    /// is both quill and feather reports `feather`.
    pub fn role(&self, v: NodeId) -> Option<&'static str> {
        let r = self.role[self.pos(v)?];
        Some(if r & WINGTIP != 0 {
            "wingtip"
        } else if r & FEATHER != 0 {
            "feather"
        } else if r & WING != 0 {
            "wing"
        } else if r & QUILL != 0 {
            "quill"
        } else {
            "plain"
        })
    }
}

/// Per-occurrence labels of every leaf of a tree, indexed by flat position.
#[derive(Clone, Debug)]
pub struct LeafLabels {
    pub flags: Vec<u8>,
    /// Wing node and quill of each non-wing occurrence, else `u32::MAX`.
    pub wi: Vec<u32>,
    pub qu: Vec<u32>,
}

impl LeafLabels {
    pub const DOVE: u8 = 1;
    pub const HAWK: u8 = 2;
    pub const WINGTIP: u8 = 4;
    pub const FEATHER: u8 = 8;
    pub const DFEATHER: u8 = 16;
    /// The symbol occurs once; it counts as both wingtips.
    pub const SINGLE: u8 = 32;

    pub fn is(&self, pos: usize, flag: u8) -> bool {
        self.flags[pos] & flag != 0
    }
}

/// Entries of all blocks grouped by symbol: `(node, pool index)` in pre-order.
pub(crate) fn symbol_buckets(t: &DerivTree) -> (Vec<usize>, Vec<(u32, u32)>) {
    let n = t.alphabet();
    let mut start = vec![0usize; n + 1];
    for v in 0..t.num_nodes() as u32 {
        for &a in t.dense_block(v).unwrap_or(&[]) {
            start[a as usize + 1] += 1;
        }
    }
    for a in 0..n {
        start[a + 1] += start[a];
    }
    let mut fill = start.clone();
    let mut items = vec![(0u32, 0u32); start[n]];
    for v in 0..t.num_nodes() as u32 {
        let l = t.block_len[v as usize];
        if l == NIL {
            continue;
        }
        let s = t.block_start[v as usize];
        for p in s..s + l {
            let a = t.pool[p as usize] as usize;
            items[fill[a]] = (v, p);
            fill[a] += 1;
        }
    }
    (start, items)
}

/// Labels every leaf occurrence of every symbol.
pub(crate) fn leaf_labels(t: &DerivTree) -> LeafLabels {
    let (start, items) = symbol_buckets(t);
    let len = t.seq.len();
    let per_symbol: Vec<Vec<(u32, u8, u32, u32)>> = (0..t.alphabet())
        .into_par_iter()
        .map(|a| {
            let entries = &items[start[a]..start[a + 1]];
            let Some(cr) = t.crowns[a] else {
                return entries.iter().map(|&(_, p)| (p, LeafLabels::SINGLE | LeafLabels::WINGTIP, NIL, NIL)).collect();
            };
            let nodes: Vec<u32> = entries.iter().map(|e| e.0).collect();
            let an = analyze(t, &nodes, cr.left_head);
            let mut out = Vec::new();
            for (k, &(v, p)) in entries.iter().enumerate() {
                if !t.is_leaf(v) {
                    continue;
                }
                let mut f = if an.dove[k] { LeafLabels::DOVE } else { LeafLabels::HAWK };
                if an.role[k] & WINGTIP != 0 {
                    f |= LeafLabels::WINGTIP;
                }
                if an.role[k] & FEATHER != 0 {
                    f |= LeafLabels::FEATHER;
                }
                let node = |x: u32| if x == NIL { NIL } else { nodes[x as usize] };
                out.push((p, f, node(an.wi[k]), node(an.qu[k])));
            }
            out
        })
        .collect();
    let mut labels = LeafLabels { flags: vec![0; len], wi: vec![NIL; len], qu: vec![NIL; len] };
    for list in per_symbol {
        for (p, f, wi, qu) in list {
            let p = p as usize;
            labels.flags[p] = f;
            labels.wi[p] = wi;
            labels.qu[p] = qu;
        }
    }
    labels
}
