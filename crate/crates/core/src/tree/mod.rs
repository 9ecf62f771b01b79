//! Derivation trees of blocked sequences and the anatomy of their
//! projections (wings, quills, feathers, double-feathers).

mod anatomy;
mod build;
mod ensemble;
mod nesting;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::sequence::{BlockedSequence, Sym};

pub use anatomy::{project_anatomy, LeafLabels, ProjectionAnatomy, Side};
pub use ensemble::{build_ensemble, classify_double_feathers, Categories, EnsembleReport, TreeEnsemble};
pub(crate) use build::partition as partition_for;
pub use nesting::{
    check_l_node_property, check_nesting, check_nesting5, count_feathers, feather_audit,
    nested_in_block, FeatherAudit, FeatherCounts, Nesting, NestingReport, NestingViolation,
};

pub type NodeId = u32;
pub(crate) const NIL: u32 = u32::MAX;

/// How a derivation tree chooses its interval widths at every step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Strategy {
    /// Two intervals of widths `ceil(m/2)` and `floor(m/2)`.
    Halving,
    /// Uniform widths `a(i,j-1)^c` for the least `j` with `m <= a(i,j)^c`.
    Ackermann { i: u32, c: u32 },
    /// Uniform power-of-two widths `2^r` (clamped), leftover interval last.
    Permissible { r: u32 },
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Halving => write!(f, "halving"),
            Strategy::Ackermann { i, c } => write!(f, "ackermann:{i},{c}"),
            Strategy::Permissible { r } => write!(f, "permissible:{r}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown strategy `{s}`"));
        if s == "halving" {
            return Ok(Strategy::Halving);
        }
        if let Some(rest) = s.strip_prefix("ackermann:") {
            let (i, c) = rest.split_once(',').ok_or_else(bad)?;
            let i: u32 = i.trim().parse().map_err(|_| bad())?;
            let c: u32 = c.trim().parse().map_err(|_| bad())?;
            if i < 1 || c < 1 {
                return invalid("ackermann strategy needs i >= 1 and c >= 1");
            }
            return Ok(Strategy::Ackermann { i, c });
        }
        if let Some(rest) = s.strip_prefix("permissible:") {
            let r: u32 = rest.trim().parse().map_err(|_| bad())?;
            if r < 1 {
                return invalid("permissible strategy needs r >= 1");
            }
            return Ok(Strategy::Permissible { r });
        }
        Err(bad())
    }
}

/// Crown and heads of a symbol's projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crown {
    pub crown: NodeId,
    pub left_head: NodeId,
    pub right_head: NodeId,
}

/// One decomposition step: the leaves of its global tree (the interval
/// roots) and the strategy used for the local trees below them.
#[derive(Clone, Debug)]
pub(crate) struct Composition {
    pub xs: Vec<NodeId>,
    pub widths: Vec<u32>,
    pub local_strategy: Strategy,
}

/// A derivation tree. Symbols are stored relabeled by first appearance;
/// `label` maps them back. Node ids follow pre-order, the root is 0.
#[derive(Clone, Debug)]
pub struct DerivTree {
    pub(crate) strategy: Strategy,
    pub(crate) seq: BlockedSequence,
    pub(crate) labels: Vec<Sym>,
    pub(crate) index: HashMap<Sym, Sym>,
    pub(crate) parent: Vec<NodeId>,
    pub(crate) child_start: Vec<u32>,
    pub(crate) child_list: Vec<NodeId>,
    pub(crate) subtree: Vec<u32>,
    pub(crate) block_start: Vec<u32>,
    pub(crate) block_len: Vec<u32>,
    pub(crate) pool: Vec<Sym>,
    pub(crate) leaves: Vec<NodeId>,
    pub(crate) crowns: Vec<Option<Crown>>,
    pub(crate) comps: Vec<Composition>,
    /// For interval roots: (composition, interval index).
    pub(crate) x_of: Vec<(u32, u32)>,
}

impl DerivTree {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v as usize];
        (p != NIL).then_some(p)
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.child_list[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.children(v).is_empty()
    }

    /// Whether `u` is `v` or an ancestor of `v`.
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        u <= v && v < u + self.subtree[u as usize]
    }

    pub(crate) fn dense_block(&self, v: NodeId) -> Option<&[Sym]> {
        let l = self.block_len[v as usize];
        (l != NIL).then(|| {
            let s = self.block_start[v as usize] as usize;
            &self.pool[s..s + l as usize]
        })
    }

    /// Block of `v` in the original symbols, if `v` carries one.
    pub fn block(&self, v: NodeId) -> Option<Vec<Sym>> {
        self.dense_block(v).map(|b| b.iter().map(|&x| self.labels[x as usize]).collect())
    }

    /// Leaves from left to right; leaf `k` carries block `k` of the input.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.num_nodes()];
        for v in 1..self.num_nodes() {
            depth[v] = depth[self.parent[v] as usize] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }

    pub(crate) fn dense(&self, a: Sym) -> Option<Sym> {
        self.index.get(&a).copied()
    }

    /// Crown and heads of `a`, absent for symbols occurring once.
    pub fn crown(&self, a: Sym) -> Option<Crown> {
        self.crowns[self.dense(a)? as usize]
    }

    /// The input sequence in original symbols.
    pub fn sequence(&self) -> BlockedSequence {
        let syms = self.seq.flat().iter().map(|&x| self.labels[x as usize]).collect();
        let starts = (0..=self.seq.num_blocks())
            .map(|k| if k == self.seq.num_blocks() { self.seq.len() } else { self.seq.block_start(k) })
            .collect();
        BlockedSequence::from_raw(syms, starts)
    }

    /// Flat position of symbol `a` in leaf block `k`.
    pub fn flat_position(&self, k: usize, a: Sym) -> Option<usize> {
        let d = self.dense(a)?;
        let i = self.seq.block(k).iter().position(|&x| x == d)?;
        Some(self.seq.block_start(k) + i)
    }

    /// Labels of every leaf occurrence, indexed by flat position.
    pub fn leaf_labels(&self) -> LeafLabels {
        anatomy::leaf_labels(self)
    }

    pub(crate) fn alphabet(&self) -> usize {
        self.labels.len()
    }

    /// Nested-parenthesis rendering of the shape, for comparisons.
    pub fn shape_string(&self, v: NodeId) -> String {
        let mut out = String::new();
        self.shape_into(v, &mut out);
        out
    }

    fn shape_into(&self, v: NodeId, out: &mut String) {
        out.push('(');
        for &c in self.children(v) {
            self.shape_into(c, out);
        }
        out.push(')');
    }
}

/// Builds a derivation tree. Every symbol must occur at least twice.
pub fn build_tree(b: &BlockedSequence, strategy: Strategy) -> Result<DerivTree> {
    if b.num_blocks() < 2 {
        return invalid("a derivation tree needs at least two blocks");
    }
    if let Some((x, _)) = b.multiplicities().into_iter().find(|&(_, c)| c < 2) {
        return invalid(format!("symbol {x} occurs only once; drop singletons first"));
    }
    Ok(build::build(b, strategy))
}

/// Drops symbols occurring once, then builds the tree.
pub fn build_tree_dropping_singletons(b: &BlockedSequence, strategy: Strategy) -> Result<DerivTree> {
    build_tree(&b.drop_rare(2), strategy)
}

/// Builds a tree that tolerates symbols occurring once (they get no crown).
pub(crate) fn build_tree_relaxed(b: &BlockedSequence, strategy: Strategy) -> DerivTree {
    build::build(b, strategy)
}

#[cfg(test)]
mod tests;
