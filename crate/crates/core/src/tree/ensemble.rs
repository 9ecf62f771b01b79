use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::anatomy::LeafLabels;
use super::build::{level_leaves, partition};
use super::{build_tree, build_tree_relaxed, DerivTree, NodeId, Strategy, NIL};
use crate::error::Result;
use crate::sequence::{BlockedSequence, Sym};

/// Occurrence categories; they partition the occurrences counted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Categories {
    pub total: u64,
    pub dove_wingtips: u64,
    pub hawk_wingtips: u64,
    pub double_feathers: u64,
    pub dove_other: u64,
    pub hawk_other: u64,
}

impl Categories {
    fn add(&mut self, f: u8) {
        self.total += 1;
        let dove = f & LeafLabels::DOVE != 0;
        if f & LeafLabels::WINGTIP != 0 {
            if dove {
                self.dove_wingtips += 1;
            } else {
                self.hawk_wingtips += 1;
            }
        } else if f & LeafLabels::DFEATHER != 0 {
            self.double_feathers += 1;
        } else if dove {
            self.dove_other += 1;
        } else {
            self.hawk_other += 1;
        }
    }

    pub fn sums_to_total(&self) -> bool {
        self.dove_wingtips + self.hawk_wingtips + self.double_feathers + self.dove_other + self.hawk_other
            == self.total
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EnsembleReport {
    pub feathers: u64,
    pub double_feathers: u64,
    /// Superimposed trees built to classify the feathers.
    pub superimposed_trees: u64,
    /// Feathers whose wing node is a head of the projection.
    pub head_level: u64,
    /// Feathers whose quill could not be located in a superimposed tree.
    pub unresolved: u64,
    /// All occurrences.
    pub all: Categories,
    /// Occurrences of symbols that are global at the root decomposition.
    pub global: Categories,
}

/// A derivation tree with the double-feather classification induced by
/// its superimposed first- and last-appearance trees.
#[derive(Clone, Debug)]
pub struct TreeEnsemble {
    pub tree: DerivTree,
    pub labels: LeafLabels,
    pub report: EnsembleReport,
}

/// First and last composition interval of each global symbol.
fn spans(t: &DerivTree, xs: &[NodeId]) -> HashMap<Sym, (u32, u32)> {
    let mut out: HashMap<Sym, (u32, u32)> = HashMap::new();
    for (q, &x) in xs.iter().enumerate() {
        for &a in t.dense_block(x).unwrap_or(&[]) {
            out.entry(a).and_modify(|e| e.1 = q as u32).or_insert((q as u32, q as u32));
        }
    }
    out
}

/// Builds the superimposed tree at interval root `x` over the symbols making
/// their first (or last) appearance there, with its level leaves.
fn superimpose(
    t: &DerivTree,
    x: NodeId,
    first: bool,
    span: &HashMap<Sym, (u32, u32)>,
) -> Option<(DerivTree, Vec<NodeId>)> {
    let (cid, q) = t.x_of[x as usize];
    if cid == NIL {
        return None;
    }
    let comp = &t.comps[cid as usize];
    let mut leaves = Vec::new();
    level_leaves(t, x, comp.widths[q as usize] as usize, comp.local_strategy, &mut leaves);
    let mut seq = BlockedSequence::empty();
    for &l in &leaves {
        let blk: Vec<Sym> = t
            .dense_block(l)
            .unwrap_or(&[])
            .iter()
            .copied()
            .filter(|a| {
                span.get(a).is_some_and(|&(f, l)| f != l && if first { f == q } else { l == q })
            })
            .collect();
        seq.push_block_unchecked(&blk);
    }
    Some((build_tree_relaxed(&seq, comp.local_strategy), leaves))
}

struct Outcome {
    pos: u32,
    double: bool,
    resolved: bool,
}

fn classify_group(t: &DerivTree, w: NodeId, entries: &[(u32, u32, bool)], span: &HashMap<Sym, (u32, u32)>) -> (Vec<Outcome>, u64) {
    let mut built = 0;
    let mut out = Vec::with_capacity(entries.len());
    for first in [true, false] {
        let mine: Vec<_> = entries.iter().filter(|e| e.2 == first).collect();
        if mine.is_empty() {
            continue;
        }
        let Some((sup, leaves)) = superimpose(t, w, first, span) else {
            out.extend(mine.iter().map(|e| Outcome { pos: e.0, double: false, resolved: false }));
            continue;
        };
        built += 1;
        let labels = sup.leaf_labels();
        for &&(p, quill, dove) in &mine {
            let a = t.seq.flat()[p as usize];
            let found = leaves.binary_search(&quill).ok().and_then(|k| sup.flat_position(k, a));
            let Some(sp) = found else {
                out.push(Outcome { pos: p, double: false, resolved: false });
                continue;
            };
            let f = labels.flags[sp];
            let (same, other) = if dove {
                (LeafLabels::DOVE, LeafLabels::HAWK)
            } else {
                (LeafLabels::HAWK, LeafLabels::DOVE)
            };
            let double = f & LeafLabels::SINGLE != 0
                || (f & same != 0 && f & LeafLabels::FEATHER != 0)
                || (f & other != 0 && f & LeafLabels::WINGTIP != 0);
            out.push(Outcome { pos: p, double, resolved: true });
        }
    }
    (out, built)
}

/// Builds a tree and classifies its double-feathers.
pub fn build_ensemble(b: &BlockedSequence, strategy: Strategy) -> Result<TreeEnsemble> {
    let tree = build_tree(b, strategy)?;
    let mut labels = tree.leaf_labels();
    let mut report = EnsembleReport::default();

    // (wing node, position, quill, dove)
    let mut feathers: Vec<(u32, u32, u32, bool)> = Vec::new();
    for (p, &f) in labels.flags.iter().enumerate() {
        if f & LeafLabels::FEATHER == 0 {
            continue;
        }
        let w = labels.wi[p];
        let a = tree.seq.flat()[p];
        if let Some(cr) = tree.crowns[a as usize] {
            if w == cr.left_head || w == cr.right_head {
                report.head_level += 1;
            }
        }
        feathers.push((w, p as u32, labels.qu[p], f & LeafLabels::DOVE != 0));
    }
    feathers.sort_unstable();
    report.feathers = feathers.len() as u64;

    let mut comp_ids: Vec<u32> = feathers.iter().map(|e| tree.x_of[e.0 as usize].0).filter(|&c| c != NIL).collect();
    comp_ids.sort_unstable();
    comp_ids.dedup();
    let span_of: HashMap<u32, HashMap<Sym, (u32, u32)>> = comp_ids
        .par_iter()
        .map(|&c| (c, spans(&tree, &tree.comps[c as usize].xs)))
        .collect();

    let groups: Vec<&[(u32, u32, u32, bool)]> = feathers.chunk_by(|x, y| x.0 == y.0).collect();
    let empty = HashMap::new();
    let results: Vec<(Vec<Outcome>, u64)> = groups
        .par_iter()
        .map(|g| {
            let w = g[0].0;
            let span = span_of.get(&tree.x_of[w as usize].0).unwrap_or(&empty);
            let entries: Vec<(u32, u32, bool)> = g.iter().map(|e| (e.1, e.2, e.3)).collect();
            classify_group(&tree, w, &entries, span)
        })
        .collect();
    for (outs, built) in results {
        report.superimposed_trees += built;
        for o in outs {
            if !o.resolved {
                report.unresolved += 1;
            }
            if o.double {
                labels.flags[o.pos as usize] |= LeafLabels::DFEATHER;
                report.double_feathers += 1;
            }
        }
    }

    let global = root_globals(&tree);
    for (p, &f) in labels.flags.iter().enumerate() {
        if f & LeafLabels::SINGLE != 0 {
            continue;
        }
        report.all.add(f);
        if global.as_ref().is_some_and(|g| g[tree.seq.flat()[p] as usize]) {
            report.global.add(f);
        }
    }
    Ok(TreeEnsemble { tree, labels, report })
}

/// Which symbols span two or more intervals of the root decomposition.
fn root_globals(t: &DerivTree) -> Option<Vec<bool>> {
    let m = t.seq.num_blocks();
    if m < 3 {
        return None;
    }
    let (widths, _, _) = partition(m, t.strategy);
    let mut first = vec![u32::MAX; t.alphabet()];
    let mut global = vec![false; t.alphabet()];
    let mut k = 0;
    for (q, &w) in widths.iter().enumerate() {
        for _ in 0..w {
            for &a in t.seq.block(k) {
                let a = a as usize;
                if first[a] == u32::MAX {
                    first[a] = q as u32;
                } else if first[a] != q as u32 {
                    global[a] = true;
                }
            }
            k += 1;
        }
    }
    Some(global)
}

/// Leaves holding a double-feather occurrence of `a`.
pub fn classify_double_feathers(e: &TreeEnsemble, a: Sym) -> Vec<NodeId> {
    let t = &e.tree;
    let Some(d) = t.dense(a) else { return Vec::new() };
    (0..t.seq.num_blocks())
        .filter_map(|k| {
            let i = t.seq.block(k).iter().position(|&x| x == d)?;
            let p = t.seq.block_start(k) + i;
            e.labels.is(p, LeafLabels::DFEATHER).then_some(t.leaves[k])
        })
        .collect()
}

impl TreeEnsemble {
    /// The superimposed first-appearance (`first = true`) or
    /// last-appearance tree at interval root `x`, with the nodes its
    /// leaves sit on.
    pub fn superimposed(&self, x: NodeId, first: bool) -> Option<(DerivTree, Vec<NodeId>)> {
        let (cid, _) = *self.tree.x_of.get(x as usize)?;
        if cid == NIL {
            return None;
        }
        let span = spans(&self.tree, &self.tree.comps[cid as usize].xs);
        superimpose(&self.tree, x, first, &span)
    }

    /// Interval roots that carry superimposed trees.
    pub fn interval_roots(&self) -> Vec<NodeId> {
        (0..self.tree.num_nodes() as NodeId).filter(|&v| self.tree.x_of[v as usize].0 != NIL).collect()
    }
}
