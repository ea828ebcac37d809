//! Decomposition of representations into fragments: indexed trees and the
//! Root, Frontier and Discard operations.
//!
//! Semantic forms belong to the rightmost terminal φ-linked to their unit.
//! A fragment keeps a semantic form only while that terminal is part of
//! the fragment, so every PRED travels with the word that introduced it.

use std::collections::{btree_map, BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lfg::{
    canonical_form, canonical_unit_order, check_uniqueness, CNode, CTree, FStore, FUnit, FValue, NodeId, NodeKind,
    PhiMap, Representation, StructureError, UnitId,
};
use crate::notation::{format_itree, format_unit};
use crate::symbol::Sym;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FragmentError {
    #[error("node {0} has no φ index and is not a terminal")]
    MissingIndex(NodeId),
    #[error("node {0} cannot be selected: {1}")]
    BadSelection(NodeId, &'static str),
    #[error("discard needs at least one pair")]
    EmptyDiscard,
    #[error("pair ({0}, {1}) may not be discarded")]
    ProtectedPair(UnitId, Sym),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    RootFrontier,
    Discard,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::RootFrontier => "RF",
            Provenance::Discard => "D",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "RF" => Some(Provenance::RootFrontier),
            "D" => Some(Provenance::Discard),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A connected subtree with its φ-accessible f-structure portion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub repr: Representation,
    pub provenance: Provenance,
}

impl Fragment {
    pub fn root_category(&self) -> &Sym {
        &self.repr.tree.node(self.repr.tree.root()).category
    }

    pub fn depth(&self) -> usize {
        self.repr.tree.depth()
    }

    pub fn canonical(&self) -> String {
        canonical_form(&self.repr)
    }

    /// Structural invariants every generated fragment satisfies.
    pub fn check_invariants(&self) -> Result<(), String> {
        let r = &self.repr;
        for (n, u) in &r.phi {
            if !r.fs.contains(*u) {
                return Err(format!("node {n} links to missing unit {u}"));
            }
        }
        let accessible = r.accessible_units();
        if let Some(u) = r.fs.ids().find(|u| !accessible.contains(u)) {
            return Err(format!("unit {u} is not φ-accessible"));
        }
        for id in r.tree.node_ids() {
            if r.tree.node(id).is_slot() && r.phi(id).is_none() {
                return Err(format!("slot {id} has no φ link"));
            }
        }
        check_uniqueness(&r.fs).map_err(|v| v.to_string())
    }
}

/// A c-structure where every node carries the id of its φ-corresponding
/// unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedTree {
    pub tree: CTree,
    pub index: Vec<UnitId>,
    pub units: FStore,
}

impl IndexedTree {
    pub fn to_representation(&self) -> Representation {
        let phi = self.index.iter().enumerate().map(|(n, u)| (NodeId(n as u32), *u)).collect();
        Representation { tree: self.tree.clone(), fs: self.units.clone(), phi }
    }
}

impl fmt::Display for IndexedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = self.to_representation();
        let ids: HashMap<UnitId, usize> = self.units.ids().map(|u| (u, u.0 as usize)).collect();
        write!(f, "{}", format_itree(&repr, &ids))?;
        for (id, unit) in self.units.iter() {
            write!(f, "\n{}", format_unit(id.0 as usize, unit, &ids))?;
        }
        Ok(())
    }
}

/// Assigns every node its φ index. Terminals without their own index
/// inherit the index of their parent.
pub fn index_tree(repr: &Representation) -> Result<IndexedTree, FragmentError> {
    let tree = &repr.tree;
    let parents = tree.parents();
    let mut index: Vec<Option<UnitId>> = vec![None; tree.len()];
    for id in tree.preorder() {
        let own = repr.phi(id);
        if let Some(u) = own {
            if !repr.fs.contains(u) {
                return Err(StructureError::UnknownUnit(u).into());
            }
        }
        index[id.index()] = match (own, tree.node(id).kind) {
            (Some(u), _) => Some(u),
            (None, NodeKind::Terminal) => parents[id.index()].and_then(|p| index[p.index()]),
            (None, _) => None,
        };
        if index[id.index()].is_none() {
            return Err(FragmentError::MissingIndex(id));
        }
    }
    Ok(IndexedTree { tree: tree.clone(), index: index.into_iter().map(|u| u.expect("set above")).collect(), units: repr.fs.clone() })
}

/// Rightmost terminal φ-linked to each unit.
fn semform_owners(repr: &Representation) -> HashMap<UnitId, NodeId> {
    let mut owners = HashMap::new();
    for leaf in repr.tree.leaves() {
        if repr.tree.node(leaf).is_terminal() {
            if let Some(u) = repr.phi(leaf) {
                owners.insert(u, leaf);
            }
        }
    }
    owners
}

/// Copies the subtree under `root`, turning every node of `frontier` into a
/// slot, and restricts the f-structure accordingly.
fn extract(src: &Representation, root: NodeId, frontier: &BTreeSet<NodeId>) -> Representation {
    let mut nodes: Vec<CNode> = Vec::new();
    let mut phi = PhiMap::new();
    let mut kept_terminals = BTreeSet::new();

    fn copy(
        src: &Representation,
        id: NodeId,
        is_root: bool,
        frontier: &BTreeSet<NodeId>,
        nodes: &mut Vec<CNode>,
        phi: &mut PhiMap,
        kept_terminals: &mut BTreeSet<NodeId>,
    ) -> NodeId {
        let node = src.tree.node(id);
        let new_id = NodeId(nodes.len() as u32);
        if let Some(u) = src.phi(id) {
            phi.insert(new_id, u);
        }
        if !is_root && frontier.contains(&id) {
            nodes.push(CNode::slot(node.category.clone()));
            return new_id;
        }
        nodes.push(CNode { category: node.category.clone(), kind: node.kind, children: Vec::new() });
        if node.is_terminal() {
            kept_terminals.insert(id);
        }
        let children = node
            .children
            .iter()
            .map(|&c| copy(src, c, false, frontier, nodes, phi, kept_terminals))
            .collect();
        nodes[new_id.index()].children = children;
        new_id
    }

    copy(src, root, true, frontier, &mut nodes, &mut phi, &mut kept_terminals);
    let tree = CTree::new(nodes, NodeId(0)).expect("copied subtree is a tree");

    let linked: BTreeSet<UnitId> = phi.values().copied().collect();
    let keep = src.fs.reachable_from(linked.iter().copied());
    let mut fs = src.fs.clone();
    fs.restrict(&keep);

    let owners = semform_owners(src);
    for (u, unit) in fs.iter_mut() {
        let keeps_semforms = match owners.get(&u) {
            Some(owner) => kept_terminals.contains(owner),
            None => linked.contains(&u),
        };
        if !keeps_semforms {
            unit.retain(|_, v| !matches!(v, FValue::Sem(_)));
        }
    }
    Representation { tree, fs, phi }
}

/// Root: keeps `node` and everything it dominates.
pub fn root_op(repr: &Representation, node: NodeId) -> Result<Fragment, FragmentError> {
    let n = repr.tree.get(node).ok_or(StructureError::UnknownNode(node))?;
    if !n.is_internal() {
        return Err(FragmentError::BadSelection(node, "root must be a non-terminal node"));
    }
    Ok(Fragment { repr: extract(repr, node, &BTreeSet::new()), provenance: Provenance::RootFrontier })
}

/// Frontier: erases the subtrees under `nodes`, leaving φ-linked slots.
pub fn frontier_op(frag: &Fragment, nodes: &[NodeId]) -> Result<Fragment, FragmentError> {
    let tree = &frag.repr.tree;
    for &n in nodes {
        let node = tree.get(n).ok_or(StructureError::UnknownNode(n))?;
        if n == tree.root() {
            return Err(FragmentError::BadSelection(n, "frontier may not contain the root"));
        }
        if !node.is_internal() {
            return Err(FragmentError::BadSelection(n, "frontier nodes must be internal non-terminals"));
        }
    }
    let set: BTreeSet<NodeId> = nodes.iter().copied().collect();
    Ok(Fragment { repr: extract(&frag.repr, tree.root(), &set), provenance: frag.provenance })
}

/// Attribute-value pairs Discard may delete, in canonical order.
///
/// Pairs whose value is the unit of a remaining node are never deletable;
/// with `protect_pred` PRED pairs are kept as well.
pub fn discard_candidates(frag: &Fragment, protect_pred: bool) -> Vec<(UnitId, Sym)> {
    let r = &frag.repr;
    let node_units: BTreeSet<UnitId> = r.phi.values().copied().collect();
    let mut out = Vec::new();
    for u in canonical_unit_order(r) {
        let Some(unit) = r.fs.get(u) else { continue };
        for (attr, v) in unit.sorted_pairs() {
            if v.as_unit().is_some_and(|t| node_units.contains(&t)) {
                continue;
            }
            if protect_pred && attr.as_str() == "PRED" {
                continue;
            }
            out.push((u, attr.clone()));
        }
    }
    out
}

/// Discard: deletes `pairs` and any unit left unreachable.
pub fn discard_op(frag: &Fragment, pairs: &[(UnitId, Sym)], protect_pred: bool) -> Result<Fragment, FragmentError> {
    if pairs.is_empty() {
        return Err(FragmentError::EmptyDiscard);
    }
    let candidates = discard_candidates(frag, protect_pred);
    for (u, a) in pairs {
        if !candidates.iter().any(|(cu, ca)| cu == u && ca == a) {
            return Err(FragmentError::ProtectedPair(*u, a.clone()));
        }
    }
    Ok(delete_pairs(frag, pairs))
}

fn delete_pairs(frag: &Fragment, pairs: &[(UnitId, Sym)]) -> Fragment {
    let mut repr = frag.repr.clone();
    for (u, a) in pairs {
        if let Some(unit) = repr.fs.get_mut(*u) {
            unit.remove(a.as_str());
        }
    }
    let keep = repr.accessible_units();
    repr.fs.restrict(&keep);
    Fragment { repr, provenance: Provenance::Discard }
}

/// Settings for [`enumerate_fragments`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub max_depth: usize,
    pub include_discard: bool,
    pub protect_pred: bool,
    /// Maximum number of Discard subsets tried per source fragment,
    /// smallest deletions first. `None` tries every subset.
    pub discard_cap: Option<usize>,
}

impl EnumerationConfig {
    pub fn without_discard(max_depth: usize) -> Self {
        EnumerationConfig { max_depth, include_discard: false, protect_pred: false, discard_cap: None }
    }

    pub fn with_discard(max_depth: usize) -> Self {
        EnumerationConfig { include_discard: true, ..Self::without_discard(max_depth) }
    }
}

/// Fragments counted by provenance and canonical form.
#[derive(Clone, Debug, Default)]
pub struct FragmentMultiset {
    entries: BTreeMap<(Provenance, String), (Fragment, u64)>,
}

impl FragmentMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, frag: Fragment) {
        let key = (frag.provenance, frag.canonical());
        self.add_keyed(key, frag, 1);
    }

    fn add_keyed(&mut self, key: (Provenance, String), frag: Fragment, count: u64) {
        match self.entries.entry(key) {
            btree_map::Entry::Occupied(mut e) => e.get_mut().1 += count,
            btree_map::Entry::Vacant(e) => {
                e.insert((frag, count));
            }
        }
    }

    pub fn merge(&mut self, other: FragmentMultiset) {
        for (key, (frag, count)) in other.entries {
            self.add_keyed(key, frag, count);
        }
    }

    /// Number of fragment tokens.
    pub fn total(&self) -> u64 {
        self.entries.values().map(|(_, c)| c).sum()
    }

    pub fn total_of(&self, provenance: Provenance) -> u64 {
        self.iter().filter(|(p, ..)| *p == provenance).map(|(.., c)| c).sum()
    }

    /// Number of distinct fragments.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, provenance: Provenance, canonical: &str) -> u64 {
        self.entries.get(&(provenance, canonical.to_string())).map_or(0, |(_, c)| *c)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(provenance, canonical form, fragment, count)` in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (Provenance, &str, &Fragment, u64)> {
        self.entries.iter().map(|((p, k), (f, c))| (*p, k.as_str(), f, *c))
    }
}

impl FromIterator<Fragment> for FragmentMultiset {
    fn from_iter<I: IntoIterator<Item = Fragment>>(iter: I) -> Self {
        let mut m = FragmentMultiset::new();
        for f in iter {
            m.add(f);
        }
        m
    }
}

/// Frontier sets for expanding `n` when its children sit at most
/// `remaining` levels above the depth limit.
fn expansions(tree: &CTree, n: NodeId, remaining: usize) -> Vec<Vec<NodeId>> {
    if remaining == 0 {
        return Vec::new();
    }
    let mut acc: Vec<Vec<NodeId>> = vec![Vec::new()];
    for &c in &tree.node(n).children {
        let options: Vec<Vec<NodeId>> = if tree.node(c).is_internal() {
            let mut o = vec![vec![c]];
            o.extend(expansions(tree, c, remaining - 1));
            o
        } else {
            vec![Vec::new()]
        };
        acc = acc
            .iter()
            .flat_map(|prefix| {
                options.iter().map(move |opt| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(opt);
                    v
                })
            })
            .collect();
    }
    acc
}

/// Frontier sets (antichains of internal non-root nodes) yielding
/// fragments rooted at `root` of depth at most `max_depth`.
pub fn frontier_sets(tree: &CTree, root: NodeId, max_depth: usize) -> Vec<Vec<NodeId>> {
    expansions(tree, root, max_depth)
}

fn combinations(m: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + m - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Distinct Discard generalizations of one Root/Frontier fragment, trying
/// deletion subsets by increasing size and lexicographically within a size.
pub fn discard_generalizations(frag: &Fragment, protect_pred: bool, cap: Option<usize>) -> Vec<Fragment> {
    const UNCAPPED_LIMIT: usize = 1 << 16;
    let candidates = discard_candidates(frag, protect_pred);
    let m = candidates.len();
    let budget = cap.unwrap_or(UNCAPPED_LIMIT);
    if cap.is_none() && m >= 16 {
        log::warn!("{m} deletable pairs; trying only the first {UNCAPPED_LIMIT} discard subsets");
    }
    let mut tried = 0usize;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 1..=m {
        if tried >= budget {
            break;
        }
        combinations(m, k, |idx| {
            let pairs: Vec<(UnitId, Sym)> = idx.iter().map(|&i| candidates[i].clone()).collect();
            let g = delete_pairs(frag, &pairs);
            if seen.insert(g.canonical()) {
                out.push(g);
            }
            tried += 1;
            tried < budget
        });
    }
    out
}

/// All fragments of `repr` up to `max_depth`, one token per (root,
/// frontier set) choice, plus optionally one token per distinct Discard
/// generalization of each of them.
pub fn enumerate_fragments(repr: &Representation, cfg: &EnumerationConfig) -> FragmentMultiset {
    let mut out = FragmentMultiset::new();
    let tree = &repr.tree;
    for root in tree.preorder() {
        if !tree.node(root).is_internal() {
            continue;
        }
        for set in frontier_sets(tree, root, cfg.max_depth) {
            let frontier: BTreeSet<NodeId> = set.into_iter().collect();
            let frag = Fragment { repr: extract(repr, root, &frontier), provenance: Provenance::RootFrontier };
            if cfg.include_discard {
                for g in discard_generalizations(&frag, cfg.protect_pred, cfg.discard_cap) {
                    out.add(g);
                }
            }
            out.add(frag);
        }
    }
    out
}

/// Replaces the f-structure by a single empty unit linked from every node.
pub fn strip_fstructure(repr: &Representation) -> Representation {
    let mut fs = FStore::new();
    fs.insert(UnitId(1), FUnit::new());
    let phi = repr.tree.node_ids().map(|n| (n, UnitId(1))).collect();
    Representation { tree: repr.tree.clone(), fs, phi }
}

#[cfg(test)]
mod tests;
