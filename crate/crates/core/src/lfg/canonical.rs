use std::collections::HashMap;
use std::fmt::Write;

use super::{CTree, FValue, NodeId, NodeKind, Representation, UnitId};

/// Unit numbering used by [`canonical_form`]: units φ-linked to the tree in
/// leftmost depth-first order, then units reached through attribute chains
/// in attribute-sorted breadth-first order.
pub fn canonical_unit_order(repr: &Representation) -> Vec<UnitId> {
    let mut order = Vec::new();
    let mut seen = HashMap::new();
    for id in repr.tree.preorder() {
        if let Some(u) = repr.phi(id) {
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(u) {
                e.insert(order.len());
                order.push(u);
            }
        }
    }
    let mut i = 0;
    while i < order.len() {
        if let Some(unit) = repr.fs.get(order[i]) {
            for (_, v) in unit.sorted_pairs() {
                if let FValue::Unit(r) = v {
                    if !seen.contains_key(r) {
                        seen.insert(*r, order.len());
                        order.push(*r);
                    }
                }
            }
        }
        i += 1;
    }
    order
}

/// Deterministic single-line serialization, invariant under renaming of
/// unit ids and semantic-form instances.
///
/// ```text
/// (S.1 NP.2^ (VP.1 eats.1)) ; 1 -> [(SUBJ 2) (TENSE PRES)] ; 2 -> [(NUM SG)]
/// ```
pub fn canonical_form(repr: &Representation) -> String {
    let order = canonical_unit_order(repr);
    let number: HashMap<UnitId, usize> = order.iter().enumerate().map(|(i, u)| (*u, i + 1)).collect();
    let mut out = String::new();
    write_tree(&mut out, &repr.tree, repr.tree.root(), &|n| repr.phi(n).map(|u| number[&u]));
    for (i, u) in order.iter().enumerate() {
        let _ = write!(out, " ; {} -> [", i + 1);
        if let Some(unit) = repr.fs.get(*u) {
            for (k, (attr, v)) in unit.sorted_pairs().into_iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({attr} ");
                match v {
                    FValue::Atom(a) => out.push_str(a.as_str()),
                    FValue::Sem(s) => {
                        let _ = write!(out, "{s}");
                    }
                    FValue::Unit(r) => {
                        let _ = write!(out, "{}", number[r]);
                    }
                }
                out.push(')');
            }
        }
        out.push(']');
    }
    out
}

/// Bracketed c-structure without indices, e.g. `(S NP^ (VP eats))`.
pub fn tree_form(tree: &CTree) -> String {
    let mut out = String::new();
    write_tree(&mut out, tree, tree.root(), &|_| None);
    out
}

fn write_tree(out: &mut String, tree: &CTree, id: NodeId, index: &dyn Fn(NodeId) -> Option<usize>) {
    let node = tree.node(id);
    let label = |out: &mut String| {
        out.push_str(node.category.as_str());
        if let Some(i) = index(id) {
            let _ = write!(out, ".{i}");
        }
    };
    match node.kind {
        NodeKind::Terminal => label(out),
        NodeKind::Slot => {
            label(out);
            out.push('^');
        }
        NodeKind::Internal => {
            out.push('(');
            label(out);
            for &c in &node.children {
                out.push(' ');
                write_tree(out, tree, c, index);
            }
            out.push(')');
        }
    }
}
