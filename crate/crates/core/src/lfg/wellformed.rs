use std::collections::BTreeSet;

use thiserror::Error;

use crate::symbol::Sym;

use super::{CTree, FStore, GovernableFunctions, NodeId, Representation, UnitId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Violation {
    #[error("uniqueness: unit {unit} has attribute {attr} more than once")]
    Uniqueness { unit: UnitId, attr: Sym },
    #[error("coherence: unit {unit} has {attr} not governed by its PRED")]
    Coherence { unit: UnitId, attr: Sym },
    #[error("completeness: unit {unit} lacks governed function {attr}")]
    Completeness { unit: UnitId, attr: Sym },
    #[error("nonbranching dominance: category {category} repeats on a unary chain at {node}")]
    NonbranchingDominance { node: NodeId, category: Sym },
}

impl Violation {
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Uniqueness { .. } => "uniqueness",
            Violation::Coherence { .. } => "coherence",
            Violation::Completeness { .. } => "completeness",
            Violation::NonbranchingDominance { .. } => "nonbranching-dominance",
        }
    }
}

/// Completeness variant. `Strict` additionally requires each governed
/// function to be a unit with a PRED of its own.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Completeness {
    #[default]
    Basic,
    Strict,
}

pub fn check_uniqueness(fs: &FStore) -> Result<(), Violation> {
    for (id, unit) in fs.iter() {
        let mut seen = BTreeSet::new();
        for (attr, _) in unit.pairs() {
            if !seen.insert(attr) {
                return Err(Violation::Uniqueness { unit: id, attr: attr.clone() });
            }
        }
    }
    Ok(())
}

/// Units without a PRED are not judged; they may still receive one later
/// in a derivation.
pub fn check_coherence(fs: &FStore, gov: &GovernableFunctions) -> Result<(), Violation> {
    for (id, unit) in fs.iter() {
        let Some(pred) = unit.pred() else { continue };
        for (attr, _) in unit.pairs() {
            if gov.contains(attr.as_str()) && !pred.governed.contains(attr) {
                return Err(Violation::Coherence { unit: id, attr: attr.clone() });
            }
        }
    }
    Ok(())
}

pub fn check_completeness(fs: &FStore, _gov: &GovernableFunctions, mode: Completeness) -> Result<(), Violation> {
    for (id, unit) in fs.iter() {
        let Some(pred) = unit.pred() else { continue };
        for g in pred.governed.iter() {
            let missing = match unit.get(g.as_str()) {
                None => true,
                Some(v) => {
                    mode == Completeness::Strict
                        && !v.as_unit().and_then(|r| fs.get(r)).is_some_and(|u| u.pred().is_some())
                }
            };
            if missing {
                return Err(Violation::Completeness { unit: id, attr: g.clone() });
            }
        }
    }
    Ok(())
}

pub fn check_nonbranching_dominance(tree: &CTree) -> Result<(), Violation> {
    for start in tree.node_ids() {
        if !tree.node(start).is_internal() {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut cur = start;
        loop {
            let node = tree.node(cur);
            if !seen.insert(&node.category) {
                return Err(Violation::NonbranchingDominance { node: cur, category: node.category.clone() });
            }
            match node.children.as_slice() {
                [only] if !tree.node(*only).is_terminal() => cur = *only,
                _ => break,
            }
        }
    }
    Ok(())
}

/// All four conditions, in the order Nonbranching Dominance, Uniqueness,
/// Coherence, Completeness.
pub fn check_valid(repr: &Representation, gov: &GovernableFunctions, mode: Completeness) -> Result<(), Violation> {
    check_nonbranching_dominance(&repr.tree)?;
    check_uniqueness(&repr.fs)?;
    check_coherence(&repr.fs, gov)?;
    check_completeness(&repr.fs, gov, mode)
}
