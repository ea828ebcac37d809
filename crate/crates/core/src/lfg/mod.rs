//! LFG representations: c-structure trees, f-structure unit stores, the
//! φ correspondence between them, unification, and the well-formedness
//! conditions.

mod canonical;
mod cstructure;
mod fstructure;
mod wellformed;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::symbol::Sym;

pub use canonical::{canonical_form, canonical_unit_order, tree_form};
pub use cstructure::{CNode, CTree, NodeId, NodeKind};
pub use fstructure::{FStore, FUnit, FValue, SemForm, UnitId, Unified};
pub(crate) use fstructure::resolve as resolve_redirect;
pub use wellformed::{
    check_coherence, check_completeness, check_nonbranching_dominance, check_uniqueness, check_valid,
    Completeness, Violation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown f-structure unit {0}")]
    UnknownUnit(UnitId),
    #[error("node {0} breaks the tree shape")]
    NotATree(NodeId),
    #[error("node {0}: {1}")]
    BadNodeKind(NodeId, &'static str),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnifyError {
    #[error("uniqueness failure on attribute {attr}")]
    Clash { attr: Sym },
    #[error("unknown f-structure unit {0}")]
    UnknownUnit(UnitId),
}

/// Partial map from c-structure nodes to f-structure units.
pub type PhiMap = BTreeMap<NodeId, UnitId>;

/// Attributes treated as governable grammatical functions by Coherence and
/// Completeness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GovernableFunctions {
    functions: BTreeSet<Sym>,
}

impl GovernableFunctions {
    pub fn new<I, S>(functions: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Sym>,
    {
        let functions: BTreeSet<Sym> = functions.into_iter().map(Into::into).collect();
        (!functions.is_empty()).then_some(GovernableFunctions { functions })
    }

    pub fn contains(&self, attr: &str) -> bool {
        self.functions.contains(attr)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sym> {
        self.functions.iter()
    }
}

impl Default for GovernableFunctions {
    fn default() -> Self {
        GovernableFunctions::new(["SUBJ", "OBJ", "OBJ2", "OBL", "COMP", "XCOMP"]).expect("non-empty")
    }
}

/// A c-structure, an f-structure and the φ mapping between them.
///
/// Corpus exemplars and final analyses are closed (no slot nodes);
/// fragments reuse the same triple with slots allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub tree: CTree,
    pub fs: FStore,
    pub phi: PhiMap,
}

impl Representation {
    /// Checks that φ only mentions existing nodes and units and that every
    /// unit reference resolves.
    pub fn new(tree: CTree, fs: FStore, phi: PhiMap) -> Result<Self, StructureError> {
        for (&n, &u) in &phi {
            if tree.get(n).is_none() {
                return Err(StructureError::UnknownNode(n));
            }
            if !fs.contains(u) {
                return Err(StructureError::UnknownUnit(u));
            }
        }
        for (_, unit) in fs.iter() {
            if let Some(r) = unit.unit_refs().find(|r| !fs.contains(*r)) {
                return Err(StructureError::UnknownUnit(r));
            }
        }
        Ok(Representation { tree, fs, phi })
    }

    pub fn phi(&self, node: NodeId) -> Option<UnitId> {
        self.phi.get(&node).copied()
    }

    /// The unit φ-linked to the c-structure root.
    pub fn outer_unit(&self) -> Option<UnitId> {
        self.phi(self.tree.root())
    }

    pub fn words(&self) -> Vec<Sym> {
        self.tree.words()
    }

    /// Units φ-accessible from at least one node of the tree.
    pub fn accessible_units(&self) -> BTreeSet<UnitId> {
        self.fs.reachable_from(self.phi.values().copied())
    }
}

/// Whether `unit` is φ-accessible from `node`: either `unit = φ(node)` or a
/// chain of attributes leads from `φ(node)` to `unit`.
pub fn phi_accessible(repr: &Representation, unit: UnitId, node: NodeId) -> Result<bool, StructureError> {
    if repr.tree.get(node).is_none() {
        return Err(StructureError::UnknownNode(node));
    }
    if !repr.fs.contains(unit) {
        return Err(StructureError::UnknownUnit(unit));
    }
    Ok(match repr.phi(node) {
        Some(start) => repr.fs.reachable_from([start]).contains(&unit),
        None => false,
    })
}

/// Issues fresh semantic-form instance ids.
#[derive(Clone, Debug, Default)]
pub struct InstanceMint {
    next: u32,
}

impl InstanceMint {
    pub fn starting_at(next: u32) -> Self {
        InstanceMint { next }
    }

    pub fn mint(&mut self) -> u32 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}
