use std::cell::Cell;
use std::collections::HashMap;

use thiserror::Error;

use super::{Chart, DecodeOptions, ItemId, Validity};
use crate::fragmentation::Fragment;
use crate::lfg::{
    check_coherence, check_completeness, check_nonbranching_dominance, resolve_redirect, CNode, CTree, FStore, FUnit,
    FValue, GovernableFunctions, NodeId, NodeKind, PhiMap, Representation, SemForm, UnifyError, UnitId, Violation,
};
use crate::probability::{CompetitionSet, FragId, FragmentBank};
use crate::symbol::Sym;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("no open slot left")]
    NoOpenSlot,
    #[error("slot category {slot} does not match fragment root {fragment}")]
    CategoryMismatch { slot: Sym, fragment: Sym },
    #[error("uniqueness failure on {0}")]
    Uniqueness(Sym),
    #[error("{0}")]
    Coherence(Violation),
    #[error("unknown unit {0}")]
    UnknownUnit(UnitId),
}

impl ComposeError {
    pub fn condition(&self) -> &'static str {
        match self {
            ComposeError::NoOpenSlot | ComposeError::CategoryMismatch { .. } => "category matching",
            ComposeError::Uniqueness(_) | ComposeError::UnknownUnit(_) => "uniqueness",
            ComposeError::Coherence(_) => "coherence",
        }
    }
}

/// A partial analysis built top-down. `open` lists the remaining slots
/// right to left, so the leftmost one is last.
#[derive(Clone, Debug)]
pub struct SubAnalysis {
    nodes: Vec<CNode>,
    phi: PhiMap,
    fs: FStore,
    open: Vec<NodeId>,
    next_instance: u32,
    steps: usize,
}

impl SubAnalysis {
    /// A lone slot of `category` linked to an empty unit.
    pub fn initial(category: impl Into<Sym>) -> Self {
        let mut fs = FStore::new();
        fs.insert(UnitId(1), FUnit::new());
        SubAnalysis {
            nodes: vec![CNode::slot(category)],
            phi: [(NodeId(0), UnitId(1))].into_iter().collect(),
            fs,
            open: vec![NodeId(0)],
            next_instance: 1,
            steps: 0,
        }
    }

    /// Starts from a fragment, which counts as the first step.
    pub fn from_fragment(frag: &Fragment) -> Self {
        let r = &frag.repr;
        let order = r.tree.preorder();
        let pos: HashMap<NodeId, u32> = order.iter().enumerate().map(|(i, n)| (*n, i as u32)).collect();
        let nodes = order
            .iter()
            .map(|&n| {
                let c = r.tree.node(n);
                CNode { category: c.category.clone(), kind: c.kind, children: c.children.iter().map(|ch| NodeId(pos[ch])).collect() }
            })
            .collect();
        let phi = r.phi.iter().map(|(n, u)| (NodeId(pos[n]), *u)).collect();
        let mut open: Vec<NodeId> = r.tree.slots().into_iter().map(|n| NodeId(pos[&n])).collect();
        open.reverse();
        let next_instance = r
            .fs
            .iter()
            .flat_map(|(_, u)| u.pairs().iter().filter_map(|(_, v)| v.as_sem().map(|s| s.instance)))
            .max()
            .map_or(1, |m| m + 1);
        SubAnalysis { nodes, phi, fs: r.fs.clone(), open, next_instance, steps: 1 }
    }

    pub fn is_complete(&self) -> bool {
        self.open.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn open_slots(&self) -> usize {
        self.open.len()
    }

    pub fn fstore(&self) -> &FStore {
        &self.fs
    }

    /// Category of the leftmost open slot.
    pub fn next_category(&self) -> Option<&Sym> {
        self.open.last().map(|n| &self.nodes[n.index()].category)
    }

    fn check_target(&self, frag: &Fragment) -> Result<(NodeId, UnitId), ComposeError> {
        let slot = *self.open.last().ok_or(ComposeError::NoOpenSlot)?;
        let cat = &self.nodes[slot.index()].category;
        if cat != frag.root_category() {
            return Err(ComposeError::CategoryMismatch { slot: cat.clone(), fragment: frag.root_category().clone() });
        }
        let unit = self.phi.get(&slot).copied().ok_or(ComposeError::NoOpenSlot)?;
        Ok((slot, unit))
    }

    /// Adds the fragment's units to `fs` under fresh ids and fresh semantic
    /// form instances, then unifies the slot unit with the fragment root.
    fn merge_fs(
        fs: &mut FStore,
        next_instance: &mut u32,
        frag: &Fragment,
        slot_unit: UnitId,
        gov: &GovernableFunctions,
    ) -> Result<(u32, HashMap<UnitId, UnitId>), ComposeError> {
        let offset = fs.next_id();
        let root = frag.repr.phi(frag.repr.tree.root()).ok_or(ComposeError::NoOpenSlot)?;
        for (id, unit) in frag.repr.fs.iter() {
            let pairs = unit
                .pairs()
                .iter()
                .map(|(a, v)| {
                    let v = match v {
                        FValue::Unit(r) => FValue::Unit(UnitId(r.0 + offset)),
                        FValue::Sem(s) => {
                            let instance = *next_instance;
                            *next_instance += 1;
                            FValue::Sem(SemForm { instance, ..s.clone() })
                        }
                        FValue::Atom(a) => FValue::Atom(a.clone()),
                    };
                    (a.clone(), v)
                })
                .collect();
            fs.insert(UnitId(id.0 + offset), FUnit::from_pairs(pairs));
        }
        let redirect = fs.unify_in_place(slot_unit, UnitId(root.0 + offset)).map_err(|e| match e {
            UnifyError::Clash { attr } => ComposeError::Uniqueness(attr),
            UnifyError::UnknownUnit(u) => ComposeError::UnknownUnit(u),
        })?;
        check_coherence(fs, gov).map_err(ComposeError::Coherence)?;
        Ok((offset, redirect))
    }

    /// Checks whether `frag` could be composed, without building the tree.
    pub fn admits(&self, frag: &Fragment, gov: &GovernableFunctions) -> Result<(), ComposeError> {
        let (_, unit) = self.check_target(frag)?;
        let mut fs = self.fs.clone();
        let mut next = self.next_instance;
        Self::merge_fs(&mut fs, &mut next, frag, unit, gov).map(|_| ())
    }

    fn compose_in_place(&mut self, frag: &Fragment, gov: &GovernableFunctions) -> Result<(), ComposeError> {
        let (slot, unit) = self.check_target(frag)?;
        let (offset, redirect) = Self::merge_fs(&mut self.fs, &mut self.next_instance, frag, unit, gov)?;
        self.open.pop();

        let t = &frag.repr.tree;
        let order = t.preorder();
        let base = self.nodes.len() as u32;
        // The fragment root takes over the slot node; the rest are appended.
        let mut new_id: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
        for (k, &n) in order.iter().enumerate() {
            new_id.insert(n, if k == 0 { slot } else { NodeId(base + k as u32 - 1) });
        }
        let mut added = Vec::with_capacity(order.len().saturating_sub(1));
        let mut new_slots = Vec::new();
        for (k, &n) in order.iter().enumerate() {
            let c = t.node(n);
            let node = CNode { category: c.category.clone(), kind: c.kind, children: c.children.iter().map(|ch| new_id[ch]).collect() };
            if c.kind == NodeKind::Slot {
                new_slots.push(new_id[&n]);
            }
            if k == 0 {
                self.nodes[slot.index()] = node;
            } else {
                added.push(node);
            }
        }
        self.nodes.extend(added);
        for (n, u) in &frag.repr.phi {
            self.phi.insert(new_id[n], UnitId(u.0 + offset));
        }
        if !redirect.is_empty() {
            for u in self.phi.values_mut() {
                *u = resolve_redirect(&redirect, *u);
            }
        }
        // Slots were collected in preorder, i.e. left to right.
        self.open.extend(new_slots.into_iter().rev());
        self.steps += 1;
        Ok(())
    }

    /// The closed representation. `None` while slots remain open.
    pub fn to_representation(&self) -> Option<Representation> {
        if !self.open.is_empty() {
            return None;
        }
        let tree = CTree::new(self.nodes.clone(), NodeId(0)).ok()?;
        let mut fs = self.fs.clone();
        let live = fs.reachable_from(self.phi.values().copied());
        fs.restrict(&live);
        Some(Representation { tree, fs, phi: self.phi.clone() })
    }
}

/// Leftmost substitution of `frag` into `sub` followed by unification of
/// the slot unit with the fragment's root unit.
pub fn compose(sub: &SubAnalysis, frag: &Fragment, gov: &GovernableFunctions) -> Result<SubAnalysis, ComposeError> {
    let mut next = sub.clone();
    next.compose_in_place(frag, gov)?;
    Ok(next)
}

/// A derivation in progress: the sub-analysis plus the chart item each
/// open slot must cover, aligned with its open-slot stack.
#[derive(Clone, Debug)]
pub struct State {
    pub sub: SubAnalysis,
    pub pending: Vec<ItemId>,
}

/// One admissible choice at a derivation step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Member {
    pub app: u32,
    pub variant: FragId,
}

/// Composition against one chart, counting every compose performed,
/// trial composes included.
pub struct Decoder<'a> {
    pub bank: &'a FragmentBank,
    pub chart: &'a Chart,
    pub options: &'a DecodeOptions,
    composes: Cell<u64>,
}

impl<'a> Decoder<'a> {
    pub fn new(bank: &'a FragmentBank, chart: &'a Chart, options: &'a DecodeOptions) -> Self {
        Decoder { bank, chart, options, composes: Cell::new(0) }
    }

    pub fn composes(&self) -> u64 {
        self.composes.get()
    }

    fn count(&self) {
        self.composes.set(self.composes.get() + 1);
    }

    pub fn initial(&self) -> Option<State> {
        let root = self.chart.root()?;
        Some(State { sub: SubAnalysis::initial(self.options.initial.clone()), pending: vec![root] })
    }

    /// Every (application, variant) at the next item that composes with the
    /// current sub-analysis.
    pub fn competition_set(&self, state: &State) -> Vec<Member> {
        let Some(&item) = state.pending.last() else { return Vec::new() };
        let mut out = Vec::new();
        for (a, app) in self.chart.item(item).apps.iter().enumerate() {
            for &v in &self.bank.shape(app.shape).variants {
                self.count();
                if state.sub.admits(self.bank.fragment(v), &self.options.governable).is_ok() {
                    out.push(Member { app: a as u32, variant: v });
                }
            }
        }
        out
    }

    /// Probability bookkeeping view of a member list.
    pub fn as_competition_set(members: &[Member]) -> CompetitionSet {
        CompetitionSet::new(members.iter().map(|m| m.variant).collect())
    }

    pub fn apply(&self, state: &State, member: Member) -> Result<State, ComposeError> {
        self.count();
        let item = *state.pending.last().ok_or(ComposeError::NoOpenSlot)?;
        let app = &self.chart.item(item).apps[member.app as usize];
        let sub = compose(&state.sub, self.bank.fragment(member.variant), &self.options.governable)?;
        let mut pending = state.pending.clone();
        pending.pop();
        pending.extend(app.children.iter().rev());
        Ok(State { sub, pending })
    }

    /// Final checks on a state with no open slots.
    pub fn finish(&self, state: &State) -> (Validity, Option<Representation>) {
        let Some(repr) = state.sub.to_representation() else {
            return (Validity::Failed("open slots remain".into()), None);
        };
        if let Err(v) = check_completeness(&repr.fs, &self.options.governable, self.options.completeness) {
            log::trace!("rejecting incomplete analysis: {v}");
            return (Validity::Incomplete, None);
        }
        if let Err(v) = check_nonbranching_dominance(&repr.tree) {
            return (Validity::Failed(v.to_string()), None);
        }
        (Validity::Valid, Some(repr))
    }
}
