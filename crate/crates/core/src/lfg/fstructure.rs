use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::symbol::Sym;

use super::UnifyError;

/// Identifier of an f-structure unit within one store.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitId(pub u32);

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A semantic form such as `eat<SUBJ>`. Every occurrence carries its own
/// instance id, and two semantic forms only unify if they are the same
/// instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemForm {
    pub instance: u32,
    pub pred: Sym,
    pub governed: Arc<[Sym]>,
}

impl SemForm {
    pub fn new(instance: u32, pred: impl Into<Sym>, governed: Vec<Sym>) -> Self {
        SemForm { instance, pred: pred.into(), governed: governed.into() }
    }

    /// Equality that ignores instance identity.
    pub fn same_content(&self, other: &SemForm) -> bool {
        self.pred == other.pred && self.governed == other.governed
    }
}

impl fmt::Display for SemForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}", self.pred)?;
        if !self.governed.is_empty() {
            write!(f, "<")?;
            for (i, g) in self.governed.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{g}")?;
            }
            write!(f, ">")?;
        }
        write!(f, "'")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FValue {
    Atom(Sym),
    Sem(SemForm),
    Unit(UnitId),
}

impl FValue {
    pub fn as_unit(&self) -> Option<UnitId> {
        match self {
            FValue::Unit(u) => Some(*u),
            _ => None,
        }
    }

    pub fn as_sem(&self) -> Option<&SemForm> {
        match self {
            FValue::Sem(s) => Some(s),
            _ => None,
        }
    }
}

/// Attribute-value pairs of one unit, in insertion order.
///
/// The pair list can hold a duplicated attribute only when built through
/// [`FUnit::from_pairs`]; `check_uniqueness` reports it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FUnit {
    pairs: Vec<(Sym, FValue)>,
}

impl FUnit {
    pub fn new() -> Self {
        FUnit::default()
    }

    pub fn from_pairs(pairs: Vec<(Sym, FValue)>) -> Self {
        FUnit { pairs }
    }

    pub fn pairs(&self) -> &[(Sym, FValue)] {
        &self.pairs
    }

    pub fn get(&self, attr: &str) -> Option<&FValue> {
        self.pairs.iter().find(|(a, _)| a.as_str() == attr).map(|(_, v)| v)
    }

    /// Sets `attr`, replacing any previous value.
    pub fn set(&mut self, attr: impl Into<Sym>, value: FValue) {
        let attr = attr.into();
        match self.pairs.iter_mut().find(|(a, _)| *a == attr) {
            Some(slot) => slot.1 = value,
            None => self.pairs.push((attr, value)),
        }
    }

    pub fn remove(&mut self, attr: &str) -> Option<FValue> {
        let pos = self.pairs.iter().position(|(a, _)| a.as_str() == attr)?;
        Some(self.pairs.remove(pos).1)
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Sym, &FValue) -> bool) {
        self.pairs.retain(|(a, v)| keep(a, v));
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Pairs sorted by attribute name.
    pub fn sorted_pairs(&self) -> Vec<&(Sym, FValue)> {
        let mut v: Vec<_> = self.pairs.iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn pred(&self) -> Option<&SemForm> {
        self.get("PRED").and_then(FValue::as_sem)
    }

    pub fn unit_refs(&self) -> impl Iterator<Item = UnitId> + '_ {
        self.pairs.iter().filter_map(|(_, v)| v.as_unit())
    }
}

/// Flat store of f-structure units linked by [`FValue::Unit`] references.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FStore {
    units: BTreeMap<UnitId, FUnit>,
}

/// Result of a successful unification: the merged store plus the mapping
/// from every pre-existing unit id to its surviving representative.
#[derive(Clone, Debug)]
pub struct Unified {
    pub store: FStore,
    pub redirect: HashMap<UnitId, UnitId>,
    pub unit: UnitId,
}

impl Unified {
    pub fn resolve(&self, id: UnitId) -> UnitId {
        resolve(&self.redirect, id)
    }
}

pub(crate) fn resolve(map: &HashMap<UnitId, UnitId>, mut id: UnitId) -> UnitId {
    while let Some(&next) = map.get(&id) {
        id = next;
    }
    id
}

impl FStore {
    pub fn new() -> Self {
        FStore::default()
    }

    pub fn insert(&mut self, id: UnitId, unit: FUnit) -> Option<FUnit> {
        self.units.insert(id, unit)
    }

    pub fn get(&self, id: UnitId) -> Option<&FUnit> {
        self.units.get(&id)
    }

    pub fn get_mut(&mut self, id: UnitId) -> Option<&mut FUnit> {
        self.units.get_mut(&id)
    }

    pub fn contains(&self, id: UnitId) -> bool {
        self.units.contains_key(&id)
    }

    pub fn remove(&mut self, id: UnitId) -> Option<FUnit> {
        self.units.remove(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnitId, &FUnit)> {
        self.units.iter().map(|(k, v)| (*k, v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (UnitId, &mut FUnit)> {
        self.units.iter_mut().map(|(k, v)| (*k, v))
    }

    pub fn ids(&self) -> impl Iterator<Item = UnitId> + '_ {
        self.units.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Smallest id strictly greater than every id in the store.
    pub fn next_id(&self) -> u32 {
        self.units.keys().next_back().map_or(1, |u| u.0 + 1)
    }

    /// Units reachable from `roots` through attribute chains (roots included).
    pub fn reachable_from(&self, roots: impl IntoIterator<Item = UnitId>) -> BTreeSet<UnitId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<UnitId> = roots.into_iter().collect();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            if let Some(u) = self.units.get(&id) {
                stack.extend(u.unit_refs().filter(|r| !seen.contains(r)));
            }
        }
        seen
    }

    /// Drops every unit not in `keep`. References to dropped units are
    /// removed along with their pairs.
    pub fn restrict(&mut self, keep: &BTreeSet<UnitId>) {
        self.units.retain(|id, _| keep.contains(id));
        for unit in self.units.values_mut() {
            unit.retain(|_, v| v.as_unit().is_none_or(|r| keep.contains(&r)));
        }
    }

    /// Renames every unit id (keys and references) through `f`.
    pub fn map_ids(&self, f: impl Fn(UnitId) -> UnitId) -> FStore {
        let units = self
            .units
            .iter()
            .map(|(id, u)| {
                let pairs = u
                    .pairs
                    .iter()
                    .map(|(a, v)| {
                        let v = match v {
                            FValue::Unit(r) => FValue::Unit(f(*r)),
                            other => other.clone(),
                        };
                        (a.clone(), v)
                    })
                    .collect();
                (f(*id), FUnit { pairs })
            })
            .collect();
        FStore { units }
    }

    /// Moves every unit of `other` into `self`. Ids must be disjoint.
    pub fn absorb(&mut self, other: FStore) {
        for (id, u) in other.units {
            let prev = self.units.insert(id, u);
            debug_assert!(prev.is_none(), "absorb with overlapping unit ids");
        }
    }

    /// Recursively unifies units `a` and `b`.
    ///
    /// Atoms must be equal, semantic forms must be the same instance, and
    /// unit references unify recursively. Any other pairing of values under
    /// one attribute is a clash.
    pub fn unify(&self, a: UnitId, b: UnitId) -> Result<Unified, UnifyError> {
        let mut store = self.clone();
        let redirect = store.unify_in_place(a, b)?;
        let unit = resolve(&redirect, a);
        Ok(Unified { store, redirect, unit })
    }

    /// In-place variant of [`FStore::unify`]. On error the store is left in
    /// an unspecified state.
    pub(crate) fn unify_in_place(&mut self, a: UnitId, b: UnitId) -> Result<HashMap<UnitId, UnitId>, UnifyError> {
        for id in [a, b] {
            if !self.units.contains_key(&id) {
                return Err(UnifyError::UnknownUnit(id));
            }
        }
        let mut redirect: HashMap<UnitId, UnitId> = HashMap::new();
        let mut agenda = vec![(a, b)];
        while let Some((x, y)) = agenda.pop() {
            let x = resolve(&redirect, x);
            let y = resolve(&redirect, y);
            if x == y {
                continue;
            }
            let uy = self.units.remove(&y).ok_or(UnifyError::UnknownUnit(y))?;
            redirect.insert(y, x);
            let ux = self.units.get_mut(&x).ok_or(UnifyError::UnknownUnit(x))?;
            for (attr, vy) in uy.pairs {
                match ux.get(attr.as_str()) {
                    None => ux.pairs.push((attr, vy)),
                    Some(vx) => match (vx, &vy) {
                        (FValue::Atom(p), FValue::Atom(q)) if p == q => {}
                        (FValue::Sem(p), FValue::Sem(q)) if p.instance == q.instance => {}
                        (FValue::Unit(p), FValue::Unit(q)) => agenda.push((*p, *q)),
                        _ => return Err(UnifyError::Clash { attr }),
                    },
                }
            }
        }
        if !redirect.is_empty() {
            for unit in self.units.values_mut() {
                for (_, v) in unit.pairs.iter_mut() {
                    if let FValue::Unit(r) = v {
                        *r = resolve(&redirect, *r);
                    }
                }
            }
        }
        Ok(redirect)
    }
}
