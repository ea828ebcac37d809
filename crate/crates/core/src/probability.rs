//! Fragment bags, the two estimators and derivation probabilities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fragmentation::{Fragment, FragmentMultiset, Provenance};
use crate::lfg::{tree_form, InstanceMint, NodeKind};
use crate::notation::{parse_structure_line, NotationError};
use crate::symbol::Sym;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbabilityError {
    #[error("cannot build a bank from an empty fragment multiset")]
    EmptyBank,
    #[error("fragment is not in the bank: {0}")]
    UnknownFragment(String),
    #[error("competition set is empty")]
    EmptyCompetitionSet,
    #[error("member {0} is not in the competition set")]
    NotAMember(usize),
    #[error("{steps} derivation steps but {sets} competition sets")]
    LengthMismatch { steps: usize, sets: usize },
    #[error("bank dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    /// Relative frequency over the union of both bags.
    SimpleRf,
    /// Root/Frontier fragments share `1 - n1/N`, Discard fragments `n1/N`.
    DiscountedRf,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::SimpleRf => "simple",
            Estimator::DiscountedRf => "discounted",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "simple" => Ok(Estimator::SimpleRf),
            "discounted" => Ok(Estimator::DiscountedRf),
            other => Err(format!("unknown estimator '{other}' (expected simple or discounted)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FragId(pub u32);

impl FragId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeId(pub u32);

impl ShapeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One leaf of a fragment's c-structure.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum YieldItem {
    Word(Sym),
    Slot(Sym),
}

/// Fragments sharing one c-structure. The chart works on shapes; each
/// variant is a distinct f-structure annotation of the same tree.
#[derive(Clone, Debug)]
pub struct Shape {
    pub tree: String,
    pub root: Sym,
    pub leaves: Vec<YieldItem>,
    pub variants: Vec<FragId>,
}

impl Shape {
    pub fn slot_count(&self) -> usize {
        self.leaves.iter().filter(|l| matches!(l, YieldItem::Slot(_))).count()
    }
}

#[derive(Clone, Debug)]
pub struct BankEntry {
    pub fragment: Fragment,
    pub canonical: String,
    pub count: u64,
    pub shape: ShapeId,
}

/// Two bags of counted fragments, frozen after construction.
#[derive(Clone, Debug)]
pub struct FragmentBank {
    entries: Vec<BankEntry>,
    lookup: HashMap<(Provenance, String), FragId>,
    shapes: Vec<Shape>,
    by_root: BTreeMap<Sym, Vec<ShapeId>>,
    vocabulary: BTreeSet<Sym>,
    n: u64,
    n1: u64,
    discard_total: u64,
    estimator: Estimator,
    reserved: f64,
    log_p: Vec<f64>,
}

pub fn build_bank(fragments: &FragmentMultiset, estimator: Estimator) -> Result<FragmentBank, ProbabilityError> {
    if fragments.is_empty() {
        return Err(ProbabilityError::EmptyBank);
    }
    let mut entries = Vec::with_capacity(fragments.distinct());
    let mut lookup = HashMap::new();
    let mut shape_ids: HashMap<String, ShapeId> = HashMap::new();
    let mut shapes: Vec<Shape> = Vec::new();
    let mut vocabulary = BTreeSet::new();
    let (mut n, mut n1, mut discard_total) = (0, 0, 0);
    for (prov, key, frag, count) in fragments.iter() {
        let id = FragId(entries.len() as u32);
        let tree = tree_form(&frag.repr.tree);
        let shape = *shape_ids.entry(tree.clone()).or_insert_with(|| {
            let t = &frag.repr.tree;
            let leaves = t
                .leaves()
                .into_iter()
                .map(|l| {
                    let node = t.node(l);
                    match node.kind {
                        NodeKind::Slot => YieldItem::Slot(node.category.clone()),
                        _ => YieldItem::Word(node.category.clone()),
                    }
                })
                .collect();
            shapes.push(Shape { tree, root: frag.root_category().clone(), leaves, variants: Vec::new() });
            ShapeId(shapes.len() as u32 - 1)
        });
        shapes[shape.index()].variants.push(id);
        vocabulary.extend(frag.repr.words());
        match prov {
            Provenance::RootFrontier => {
                n += count;
                if count == 1 {
                    n1 += 1;
                }
            }
            Provenance::Discard => discard_total += count,
        }
        lookup.insert((prov, key.to_string()), id);
        entries.push(BankEntry { fragment: frag.clone(), canonical: key.to_string(), count, shape });
    }
    let mut by_root: BTreeMap<Sym, Vec<ShapeId>> = BTreeMap::new();
    for (i, s) in shapes.iter().enumerate() {
        by_root.entry(s.root.clone()).or_default().push(ShapeId(i as u32));
    }
    let mut bank = FragmentBank {
        entries,
        lookup,
        shapes,
        by_root,
        vocabulary,
        n,
        n1,
        discard_total,
        estimator,
        reserved: 0.0,
        log_p: Vec::new(),
    };
    bank.estimate();
    Ok(bank)
}

impl FragmentBank {
    fn estimate(&mut self) {
        self.reserved = match self.estimator {
            Estimator::SimpleRf => 0.0,
            Estimator::DiscountedRf if self.discard_total == 0 || self.n == 0 => 0.0,
            Estimator::DiscountedRf if self.n1 == self.n => {
                log::warn!("every Root/Frontier fragment is a singleton; reserving 0.5 instead of 1");
                0.5
            }
            Estimator::DiscountedRf => self.n1 as f64 / self.n as f64,
        };
        let all = (self.n + self.discard_total) as f64;
        let (rf_mass, d_mass) = ((1.0 - self.reserved).ln(), self.reserved.ln());
        self.log_p = self
            .entries
            .iter()
            .map(|e| {
                let c = (e.count as f64).ln();
                match (self.estimator, e.fragment.provenance) {
                    (Estimator::SimpleRf, _) => c - all.ln(),
                    (Estimator::DiscountedRf, Provenance::RootFrontier) => c - (self.n as f64).ln() + rf_mass,
                    (Estimator::DiscountedRf, Provenance::Discard) => c - (self.discard_total as f64).ln() + d_mass,
                }
            })
            .collect();
    }

    /// The same bags under a different estimator.
    pub fn with_estimator(&self, estimator: Estimator) -> FragmentBank {
        let mut b = self.clone();
        b.estimator = estimator;
        b.estimate();
        b
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    /// Root/Frontier token count.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of Root/Frontier fragments seen exactly once.
    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn discard_total(&self) -> u64 {
        self.discard_total
    }

    /// Probability mass held by the Discard bag.
    pub fn reserved_mass(&self) -> f64 {
        self.reserved
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FragId> {
        (0..self.entries.len() as u32).map(FragId)
    }

    pub fn entry(&self, id: FragId) -> &BankEntry {
        &self.entries[id.index()]
    }

    pub fn fragment(&self, id: FragId) -> &Fragment {
        &self.entries[id.index()].fragment
    }

    pub fn lookup(&self, provenance: Provenance, canonical: &str) -> Option<FragId> {
        self.lookup.get(&(provenance, canonical.to_string())).copied()
    }

    pub fn log_probability(&self, id: FragId) -> f64 {
        self.log_p[id.index()]
    }

    pub fn probability(&self, id: FragId) -> f64 {
        self.log_p[id.index()].exp()
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn shape(&self, id: ShapeId) -> &Shape {
        &self.shapes[id.index()]
    }

    pub fn shapes_rooted_at(&self, category: &str) -> &[ShapeId] {
        self.by_root.get(category).map_or(&[], Vec::as_slice)
    }

    pub fn vocabulary(&self) -> &BTreeSet<Sym> {
        &self.vocabulary
    }

    /// One line per fragment: provenance, frequency and canonical form,
    /// separated by tabs, in canonical order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.fragment.provenance, e.count, e.canonical));
        }
        out
    }
}

/// Reads a [`FragmentBank::dump`] back into a fragment multiset.
pub fn import_dump(text: &str) -> Result<FragmentMultiset, ProbabilityError> {
    let mut mint = InstanceMint::starting_at(1);
    let mut out = FragmentMultiset::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ProbabilityError::Dump { line: line_no, message };
        let mut parts = line.splitn(3, '\t');
        let (Some(prov), Some(count), Some(form)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected three tab-separated fields".into()));
        };
        let provenance = Provenance::from_tag(prov).ok_or_else(|| bad(format!("unknown provenance '{prov}'")))?;
        let count: u64 = count.parse().map_err(|_| bad(format!("bad frequency '{count}'")))?;
        if count == 0 {
            return Err(bad("zero frequency".into()));
        }
        let repr = parse_structure_line(form)
            .and_then(|raw| raw.into_representation(&mut mint))
            .map_err(|e: NotationError| bad(e.to_string()))?;
        for _ in 0..count {
            out.add(Fragment { repr: repr.clone(), provenance });
        }
    }
    Ok(out)
}

/// `P(f)` for a fragment given by value.
pub fn fragment_probability(bank: &FragmentBank, f: &Fragment) -> Result<f64, ProbabilityError> {
    let key = f.canonical();
    bank.lookup(f.provenance, &key).map(|id| bank.probability(id)).ok_or(ProbabilityError::UnknownFragment(key))
}

/// Numerically stable `ln Σ exp(x)`, accumulated left to right.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// The fragments composable at one derivation step, one member per
/// admissible choice. A fragment may occur more than once when it can be
/// applied in several ways.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompetitionSet {
    pub members: Vec<FragId>,
}

impl CompetitionSet {
    pub fn new(members: Vec<FragId>) -> Self {
        CompetitionSet { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `ln Σ P(f')` over the members.
    pub fn log_mass(&self, bank: &FragmentBank) -> f64 {
        log_sum_exp(self.members.iter().map(|&f| bank.log_probability(f)))
    }

    /// `ln CP` of the member at `index`.
    pub fn log_member_probability(&self, index: usize, bank: &FragmentBank) -> Result<f64, ProbabilityError> {
        if self.members.is_empty() {
            return Err(ProbabilityError::EmptyCompetitionSet);
        }
        let f = *self.members.get(index).ok_or(ProbabilityError::NotAMember(index))?;
        Ok(bank.log_probability(f) - self.log_mass(bank))
    }
}

/// `CP(f | CS) = P(f) / Σ P(f')`, counting every occurrence of `f`.
pub fn competition_probability(f: FragId, cs: &CompetitionSet, bank: &FragmentBank) -> Result<f64, ProbabilityError> {
    if cs.is_empty() {
        return Err(ProbabilityError::EmptyCompetitionSet);
    }
    let hits = cs.members.iter().filter(|&&m| m == f).count();
    if hits == 0 {
        return Err(ProbabilityError::NotAMember(f.index()));
    }
    Ok((hits as f64 * bank.probability(f)) / cs.log_mass(bank).exp())
}

/// `ln Π CP(f_i | CS_i)` for members chosen by index in each set.
pub fn derivation_log_probability(
    bank: &FragmentBank,
    sets: &[CompetitionSet],
    chosen: &[usize],
) -> Result<f64, ProbabilityError> {
    if sets.len() != chosen.len() {
        return Err(ProbabilityError::LengthMismatch { steps: chosen.len(), sets: sets.len() });
    }
    let mut total = 0.0;
    for (cs, &i) in sets.iter().zip(chosen) {
        total += cs.log_member_probability(i, bank)?;
    }
    Ok(total)
}

pub fn derivation_probability(
    bank: &FragmentBank,
    sets: &[CompetitionSet],
    chosen: &[usize],
) -> Result<f64, ProbabilityError> {
    derivation_log_probability(bank, sets, chosen).map(f64::exp)
}

/// `P(R)`: the sum over the derivations producing one analysis.
pub fn representation_probability(derivation_probabilities: &[f64]) -> f64 {
    derivation_probabilities.iter().sum()
}
