use std::collections::{HashMap, HashSet};

use super::ParseError;
use crate::probability::{FragmentBank, ShapeId, YieldItem};
use crate::symbol::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId(pub u32);

impl ItemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A fragment shape placed over a span, with one child item per slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Application {
    pub shape: ShapeId,
    pub children: Vec<ItemId>,
}

#[derive(Clone, Debug)]
pub struct Item {
    pub start: usize,
    pub end: usize,
    pub category: Sym,
    pub apps: Vec<Application>,
}

/// Parse forest over one sentence. Only items reachable from the root are
/// kept, numbered so that children come before their parents.
#[derive(Clone, Debug)]
pub struct Chart {
    tokens: Vec<Sym>,
    items: Vec<Item>,
    root: Option<ItemId>,
}

impl Chart {
    pub fn tokens(&self) -> &[Sym] {
        &self.tokens
    }

    pub fn root(&self) -> Option<ItemId> {
        self.root
    }

    pub fn item(&self, id: ItemId) -> &Item {
        &self.items[id.index()]
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn find(&self, start: usize, end: usize, category: &str) -> Option<ItemId> {
        self.items
            .iter()
            .position(|it| it.start == start && it.end == end && it.category == category)
            .map(|i| ItemId(i as u32))
    }

    /// Number of derivations in the forest, counting every fragment variant
    /// of every application. Saturates at `u128::MAX`.
    pub fn derivation_count(&self, bank: &FragmentBank) -> u128 {
        let mut counts: Vec<u128> = Vec::with_capacity(self.items.len());
        for item in &self.items {
            let mut total: u128 = 0;
            for app in &item.apps {
                let mut c = bank.shape(app.shape).variants.len() as u128;
                for ch in &app.children {
                    c = c.saturating_mul(counts[ch.index()]);
                }
                total = total.saturating_add(c);
            }
            counts.push(total);
        }
        self.root.map_or(0, |r| counts[r.index()])
    }
}

struct Builder<'a> {
    tokens: &'a [Sym],
    bank: &'a FragmentBank,
    items: Vec<Item>,
    table: HashMap<(usize, usize, Sym), usize>,
    starts: Vec<Vec<usize>>,
}

impl Builder<'_> {
    fn item(&mut self, start: usize, end: usize, category: &Sym) -> (usize, bool) {
        if let Some(&i) = self.table.get(&(start, end, category.clone())) {
            return (i, false);
        }
        let i = self.items.len();
        self.items.push(Item { start, end, category: category.clone(), apps: Vec::new() });
        self.table.insert((start, end, category.clone()), i);
        self.starts[start].push(i);
        (i, true)
    }

    /// Ways to lay `leaves` over `pos..end`, each slot covering a completed
    /// item. Every remaining leaf needs at least one word.
    fn matches(&self, leaves: &[YieldItem], pos: usize, end: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some((first, rest)) = leaves.split_first() else {
            if pos == end {
                out.push(acc.clone());
            }
            return;
        };
        if pos + leaves.len() > end {
            return;
        }
        match first {
            YieldItem::Word(w) => {
                if self.tokens[pos] == *w {
                    self.matches(rest, pos + 1, end, acc, out);
                }
            }
            YieldItem::Slot(cat) => {
                for &i in &self.starts[pos] {
                    let it = &self.items[i];
                    if it.category == *cat && it.end + rest.len() <= end {
                        acc.push(i);
                        self.matches(rest, it.end, end, acc, out);
                        acc.pop();
                    }
                }
            }
        }
    }
}

/// Builds the chart of `tokens` from the shapes in `bank`, rooted at
/// `initial` over the whole sentence.
pub fn build_chart(tokens: &[Sym], bank: &FragmentBank, initial: &str) -> Result<Chart, ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::EmptySentence);
    }
    if let Some(w) = tokens.iter().find(|w| !bank.vocabulary().contains(*w)) {
        return Err(ParseError::OutOfVocabulary(w.clone()));
    }
    let n = tokens.len();
    let mut by_word: HashMap<&Sym, Vec<ShapeId>> = HashMap::new();
    let mut by_slot: HashMap<&Sym, Vec<ShapeId>> = HashMap::new();
    let mut unary: HashMap<&Sym, Vec<ShapeId>> = HashMap::new();
    for (i, s) in bank.shapes().iter().enumerate() {
        let id = ShapeId(i as u32);
        match s.leaves.as_slice() {
            [YieldItem::Slot(c)] => unary.entry(c).or_default().push(id),
            [YieldItem::Word(w), ..] => by_word.entry(w).or_default().push(id),
            [YieldItem::Slot(c), ..] => by_slot.entry(c).or_default().push(id),
            [] => {}
        }
    }

    let mut b = Builder { tokens, bank, items: Vec::new(), table: HashMap::new(), starts: vec![Vec::new(); n] };
    for len in 1..=n {
        for start in 0..=n - len {
            let end = start + len;
            let mut candidates: Vec<ShapeId> = by_word.get(&tokens[start]).cloned().unwrap_or_default();
            let cats: HashSet<Sym> = b.starts[start].iter().map(|&i| b.items[i].category.clone()).collect();
            let mut cats: Vec<Sym> = cats.into_iter().collect();
            cats.sort();
            for c in &cats {
                if let Some(v) = by_slot.get(c) {
                    candidates.extend(v);
                }
            }
            let mut found: Vec<(ShapeId, Vec<usize>)> = Vec::new();
            for shape in candidates {
                let leaves = &b.bank.shape(shape).leaves;
                let mut out = Vec::new();
                b.matches(leaves, start, end, &mut Vec::new(), &mut out);
                found.extend(out.into_iter().map(|ch| (shape, ch)));
            }
            for (shape, children) in found {
                let root = b.bank.shape(shape).root.clone();
                let (i, _) = b.item(start, end, &root);
                let children = children.into_iter().map(|c| ItemId(c as u32)).collect();
                b.items[i].apps.push(Application { shape, children });
            }
            // Unary closure over this span.
            let mut agenda: Vec<usize> = b.starts[start].iter().copied().filter(|&i| b.items[i].end == end).collect();
            let mut done = HashSet::new();
            while let Some(child) = agenda.pop() {
                if !done.insert(child) {
                    continue;
                }
                let cat = b.items[child].category.clone();
                for &shape in unary.get(&cat).map_or(&[][..], Vec::as_slice) {
                    let root = b.bank.shape(shape).root.clone();
                    let (i, _) = b.item(start, end, &root);
                    b.items[i].apps.push(Application { shape, children: vec![ItemId(child as u32)] });
                    agenda.push(i);
                }
            }
        }
    }

    let Some(&root) = b.table.get(&(0, n, Sym::new(initial))) else {
        return Ok(Chart { tokens: tokens.to_vec(), items: Vec::new(), root: None });
    };
    prune(tokens, b.items, root)
}

/// Keeps items reachable from `root`, renumbered in post-order.
fn prune(tokens: &[Sym], items: Vec<Item>, root: usize) -> Result<Chart, ParseError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; items.len()];
    let mut order: Vec<usize> = Vec::new();
    let children_of = |i: usize| -> Vec<usize> { items[i].apps.iter().flat_map(|a| a.children.iter().map(|c| c.index())).collect() };
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(root, children_of(root), 0)];
    mark[root] = Mark::Open;
    while let Some((i, children, next)) = stack.last_mut() {
        if let Some(&c) = children.get(*next) {
            *next += 1;
            match mark[c] {
                Mark::New => {
                    mark[c] = Mark::Open;
                    stack.push((c, children_of(c), 0));
                }
                Mark::Open => {
                    let it = &items[c];
                    return Err(ParseError::UnaryCycle { category: it.category.clone(), start: it.start, end: it.end });
                }
                Mark::Done => {}
            }
        } else {
            let i = *i;
            mark[i] = Mark::Done;
            order.push(i);
            stack.pop();
        }
    }
    let mut new_id = vec![u32::MAX; items.len()];
    for (k, &i) in order.iter().enumerate() {
        new_id[i] = k as u32;
    }
    let mut slots: Vec<Option<Item>> = items.into_iter().map(Some).collect();
    let kept = order
        .iter()
        .map(|&i| {
            let mut it = slots[i].take().expect("each item once");
            for app in &mut it.apps {
                for c in &mut app.children {
                    *c = ItemId(new_id[c.index()]);
                }
            }
            it
        })
        .collect();
    Ok(Chart { tokens: tokens.to_vec(), items: kept, root: Some(ItemId(new_id[root])) })
}
