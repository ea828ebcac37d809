use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use super::{rank_analyses, Analysis, Chart, Decoder, ItemId, Member, ParseError, Step, Validity};
use crate::lfg::{canonical_form, Representation};
use crate::probability::{log_sum_exp, FragId, FragmentBank};

/// A derivation with its context-free score `ln Π P(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedDerivation {
    pub steps: Vec<Step>,
    pub score: f64,
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    app: u32,
    variant: FragId,
    weight: f64,
}

/// A derivation of an item: an edge plus the rank of the sub-derivation
/// chosen for each child.
#[derive(Clone, Debug)]
struct Cand {
    score: f64,
    edge: u32,
    ranks: Vec<u32>,
}

// Max-heap order: higher score first, then smaller edge index, then
// lexicographically smaller child ranks.
impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.edge.cmp(&self.edge))
            .then_with(|| other.ranks.cmp(&self.ranks))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Cand {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cand {}

/// Sum of an edge weight and its children's scores, added left to right.
fn combine(weight: f64, children: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = weight;
    for c in children {
        s += c;
    }
    s
}

fn edges_of(chart: &Chart, bank: &FragmentBank, item: ItemId) -> Vec<Edge> {
    let mut out = Vec::new();
    for (a, app) in chart.item(item).apps.iter().enumerate() {
        for &v in &bank.shape(app.shape).variants {
            out.push(Edge { app: a as u32, variant: v, weight: bank.log_probability(v) });
        }
    }
    out
}

struct KBest<'a> {
    chart: &'a Chart,
    bank: &'a FragmentBank,
    edges: HashMap<ItemId, Vec<Edge>>,
    found: HashMap<ItemId, Vec<Cand>>,
    heap: HashMap<ItemId, BinaryHeap<Cand>>,
    seen: HashMap<ItemId, HashSet<(u32, Vec<u32>)>>,
}

impl<'a> KBest<'a> {
    fn new(chart: &'a Chart, bank: &'a FragmentBank) -> Self {
        KBest { chart, bank, edges: HashMap::new(), found: HashMap::new(), heap: HashMap::new(), seen: HashMap::new() }
    }

    fn children(&self, item: ItemId, edge: u32) -> Vec<ItemId> {
        let e = self.edges[&item][edge as usize];
        self.chart.item(item).apps[e.app as usize].children.clone()
    }

    /// Score of the `k`-th best derivation of `item`, extending lists lazily.
    fn score(&mut self, item: ItemId, k: usize) -> Option<f64> {
        self.extend(item, k);
        self.found[&item].get(k).map(|c| c.score)
    }

    fn candidate(&mut self, item: ItemId, edge: u32, ranks: Vec<u32>) -> Option<Cand> {
        let children = self.children(item, edge);
        let mut scores = Vec::with_capacity(children.len());
        for (c, &r) in children.iter().zip(&ranks) {
            scores.push(self.score(*c, r as usize)?);
        }
        let weight = self.edges[&item][edge as usize].weight;
        Some(Cand { score: combine(weight, scores), edge, ranks })
    }

    fn push(&mut self, item: ItemId, edge: u32, ranks: Vec<u32>) {
        if !self.seen.entry(item).or_default().insert((edge, ranks.clone())) {
            return;
        }
        if let Some(c) = self.candidate(item, edge, ranks) {
            self.heap.get_mut(&item).expect("initialized").push(c);
        }
    }

    fn extend(&mut self, item: ItemId, k: usize) {
        if !self.found.contains_key(&item) {
            let edges = edges_of(self.chart, self.bank, item);
            let n = edges.len();
            self.edges.insert(item, edges);
            self.found.insert(item, Vec::new());
            self.heap.insert(item, BinaryHeap::new());
            for e in 0..n as u32 {
                let arity = self.children(item, e).len();
                self.push(item, e, vec![0; arity]);
            }
        }
        while self.found[&item].len() <= k {
            let Some(best) = self.heap.get_mut(&item).expect("initialized").pop() else { break };
            for i in 0..best.ranks.len() {
                let mut next = best.ranks.clone();
                next[i] += 1;
                self.push(item, best.edge, next);
            }
            self.found.get_mut(&item).expect("initialized").push(best);
        }
    }

    fn steps(&self, item: ItemId, k: usize, out: &mut Vec<Step>) {
        let c = &self.found[&item][k];
        let e = self.edges[&item][c.edge as usize];
        out.push(Step { item, app: e.app, variant: e.variant });
        let children = self.children(item, c.edge);
        for (ch, &r) in children.iter().zip(&c.ranks) {
            self.steps(*ch, r as usize, out);
        }
    }
}

/// The `n` best derivations of the chart root by `Π P(f)`, best first.
/// Equal scores are ordered by edge index and then child ranks, so the
/// list is fully determined by the chart and bank.
pub fn viterbi_nbest(chart: &Chart, bank: &FragmentBank, n: usize) -> Vec<RankedDerivation> {
    let Some(root) = chart.root() else { return Vec::new() };
    let mut kb = KBest::new(chart, bank);
    kb.extend(root, n.saturating_sub(1));
    (0..kb.found[&root].len().min(n))
        .map(|k| {
            let mut steps = Vec::new();
            kb.steps(root, k, &mut steps);
            RankedDerivation { steps, score: kb.found[&root][k].score }
        })
        .collect()
}

/// Every derivation of the root, sorted by the same order the lazy
/// extractor uses.
#[cfg(test)]
pub(crate) fn exhaustive_ranked(chart: &Chart, bank: &FragmentBank) -> Vec<RankedDerivation> {
    fn all(
        chart: &Chart,
        bank: &FragmentBank,
        item: ItemId,
        memo: &mut HashMap<ItemId, Vec<(f64, Vec<Step>)>>,
    ) -> Vec<(f64, Vec<Step>)> {
        if let Some(v) = memo.get(&item) {
            return v.clone();
        }
        let mut rows: Vec<(f64, u32, Vec<u32>, Vec<Step>)> = Vec::new();
        for (e, edge) in edges_of(chart, bank, item).into_iter().enumerate() {
            let children = chart.item(item).apps[edge.app as usize].children.clone();
            let lists: Vec<Vec<(f64, Vec<Step>)>> = children.iter().map(|&c| all(chart, bank, c, memo)).collect();
            let mut ranks = vec![0usize; children.len()];
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            loop {
                let score = combine(edge.weight, ranks.iter().zip(&lists).map(|(&r, l)| l[r].0));
                let mut steps = vec![Step { item, app: edge.app, variant: edge.variant }];
                for (&r, l) in ranks.iter().zip(&lists) {
                    steps.extend(l[r].1.iter().copied());
                }
                rows.push((score, e as u32, ranks.iter().map(|&r| r as u32).collect(), steps));
                let mut advanced = false;
                for i in (0..ranks.len()).rev() {
                    ranks[i] += 1;
                    if ranks[i] < lists[i].len() {
                        advanced = true;
                        break;
                    }
                    ranks[i] = 0;
                }
                if !advanced {
                    break;
                }
            }
        }
        rows.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
        let out: Vec<(f64, Vec<Step>)> = rows.into_iter().map(|(s, _, _, st)| (s, st)).collect();
        memo.insert(item, out.clone());
        out
    }
    let Some(root) = chart.root() else { return Vec::new() };
    all(chart, bank, root, &mut HashMap::new()).into_iter().map(|(score, steps)| RankedDerivation { steps, score }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ViterbiOptions {
    pub n: usize,
    /// Scores analyses with exact competition probabilities instead of the
    /// context-free product.
    pub rescore: bool,
}

impl Default for ViterbiOptions {
    fn default() -> Self {
        ViterbiOptions { n: 100, rescore: false }
    }
}

#[derive(Clone, Debug)]
pub struct ViterbiResult {
    pub best: Analysis,
    pub analyses: Vec<Analysis>,
    pub extracted: usize,
    pub invalid: usize,
    pub incomplete: usize,
}

/// Replays the `n` best derivations through composition, drops invalid and
/// incomplete ones, and sums the rest per analysis.
pub fn viterbi_parse(decoder: &Decoder<'_>, options: &ViterbiOptions) -> Result<ViterbiResult, ParseError> {
    if decoder.chart.root().is_none() {
        return Err(ParseError::NoParse);
    }
    let ranked = viterbi_nbest(decoder.chart, decoder.bank, options.n.max(1));
    let mut groups: BTreeMap<String, (Representation, Vec<f64>)> = BTreeMap::new();
    let (mut invalid, mut incomplete) = (0, 0);
    'derivations: for d in &ranked {
        let mut state = decoder.initial().expect("chart has a root");
        let mut log_prob = 0.0;
        for step in &d.steps {
            let member = Member { app: step.app, variant: step.variant };
            if options.rescore {
                let members = decoder.competition_set(&state);
                let Some(i) = members.iter().position(|m| *m == member) else {
                    invalid += 1;
                    continue 'derivations;
                };
                log_prob += Decoder::as_competition_set(&members)
                    .log_member_probability(i, decoder.bank)
                    .expect("member index is in range");
            }
            state = match decoder.apply(&state, member) {
                Ok(s) => s,
                Err(_) => {
                    invalid += 1;
                    continue 'derivations;
                }
            };
        }
        match decoder.finish(&state) {
            (Validity::Valid, Some(repr)) => {
                let score = if options.rescore { log_prob } else { d.score };
                groups.entry(canonical_form(&repr)).or_insert_with(|| (repr, Vec::new())).1.push(score);
            }
            (Validity::Incomplete, _) => incomplete += 1,
            _ => invalid += 1,
        }
    }
    if groups.is_empty() {
        return Err(ParseError::NoValidParse(ranked.len()));
    }
    let mut analyses: Vec<Analysis> = groups
        .into_iter()
        .map(|(canonical, (repr, scores))| Analysis { repr, canonical, log_prob: log_sum_exp(scores) })
        .collect();
    rank_analyses(&mut analyses);
    Ok(ViterbiResult { best: analyses[0].clone(), analyses, extracted: ranked.len(), invalid, incomplete })
}
