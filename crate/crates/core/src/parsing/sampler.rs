use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use super::{Analysis, Decoder, Derivation, Member, ParseError, State, Step, Validity};
use crate::lfg::{canonical_form, Representation};

/// Monte Carlo settings. The defaults sample in batches of 100 until the
/// estimated error probability drops below 0.05, or 10,000 samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    pub max_samples: u64,
    pub batch: u64,
    /// `None` always draws `max_samples` samples.
    pub error_threshold: Option<f64>,
    pub seed: u64,
    /// Memoizes competition sets by derivation prefix. Sampling is
    /// unaffected; only the number of trial composes drops.
    pub cache: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { max_samples: 10_000, batch: 100, error_threshold: Some(0.05), seed: 0, cache: true }
    }
}

/// Sample tallies by analysis canonical form. Every drawn sample is either
/// tallied or counted as a rejection.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SamplerState {
    pub tallies: BTreeMap<String, u64>,
    pub samples: u64,
    pub dead_ends: u64,
    pub incomplete: u64,
    pub seed: u64,
    pub error_probability: Option<f64>,
}

impl SamplerState {
    pub fn valid(&self) -> u64 {
        self.tallies.values().sum()
    }

    pub fn rejections(&self) -> u64 {
        self.dead_ends + self.incomplete
    }

    /// Most frequent analysis, ties going to the smaller canonical form.
    pub fn leader(&self) -> Option<(&str, u64)> {
        self.tallies
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(k, &c)| (k.as_str(), c))
    }
}

/// Estimated probability that the runner-up analysis is in fact at least as
/// probable as the leader, by a normal approximation to the difference of
/// the top two sample proportions.
pub fn sampler_error_probability(tallies: &BTreeMap<String, u64>) -> f64 {
    let m: u64 = tallies.values().sum();
    if m == 0 {
        return 1.0;
    }
    let mut counts: Vec<u64> = tallies.values().copied().collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let p1 = counts[0] as f64 / m as f64;
    let p2 = counts.get(1).map_or(0.0, |&c| c as f64 / m as f64);
    let d = p1 - p2;
    let var = (p1 + p2 - d * d) / m as f64;
    if var <= 0.0 {
        return if d > 0.0 { 0.0 } else { 1.0 };
    }
    let z = -d / var.sqrt();
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

struct CachedSet {
    members: Vec<Member>,
    log_cp: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CachedSet {
    fn new(decoder: &Decoder<'_>, members: Vec<Member>) -> Self {
        let cs = Decoder::as_competition_set(&members);
        let mass = cs.log_mass(decoder.bank);
        let log_cp: Vec<f64> = members.iter().map(|m| decoder.bank.log_probability(m.variant) - mass).collect();
        let mut acc = 0.0;
        let cumulative = log_cp
            .iter()
            .map(|l| {
                acc += l.exp();
                acc
            })
            .collect();
        CachedSet { members, log_cp, cumulative }
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty set");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.members.len() - 1)
    }
}

#[derive(Default)]
struct TrieNode {
    set: Option<CachedSet>,
    children: HashMap<u32, usize>,
}

/// Competition sets keyed by the sequence of choices leading to them.
#[derive(Default)]
struct Trie {
    nodes: Vec<TrieNode>,
}

fn sample_with(decoder: &Decoder<'_>, rng: &mut impl Rng, mut trie: Option<&mut Trie>) -> Derivation {
    let mut steps = Vec::new();
    let mut log_prob = 0.0;
    let Some(mut state): Option<State> = decoder.initial() else {
        return Derivation { steps, log_prob, validity: Validity::Failed("no root item".into()), analysis: None };
    };
    let mut node = 0usize;
    if let Some(t) = trie.as_deref_mut() {
        if t.nodes.is_empty() {
            t.nodes.push(TrieNode::default());
        }
    }
    let mut uncached: Option<CachedSet> = None;
    while !state.sub.is_complete() {
        let set: &CachedSet = match trie.as_deref_mut() {
            Some(t) => {
                if t.nodes[node].set.is_none() {
                    let computed = CachedSet::new(decoder, decoder.competition_set(&state));
                    t.nodes[node].set = Some(computed);
                }
                t.nodes[node].set.as_ref().expect("filled above")
            }
            None => uncached.insert(CachedSet::new(decoder, decoder.competition_set(&state))),
        };
        if set.members.is_empty() {
            return Derivation { steps, log_prob, validity: Validity::Failed("dead end".into()), analysis: None };
        }
        let k = set.draw(rng);
        let member = set.members[k];
        log_prob += set.log_cp[k];
        let item = *state.pending.last().expect("open slot has an item");
        state = match decoder.apply(&state, member) {
            Ok(s) => s,
            Err(e) => return Derivation { steps, log_prob, validity: Validity::Failed(e.to_string()), analysis: None },
        };
        steps.push(Step { item, app: member.app, variant: member.variant });
        if let Some(t) = trie.as_deref_mut() {
            let next = t.nodes.len();
            node = *t.nodes[node].children.entry(k as u32).or_insert(next);
            if node == next {
                t.nodes.push(TrieNode::default());
            }
        }
    }
    let (validity, analysis) = decoder.finish(&state);
    Derivation { steps, log_prob, validity, analysis }
}

/// Draws one top-down leftmost derivation, each step chosen from the
/// competition set with probability `CP(f | CS)`.
pub fn sample_derivation(decoder: &Decoder<'_>, rng: &mut impl Rng) -> Derivation {
    sample_with(decoder, rng, None)
}

/// Returns the analysis produced most often by sampled derivations, with
/// the sampler's bookkeeping.
pub fn monte_carlo_parse(decoder: &Decoder<'_>, options: &McOptions) -> Result<(Analysis, SamplerState), ParseError> {
    if decoder.chart.root().is_none() {
        return Err(ParseError::NoParse);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut trie = Trie::default();
    let mut state = SamplerState { seed: options.seed, ..SamplerState::default() };
    let mut reprs: HashMap<String, Representation> = HashMap::new();
    let batch = options.batch.max(1);
    while state.samples < options.max_samples {
        let b = batch.min(options.max_samples - state.samples);
        for _ in 0..b {
            let d = sample_with(decoder, &mut rng, options.cache.then_some(&mut trie));
            state.samples += 1;
            match (d.validity, d.analysis) {
                (Validity::Valid, Some(repr)) => {
                    let key = canonical_form(&repr);
                    *state.tallies.entry(key.clone()).or_insert(0) += 1;
                    reprs.entry(key).or_insert(repr);
                }
                (Validity::Incomplete, _) => state.incomplete += 1,
                _ => state.dead_ends += 1,
            }
        }
        if let Some(threshold) = options.error_threshold {
            let err = sampler_error_probability(&state.tallies);
            state.error_probability = Some(err);
            if err < threshold {
                break;
            }
        }
    }
    let Some((key, count)) = state.leader() else {
        return Err(ParseError::NoValidParse(state.samples as usize));
    };
    let key = key.to_string();
    let log_prob = (count as f64 / state.valid() as f64).ln();
    let repr = reprs.remove(&key).expect("tallied analyses are stored");
    Ok((Analysis { repr, canonical: key, log_prob }, state))
}
