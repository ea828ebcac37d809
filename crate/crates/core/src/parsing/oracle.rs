use std::collections::BTreeMap;

use super::{rank_analyses, Analysis, Decoder, ParseError, State, Validity};
use crate::lfg::{canonical_form, Representation};
use crate::probability::log_sum_exp;

pub const DEFAULT_ORACLE_GUARD: u128 = 1_000_000;

/// Exact distribution over the analyses of one sentence.
#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Best first; masses are per-analysis sums over valid derivations.
    pub analyses: Vec<Analysis>,
    /// Derivations in the chart forest, before unification.
    pub forest_derivations: u128,
    pub valid: u64,
    pub incomplete: u64,
    pub dead_ends: u64,
}

impl OracleResult {
    pub fn argmax(&self) -> Option<&Analysis> {
        self.analyses.first()
    }

    pub fn total_mass(&self) -> f64 {
        self.analyses.iter().map(Analysis::probability).sum()
    }
}

struct Walk<'d, 'a> {
    decoder: &'d Decoder<'a>,
    groups: BTreeMap<String, (Representation, Vec<f64>)>,
    valid: u64,
    incomplete: u64,
    dead_ends: u64,
}

impl Walk<'_, '_> {
    fn visit(&mut self, state: &State, log_prob: f64) {
        if state.sub.is_complete() {
            match self.decoder.finish(state) {
                (Validity::Valid, Some(repr)) => {
                    self.valid += 1;
                    let key = canonical_form(&repr);
                    self.groups.entry(key).or_insert_with(|| (repr, Vec::new())).1.push(log_prob);
                }
                (Validity::Incomplete, _) => self.incomplete += 1,
                _ => self.dead_ends += 1,
            }
            return;
        }
        let members = self.decoder.competition_set(state);
        if members.is_empty() {
            self.dead_ends += 1;
            return;
        }
        let cs = Decoder::as_competition_set(&members);
        for (i, &m) in members.iter().enumerate() {
            let cp = cs.log_member_probability(i, self.decoder.bank).expect("index in range");
            let next = self.decoder.apply(state, m).expect("members compose");
            self.visit(&next, log_prob + cp);
        }
    }
}

/// Enumerates every top-down leftmost derivation with exact competition
/// probabilities and sums them per analysis.
pub fn brute_force_parse(decoder: &Decoder<'_>, guard: u128) -> Result<OracleResult, ParseError> {
    let Some(initial) = decoder.initial() else {
        return Err(ParseError::NoParse);
    };
    let count = decoder.chart.derivation_count(decoder.bank);
    if count > guard {
        return Err(ParseError::OracleTooLarge { count, limit: guard });
    }
    let mut walk = Walk { decoder, groups: BTreeMap::new(), valid: 0, incomplete: 0, dead_ends: 0 };
    walk.visit(&initial, 0.0);
    let mut analyses: Vec<Analysis> = walk
        .groups
        .into_iter()
        .map(|(canonical, (repr, logs))| Analysis { repr, canonical, log_prob: log_sum_exp(logs) })
        .collect();
    rank_analyses(&mut analyses);
    Ok(OracleResult {
        analyses,
        forest_derivations: count,
        valid: walk.valid,
        incomplete: walk.incomplete,
        dead_ends: walk.dead_ends,
    })
}
