//! Parsing new sentences with a fragment bank.
//!
//! A bottom-up chart over fragment c-structures enforces category matching
//! only. Derivations are then built top-down and leftmost from the chart,
//! composing fragments by substitution plus unification, and checked for
//! Uniqueness and Coherence at every step and for Completeness at the end.

mod chart;
mod decoder;
mod nbest;
mod oracle;
mod sampler;

use thiserror::Error;

use crate::lfg::{Completeness, GovernableFunctions, Representation};
use crate::probability::FragId;
use crate::symbol::Sym;

pub use chart::{build_chart, Application, Chart, Item, ItemId};
pub use decoder::{compose, ComposeError, Decoder, Member, State, SubAnalysis};
pub use nbest::{viterbi_nbest, viterbi_parse, RankedDerivation, ViterbiOptions, ViterbiResult};
pub use oracle::{brute_force_parse, OracleResult, DEFAULT_ORACLE_GUARD};
pub use sampler::{monte_carlo_parse, sample_derivation, sampler_error_probability, McOptions, SamplerState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty sentence")]
    EmptySentence,
    #[error("word '{0}' does not occur in the training fragments")]
    OutOfVocabulary(Sym),
    #[error("unary cycle through {category} over words {start}..{end}")]
    UnaryCycle { category: Sym, start: usize, end: usize },
    #[error("no derivation covers the sentence")]
    NoParse,
    #[error("none of the {0} derivations is valid")]
    NoValidParse(usize),
    #[error("{count} derivations exceed the oracle limit of {limit}")]
    OracleTooLarge { count: u128, limit: u128 },
}

/// Settings shared by every decoder.
#[derive(Clone, Debug)]
pub struct DecodeOptions {
    pub initial: Sym,
    pub governable: GovernableFunctions,
    pub completeness: Completeness,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions { initial: Sym::new("S"), governable: GovernableFunctions::default(), completeness: Completeness::Basic }
    }
}

/// Outcome of one derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Incomplete,
    Failed(String),
}

/// One step of a top-down leftmost derivation: the fragment variant and the
/// chart application it was substituted through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub item: ItemId,
    pub app: u32,
    pub variant: FragId,
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub steps: Vec<Step>,
    /// ln of the product of per-step competition probabilities.
    pub log_prob: f64,
    pub validity: Validity,
    pub analysis: Option<Representation>,
}

/// A complete analysis with its (log) probability.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub repr: Representation,
    pub canonical: String,
    pub log_prob: f64,
}

impl Analysis {
    pub fn probability(&self) -> f64 {
        self.log_prob.exp()
    }
}

/// Sorts analyses by probability, then canonical form.
pub(crate) fn rank_analyses(analyses: &mut [Analysis]) {
    analyses.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob).then_with(|| a.canonical.cmp(&b.canonical)));
}
