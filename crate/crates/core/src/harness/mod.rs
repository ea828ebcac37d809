//! Corpus files, train/test splits and experiment runs.

pub mod config;
pub mod corpus;
pub mod experiment;
pub mod split;

pub use config::{ConfigError, ExperimentConfig, RunSpec, SearchKind};
pub use corpus::{parse_corpus, Corpus, CorpusEntry, CorpusError};
pub use experiment::{
    derive_seed, failure_tag, parse_tokens, run_experiment, run_experiment_on, splitmix64, ExperimentError, ExperimentReport, ParseOutcome,
    RunResult, Search, SentenceOutcome,
};
pub use split::{split_corpus, SplitError};

#[cfg(test)]
mod tests;
