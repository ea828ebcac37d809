//! Flat `key = value` experiment configuration.
//!
//! Grid keys take comma-separated lists (`max_depth = 1,2,3,4`), integer
//! ranges (`max_depth = 1..4`) or `both` for two-valued axes. Every
//! combination of the grid axes becomes one run.

use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::evaluation::EvalMode;
use crate::lfg::Completeness;
use crate::parsing::DEFAULT_ORACLE_GUARD;
use crate::probability::Estimator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value'")]
    Syntax { line: usize },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for '{key}': {message}")]
    Value { line: usize, key: String, message: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Search strategy of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SearchKind {
    Mc,
    Viterbi,
    Brute,
}

impl SearchKind {
    pub fn name(self) -> &'static str {
        match self {
            SearchKind::Mc => "mc",
            SearchKind::Viterbi => "viterbi",
            SearchKind::Brute => "brute",
        }
    }
}

impl FromStr for SearchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mc" => Ok(SearchKind::Mc),
            "viterbi" => Ok(SearchKind::Viterbi),
            "brute" => Ok(SearchKind::Brute),
            other => Err(format!("unknown search '{other}' (expected mc, viterbi or brute)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub ratio: f64,
    pub n_splits: usize,
    pub seed: u64,
    pub max_depth: Vec<usize>,
    pub estimator: Vec<Estimator>,
    pub discard: Vec<bool>,
    pub protect_pred: bool,
    pub discard_cap: Option<usize>,
    pub search: Vec<SearchKind>,
    pub n_best: Vec<usize>,
    pub max_samples: Vec<u64>,
    pub error_threshold: Option<f64>,
    pub rescore: bool,
    pub tree_dop: Vec<bool>,
    pub eval: EvalMode,
    pub completeness: Completeness,
    pub oracle_guard: u128,
    pub initial: String,
    /// Written to when set: per-sentence and summary CSVs plus the tables.
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            corpus: corpus.into(),
            ratio: 0.9,
            n_splits: 10,
            seed: 0,
            max_depth: vec![4],
            estimator: vec![Estimator::DiscountedRf],
            discard: vec![false],
            protect_pred: false,
            discard_cap: None,
            search: vec![SearchKind::Mc],
            n_best: vec![100],
            max_samples: vec![10_000],
            error_threshold: Some(0.05),
            rescore: false,
            tree_dop: vec![false],
            eval: EvalMode::Full,
            completeness: Completeness::Basic,
            oracle_guard: DEFAULT_ORACLE_GUARD,
            initial: "S".to_string(),
            output_dir: None,
        }
    }

    /// Relative `corpus` and `output_dir` paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&std::path::Path>) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::new(PathBuf::new());
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            seen.push(key.to_string());
            let bad = |message: String| ConfigError::Value { line, key: key.to_string(), message };
            let path = |v: &str| match base {
                Some(b) if PathBuf::from(v).is_relative() => b.join(v),
                _ => PathBuf::from(v),
            };
            match key {
                "corpus" => cfg.corpus = path(value),
                "ratio" => cfg.ratio = scalar(value).map_err(bad)?,
                "n_splits" => cfg.n_splits = scalar(value).map_err(bad)?,
                "seed" => cfg.seed = scalar(value).map_err(bad)?,
                "max_depth" => cfg.max_depth = int_list(value).map_err(bad)?,
                "estimator" => {
                    cfg.estimator = match value {
                        "both" => vec![Estimator::SimpleRf, Estimator::DiscountedRf],
                        v => list(v).map_err(bad)?,
                    }
                }
                "discard" => cfg.discard = bool_axis(value).map_err(bad)?,
                "protect_pred" => cfg.protect_pred = boolean(value).map_err(bad)?,
                "discard_cap" => cfg.discard_cap = optional(value).map_err(bad)?,
                "search" => cfg.search = list(value).map_err(bad)?,
                "n_best" => cfg.n_best = int_list(value).map_err(bad)?,
                "max_samples" => cfg.max_samples = int_list(value).map_err(bad)?,
                "error_threshold" => cfg.error_threshold = optional(value).map_err(bad)?,
                "rescore" => cfg.rescore = boolean(value).map_err(bad)?,
                "tree_dop" => cfg.tree_dop = bool_axis(value).map_err(bad)?,
                "eval" => cfg.eval = scalar(value).map_err(bad)?,
                "completeness" => {
                    cfg.completeness = match value {
                        "basic" => Completeness::Basic,
                        "strict" => Completeness::Strict,
                        other => return Err(bad(format!("'{other}' (expected basic or strict)"))),
                    }
                }
                "oracle_guard" => cfg.oracle_guard = scalar(value).map_err(bad)?,
                "initial" => cfg.initial = value.to_string(),
                "output_dir" => cfg.output_dir = Some(path(value)),
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }
        if !seen.iter().any(|k| k == "corpus") {
            return Err(ConfigError::Missing("corpus"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return invalid("ratio must lie in (0, 1)");
        }
        if self.n_splits == 0 {
            return invalid("n_splits must be at least 1");
        }
        if self.max_depth.contains(&0) {
            return invalid("max_depth must be at least 1");
        }
        if self.n_best.contains(&0) || self.max_samples.contains(&0) {
            return invalid("search budgets must be positive");
        }
        if self.tree_dop.contains(&true) && self.eval == EvalMode::Full {
            return invalid("tree_dop runs carry no f-structures; set eval = tree");
        }
        let lists = [
            self.max_depth.is_empty(),
            self.estimator.is_empty(),
            self.discard.is_empty(),
            self.search.is_empty(),
            self.n_best.is_empty(),
            self.max_samples.is_empty(),
            self.tree_dop.is_empty(),
        ];
        if lists.contains(&true) {
            return invalid("grid keys need at least one value");
        }
        Ok(())
    }

    /// Every run of the grid, without duplicates. Tree-DOP runs ignore the
    /// Discard axis since stripped f-structures have nothing to delete.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut out: Vec<RunSpec> = Vec::new();
        for &tree_dop in &self.tree_dop {
            for &max_depth in &self.max_depth {
                for &discard in &self.discard {
                    for &estimator in &self.estimator {
                        for &kind in &self.search {
                            let budgets: Vec<u64> = match kind {
                                SearchKind::Mc => self.max_samples.clone(),
                                SearchKind::Viterbi => self.n_best.iter().map(|&n| n as u64).collect(),
                                SearchKind::Brute => vec![0],
                            };
                            for budget in budgets {
                                let spec = RunSpec { max_depth, estimator, discard: discard && !tree_dop, tree_dop, search: kind, budget };
                                if !out.contains(&spec) {
                                    out.push(spec);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One point of the experiment grid. `budget` is the sample limit for
/// `mc`, the derivation count for `viterbi` and unused for `brute`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunSpec {
    pub max_depth: usize,
    pub estimator: Estimator,
    pub discard: bool,
    pub tree_dop: bool,
    pub search: SearchKind,
    pub budget: u64,
}

impl RunSpec {
    pub fn model(&self) -> &'static str {
        if self.tree_dop {
            "tree-dop"
        } else {
            "lfg-dop"
        }
    }

    pub fn search_label(&self) -> String {
        match self.search {
            SearchKind::Mc => format!("mc {}", self.budget),
            SearchKind::Viterbi => format!("viterbi {}", self.budget),
            SearchKind::Brute => "brute".to_string(),
        }
    }
}

fn scalar<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("'{v}': {e}"))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(|x| scalar(x.trim())).collect()
}

fn int_list<T: FromStr + TryFrom<u64>>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (scalar(a.trim())?, scalar(b.trim())?);
            if a > b {
                return Err(format!("empty range '{part}'"));
            }
            for x in a..=b {
                out.push(T::try_from(x).map_err(|_| format!("{x} is out of range"))?);
            }
        } else {
            out.push(scalar(part)?);
        }
    }
    Ok(out)
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

fn bool_axis(v: &str) -> Result<Vec<bool>, String> {
    if v == "both" {
        Ok(vec![false, true])
    } else {
        Ok(vec![boolean(v)?])
    }
}

fn optional<T: FromStr>(v: &str) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    if v == "none" {
        Ok(None)
    } else {
        scalar(v).map(Some)
    }
}
