//! Split, train, parse and score: the experiment loop.
//!
//! Seeds are derived with SplitMix64: split `i` uses `derive_seed(seed, i)`
//! and test sentence `j` of that split uses `derive_seed(split_seed, j)`.
//! Splits therefore agree across runs of one grid, and every sentence's
//! sampler is independent of scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, RunSpec, SearchKind};
use super::corpus::{parse_corpus, Corpus, CorpusError};
use super::split::{split_corpus, SplitError};
use crate::evaluation::{percent, EvalError, MeanScores, ScoreReport, SentenceScore, TextTable};
use crate::fragmentation::{enumerate_fragments, strip_fstructure, EnumerationConfig, FragmentMultiset};
use crate::parsing::{
    brute_force_parse, build_chart, monte_carlo_parse, viterbi_parse, Analysis, DecodeOptions, Decoder, McOptions, ParseError,
    ViterbiOptions,
};
use crate::probability::{build_bank, Estimator, FragmentBank, ProbabilityError};
use crate::symbol::Sym;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("split {split}: {source}")]
    Split { split: usize, source: SplitError },
    #[error(transparent)]
    Bank(#[from] ProbabilityError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of child `index` of `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

/// A fully specified search over one sentence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Search {
    Mc(McOptions),
    Viterbi(ViterbiOptions),
    Brute { guard: u128 },
}

#[derive(Clone, Debug)]
pub struct ParseOutcome {
    pub result: Result<Analysis, ParseError>,
    pub composes: u64,
}

/// Builds the chart for `tokens` and runs `search` on it.
pub fn parse_tokens(bank: &FragmentBank, tokens: &[Sym], search: &Search, options: &DecodeOptions) -> ParseOutcome {
    let chart = match build_chart(tokens, bank, options.initial.as_str()) {
        Ok(c) => c,
        Err(e) => return ParseOutcome { result: Err(e), composes: 0 },
    };
    let decoder = Decoder::new(bank, &chart, options);
    let result = match search {
        Search::Mc(o) => monte_carlo_parse(&decoder, o).map(|(a, _)| a),
        Search::Viterbi(o) => viterbi_parse(&decoder, o).map(|r| r.best),
        Search::Brute { guard } => brute_force_parse(&decoder, *guard)
            .and_then(|r| r.argmax().cloned().ok_or(ParseError::NoValidParse(r.forest_derivations.min(usize::MAX as u128) as usize))),
    };
    ParseOutcome { result, composes: decoder.composes() }
}

/// Short machine-readable tag for a parse failure.
pub fn failure_tag(e: &ParseError) -> &'static str {
    match e {
        ParseError::EmptySentence => "empty",
        ParseError::OutOfVocabulary(_) => "out-of-vocabulary",
        ParseError::UnaryCycle { .. } => "unary-cycle",
        ParseError::NoParse => "no-parse",
        ParseError::NoValidParse(_) => "no-valid-parse",
        ParseError::OracleTooLarge { .. } => "oracle-too-large",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentenceOutcome {
    pub split: usize,
    pub score: SentenceScore,
    pub composes: u64,
    /// `None` when parsed, otherwise the failure tag.
    pub failure: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub spec: RunSpec,
    pub sentences: Vec<SentenceOutcome>,
    pub splits: Vec<ScoreReport>,
    pub mean: MeanScores,
    pub composes: u64,
    pub wall: Duration,
}

impl RunResult {
    pub fn failures(&self) -> usize {
        self.sentences.iter().filter(|s| s.failure.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
}

/// Reads the corpus named by the configuration and runs the grid.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let path = config.corpus.display().to_string();
    let text = std::fs::read_to_string(&config.corpus).map_err(|source| ExperimentError::Io { path, source })?;
    let corpus = parse_corpus(&text)?;
    let report = run_experiment_on(config, &corpus)?;
    if let Some(dir) = &config.output_dir {
        report.write(dir)?;
    }
    Ok(report)
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct BankKey {
    max_depth: usize,
    discard: bool,
    tree_dop: bool,
}

fn train_bank(train: &Corpus, key: BankKey, config: &ExperimentConfig) -> Result<FragmentBank, ProbabilityError> {
    let cfg = EnumerationConfig {
        max_depth: key.max_depth,
        include_discard: key.discard,
        protect_pred: config.protect_pred,
        discard_cap: config.discard_cap,
    };
    let parts: Vec<FragmentMultiset> = train
        .entries
        .par_iter()
        .map(|e| if key.tree_dop { enumerate_fragments(&strip_fstructure(&e.repr), &cfg) } else { enumerate_fragments(&e.repr, &cfg) })
        .collect();
    let mut bag = FragmentMultiset::new();
    for p in parts {
        bag.merge(p);
    }
    build_bank(&bag, Estimator::DiscountedRf)
}

fn search_for(spec: &RunSpec, config: &ExperimentConfig, seed: u64) -> Search {
    match spec.search {
        SearchKind::Mc => Search::Mc(McOptions {
            max_samples: spec.budget,
            error_threshold: config.error_threshold,
            seed,
            ..McOptions::default()
        }),
        SearchKind::Viterbi => Search::Viterbi(ViterbiOptions { n: spec.budget as usize, rescore: config.rescore }),
        SearchKind::Brute => Search::Brute { guard: config.oracle_guard },
    }
}

/// Runs every grid point on every split of `corpus`.
pub fn run_experiment_on(config: &ExperimentConfig, corpus: &Corpus) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let specs = config.runs();
    let options = DecodeOptions {
        initial: Sym::new(&config.initial),
        completeness: config.completeness,
        ..DecodeOptions::default()
    };
    let mut runs: Vec<RunResult> = specs
        .iter()
        .map(|&spec| RunResult { spec, sentences: Vec::new(), splits: Vec::new(), mean: MeanScores::default(), composes: 0, wall: Duration::ZERO })
        .collect();

    for split in 0..config.n_splits {
        let split_seed = derive_seed(config.seed, split as u64);
        let (train, test) = split_corpus(corpus, config.ratio, split_seed).map_err(|source| ExperimentError::Split { split, source })?;
        let mut test_entries: Vec<_> = test.entries.iter().collect();
        test_entries.sort_by(|a, b| a.id.cmp(&b.id));

        let mut banks: BTreeMap<(BankKey, Estimator), FragmentBank> = BTreeMap::new();
        for spec in &specs {
            let key = BankKey { max_depth: spec.max_depth, discard: spec.discard, tree_dop: spec.tree_dop };
            if banks.contains_key(&(key, spec.estimator)) {
                continue;
            }
            let base = match banks.iter().find(|((k, _), _)| *k == key) {
                Some((_, b)) => b.with_estimator(spec.estimator),
                None => train_bank(&train, key, config)?.with_estimator(spec.estimator),
            };
            log::info!("split {split}: bank depth {} discard {} tree-dop {}: {} fragments", key.max_depth, key.discard, key.tree_dop, base.len());
            banks.insert((key, spec.estimator), base);
        }

        for run in runs.iter_mut() {
            let spec = run.spec;
            let key = BankKey { max_depth: spec.max_depth, discard: spec.discard, tree_dop: spec.tree_dop };
            let bank = &banks[&(key, spec.estimator)];
            let started = Instant::now();
            let outcomes: Vec<(ParseOutcome, usize)> = test_entries
                .par_iter()
                .enumerate()
                .map(|(j, e)| {
                    let search = search_for(&spec, config, derive_seed(split_seed, j as u64));
                    (parse_tokens(bank, &e.tokens, &search, &options), j)
                })
                .collect();
            run.wall += started.elapsed();
            let mut scores = Vec::with_capacity(outcomes.len());
            for (outcome, j) in outcomes {
                let entry = test_entries[j];
                let proposed = outcome.result.as_ref().ok().map(|a| &a.repr);
                let score = SentenceScore::new(entry.id.clone(), proposed, &entry.repr, config.eval)?;
                scores.push(score.clone());
                run.composes += outcome.composes;
                run.sentences.push(SentenceOutcome {
                    split,
                    score,
                    composes: outcome.composes,
                    failure: outcome.result.as_ref().err().map(failure_tag),
                });
            }
            run.splits.push(ScoreReport::from_sentences(scores));
        }
    }
    for run in &mut runs {
        run.mean = MeanScores::of(&run.splits);
    }
    Ok(ExperimentReport { config: config.clone(), runs })
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn discard_label(b: bool) -> &'static str {
    if b {
        "+Discard"
    } else {
        "-Discard"
    }
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| EvalError::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| EvalError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl ExperimentReport {
    fn run_columns(i: usize, r: &RunResult) -> Vec<String> {
        let s = r.spec;
        vec![
            format!("r{}", i + 1),
            s.model().to_string(),
            s.max_depth.to_string(),
            s.estimator.name().to_string(),
            yes_no(s.discard).to_string(),
            s.search.name().to_string(),
            s.budget.to_string(),
        ]
    }

    const RUN_HEADER: [&'static str; 7] = ["run", "model", "max_depth", "estimator", "discard", "search", "budget"];

    /// One row per run, split and test sentence. Holds no timings, so a
    /// rerun with the same configuration reproduces it byte for byte.
    pub fn sentences_csv(&self) -> Result<String, EvalError> {
        let mut header: Vec<String> = Self::RUN_HEADER.iter().map(|s| s.to_string()).collect();
        header.extend(["split", "sentence", "exact", "correct", "proposed", "gold", "composes", "status"].map(String::from));
        let mut rows = vec![header];
        for (i, r) in self.runs.iter().enumerate() {
            for s in &r.sentences {
                let mut row = Self::run_columns(i, r);
                let c = s.score.counts;
                row.extend([
                    s.split.to_string(),
                    s.score.id.clone(),
                    u8::from(s.score.exact).to_string(),
                    c.correct.to_string(),
                    c.proposed.to_string(),
                    c.gold.to_string(),
                    s.composes.to_string(),
                    s.failure.unwrap_or("ok").to_string(),
                ]);
                rows.push(row);
            }
        }
        csv_string(rows)
    }

    /// Mean scores over splits, one row per run.
    pub fn summary_csv(&self) -> Result<String, EvalError> {
        let mut header: Vec<String> = Self::RUN_HEADER.iter().map(|s| s.to_string()).collect();
        header.extend(["exact_match", "precision", "recall", "composes", "failures", "sentences"].map(String::from));
        let mut rows = vec![header];
        for (i, r) in self.runs.iter().enumerate() {
            let mut row = Self::run_columns(i, r);
            row.extend([
                format!("{:.6}", r.mean.exact_match),
                format!("{:.6}", r.mean.precision),
                format!("{:.6}", r.mean.recall),
                r.composes.to_string(),
                r.failures().to_string(),
                r.sentences.len().to_string(),
            ]);
            rows.push(row);
        }
        csv_string(rows)
    }

    fn find(&self, f: impl Fn(&RunSpec) -> bool) -> Vec<&RunResult> {
        self.runs.iter().filter(|r| f(&r.spec)).collect()
    }

    /// Every run with its mean scores.
    pub fn summary_table(&self) -> TextTable {
        let header = ["Model", "Depth", "Estimator", "Fragments", "Search", "Exact match", "Precision", "Recall", "Failures"];
        let rows = self
            .runs
            .iter()
            .map(|r| {
                let s = r.spec;
                vec![
                    s.model().to_string(),
                    s.max_depth.to_string(),
                    s.estimator.name().to_string(),
                    discard_label(s.discard).to_string(),
                    s.search_label(),
                    percent(r.mean.exact_match),
                    percent(r.mean.precision),
                    percent(r.mean.recall),
                    r.failures().to_string(),
                ]
            })
            .collect();
        TextTable {
            header: vec![header.map(String::from).to_vec()],
            rows,
            caption: Some(format!("Mean over {} splits (eval: {}).", self.config.n_splits, self.config.eval)),
        }
    }

    /// Estimator against fragment set, once per remaining grid point that
    /// has all four combinations. Each yields an exact-match table and a
    /// precision/recall table.
    pub fn estimator_tables(&self) -> Vec<TextTable> {
        let mut out = Vec::new();
        let mut groups: Vec<RunSpec> = Vec::new();
        for r in self.runs.iter().filter(|r| !r.spec.tree_dop) {
            let key = RunSpec { estimator: Estimator::SimpleRf, discard: false, ..r.spec };
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        for key in groups {
            let cell = |discard: bool, estimator: Estimator| {
                self.find(|s| *s == RunSpec { discard, estimator, ..key }).first().map(|r| r.mean)
            };
            let grid: Vec<Vec<Option<MeanScores>>> =
                [true, false].iter().map(|&d| [Estimator::SimpleRf, Estimator::DiscountedRf].iter().map(|&e| cell(d, e)).collect()).collect();
            if grid.iter().flatten().any(Option::is_none) {
                continue;
            }
            let header = vec![vec![String::new(), "Simple RF".to_string(), "Discounted RF".to_string()]];
            let rows_with = |f: &dyn Fn(&MeanScores) -> String| -> Vec<Vec<String>> {
                [true, false]
                    .iter()
                    .zip(&grid)
                    .map(|(&d, cells)| {
                        let mut row = vec![discard_label(d).to_string()];
                        row.extend(cells.iter().map(|c| f(&c.expect("checked"))));
                        row
                    })
                    .collect()
            };
            let ctx = format!("depth {}, {}", key.max_depth, key.search_label());
            out.push(TextTable {
                header: header.clone(),
                rows: rows_with(&|m| percent(m.exact_match)),
                caption: Some(format!("Exact match by estimator and fragment set ({ctx}).")),
            });
            out.push(TextTable {
                header,
                rows: rows_with(&|m| format!("{} / {}", percent(m.precision), percent(m.recall))),
                caption: Some(format!("Precision / recall by estimator and fragment set ({ctx}).")),
            });
        }
        out
    }

    /// Scores by fragment depth, for each grid point with several depths.
    pub fn depth_tables(&self) -> Vec<TextTable> {
        let mut out = Vec::new();
        let mut groups: Vec<RunSpec> = Vec::new();
        for r in &self.runs {
            let key = RunSpec { max_depth: 0, ..r.spec };
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        for key in groups {
            let mut runs = self.find(|s| RunSpec { max_depth: 0, ..*s } == key);
            if runs.len() < 2 {
                continue;
            }
            runs.sort_by_key(|r| r.spec.max_depth);
            let rows = runs
                .iter()
                .map(|r| {
                    vec![format!("<= {}", r.spec.max_depth), percent(r.mean.exact_match), percent(r.mean.precision), percent(r.mean.recall)]
                })
                .collect();
            out.push(TextTable {
                header: vec![["Depth", "Exact match", "Precision", "Recall"].map(String::from).to_vec()],
                rows,
                caption: Some(format!(
                    "Scores by maximum fragment depth ({}, {} RF, {}, {}).",
                    key.model(),
                    key.estimator.name(),
                    discard_label(key.discard),
                    key.search_label()
                )),
            });
        }
        out
    }

    /// Tree-DOP against LFG-DOP at equal depth, estimator and search.
    pub fn model_tables(&self) -> Vec<TextTable> {
        let mut out = Vec::new();
        let mut groups: Vec<RunSpec> = Vec::new();
        for r in &self.runs {
            let key = RunSpec { tree_dop: false, discard: false, ..r.spec };
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        for key in groups {
            let runs = self.find(|s| RunSpec { tree_dop: false, discard: false, ..*s } == key);
            if !runs.iter().any(|r| r.spec.tree_dop) || !runs.iter().any(|r| !r.spec.tree_dop) {
                continue;
            }
            let rows = runs
                .iter()
                .map(|r| {
                    let label = if r.spec.tree_dop { "Tree-DOP".to_string() } else { format!("LFG-DOP {}", discard_label(r.spec.discard)) };
                    vec![label, percent(r.mean.exact_match), percent(r.mean.precision), percent(r.mean.recall)]
                })
                .collect();
            out.push(TextTable {
                header: vec![["Model", "Exact match", "Precision", "Recall"].map(String::from).to_vec()],
                rows,
                caption: Some(format!(
                    "Tree-DOP against LFG-DOP (depth {}, {} RF, {}, eval: {}).",
                    key.max_depth,
                    key.estimator.name(),
                    key.search_label(),
                    self.config.eval
                )),
            });
        }
        out
    }

    /// Search strategies compared on equal banks, with compose counts.
    pub fn search_tables(&self) -> Vec<TextTable> {
        let mut out = Vec::new();
        let mut groups: Vec<RunSpec> = Vec::new();
        for r in &self.runs {
            let key = RunSpec { search: SearchKind::Brute, budget: 0, ..r.spec };
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        for key in groups {
            let runs = self.find(|s| RunSpec { search: SearchKind::Brute, budget: 0, ..*s } == key);
            if runs.len() < 2 {
                continue;
            }
            let rows = runs
                .iter()
                .map(|r| {
                    vec![
                        r.spec.search_label(),
                        percent(r.mean.exact_match),
                        percent(r.mean.precision),
                        percent(r.mean.recall),
                        r.composes.to_string(),
                    ]
                })
                .collect();
            out.push(TextTable {
                header: vec![["Search", "Exact match", "Precision", "Recall", "Composes"].map(String::from).to_vec()],
                rows,
                caption: Some(format!(
                    "Search strategies ({}, depth {}, {} RF, {}).",
                    key.model(),
                    key.max_depth,
                    key.estimator.name(),
                    discard_label(key.discard)
                )),
            });
        }
        out
    }

    /// Compose counts and wall time per run. Wall time varies between
    /// machines and reruns; the compose count does not.
    pub fn timing_table(&self) -> TextTable {
        let rows = self
            .runs
            .iter()
            .map(|r| {
                let n = r.sentences.len().max(1) as f64;
                vec![
                    r.spec.model().to_string(),
                    r.spec.max_depth.to_string(),
                    r.spec.estimator.name().to_string(),
                    discard_label(r.spec.discard).to_string(),
                    r.spec.search_label(),
                    r.composes.to_string(),
                    format!("{:.1}", r.composes as f64 / n),
                    format!("{:.3}", r.wall.as_secs_f64()),
                ]
            })
            .collect();
        TextTable {
            header: vec![["Model", "Depth", "Estimator", "Fragments", "Search", "Composes", "Per sentence", "Wall (s)"].map(String::from).to_vec()],
            rows,
            caption: Some("Parsing cost per run.".to_string()),
        }
    }

    /// All score tables, summary first.
    pub fn tables(&self) -> Vec<TextTable> {
        let mut out = vec![self.summary_table()];
        out.extend(self.estimator_tables());
        out.extend(self.depth_tables());
        out.extend(self.model_tables());
        out.extend(self.search_tables());
        out
    }

    pub fn render_tables(&self) -> String {
        let mut s = String::new();
        for t in self.tables() {
            let _ = writeln!(s, "{t}");
        }
        s
    }

    /// Writes `sentences.csv`, `summary.csv`, `tables.txt` and `timing.txt`.
    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io = |source| ExperimentError::Io { path: dir.display().to_string(), source };
        std::fs::create_dir_all(dir).map_err(io)?;
        let files = [
            ("sentences.csv", self.sentences_csv()?),
            ("summary.csv", self.summary_csv()?),
            ("tables.txt", self.render_tables()),
            ("timing.txt", self.timing_table().to_string()),
        ];
        for (name, body) in files {
            std::fs::write(dir.join(name), body).map_err(io)?;
        }
        Ok(())
    }
}
