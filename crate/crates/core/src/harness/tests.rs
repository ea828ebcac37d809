use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use proptest::prelude::*;

use super::*;
use crate::evaluation::EvalMode;
use crate::probability::Estimator;
use crate::samples::{pp_attachment, synthetic};

fn cfg(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::parse(text, None)
}

#[test]
fn config_defaults_and_overrides() {
    let c = cfg("corpus = a.corpus\n").unwrap();
    assert_eq!(c, ExperimentConfig::new("a.corpus"));
    assert_eq!(c.runs().len(), 1);

    let c = cfg("# grid\ncorpus = a.corpus  # trailing\nmax_depth = 1..3, 5\nestimator = both\ndiscard = yes\nsearch = mc, viterbi\n\
                 n_best = 10,100\nmax_samples = 500\nerror_threshold = none\nseed = 7\ndiscard_cap = 16\n")
    .unwrap();
    assert_eq!(c.max_depth, vec![1, 2, 3, 5]);
    assert_eq!(c.estimator, vec![Estimator::SimpleRf, Estimator::DiscountedRf]);
    assert_eq!(c.discard, vec![true]);
    assert_eq!(c.search, vec![SearchKind::Mc, SearchKind::Viterbi]);
    assert_eq!(c.error_threshold, None);
    assert_eq!(c.discard_cap, Some(16));
    assert_eq!(c.seed, 7);
    // 4 depths x 2 estimators x (1 mc budget + 2 viterbi budgets)
    assert_eq!(c.runs().len(), 24);
}

#[test]
fn config_paths_resolve_against_base() {
    let c = ExperimentConfig::parse("corpus = data/x.corpus\noutput_dir = /tmp/out\n", Some(Path::new("/etc/exp"))).unwrap();
    assert_eq!(c.corpus, PathBuf::from("/etc/exp/data/x.corpus"));
    assert_eq!(c.output_dir, Some(PathBuf::from("/tmp/out")));
}

#[test]
fn config_errors() {
    assert_eq!(cfg("max_depth = 2\n"), Err(ConfigError::Missing("corpus")));
    assert_eq!(cfg("corpus = a\nnonsense\n"), Err(ConfigError::Syntax { line: 2 }));
    assert!(matches!(cfg("corpus = a\nfoo = 1\n"), Err(ConfigError::UnknownKey { line: 2, .. })));
    assert!(matches!(cfg("corpus = a\ncorpus = b\n"), Err(ConfigError::Duplicate { line: 2, .. })));
    assert!(matches!(cfg("corpus = a\nmax_depth = x\n"), Err(ConfigError::Value { .. })));
    assert!(matches!(cfg("corpus = a\nmax_depth = 4..1\n"), Err(ConfigError::Value { .. })));
    assert!(matches!(cfg("corpus = a\nsearch = beam\n"), Err(ConfigError::Value { .. })));
    assert!(matches!(cfg("corpus = a\ndiscard = maybe\n"), Err(ConfigError::Value { .. })));
    assert!(matches!(cfg("corpus = a\nratio = 1.5\n"), Err(ConfigError::Invalid(_))));
    assert!(matches!(cfg("corpus = a\nmax_depth = 0\n"), Err(ConfigError::Invalid(_))));
    assert!(matches!(cfg("corpus = a\ntree_dop = true\n"), Err(ConfigError::Invalid(_))));
    assert!(cfg("corpus = a\ntree_dop = true\neval = tree\n").is_ok());
}

#[test]
fn tree_dop_runs_never_discard() {
    let c = cfg("corpus = a\ntree_dop = both\neval = tree\ndiscard = both\n").unwrap();
    let runs = c.runs();
    assert_eq!(runs.len(), 3);
    assert!(runs.iter().filter(|r| r.tree_dop).all(|r| !r.discard));
    assert_eq!(runs.iter().map(|r| r.model()).collect::<BTreeSet<_>>(), BTreeSet::from(["lfg-dop", "tree-dop"]));
}

#[test]
fn seed_derivation() {
    assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
    assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
    assert_ne!(derive_seed(0, 1), derive_seed(1, 0));
    assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
}

#[test]
fn synthetic_splits_keep_the_test_vocabulary_in_training() {
    let corpus = synthetic();
    for split in 0..10 {
        let (train, test) = split_corpus(&corpus, 0.9, derive_seed(0, split)).unwrap();
        assert_eq!(test.len(), 4);
        assert_eq!(train.len() + test.len(), corpus.len());
        let vocab = train.vocabulary();
        assert!(test.vocabulary().iter().all(|w| vocab.contains(w)));
    }
}

#[test]
fn split_errors() {
    let corpus = pp_attachment();
    assert_eq!(split_corpus(&corpus, 1.0, 0).unwrap_err(), SplitError::BadRatio(1.0));
    let one = Corpus { entries: corpus.entries[..1].to_vec() };
    assert_eq!(split_corpus(&one, 0.5, 0).unwrap_err(), SplitError::TooSmall(1));
    let disjoint = parse_corpus(&format!("{}\n{}", crate::samples::KIM_EATS, crate::samples::KIM_EATS.replace("#id: 1", "#id: 2").replace("Kim", "Max")))
        .unwrap();
    assert_eq!(split_corpus(&disjoint, 0.5, 0).unwrap_err(), SplitError::Infeasible { wanted: 1, found: 0 });
}

proptest! {
    #[test]
    fn splits_partition_the_corpus(seed in any::<u64>()) {
        let corpus = synthetic();
        let (train, test) = split_corpus(&corpus, 0.9, seed).unwrap();
        let mut ids: Vec<&str> = train.entries.iter().chain(&test.entries).map(|e| e.id.as_str()).collect();
        ids.sort();
        let mut want: Vec<&str> = corpus.entries.iter().map(|e| e.id.as_str()).collect();
        want.sort();
        prop_assert_eq!(ids, want);
        let vocab = train.vocabulary();
        prop_assert!(test.vocabulary().iter().all(|w| vocab.contains(w)));
    }
}

fn small_grid() -> ExperimentConfig {
    ExperimentConfig {
        n_splits: 3,
        ratio: 0.8,
        max_depth: vec![1, 2],
        estimator: vec![Estimator::SimpleRf, Estimator::DiscountedRf],
        search: vec![SearchKind::Mc, SearchKind::Viterbi, SearchKind::Brute],
        max_samples: vec![200],
        n_best: vec![20],
        ..ExperimentConfig::new("unused")
    }
}

#[test]
fn experiment_grid_shapes_the_report() {
    let corpus = synthetic();
    let report = run_experiment_on(&small_grid(), &corpus).unwrap();
    assert_eq!(report.runs.len(), 2 * 2 * 3);
    for run in &report.runs {
        assert_eq!(run.splits.len(), 3);
        assert_eq!(run.sentences.len(), 3 * 8);
        assert!((0.0..=1.0).contains(&run.mean.exact_match));
        assert_eq!(run.composes, run.sentences.iter().map(|s| s.composes).sum::<u64>());
    }
    let csv = report.sentences_csv().unwrap();
    assert_eq!(csv.lines().count(), 1 + 12 * 24);
    assert!(csv.starts_with("run,model,max_depth,estimator,discard,search,budget,split,sentence,exact,correct,proposed,gold,composes,status"));
    assert_eq!(report.summary_csv().unwrap().lines().count(), 13);
    let tables = report.render_tables();
    assert!(tables.contains("<= 2") && tables.contains("Search strategies"));
    // The estimator grid needs both fragment sets.
    assert!(!tables.contains("Simple RF"));
}

#[test]
fn experiment_is_deterministic() {
    let corpus = synthetic();
    let a = run_experiment_on(&small_grid(), &corpus).unwrap();
    let b = run_experiment_on(&small_grid(), &corpus).unwrap();
    assert_eq!(a.sentences_csv().unwrap(), b.sentences_csv().unwrap());
    assert_eq!(a.summary_csv().unwrap(), b.summary_csv().unwrap());
}

#[test]
fn without_discard_the_estimators_score_alike() {
    let corpus = synthetic();
    let report = run_experiment_on(&ExperimentConfig { search: vec![SearchKind::Viterbi], ..small_grid() }, &corpus).unwrap();
    for pair in report.runs.chunks(2) {
        assert_eq!(pair[0].spec.estimator, Estimator::SimpleRf);
        assert_eq!(pair[0].mean, pair[1].mean);
    }
}

#[test]
fn tree_dop_runs_score_trees() {
    let corpus = synthetic();
    let c = ExperimentConfig { tree_dop: vec![false, true], eval: EvalMode::Tree, max_depth: vec![2], search: vec![SearchKind::Mc], ..small_grid() };
    let report = run_experiment_on(&c, &corpus).unwrap();
    let models: Vec<_> = report.runs.iter().map(|r| r.spec.model()).collect();
    assert_eq!(models, ["lfg-dop", "lfg-dop", "tree-dop", "tree-dop"]);
    assert!(report.runs.iter().filter(|r| r.spec.tree_dop).all(|r| r.failures() == 0));
}

#[test]
fn run_experiment_reads_and_writes_files() {
    let dir = std::env::temp_dir().join(format!("lfgdop-harness-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("c.corpus"), crate::samples::SYNTHETIC).unwrap();
    let text = "corpus = c.corpus\nn_splits = 1\nmax_depth = 1\nsearch = viterbi\noutput_dir = out\n";
    let c = ExperimentConfig::parse(text, Some(&dir)).unwrap();
    run_experiment(&c).unwrap();
    for f in ["sentences.csv", "summary.csv", "tables.txt", "timing.txt"] {
        assert!(dir.join("out").join(f).is_file(), "{f}");
    }
    let missing = ExperimentConfig::new(dir.join("absent.corpus"));
    assert!(matches!(run_experiment(&missing), Err(ExperimentError::Io { .. })));
    std::fs::remove_dir_all(&dir).unwrap();
}
