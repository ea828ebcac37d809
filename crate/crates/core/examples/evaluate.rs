//! Scores parses against gold analyses: labelled constituents carry their
//! f-structure in full mode, and only the category in tree mode.
//!
//! Run with `cargo run --release --example evaluate`.

use lfg_dop::evaluation::{percent, score, EvalMode, ScoreReport, SentenceScore};
use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig, FragmentMultiset};
use lfg_dop::harness::{derive_seed, parse_tokens, split_corpus, Search};
use lfg_dop::parsing::{DecodeOptions, McOptions};
use lfg_dop::probability::{build_bank, Estimator};
use lfg_dop::samples::synthetic;

fn main() {
    let (train, test) = split_corpus(&synthetic(), 0.8, derive_seed(0, 0)).expect("corpus splits");
    let mut bag = FragmentMultiset::new();
    for e in &train.entries {
        bag.merge(enumerate_fragments(&e.repr, &EnumerationConfig::without_discard(4)));
    }
    let bank = build_bank(&bag, Estimator::DiscountedRf).expect("non-empty");

    for mode in [EvalMode::Full, EvalMode::Tree] {
        let mut sentences = Vec::new();
        for (j, e) in test.entries.iter().enumerate() {
            let search = Search::Mc(McOptions { seed: j as u64, ..McOptions::default() });
            let parsed = parse_tokens(&bank, &e.tokens, &search, &DecodeOptions::default()).result.ok();
            let proposed = parsed.as_ref().map(|a| &a.repr);
            if mode == EvalMode::Full {
                match proposed.map(|p| score(p, &e.repr, mode).expect("same words")) {
                    Some(c) => println!("{}\t{} of {} proposed constituents correct, {} gold", e.id, c.correct, c.proposed, c.gold),
                    None => println!("{}\tno parse", e.id),
                }
            }
            sentences.push(SentenceScore::new(e.id.clone(), proposed, &e.repr, mode).expect("same words"));
        }
        let report = ScoreReport::from_sentences(sentences);
        println!(
            "{mode}: exact match {}, precision {}, recall {}\n",
            percent(report.exact_match),
            percent(report.precision),
            percent(report.recall)
        );
    }
}
