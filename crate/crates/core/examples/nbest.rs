//! The most probable derivations of a sentence, before and after replaying
//! them through unification.
//!
//! Run with `cargo run --release --example nbest`.

use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig, FragmentMultiset};
use lfg_dop::parsing::{build_chart, viterbi_nbest, viterbi_parse, DecodeOptions, Decoder, ViterbiOptions};
use lfg_dop::probability::{build_bank, Estimator};
use lfg_dop::samples::synthetic;
use lfg_dop::Sym;

fn main() {
    let mut bag = FragmentMultiset::new();
    for e in &synthetic().entries {
        bag.merge(enumerate_fragments(&e.repr, &EnumerationConfig::without_discard(3)));
    }
    let bank = build_bank(&bag, Estimator::DiscountedRf).expect("non-empty");
    let tokens: Vec<Sym> = "Kim likes the dogs that Max sees".split_whitespace().map(Sym::new).collect();
    let chart = build_chart(&tokens, &bank, "S").expect("sentence is covered");
    println!("{} chart items, {} derivations in the forest", chart.items().len(), chart.derivation_count(&bank));

    for (rank, d) in viterbi_nbest(&chart, &bank, 5).iter().enumerate() {
        // Variants sharing a tree differ in their f-structure, so the id is shown too.
        let fragments: Vec<String> = d
            .steps
            .iter()
            .map(|s| format!("#{} {}", s.variant.0, bank.entry(s.variant).canonical.split(" ; ").next().unwrap_or("")))
            .collect();
        println!("#{} ln p = {:.3}: {}", rank + 1, d.score, fragments.join(" + "));
    }

    let options = DecodeOptions::default();
    let decoder = Decoder::new(&bank, &chart, &options);
    for rescore in [false, true] {
        let r = viterbi_parse(&decoder, &ViterbiOptions { n: 100, rescore }).expect("some derivation is valid");
        println!(
            "\nrescore {rescore}: {} extracted, {} invalid, {} incomplete, {} analyses",
            r.extracted,
            r.invalid,
            r.incomplete,
            r.analyses.len()
        );
        for a in r.analyses.iter().take(3) {
            println!("  {:.4e}  {}", a.probability(), a.canonical);
        }
    }
}
