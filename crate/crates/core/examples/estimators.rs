//! The two estimators on one fragment bank. Without Discard fragments they
//! coincide; with them, the discounted estimator hands the Discard bag only
//! the share of Root/Frontier singletons.
//!
//! Run with `cargo run --example estimators`.

use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig, FragmentMultiset, Provenance};
use lfg_dop::probability::{build_bank, Estimator, FragmentBank};
use lfg_dop::samples::pp_attachment;

fn mass(bank: &FragmentBank, provenance: Provenance) -> f64 {
    bank.ids().filter(|&id| bank.fragment(id).provenance == provenance).fold(0.0, |acc, id| acc + bank.probability(id))
}

fn main() {
    let corpus = pp_attachment();
    for cfg in [EnumerationConfig::without_discard(3), EnumerationConfig::with_discard(3)] {
        let mut bag = FragmentMultiset::new();
        for e in &corpus.entries {
            bag.merge(enumerate_fragments(&e.repr, &cfg));
        }
        let simple = build_bank(&bag, Estimator::SimpleRf).expect("non-empty");
        let discounted = simple.with_estimator(Estimator::DiscountedRf);
        println!(
            "{} Discard: N = {}, n1 = {}, Discard tokens = {}",
            if cfg.include_discard { "with" } else { "without" },
            simple.n(),
            simple.n1(),
            simple.discard_total()
        );
        for bank in [&simple, &discounted] {
            println!(
                "  {:<10} Root/Frontier mass {:.4}  Discard mass {:.4}",
                bank.estimator().name(),
                mass(bank, Provenance::RootFrontier),
                mass(bank, Provenance::Discard)
            );
        }
        let mut ids: Vec<_> = simple.ids().collect();
        ids.sort_by(|a, b| simple.probability(*b).total_cmp(&simple.probability(*a)));
        for &id in ids.iter().take(3) {
            let e = simple.entry(id);
            println!("  {:.5} vs {:.5}  {}", simple.probability(id), discounted.probability(id), e.canonical);
        }
    }
}
