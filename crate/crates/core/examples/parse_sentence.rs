//! Trains on the bundled corpus and analyses one sentence with each of the
//! three decoders.
//!
//! Run with `cargo run --release --example parse_sentence -- [sentence]`.

use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig, FragmentMultiset};
use lfg_dop::harness::{failure_tag, parse_tokens, Search};
use lfg_dop::parsing::{DecodeOptions, McOptions, ViterbiOptions};
use lfg_dop::probability::{build_bank, Estimator};
use lfg_dop::samples::synthetic;
use lfg_dop::Sym;

fn main() {
    let sentence = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let sentence = if sentence.is_empty() { "Max sees a dog with a telescope".to_string() } else { sentence };
    let tokens: Vec<Sym> = sentence.split_whitespace().map(Sym::new).collect();

    let mut bag = FragmentMultiset::new();
    for e in &synthetic().entries {
        bag.merge(enumerate_fragments(&e.repr, &EnumerationConfig::without_discard(2)));
    }
    let bank = build_bank(&bag, Estimator::DiscountedRf).expect("non-empty");
    println!("{} fragments; parsing \"{sentence}\"", bank.len());

    let searches = [
        ("monte carlo", Search::Mc(McOptions::default())),
        ("viterbi 100", Search::Viterbi(ViterbiOptions::default())),
        ("exhaustive", Search::Brute { guard: 200_000 }),
    ];
    for (name, search) in searches {
        let outcome = parse_tokens(&bank, &tokens, &search, &DecodeOptions::default());
        match outcome.result {
            Ok(a) => println!("{name:<12} p = {:.4e} after {} composes\n  {}", a.probability(), outcome.composes, a.canonical),
            Err(e) => println!("{name:<12} failed ({}): {e}", failure_tag(&e)),
        }
    }
}
