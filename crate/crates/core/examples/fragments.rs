//! Fragment counts of the bundled corpus by depth, with and without
//! Discard, plus every fragment of one short sentence.
//!
//! Run with `cargo run --release --example fragments`.

use lfg_dop::fragmentation::{enumerate_fragments, EnumerationConfig, FragmentMultiset, Provenance};
use lfg_dop::samples::synthetic;

fn main() {
    let corpus = synthetic();
    println!("depth\tdiscard\tdistinct\tRoot/Frontier tokens\tDiscard tokens");
    for depth in 1..=4 {
        for (discard, cap) in [(false, None), (true, Some(8))] {
            let cfg = EnumerationConfig { max_depth: depth, include_discard: discard, protect_pred: false, discard_cap: cap };
            let mut bag = FragmentMultiset::new();
            for e in &corpus.entries {
                bag.merge(enumerate_fragments(&e.repr, &cfg));
            }
            println!(
                "{depth}\t{}\t{}\t{}\t{}",
                if discard { "cap 8" } else { "no" },
                bag.distinct(),
                bag.total_of(Provenance::RootFrontier),
                bag.total_of(Provenance::Discard)
            );
        }
    }

    let entry = corpus.get("s13").expect("bundled entry");
    let words: Vec<&str> = entry.tokens.iter().map(|w| w.as_str()).collect();
    println!("\nfragments of \"{}\":", words.join(" "));
    for (prov, canonical, frag, count) in enumerate_fragments(&entry.repr, &EnumerationConfig::with_discard(2)).iter() {
        println!("{prov}\t{count}\tdepth {}\t{canonical}", frag.depth());
    }
}
