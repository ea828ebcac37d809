//! Reads annotated entries and reports which well-formedness condition an
//! ill-formed one breaks.
//!
//! Run with `cargo run --example validate`.

use lfg_dop::harness::parse_corpus;
use lfg_dop::samples::KIM_EATS;

fn main() {
    let good = parse_corpus(KIM_EATS).expect("sample is valid");
    println!("{} entry, words {:?}", good.len(), good.vocabulary());

    let broken = [
        ("missing subject", KIM_EATS.replace("(SUBJ 2) ", "")),
        ("ungoverned object", KIM_EATS.replace("(SUBJ 2)", "(SUBJ 2) (OBJ 2)")),
        ("repeated attribute", KIM_EATS.replace("(NUM SG)", "(NUM SG) (NUM PL)")),
        ("wrong sentence", KIM_EATS.replace("#sent: Kim eats", "#sent: Kim sleeps")),
    ];
    for (what, text) in broken {
        match parse_corpus(&text) {
            Ok(_) => println!("{what}: accepted"),
            Err(e) => println!("{what}: {e}"),
        }
    }
}
