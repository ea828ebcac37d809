//! A small experiment grid over the bundled corpus: depths 1 and 2, both
//! searches, five splits. Prints the tables the CLI prints.
//!
//! Run with `cargo run --release --example experiment`.

use lfg_dop::harness::{run_experiment_on, ExperimentConfig};
use lfg_dop::samples::synthetic;

fn main() {
    let text = "corpus = unused\nn_splits = 5\nmax_depth = 1..2\nsearch = mc, viterbi\nmax_samples = 2000\n";
    let config = ExperimentConfig::parse(text, None).expect("valid configuration");
    let report = run_experiment_on(&config, &synthetic()).expect("experiment runs");
    print!("{}", report.render_tables());
    println!("{}", report.timing_table());
    print!("{}", report.summary_csv().expect("csv"));
}
