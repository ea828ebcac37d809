//! Decomposes the analysis of "Kim eats" with Root and Frontier, then
//! recombines two of the fragments.
//!
//! Run with `cargo run --example figures`.

use lfg_dop::fragmentation::{frontier_op, root_op, Fragment};
use lfg_dop::lfg::{canonical_form, NodeId};
use lfg_dop::parsing::{compose, SubAnalysis};
use lfg_dop::samples::kim_eats;
use lfg_dop::{GovernableFunctions, Representation};

fn node(repr: &Representation, category: &str) -> NodeId {
    repr.tree.preorder().into_iter().find(|&n| repr.tree.node(n).category == category).expect("category occurs")
}

fn main() {
    let analysis = kim_eats();
    println!("analysis      {}", canonical_form(&analysis));

    // Root keeps the units reachable from the new root and drops semantic
    // forms owned by erased words.
    let subject = root_op(&analysis, node(&analysis, "NP")).expect("NP is a node");
    let predicate = root_op(&analysis, node(&analysis, "VP")).expect("VP is a node");
    println!("root at NP    {}", subject.canonical());
    println!("root at VP    {}", predicate.canonical());

    let whole: Fragment = root_op(&analysis, analysis.tree.root()).expect("root node");
    let open = frontier_op(&whole, &[node(&analysis, "NP")]).expect("NP is not the root");
    println!("frontier NP   {}", open.canonical());

    let gov = GovernableFunctions::default();
    let rebuilt = compose(&SubAnalysis::from_fragment(&open), &subject, &gov).expect("the subject fits the open slot");
    let rebuilt = rebuilt.to_representation().expect("no open slots remain");
    println!("recombined    {}", canonical_form(&rebuilt));
    assert_eq!(canonical_form(&rebuilt), canonical_form(&analysis));
}
