use std::collections::{BTreeMap, BTreeSet};

use super::*;
use crate::harness::parse_corpus;
use crate::lfg::{canonical_form, FValue};
use crate::samples::kim_eats;

const FIG2: &str = "(NP.1 Kim.1) ; 1 -> [(NUM SG) (PRED 'Kim')]";
const FIG3: &str = "(VP.1 eats.1) ; 1 -> [(PRED 'eat<SUBJ>') (SUBJ 2) (TENSE PRES)] ; 2 -> [(NUM SG)]";
const FIG4: &str = "(S.1 NP.2^ (VP.1 eats.1)) ; 1 -> [(PRED 'eat<SUBJ>') (SUBJ 2) (TENSE PRES)] ; 2 -> [(NUM SG)]";

const TOY: &str = "#id: a
#sent: the dog sees Kim
#tree: (S.1 (NP.2 (D.2 the.2) (N.2 dog.2)) (VP.1 (V.1 sees.1) (NP.3 (N.3 Kim.3))))
#fs:
1 -> [(PRED 'see<SUBJ,OBJ>') (TENSE PRES) (SUBJ 2) (OBJ 3)]
2 -> [(PRED 'dog') (NUM SG) (SPEC DEF)]
3 -> [(PRED 'Kim') (NUM SG)]

#id: b
#sent: Kim eats
#tree: (S.1 (NP.2 (N.2 Kim.2)) (VP.1 (V.1 eats.1)))
#fs:
1 -> [(PRED 'eat<SUBJ>') (TENSE PRES) (SUBJ 2)]
2 -> [(PRED 'Kim') (NUM SG)]
";

fn toy() -> Vec<Representation> {
    parse_corpus(TOY).unwrap().entries.into_iter().map(|e| e.repr).collect()
}

fn node(repr: &Representation, cat: &str) -> NodeId {
    repr.tree.preorder().into_iter().find(|&n| repr.tree.node(n).category == cat).unwrap()
}

fn whole(repr: &Representation) -> Fragment {
    root_op(repr, repr.tree.root()).unwrap()
}

#[test]
fn root_at_np_gives_the_bare_noun_phrase() {
    let r = kim_eats();
    assert_eq!(root_op(&r, node(&r, "NP")).unwrap().canonical(), FIG2);
}

#[test]
fn root_at_vp_keeps_subject_agreement_but_not_its_pred() {
    let r = kim_eats();
    assert_eq!(root_op(&r, node(&r, "VP")).unwrap().canonical(), FIG3);
}

#[test]
fn frontier_at_np_erases_the_subject_pred() {
    let r = kim_eats();
    let f = frontier_op(&whole(&r), &[node(&r, "NP")]).unwrap();
    assert_eq!(f.canonical(), FIG4);
}

#[test]
fn frontier_at_both_children() {
    let r = kim_eats();
    let f = frontier_op(&whole(&r), &[node(&r, "NP"), node(&r, "VP")]).unwrap();
    assert_eq!(f.canonical(), "(S.1 NP.2^ VP.1^) ; 1 -> [(SUBJ 2) (TENSE PRES)] ; 2 -> [(NUM SG)]");
}

#[test]
fn root_at_top_and_empty_frontier_are_identities() {
    let r = kim_eats();
    let f = whole(&r);
    assert_eq!(f.canonical(), canonical_form(&r));
    assert_eq!(frontier_op(&f, &[]).unwrap().canonical(), canonical_form(&r));
}

#[test]
fn selection_preconditions() {
    let r = kim_eats();
    let kim = r.tree.preorder().into_iter().find(|&n| r.tree.node(n).is_terminal()).unwrap();
    assert!(matches!(root_op(&r, kim), Err(FragmentError::BadSelection(..))));
    assert!(matches!(root_op(&r, NodeId(99)), Err(FragmentError::Structure(_))));
    let f = whole(&r);
    assert!(matches!(frontier_op(&f, &[f.repr.tree.root()]), Err(FragmentError::BadSelection(..))));
    assert!(matches!(frontier_op(&f, &[kim]), Err(FragmentError::BadSelection(..))));
}

#[test]
fn index_tree_displays_the_compact_notation() {
    let it = index_tree(&kim_eats()).unwrap();
    assert_eq!(
        it.to_string(),
        "(S.1 (NP.2 Kim.2) (VP.1 eats.1))\n1 -> [(SUBJ 2) (TENSE PRES) (PRED 'eat<SUBJ>')]\n2 -> [(PRED 'Kim') (NUM SG)]"
    );
    assert_eq!(canonical_form(&it.to_representation()), canonical_form(&kim_eats()));
}

#[test]
fn unindexed_terminals_inherit_the_parent_index() {
    let c = parse_corpus("#id: x\n#sent: w\n#tree: (X.1 w)\n#fs:\n1 -> [(A B)]\n").unwrap();
    let it = index_tree(&c.entries[0].repr).unwrap();
    assert_eq!(it.index, vec![UnitId(1), UnitId(1)]);
    assert_eq!(it.to_string(), "(X.1 w.1)\n1 -> [(A B)]");
}

fn cands(f: &Fragment, protect: bool) -> BTreeSet<String> {
    discard_candidates(f, protect).into_iter().map(|(_, a)| a.to_string()).collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn discard_candidates_respect_node_correspondence() {
    let r = kim_eats();
    let fig4 = frontier_op(&whole(&r), &[node(&r, "NP")]).unwrap();
    assert_eq!(cands(&fig4, true), set(&["NUM", "TENSE"]));
    assert_eq!(cands(&fig4, false), set(&["NUM", "PRED", "TENSE"]));
    let fig2 = root_op(&r, node(&r, "NP")).unwrap();
    assert_eq!(cands(&fig2, true), set(&["NUM"]));
    let bare = strip_fstructure(&r);
    assert!(discard_candidates(&Fragment { repr: bare, provenance: Provenance::RootFrontier }, false).is_empty());
}

#[test]
fn discard_op_examples() {
    let r = kim_eats();
    let fig4 = frontier_op(&whole(&r), &[node(&r, "NP")]).unwrap();
    let outer = r.phi(r.tree.root()).unwrap();
    let d = discard_op(&fig4, &[(outer, Sym::new("TENSE"))], false).unwrap();
    assert_eq!(d.provenance, Provenance::Discard);
    assert_eq!(d.canonical(), "(S.1 NP.2^ (VP.1 eats.1)) ; 1 -> [(PRED 'eat<SUBJ>') (SUBJ 2)] ; 2 -> [(NUM SG)]");

    let fig2 = root_op(&r, node(&r, "NP")).unwrap();
    let kim = fig2.repr.phi(fig2.repr.tree.root()).unwrap();
    let d = discard_op(&fig2, &[(kim, Sym::new("NUM"))], true).unwrap();
    assert_eq!(d.canonical(), "(NP.1 Kim.1) ; 1 -> [(PRED 'Kim')]");

    assert_eq!(discard_op(&fig2, &[], false), Err(FragmentError::EmptyDiscard));
    assert!(matches!(discard_op(&fig2, &[(kim, Sym::new("PRED"))], true), Err(FragmentError::ProtectedPair(..))));
    assert!(matches!(
        discard_op(&fig4, &[(outer, Sym::new("SUBJ"))], false),
        Err(FragmentError::ProtectedPair(..))
    ));
}

#[test]
fn kim_eats_counts() {
    let r = kim_eats();
    assert_eq!(enumerate_fragments(&r, &EnumerationConfig::without_discard(4)).total(), 6);
    let shallow = enumerate_fragments(&r, &EnumerationConfig::without_discard(1));
    assert_eq!(shallow.total(), 3);
    for (.., f, _) in shallow.iter() {
        assert_eq!(f.depth(), 1);
    }
}

/// Fragments built straight from the definition: every subset of internal
/// nodes below the root is tried as a frontier, keeping antichains only.
fn oracle_rf(repr: &Representation, max_depth: usize) -> Vec<Fragment> {
    let tree = &repr.tree;
    let parents = tree.parents();
    let dominates = |a: NodeId, mut b: NodeId| {
        while let Some(p) = parents[b.index()] {
            if p == a {
                return true;
            }
            b = p;
        }
        false
    };
    let mut out = Vec::new();
    for r in tree.preorder() {
        if !tree.node(r).is_internal() {
            continue;
        }
        let below: Vec<NodeId> = tree.subtree(r).into_iter().filter(|&n| n != r && tree.node(n).is_internal()).collect();
        for mask in 0u64..(1 << below.len()) {
            let chosen: Vec<NodeId> = (0..below.len()).filter(|i| mask >> i & 1 == 1).map(|i| below[i]).collect();
            if chosen.iter().any(|&a| chosen.iter().any(|&b| a != b && dominates(a, b))) {
                continue;
            }
            let f = frontier_op(&root_op(repr, r).unwrap(), &renumber(tree, r, &chosen)).unwrap();
            if f.depth() <= max_depth {
                out.push(f);
            }
        }
    }
    out
}

/// Maps nodes under `r` to their ids in the copy made by `root_op`.
fn renumber(tree: &CTree, r: NodeId, nodes: &[NodeId]) -> Vec<NodeId> {
    let order = tree.subtree(r);
    nodes.iter().map(|n| NodeId(order.iter().position(|m| m == n).unwrap() as u32)).collect()
}

/// Every deletable pair subset, checked against the definition directly.
fn oracle_discard(f: &Fragment, protect: bool) -> Vec<Fragment> {
    let r = &f.repr;
    let linked: BTreeSet<UnitId> = r.phi.values().copied().collect();
    let mut pairs = Vec::new();
    for (u, unit) in r.fs.iter() {
        for (a, v) in unit.pairs() {
            let to_node = matches!(v, FValue::Unit(t) if linked.contains(t));
            if !to_node && !(protect && a.as_str() == "PRED") {
                pairs.push((u, a.clone()));
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u64..(1 << pairs.len()) {
        let mut repr = r.clone();
        for (i, (u, a)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                repr.fs.get_mut(*u).unwrap().remove(a.as_str());
            }
        }
        let live = repr.fs.reachable_from(linked.iter().copied());
        repr.fs.restrict(&live);
        let g = Fragment { repr, provenance: Provenance::Discard };
        if seen.insert(g.canonical()) {
            out.push(g);
        }
    }
    out
}

fn tally(frags: impl IntoIterator<Item = Fragment>) -> BTreeMap<(Provenance, String), u64> {
    let mut m = BTreeMap::new();
    for f in frags {
        *m.entry((f.provenance, f.canonical())).or_insert(0) += 1;
    }
    m
}

fn tally_multiset(m: &FragmentMultiset) -> BTreeMap<(Provenance, String), u64> {
    m.iter().map(|(p, k, _, c)| ((p, k.to_string()), c)).collect()
}

#[test]
fn enumeration_matches_the_brute_force_decomposer() {
    let mut reprs = toy();
    reprs.push(kim_eats());
    for r in &reprs {
        for depth in 1..=4 {
            let got = enumerate_fragments(r, &EnumerationConfig::without_discard(depth));
            assert_eq!(tally_multiset(&got), tally(oracle_rf(r, depth)), "depth {depth}");
        }
    }
}

#[test]
fn discard_enumeration_matches_the_brute_force_decomposer() {
    let mut reprs = toy();
    reprs.push(kim_eats());
    for r in &reprs {
        for protect in [false, true] {
            let cfg = EnumerationConfig { protect_pred: protect, ..EnumerationConfig::with_discard(3) };
            let got = enumerate_fragments(r, &cfg);
            let rf = oracle_rf(r, 3);
            let mut want = rf.clone();
            for f in &rf {
                want.extend(oracle_discard(f, protect));
            }
            assert_eq!(tally_multiset(&got), tally(want), "protect {protect}");
        }
    }
}

fn tree_dop_count(tree: &CTree, n: NodeId) -> u64 {
    tree.node(n)
        .children
        .iter()
        .map(|&c| if tree.node(c).is_internal() { 1 + tree_dop_count(tree, c) } else { 1 })
        .product()
}

#[test]
fn counts_match_the_tree_only_subtree_formula() {
    for r in toy() {
        let want: u64 = r.tree.preorder().into_iter().filter(|&n| r.tree.node(n).is_internal()).map(|n| tree_dop_count(&r.tree, n)).sum();
        assert_eq!(enumerate_fragments(&r, &EnumerationConfig::without_discard(usize::MAX)).total(), want);
    }
}

#[test]
fn generated_fragments_satisfy_the_invariants() {
    for r in toy() {
        let all = enumerate_fragments(&r, &EnumerationConfig::with_discard(4));
        for (.., f, _) in all.iter() {
            f.check_invariants().unwrap();
            assert!(f.depth() <= 4);
        }
    }
}

#[test]
fn root_then_frontier_commutes_with_direct_extraction() {
    for r in toy() {
        for root in r.tree.preorder() {
            if !r.tree.node(root).is_internal() {
                continue;
            }
            for set in frontier_sets(&r.tree, root, 3) {
                let direct = extract(&r, root, &set.iter().copied().collect());
                let stepwise = frontier_op(&root_op(&r, root).unwrap(), &renumber(&r.tree, root, &set)).unwrap();
                assert_eq!(canonical_form(&direct), stepwise.canonical());
            }
        }
    }
}

#[test]
fn discard_generalizations_subsume_their_source() {
    for r in toy() {
        for root in r.tree.preorder().into_iter().filter(|&n| r.tree.node(n).is_internal()) {
            let src = root_op(&r, root).unwrap();
            for g in discard_generalizations(&src, false, None) {
                let offset = src.repr.fs.next_id();
                let mut store = src.repr.fs.clone();
                store.absorb(g.repr.fs.map_ids(|u| UnitId(u.0 + offset)));
                let a = src.repr.phi(src.repr.tree.root()).unwrap();
                let b = UnitId(g.repr.phi(g.repr.tree.root()).unwrap().0 + offset);
                let unified = store.unify(a, b).expect("generalization unifies with its source");
                let live = unified.store.reachable_from([unified.resolve(a)]);
                assert_eq!(live.len(), src.repr.fs.len());
            }
        }
    }
}

#[test]
fn discard_cap_takes_smallest_deletions_first() {
    let r = kim_eats();
    let src = whole(&r);
    let m = discard_candidates(&src, false).len();
    let capped = discard_generalizations(&src, false, Some(m));
    assert_eq!(capped.len(), m);
    for g in &capped {
        let removed = src.repr.fs.iter().map(|(_, u)| u.len()).sum::<usize>() - g.repr.fs.iter().map(|(_, u)| u.len()).sum::<usize>();
        assert_eq!(removed, 1);
    }
}

#[test]
fn multiset_merge_adds_counts() {
    let r = kim_eats();
    let mut a = enumerate_fragments(&r, &EnumerationConfig::without_discard(4));
    let b = enumerate_fragments(&r, &EnumerationConfig::without_discard(4));
    a.merge(b);
    assert_eq!(a.total(), 12);
    assert_eq!(a.distinct(), 6);
    assert_eq!(a.count(Provenance::RootFrontier, FIG2), 2);
}
