//! Scoring proposed analyses against gold ones.
//!
//! Constituents are internal c-structure nodes that do not directly
//! dominate only words, so the root counts and preterminals do not. A
//! proposed constituent is correct when an unused gold constituent has the
//! same label and span (and, for full LFG scoring, an equal f-structure
//! under the φ-mapping). Gold constituents are consumed at most once.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::lfg::{canonical_form, tree_form, CTree, FStore, FValue, NodeId, Representation, UnitId};
use crate::symbol::Sym;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("proposed words '{proposed}' differ from gold words '{gold}'")]
    TokenMismatch { proposed: String, gold: String },
    #[error("csv output failed: {0}")]
    Csv(String),
}

/// What must agree for a constituent or an exact match to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum EvalMode {
    /// Trees and f-structures.
    #[default]
    Full,
    /// Trees only.
    Tree,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Full => "full",
            EvalMode::Tree => "tree",
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(EvalMode::Full),
            "tree" | "tree-only" => Ok(EvalMode::Tree),
            other => Err(format!("unknown evaluation mode '{other}' (expected full or tree)")),
        }
    }
}

/// Structural equality of unit `a` in `sa` and unit `b` in `sb`, ignoring
/// unit ids and semantic form instances. Revisited pairs are assumed equal,
/// which is sound for re-entrant structures.
pub fn fstructure_equal(sa: &FStore, a: UnitId, sb: &FStore, b: UnitId) -> bool {
    fn go(sa: &FStore, a: UnitId, sb: &FStore, b: UnitId, seen: &mut HashSet<(UnitId, UnitId)>) -> bool {
        if !seen.insert((a, b)) {
            return true;
        }
        let (Some(ua), Some(ub)) = (sa.get(a), sb.get(b)) else {
            return sa.get(a).is_none() && sb.get(b).is_none();
        };
        if ua.len() != ub.len() {
            return false;
        }
        ua.pairs().iter().all(|(attr, va)| {
            let Some(vb) = ub.get(attr.as_str()) else { return false };
            match (va, vb) {
                (FValue::Atom(x), FValue::Atom(y)) => x == y,
                (FValue::Sem(x), FValue::Sem(y)) => x.same_content(y),
                (FValue::Unit(x), FValue::Unit(y)) => go(sa, *x, sb, *y, seen),
                _ => false,
            }
        })
    }
    go(sa, a, sb, b, &mut HashSet::new())
}

/// Per-sentence constituent counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Counts {
    pub correct: usize,
    pub proposed: usize,
    pub gold: usize,
}

struct Constituent {
    node: NodeId,
    label: Sym,
    span: (usize, usize),
}

/// Scored constituents in left-to-right order: by start, then widest first.
fn constituents(tree: &CTree) -> Vec<Constituent> {
    let spans = tree.spans();
    let mut out: Vec<Constituent> = tree
        .preorder()
        .into_iter()
        .filter(|&n| {
            let node = tree.node(n);
            node.is_internal() && !node.children.iter().all(|&c| tree.node(c).is_terminal())
        })
        .map(|n| Constituent { node: n, label: tree.node(n).category.clone(), span: spans[n.index()] })
        .collect();
    out.sort_by(|a, b| a.span.0.cmp(&b.span.0).then(b.span.1.cmp(&a.span.1)));
    out
}

pub fn constituent_count(tree: &CTree) -> usize {
    constituents(tree).len()
}

fn same_words(proposed: &CTree, gold: &CTree) -> Result<(), EvalError> {
    let (p, g) = (proposed.words(), gold.words());
    if p != g {
        let join = |w: &[Sym]| w.iter().map(Sym::as_str).collect::<Vec<_>>().join(" ");
        return Err(EvalError::TokenMismatch { proposed: join(&p), gold: join(&g) });
    }
    Ok(())
}

fn score_with(proposed: &CTree, gold: &CTree, matches: impl Fn(NodeId, NodeId) -> bool) -> Counts {
    let p = constituents(proposed);
    let g = constituents(gold);
    let mut used = vec![false; g.len()];
    let mut correct = 0;
    for c in &p {
        let hit = g
            .iter()
            .enumerate()
            .find(|(i, t)| !used[*i] && t.label == c.label && t.span == c.span && matches(c.node, t.node));
        if let Some((i, _)) = hit {
            used[i] = true;
            correct += 1;
        }
    }
    Counts { correct, proposed: p.len(), gold: g.len() }
}

/// Labelled bracket scoring that also requires equal f-structures.
pub fn score_lfg(proposed: &Representation, gold: &Representation) -> Result<Counts, EvalError> {
    same_words(&proposed.tree, &gold.tree)?;
    Ok(score_with(&proposed.tree, &gold.tree, |pn, gn| match (proposed.phi(pn), gold.phi(gn)) {
        (Some(a), Some(b)) => fstructure_equal(&proposed.fs, a, &gold.fs, b),
        (None, None) => true,
        _ => false,
    }))
}

/// Labelled bracket scoring on trees alone.
pub fn score_tree(proposed: &CTree, gold: &CTree) -> Result<Counts, EvalError> {
    same_words(proposed, gold)?;
    Ok(score_with(proposed, gold, |_, _| true))
}

pub fn score(proposed: &Representation, gold: &Representation, mode: EvalMode) -> Result<Counts, EvalError> {
    match mode {
        EvalMode::Full => score_lfg(proposed, gold),
        EvalMode::Tree => score_tree(&proposed.tree, &gold.tree),
    }
}

pub fn exact_match(proposed: &Representation, gold: &Representation, mode: EvalMode) -> bool {
    match mode {
        EvalMode::Full => canonical_form(proposed) == canonical_form(gold),
        EvalMode::Tree => tree_form(&proposed.tree) == tree_form(&gold.tree),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceScore {
    pub id: String,
    pub exact: bool,
    pub counts: Counts,
}

impl SentenceScore {
    /// Scores one proposed analysis; `None` stands for a failed parse and
    /// earns nothing.
    pub fn new(id: impl Into<String>, proposed: Option<&Representation>, gold: &Representation, mode: EvalMode) -> Result<Self, EvalError> {
        let id = id.into();
        match proposed {
            Some(p) => Ok(SentenceScore { id, exact: exact_match(p, gold, mode), counts: score(p, gold, mode)? }),
            None => Ok(SentenceScore { id, exact: false, counts: Counts { correct: 0, proposed: 0, gold: constituent_count(&gold.tree) } }),
        }
    }
}

/// Micro-averaged scores over a set of sentences.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScoreReport {
    pub exact_match: f64,
    pub precision: f64,
    pub recall: f64,
    pub sentences: Vec<SentenceScore>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ScoreReport {
    pub fn from_sentences(sentences: Vec<SentenceScore>) -> Self {
        let sum = |f: fn(&Counts) -> usize| sentences.iter().map(|s| f(&s.counts)).sum::<usize>();
        let (correct, proposed, gold) = (sum(|c| c.correct), sum(|c| c.proposed), sum(|c| c.gold));
        ScoreReport {
            exact_match: ratio(sentences.iter().filter(|s| s.exact).count(), sentences.len()),
            precision: ratio(correct, proposed),
            recall: ratio(correct, gold),
            sentences,
        }
    }

    /// One row per sentence: id, exact (0/1), correct, proposed, gold.
    pub fn to_csv(&self) -> Result<String, EvalError> {
        let err = |e: csv::Error| EvalError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sentence", "exact", "correct", "proposed", "gold"]).map_err(err)?;
        for s in &self.sentences {
            let c = s.counts;
            w.write_record([s.id.clone(), u8::from(s.exact).to_string(), c.correct.to_string(), c.proposed.to_string(), c.gold.to_string()])
                .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| EvalError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Mean of each metric across reports, e.g. one per train/test split.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MeanScores {
    pub exact_match: f64,
    pub precision: f64,
    pub recall: f64,
}

impl MeanScores {
    pub fn of(reports: &[ScoreReport]) -> Self {
        let n = reports.len().max(1) as f64;
        MeanScores {
            exact_match: reports.iter().map(|r| r.exact_match).sum::<f64>() / n,
            precision: reports.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: reports.iter().map(|r| r.recall).sum::<f64>() / n,
        }
    }
}

pub fn percent(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

/// Tab-separated plain text table with an optional caption.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TextTable {
    pub header: Vec<Vec<String>>,
    pub rows: Vec<Vec<String>>,
    pub caption: Option<String>,
}

impl fmt::Display for TextTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.header.iter().chain(&self.rows) {
            writeln!(f, "{}", line.join("\t"))?;
        }
        if let Some(c) = &self.caption {
            writeln!(f)?;
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
