//! Text notation for indexed trees and unit definitions.
//!
//! ```text
//! (S.1 (NP.2 Kim.2) (VP.1 eats.1))
//! 1 -> [(SUBJ 2) (TENSE PRES) (PRED 'eat<SUBJ>')]
//! 2 -> [(PRED 'Kim') (NUM SG)]
//! ```
//!
//! Slot nodes are written `CAT.IDX^`. The single-line form produced by
//! [`canonical_form`](crate::lfg::canonical_form) separates unit
//! definitions with `;` and is read back by [`parse_structure_line`].

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::lfg::{
    canonical_unit_order, CNode, CTree, FStore, FUnit, FValue, InstanceMint, NodeId, NodeKind, Representation,
    SemForm, StructureError, UnitId,
};
use crate::symbol::Sym;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NotationError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("dangling index {0}: no unit definition")]
    DanglingIndex(u32),
    #[error("unit {0} defined twice")]
    DuplicateUnit(u32),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Semi,
    Quoted(String),
    Bare(String),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn syntax(column: usize, message: impl Into<String>) -> NotationError {
    NotationError::Syntax { column, message: message.into() }
}

impl Lexer {
    fn new(src: &str) -> Result<Self, NotationError> {
        let chars: Vec<(usize, char)> = src.char_indices().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let (col, c) = chars[i];
            match c {
                c if c.is_whitespace() => i += 1,
                '(' => {
                    toks.push((col + 1, Tok::LParen));
                    i += 1
                }
                ')' => {
                    toks.push((col + 1, Tok::RParen));
                    i += 1
                }
                '[' => {
                    toks.push((col + 1, Tok::LBracket));
                    i += 1
                }
                ']' => {
                    toks.push((col + 1, Tok::RBracket));
                    i += 1
                }
                ';' => {
                    toks.push((col + 1, Tok::Semi));
                    i += 1
                }
                '-' if chars.get(i + 1).map(|p| p.1) == Some('>') => {
                    toks.push((col + 1, Tok::Arrow));
                    i += 2
                }
                '\'' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < chars.len() && chars[j].1 != '\'' {
                        j += 1;
                    }
                    if j == chars.len() {
                        return Err(syntax(col + 1, "unterminated semantic form"));
                    }
                    toks.push((col + 1, Tok::Quoted(chars[start..j].iter().map(|p| p.1).collect())));
                    i = j + 1;
                }
                _ => {
                    let start = i;
                    while i < chars.len() {
                        let c = chars[i].1;
                        if c.is_whitespace() || "()[];'".contains(c) {
                            break;
                        }
                        if c == '-' && chars.get(i + 1).map(|p| p.1) == Some('>') {
                            break;
                        }
                        i += 1;
                    }
                    toks.push((col + 1, Tok::Bare(chars[start..i].iter().map(|p| p.1).collect())));
                }
            }
        }
        Ok(Lexer { toks, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or_else(|| self.toks.last().map_or(1, |t| t.0 + 1), |t| t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), NotationError> {
        let col = self.column();
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(syntax(col, format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// A parsed value before unit ids are resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawValue {
    Atom(Sym),
    Index(u32),
    Sem { pred: Sym, governed: Vec<Sym> },
}

/// Tree plus unit definitions exactly as written, with file-level indices.
#[derive(Clone, Debug)]
pub struct RawStructure {
    pub tree: CTree,
    pub index: Vec<Option<u32>>,
    pub units: Vec<(u32, Vec<(Sym, RawValue)>)>,
}

/// Splits `Kim.2` / `NP.2^` into label, index and slot marker.
fn parse_label(raw: &str, column: usize) -> Result<(Sym, Option<u32>, bool), NotationError> {
    let (raw, slot) = match raw.strip_suffix('^') {
        Some(r) => (r, true),
        None => (raw, false),
    };
    let (label, index) = match raw.rfind('.') {
        Some(dot) if dot > 0 && dot + 1 < raw.len() && raw[dot + 1..].bytes().all(|b| b.is_ascii_digit()) => {
            let idx = raw[dot + 1..].parse().map_err(|_| syntax(column, "index out of range"))?;
            (&raw[..dot], Some(idx))
        }
        _ => (raw, None),
    };
    if label.is_empty() {
        return Err(syntax(column, "empty label"));
    }
    Ok((Sym::new(label), index, slot))
}

fn parse_tree_tokens(lx: &mut Lexer) -> Result<(CTree, Vec<Option<u32>>), NotationError> {
    let mut nodes: Vec<CNode> = Vec::new();
    let mut index: Vec<Option<u32>> = Vec::new();

    fn go(lx: &mut Lexer, nodes: &mut Vec<CNode>, index: &mut Vec<Option<u32>>) -> Result<NodeId, NotationError> {
        let col = lx.column();
        match lx.next() {
            Some(Tok::LParen) => {
                let col = lx.column();
                let Some(Tok::Bare(label)) = lx.next() else {
                    return Err(syntax(col, "expected category label"));
                };
                let (cat, idx, slot) = parse_label(&label, col)?;
                if slot {
                    return Err(syntax(col, "slot marker on an internal node"));
                }
                let id = NodeId(nodes.len() as u32);
                nodes.push(CNode::internal(cat, Vec::new()));
                index.push(idx);
                let mut children = Vec::new();
                loop {
                    match lx.peek() {
                        Some(Tok::RParen) => {
                            lx.next();
                            break;
                        }
                        Some(_) => children.push(go(lx, nodes, index)?),
                        None => return Err(syntax(lx.column(), "unbalanced parenthesis")),
                    }
                }
                if children.is_empty() {
                    return Err(syntax(col, "constituent without daughters"));
                }
                nodes[id.index()].children = children;
                Ok(id)
            }
            Some(Tok::Bare(label)) => {
                let (sym, idx, slot) = parse_label(&label, col)?;
                let id = NodeId(nodes.len() as u32);
                nodes.push(if slot { CNode::slot(sym) } else { CNode::terminal(sym) });
                index.push(idx);
                Ok(id)
            }
            _ => Err(syntax(col, "expected '(' or a word")),
        }
    }

    let root = go(lx, &mut nodes, &mut index)?;
    Ok((CTree::new(nodes, root)?, index))
}

fn parse_value(lx: &mut Lexer) -> Result<RawValue, NotationError> {
    let col = lx.column();
    match lx.next() {
        Some(Tok::Bare(b)) if b.bytes().all(|c| c.is_ascii_digit()) => {
            Ok(RawValue::Index(b.parse().map_err(|_| syntax(col, "index out of range"))?))
        }
        Some(Tok::Bare(b)) => Ok(RawValue::Atom(Sym::from(b))),
        Some(Tok::Quoted(q)) => parse_semform(&q, col),
        _ => Err(syntax(col, "expected a value")),
    }
}

fn parse_semform(q: &str, col: usize) -> Result<RawValue, NotationError> {
    let q = q.trim();
    match q.find('<') {
        None => {
            if q.is_empty() || q.contains('>') {
                return Err(syntax(col, "malformed semantic form"));
            }
            Ok(RawValue::Sem { pred: Sym::new(q), governed: Vec::new() })
        }
        Some(lt) => {
            let inner = q[lt + 1..].strip_suffix('>').ok_or_else(|| syntax(col, "semantic form missing '>'"))?;
            let pred = q[..lt].trim();
            let governed: Vec<Sym> = inner.split(',').map(|s| Sym::new(s.trim())).collect();
            if pred.is_empty() || governed.iter().any(|g| g.as_str().is_empty()) {
                return Err(syntax(col, "malformed semantic form"));
            }
            Ok(RawValue::Sem { pred: Sym::new(pred), governed })
        }
    }
}

fn parse_unitdef_tokens(lx: &mut Lexer) -> Result<(u32, Vec<(Sym, RawValue)>), NotationError> {
    let col = lx.column();
    let id = match lx.next() {
        Some(Tok::Bare(b)) if b.bytes().all(|c| c.is_ascii_digit()) => {
            b.parse().map_err(|_| syntax(col, "index out of range"))?
        }
        _ => return Err(syntax(col, "expected unit index")),
    };
    lx.expect(Tok::Arrow, "'->'")?;
    lx.expect(Tok::LBracket, "'['")?;
    let mut pairs = Vec::new();
    loop {
        match lx.peek() {
            Some(Tok::RBracket) => {
                lx.next();
                break;
            }
            Some(Tok::LParen) => {
                lx.next();
                let col = lx.column();
                let Some(Tok::Bare(attr)) = lx.next() else {
                    return Err(syntax(col, "expected attribute"));
                };
                let value = parse_value(lx)?;
                lx.expect(Tok::RParen, "')'")?;
                pairs.push((Sym::from(attr), value));
            }
            _ => return Err(syntax(lx.column(), "expected '(' or ']'")),
        }
    }
    Ok((id, pairs))
}

/// Parses an indexed tree such as `(S.1 (NP.2 Kim.2) (VP.1 eats.1))`.
pub fn parse_itree(src: &str) -> Result<(CTree, Vec<Option<u32>>), NotationError> {
    let mut lx = Lexer::new(src)?;
    let out = parse_tree_tokens(&mut lx)?;
    if !lx.at_end() {
        return Err(syntax(lx.column(), "trailing input after tree"));
    }
    Ok(out)
}

/// Parses one `IDX -> [(ATTR val) ...]` line.
pub fn parse_unitdef(src: &str) -> Result<(u32, Vec<(Sym, RawValue)>), NotationError> {
    let mut lx = Lexer::new(src)?;
    let out = parse_unitdef_tokens(&mut lx)?;
    if !lx.at_end() {
        return Err(syntax(lx.column(), "trailing input after unit definition"));
    }
    Ok(out)
}

/// Parses the single-line `tree ; unitdef ; unitdef ...` form.
pub fn parse_structure_line(src: &str) -> Result<RawStructure, NotationError> {
    let mut lx = Lexer::new(src)?;
    let (tree, index) = parse_tree_tokens(&mut lx)?;
    let mut units = Vec::new();
    while !lx.at_end() {
        lx.expect(Tok::Semi, "';'")?;
        units.push(parse_unitdef_tokens(&mut lx)?);
    }
    Ok(RawStructure { tree, index, units })
}

impl RawStructure {
    /// Resolves indices into units, minting a fresh instance for every
    /// semantic-form occurrence. Duplicated attributes are kept so that the
    /// uniqueness check can report them.
    pub fn into_representation(self, mint: &mut InstanceMint) -> Result<Representation, NotationError> {
        let mut defined: HashMap<u32, ()> = HashMap::new();
        for (id, _) in &self.units {
            if defined.insert(*id, ()).is_some() {
                return Err(NotationError::DuplicateUnit(*id));
            }
        }
        let mut fs = FStore::new();
        for (id, pairs) in self.units {
            let mut resolved = Vec::with_capacity(pairs.len());
            for (attr, v) in pairs {
                let value = match v {
                    RawValue::Atom(a) => FValue::Atom(a),
                    RawValue::Index(i) => {
                        if !defined.contains_key(&i) {
                            return Err(NotationError::DanglingIndex(i));
                        }
                        FValue::Unit(UnitId(i))
                    }
                    RawValue::Sem { pred, governed } => FValue::Sem(SemForm::new(mint.mint(), pred, governed)),
                };
                resolved.push((attr, value));
            }
            fs.insert(UnitId(id), FUnit::from_pairs(resolved));
        }
        let mut phi = BTreeMap::new();
        for (n, idx) in self.index.iter().enumerate() {
            if let Some(i) = idx {
                if !defined.contains_key(i) {
                    return Err(NotationError::DanglingIndex(*i));
                }
                phi.insert(NodeId(n as u32), UnitId(*i));
            }
        }
        Ok(Representation::new(self.tree, fs, phi)?)
    }
}

/// Writes the indexed tree of `repr` using the given unit numbering.
pub fn format_itree(repr: &Representation, number: &HashMap<UnitId, usize>) -> String {
    fn go(repr: &Representation, id: NodeId, number: &HashMap<UnitId, usize>, out: &mut String) {
        let node = repr.tree.node(id);
        let label = |out: &mut String| {
            out.push_str(node.category.as_str());
            if let Some(u) = repr.phi(id) {
                out.push('.');
                out.push_str(&number[&u].to_string());
            }
        };
        match node.kind {
            NodeKind::Terminal => label(out),
            NodeKind::Slot => {
                label(out);
                out.push('^');
            }
            NodeKind::Internal => {
                out.push('(');
                label(out);
                for &c in &node.children {
                    out.push(' ');
                    go(repr, c, number, out);
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(repr, repr.tree.root(), number, &mut out);
    out
}

/// Writes one unit definition line, pairs in stored order.
pub fn format_unit(n: usize, unit: &FUnit, number: &HashMap<UnitId, usize>) -> String {
    let mut out = format!("{n} -> [");
    for (k, (attr, v)) in unit.pairs().iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        out.push('(');
        out.push_str(attr.as_str());
        out.push(' ');
        match v {
            FValue::Atom(a) => out.push_str(a.as_str()),
            FValue::Sem(s) => out.push_str(&s.to_string()),
            FValue::Unit(r) => out.push_str(&number[r].to_string()),
        }
        out.push(')');
    }
    out.push(']');
    out
}

/// Multi-line display: indexed tree followed by one line per unit, units
/// numbered canonically from 1.
pub fn format_representation(repr: &Representation) -> String {
    let order = canonical_unit_order(repr);
    let number: HashMap<UnitId, usize> = order.iter().enumerate().map(|(i, u)| (*u, i + 1)).collect();
    let mut out = format_itree(repr, &number);
    for (i, u) in order.iter().enumerate() {
        out.push('\n');
        let empty = FUnit::new();
        out.push_str(&format_unit(i + 1, repr.fs.get(*u).unwrap_or(&empty), &number));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfg::canonical_form;

    #[test]
    fn parses_kim_eats_tree() {
        let (tree, idx) = parse_itree("(S.1 (NP.2 Kim.2) (VP.1 eats.1))").unwrap();
        assert_eq!(tree.len(), 5);
        assert_eq!(tree.words(), vec![Sym::new("Kim"), Sym::new("eats")]);
        assert_eq!(idx, vec![Some(1), Some(2), Some(2), Some(1), Some(1)]);
    }

    #[test]
    fn parses_semantic_forms() {
        let (id, pairs) = parse_unitdef("1 -> [(SUBJ 2) (TENSE PRES) (PRED 'eat<SUBJ>')]").unwrap();
        assert_eq!(id, 1);
        assert_eq!(pairs[0].1, RawValue::Index(2));
        assert_eq!(pairs[1].1, RawValue::Atom(Sym::new("PRES")));
        assert_eq!(pairs[2].1, RawValue::Sem { pred: Sym::new("eat"), governed: vec![Sym::new("SUBJ")] });
        let (_, pairs) = parse_unitdef("2 -> [(PRED 'Kim')]").unwrap();
        assert_eq!(pairs[0].1, RawValue::Sem { pred: Sym::new("Kim"), governed: vec![] });
    }

    #[test]
    fn slot_markers_and_unindexed_terminals() {
        let (tree, idx) = parse_itree("(S.1 NP.2^ (VP.1 eats))").unwrap();
        assert!(tree.node(NodeId(1)).is_slot());
        assert_eq!(idx[3], None);
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let err = parse_itree("(S.1 (NP.2 Kim.2)").unwrap_err();
        assert!(matches!(err, NotationError::Syntax { .. }));
        let err = parse_unitdef("1 -> [(NUM SG]").unwrap_err();
        assert!(matches!(err, NotationError::Syntax { column: 14, .. }), "{err:?}");
    }

    #[test]
    fn dangling_index_is_reported() {
        let raw = parse_structure_line("(S.1 (NP.3 Kim.3)) ; 1 -> []").unwrap();
        let err = raw.into_representation(&mut InstanceMint::default()).unwrap_err();
        assert_eq!(err, NotationError::DanglingIndex(3));
    }

    #[test]
    fn canonical_line_reads_back() {
        let line = "(S.1 NP.2^ (VP.1 eats.1)) ; 1 -> [(PRED 'eat<SUBJ>') (SUBJ 2) (TENSE PRES)] ; 2 -> [(NUM SG)]";
        let repr = parse_structure_line(line).unwrap().into_representation(&mut InstanceMint::default()).unwrap();
        assert_eq!(canonical_form(&repr), line);
    }
}
