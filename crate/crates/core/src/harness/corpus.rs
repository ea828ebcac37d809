//! Corpus files: blank-line separated entries of the form
//!
//! ```text
//! #id: 1
//! #sent: Kim eats
//! #tree: (S.1 (NP.2 Kim.2) (VP.1 eats.1))
//! #fs:
//! 1 -> [(SUBJ 2) (TENSE PRES) (PRED 'eat<SUBJ>')]
//! 2 -> [(PRED 'Kim') (NUM SG)]
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::fragmentation::index_tree;
use crate::lfg::{check_valid, Completeness, GovernableFunctions, InstanceMint, Representation, Violation};
use crate::notation::{format_representation, parse_itree, parse_unitdef, NotationError, RawStructure};
use crate::symbol::Sym;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Notation {
        line: usize,
        #[source]
        source: NotationError,
    },
    #[error("entry {id} (line {line}): {} violated: {violation}", violation.condition())]
    Invalid { id: String, line: usize, violation: Violation },
    #[error("entry {id} (line {line}): #sent does not match the tree yield")]
    TokenMismatch { id: String, line: usize },
    #[error("entry {id} (line {line}): duplicate sentence id")]
    DuplicateId { id: String, line: usize },
    #[error("entry {id} (line {line}): the tree contains frontier slots")]
    OpenTree { id: String, line: usize },
    #[error("corpus contains no entries")]
    Empty,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: String,
    pub tokens: Vec<Sym>,
    pub repr: Representation,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vocabulary(&self) -> BTreeSet<Sym> {
        self.entries.iter().flat_map(|e| e.tokens.iter().cloned()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Ingest settings. The defaults validate with the standard governable
/// functions and basic Completeness.
#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub governable: GovernableFunctions,
    pub completeness: Completeness,
}

pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    parse_corpus_with(text, &ParseOptions::default())
}

struct Block<'a> {
    lines: Vec<(usize, &'a str)>,
}

fn blocks(text: &str) -> Vec<Block<'_>> {
    let mut out = Vec::new();
    let mut cur: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(Block { lines: std::mem::take(&mut cur) });
            }
        } else {
            cur.push((i + 1, line));
        }
    }
    if !cur.is_empty() {
        out.push(Block { lines: cur });
    }
    out
}

fn header<'a>(block: &Block<'a>, pos: usize, key: &str) -> Result<(usize, &'a str), CorpusError> {
    let (line, text) = match block.lines.get(pos) {
        Some(&l) => l,
        None => {
            let last = block.lines.last().map_or(0, |l| l.0);
            return Err(CorpusError::Syntax { line: last + 1, message: format!("expected '{key}'") });
        }
    };
    match text.strip_prefix(key) {
        Some(rest) => Ok((line, rest.trim())),
        None => Err(CorpusError::Syntax { line, message: format!("expected '{key}'") }),
    }
}

pub fn parse_corpus_with(text: &str, opts: &ParseOptions) -> Result<Corpus, CorpusError> {
    let mut mint = InstanceMint::starting_at(1);
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for block in blocks(text) {
        let (id_line, id) = header(&block, 0, "#id:")?;
        if id.is_empty() {
            return Err(CorpusError::Syntax { line: id_line, message: "empty sentence id".into() });
        }
        let (_, sent) = header(&block, 1, "#sent:")?;
        let (tree_line, tree_src) = header(&block, 2, "#tree:")?;
        let (fs_line, rest) = header(&block, 3, "#fs:")?;
        if !rest.is_empty() {
            return Err(CorpusError::Syntax { line: fs_line, message: "unexpected text after '#fs:'".into() });
        }
        let (tree, index) = parse_itree(tree_src).map_err(|source| CorpusError::Notation { line: tree_line, source })?;
        let mut units = Vec::new();
        for &(line, src) in &block.lines[4..] {
            units.push(parse_unitdef(src).map_err(|source| CorpusError::Notation { line, source })?);
        }
        if units.is_empty() {
            return Err(CorpusError::Syntax { line: fs_line, message: "no unit definitions".into() });
        }
        let repr = RawStructure { tree, index, units }
            .into_representation(&mut mint)
            .map_err(|source| CorpusError::Notation { line: tree_line, source })?;

        let id = id.to_string();
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId { id, line: id_line });
        }
        if !repr.tree.is_closed() {
            return Err(CorpusError::OpenTree { id, line: tree_line });
        }
        let tokens: Vec<Sym> = sent.split_whitespace().map(Sym::new).collect();
        if tokens != repr.words() {
            return Err(CorpusError::TokenMismatch { id, line: id_line });
        }
        check_valid(&repr, &opts.governable, opts.completeness)
            .map_err(|violation| CorpusError::Invalid { id: id.clone(), line: id_line, violation })?;
        entries.push(CorpusEntry { id, tokens, repr });
    }
    if entries.is_empty() {
        return Err(CorpusError::Empty);
    }
    Ok(Corpus { entries })
}

/// Writes one entry with every node indexed and units numbered canonically.
pub fn format_entry(id: &str, repr: &Representation) -> String {
    let indexed = index_tree(repr).map(|t| t.to_representation()).unwrap_or_else(|_| repr.clone());
    let body = format_representation(&indexed);
    let mut lines = body.lines();
    let tree = lines.next().unwrap_or_default();
    let words = repr.words();
    let sent = words.iter().map(Sym::as_str).collect::<Vec<_>>().join(" ");
    let mut out = format!("#id: {id}\n#sent: {sent}\n#tree: {tree}\n#fs:\n");
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    out
}

pub fn serialize_corpus(corpus: &Corpus) -> String {
    let blocks: Vec<String> = corpus.entries.iter().map(|e| format_entry(&e.id, &e.repr)).collect();
    blocks.join("\n")
}

/// Number of corpus entries containing each word.
pub(crate) fn sentence_frequencies(entries: &[CorpusEntry]) -> BTreeMap<Sym, usize> {
    let mut freq = BTreeMap::new();
    for e in entries {
        let words: BTreeSet<&Sym> = e.tokens.iter().collect();
        for w in words {
            *freq.entry(w.clone()).or_insert(0) += 1;
        }
    }
    freq
}
