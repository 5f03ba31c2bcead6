//! Dependency trees and their complete-subtree categories.
//!
//! Every token of a sentence roots one complete subtree (the token and all
//! its descendants). A subtree is identified by its shape only: the POS tags
//! of its nodes in surface order and the dependency edges between them,
//! with positions renumbered 1..k inside the subtree. The relation linking
//! the subtree root to its own governor is not part of the shape.
//!
//! Keys are rendered as `POS1 POS2 ... | g:d:rel,g:d:rel,...`, edges sorted
//! by `(g, d)`; a single-node subtree renders as `POS |`.

use std::fmt;
use std::io::BufRead;

use rayon::prelude::*;

use crate::corpus::Strictness;
use crate::counts::CategoryCounts;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PosColumn {
    /// Column 4, universal tags.
    Upos,
    /// Column 5, treebank-specific tags (e.g. FTB-dep).
    #[default]
    Xpos,
}

impl std::str::FromStr for PosColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "upos" => Ok(PosColumn::Upos),
            "xpos" => Ok(PosColumn::Xpos),
            _ => Err(Error::Config(format!(
                "unknown POS column `{s}` (upos|xpos)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub pos: String,
    /// Governor position, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencySentence {
    tokens: Vec<DependencyToken>,
}

impl DependencySentence {
    /// Checks that the tokens form a single-rooted tree over positions 1..n.
    pub fn new(tokens: Vec<DependencyToken>) -> std::result::Result<Self, String> {
        let n = tokens.len();
        if n == 0 {
            return Err("empty sentence".into());
        }
        let mut roots = 0;
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(format!(
                    "token ids must run 1..{n}, found {} at {}",
                    t.index,
                    i + 1
                ));
            }
            if t.pos.is_empty() || t.deprel.is_empty() {
                return Err(format!("token {} has an empty POS or relation", t.index));
            }
            if t.head > n {
                return Err(format!(
                    "token {} points to missing head {}",
                    t.index, t.head
                ));
            }
            if t.head == t.index {
                return Err(format!("token {} is its own head", t.index));
            }
            if t.head == 0 {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(format!("expected exactly one root, found {roots}"));
        }
        // every token must reach the root within n steps
        for t in &tokens {
            let mut cur = t.head;
            let mut steps = 0;
            while cur != 0 {
                cur = tokens[cur - 1].head;
                steps += 1;
                if steps > n {
                    return Err(format!("head cycle through token {}", t.index));
                }
            }
        }
        Ok(DependencySentence { tokens })
    }

    pub fn tokens(&self) -> &[DependencyToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }

    /// Ten-column CoNLL-U rows, the POS in both tag columns, followed by a blank line.
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(&format!(
                "{}\t{}\t_\t{}\t{}\t_\t{}\t{}\t_\t_\n",
                t.index, t.form, t.pos, t.pos, t.head, t.deprel
            ));
        }
        out.push('\n');
        out
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.tokens.len() + 1];
        for t in &self.tokens {
            children[t.head].push(t.index);
        }
        children
    }

    /// Positions of the complete subtree rooted at `index`, ascending.
    pub fn subtree_nodes(&self, index: usize) -> Vec<usize> {
        subtree_nodes(&self.children(), index)
    }

    pub fn subtree_key(&self, index: usize) -> SubtreeKey {
        SubtreeKey::from_nodes(self, &self.subtree_nodes(index))
    }
}

fn subtree_nodes(children: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut nodes = vec![root];
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        for &c in &children[n] {
            nodes.push(c);
            stack.push(c);
        }
    }
    nodes.sort_unstable();
    nodes
}

/// Canonical, form-free identity of a complete subtree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubtreeKey(String);

impl SubtreeKey {
    /// `nodes` must be sorted and closed under descendants.
    fn from_nodes(sentence: &DependencySentence, nodes: &[usize]) -> SubtreeKey {
        let rank = |pos: usize| nodes.binary_search(&pos).ok().map(|r| r + 1);
        let mut key = String::new();
        for (i, &n) in nodes.iter().enumerate() {
            if i > 0 {
                key.push(' ');
            }
            key.push_str(&sentence.tokens[n - 1].pos);
        }
        key.push_str(" |");
        let mut edges: Vec<(usize, usize, &str)> = nodes
            .iter()
            .filter_map(|&n| {
                let t = &sentence.tokens[n - 1];
                let g = rank(t.head)?;
                Some((g, rank(n).unwrap(), t.deprel.as_str()))
            })
            .collect();
        edges.sort_unstable();
        for (i, (g, d, rel)) in edges.iter().enumerate() {
            key.push(if i == 0 { ' ' } else { ',' });
            key.push_str(&format!("{g}:{d}:{rel}"));
        }
        SubtreeKey(key)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SubtreeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One element per token: the complete subtree rooted at it.
pub fn extract_subtrees(sentence: &DependencySentence) -> CategoryCounts {
    let children = sentence.children();
    let mut counts = CategoryCounts::new();
    for t in &sentence.tokens {
        let nodes = subtree_nodes(&children, t.index);
        counts.add_one(SubtreeKey::from_nodes(sentence, &nodes).0);
    }
    counts
}

pub fn syntactic_counts<'a, I>(sentences: I) -> CategoryCounts
where
    I: IntoIterator<Item = &'a DependencySentence>,
{
    let mut counts = CategoryCounts::new();
    for s in sentences {
        counts.merge_from(&extract_subtrees(s));
    }
    counts
}

/// Parallel [`syntactic_counts`]; per-worker partial tables are merged.
pub fn syntactic_counts_par(sentences: &[DependencySentence]) -> CategoryCounts {
    sentences
        .par_iter()
        .fold(CategoryCounts::new, |mut acc, s| {
            acc.merge_from(&extract_subtrees(s));
            acc
        })
        .reduce(CategoryCounts::new, |a, b| a.merge(&b))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConlluOptions {
    pub pos_column: PosColumn,
    pub strictness: Strictness,
}

/// Streams sentences from CoNLL-U. Comment lines, multiword-token ranges
/// (`3-4`) and empty nodes (`5.1`) are skipped.
pub struct ConlluReader<R> {
    input: R,
    source: String,
    options: ConlluOptions,
    lineno: usize,
    rejected: usize,
    done: bool,
}

/// A token row, or the reason it was rejected.
type RowResult = std::result::Result<String, String>;

impl<R: BufRead> ConlluReader<R> {
    pub fn new(input: R, source: impl Into<String>, options: ConlluOptions) -> Self {
        ConlluReader {
            input,
            source: source.into(),
            options,
            lineno: 0,
            rejected: 0,
            done: false,
        }
    }

    /// Sentences skipped in lenient mode.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    fn parse_row(&self, line: &str) -> std::result::Result<Option<DependencyToken>, String> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(format!(
                "expected 10 tab-separated columns, found {}",
                cols.len()
            ));
        }
        if cols[0].contains(['-', '.']) {
            return Ok(None);
        }
        let index = cols[0]
            .parse()
            .map_err(|_| format!("bad token id `{}`", cols[0]))?;
        let head = cols[6]
            .parse()
            .map_err(|_| format!("bad head `{}`", cols[6]))?;
        let pos = match self.options.pos_column {
            PosColumn::Upos => cols[3],
            PosColumn::Xpos => cols[4],
        };
        Ok(Some(DependencyToken {
            index,
            form: cols[1].to_string(),
            pos: pos.to_string(),
            head,
            deprel: cols[7].to_string(),
        }))
    }

    fn next_block(&mut self) -> Result<Option<(usize, Vec<RowResult>)>> {
        let mut rows = Vec::new();
        let mut start = 0;
        let mut line = String::new();
        loop {
            line.clear();
            if self.input.read_line(&mut line)? == 0 {
                break;
            }
            self.lineno += 1;
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if trimmed.trim().is_empty() {
                if rows.is_empty() {
                    continue;
                }
                break;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            if rows.is_empty() {
                start = self.lineno;
            }
            rows.push(Ok(trimmed.to_string()));
        }
        Ok(if rows.is_empty() {
            None
        } else {
            Some((start, rows))
        })
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<DependencySentence>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let (start, rows) = match self.next_block() {
                Ok(Some(block)) => block,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            let parsed = rows
                .into_iter()
                .map(|r| r.and_then(|line| self.parse_row(&line)))
                .collect::<std::result::Result<Vec<_>, _>>()
                .and_then(|toks| DependencySentence::new(toks.into_iter().flatten().collect()));
            match parsed {
                Ok(sentence) => return Some(Ok(sentence)),
                Err(msg) => {
                    let location = format!("{}:{start}", self.source);
                    match self.options.strictness {
                        Strictness::Strict => {
                            self.done = true;
                            return Some(Err(Error::parse(location, msg)));
                        }
                        Strictness::Lenient => {
                            log::warn!("{location}: rejected sentence: {msg}");
                            self.rejected += 1;
                        }
                    }
                }
            }
        }
        None
    }
}

/// Parses a whole CoNLL-U document.
pub fn parse_conllu(input: &str, options: ConlluOptions) -> Result<Vec<DependencySentence>> {
    ConlluReader::new(input.as_bytes(), "<input>", options).collect()
}
