//! Extended Newick with integer leaf labels and `θ` as the branch length.
//!
//! Trees are unrooted: the outermost node is just an anchor and its own
//! branch length is ignored. A node with a numeric label is a leaf even if
//! it has children, so a two-leaf tree can be written `(2:0.5)1;`. Labels
//! on internal nodes that are not numbers are ignored, as are `[comments]`.

use std::fmt::Write as _;

use latent_ising::{TreeTopology, WeightedForest, WeightedTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("newick, byte {offset}: {message}")]
pub struct NewickError {
    pub offset: usize,
    pub message: String,
}

/// One parsed tree before validation. Internal nodes get ids above every
/// possible leaf label.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTree {
    pub leaves: Vec<usize>,
    pub edges: Vec<(usize, usize, Option<f64>)>,
}

const INTERNAL_BASE: usize = usize::MAX / 2;

impl ParsedTree {
    pub fn has_weights(&self) -> bool {
        self.edges.iter().all(|e| e.2.is_some())
    }

    pub fn topology(&self) -> latent_ising::Result<TreeTopology> {
        let pairs: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b, _)| (a, b)).collect();
        TreeTopology::from_edges(&self.leaves, &pairs)
    }

    pub fn weighted(&self) -> latent_ising::Result<WeightedTree> {
        let mut triples = Vec::with_capacity(self.edges.len());
        for &(a, b, w) in &self.edges {
            let w = w.ok_or_else(|| {
                let named = |v: usize| if v >= INTERNAL_BASE { "internal node".to_string() } else { format!("leaf {v}") };
                latent_ising::Error::MalformedTree(format!("edge between {} and {} has no weight", named(a), named(b)))
            })?;
            triples.push((a, b, w));
        }
        WeightedTree::from_edges(&self.leaves, &triples)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    next_internal: usize,
    leaves: Vec<usize>,
    edges: Vec<(usize, usize, Option<f64>)>,
}

impl Parser<'_> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, NewickError> {
        Err(NewickError { offset: self.pos, message: message.into() })
    }

    fn skip_blank(&mut self) -> Result<(), NewickError> {
        loop {
            match self.s.get(self.pos) {
                Some(c) if c.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => match self.s[self.pos..].iter().position(|&c| c == b']') {
                    Some(k) => self.pos += k + 1,
                    None => return self.fail("unterminated comment"),
                },
                _ => return Ok(()),
            }
        }
    }

    fn peek(&mut self) -> Result<Option<u8>, NewickError> {
        self.skip_blank()?;
        Ok(self.s.get(self.pos).copied())
    }

    fn token(&mut self) -> Result<&str, NewickError> {
        self.skip_blank()?;
        let start = self.pos;
        while let Some(&c) = self.s.get(self.pos) {
            if c.is_ascii_whitespace() || b"(),:;[]".contains(&c) {
                break;
            }
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).or_else(|_| self.fail("label is not UTF-8"))
    }

    fn length(&mut self) -> Result<Option<f64>, NewickError> {
        if self.peek()? != Some(b':') {
            return Ok(None);
        }
        self.pos += 1;
        let at = self.pos;
        let text = self.token()?;
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(NewickError { offset: at, message: format!("bad branch length {text:?}") }),
        }
    }

    fn leaf_id(&mut self, label: &str, at: usize) -> Result<usize, NewickError> {
        match label.parse::<usize>() {
            Ok(l) if l >= 1 && l < INTERNAL_BASE => {
                if self.leaves.contains(&l) {
                    return Err(NewickError { offset: at, message: format!("leaf {l} appears twice") });
                }
                self.leaves.push(l);
                Ok(l)
            }
            _ => Err(NewickError { offset: at, message: format!("leaf label {label:?} is not a positive integer") }),
        }
    }

    /// Parses one subtree and returns its id and branch length.
    fn node(&mut self) -> Result<(usize, Option<f64>), NewickError> {
        if self.peek()? == Some(b'(') {
            self.pos += 1;
            let mut children = Vec::new();
            loop {
                children.push(self.node()?);
                match self.peek()? {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.fail("expected ',' or ')'"),
                }
            }
            let at = self.pos;
            let label = self.token()?.to_string();
            let id = if !label.is_empty() && label.bytes().all(|c| c.is_ascii_digit()) {
                self.leaf_id(&label, at)?
            } else {
                self.next_internal += 1;
                self.next_internal
            };
            for (child, w) in children {
                self.edges.push((id, child, w));
            }
            Ok((id, self.length()?))
        } else {
            let at = self.pos;
            let label = self.token()?.to_string();
            if label.is_empty() {
                return self.fail("expected a leaf label or '('");
            }
            let id = self.leaf_id(&label, at)?;
            Ok((id, self.length()?))
        }
    }
}

/// Every `;`-terminated tree in `text`, in order.
pub fn parse(text: &str) -> Result<Vec<ParsedTree>, NewickError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, next_internal: INTERNAL_BASE, leaves: Vec::new(), edges: Vec::new() };
    let mut trees = Vec::new();
    while p.peek()?.is_some() {
        p.leaves.clear();
        p.edges.clear();
        p.node()?;
        if p.peek()? != Some(b';') {
            return p.fail("expected ';'");
        }
        p.pos += 1;
        let mut leaves = std::mem::take(&mut p.leaves);
        leaves.sort_unstable();
        trees.push(ParsedTree { leaves, edges: std::mem::take(&mut p.edges) });
    }
    if trees.is_empty() {
        return p.fail("no tree found");
    }
    Ok(trees)
}

fn write_subtree(out: &mut String, t: &TreeTopology, theta: Option<&[f64]>, v: usize, parent: usize) {
    let mut kids: Vec<(usize, usize)> = t.neighbors(v).filter(|&u| u != parent).map(|u| (t.side_leaves(u, v)[0], u)).collect();
    kids.sort_unstable();
    if !kids.is_empty() {
        out.push('(');
        for (k, &(_, u)) in kids.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write_subtree(out, t, theta, u, v);
        }
        out.push(')');
    }
    if t.is_leaf(v) {
        write!(out, "{v}").unwrap();
    }
    if let (Some(theta), Some(k)) = (theta, t.edge_index(v, parent)) {
        write!(out, ":{}", theta[k]).unwrap();
    }
}

fn write_any(t: &TreeTopology, theta: Option<&[f64]>) -> String {
    let first = t.leaves()[0];
    let mut out = String::new();
    match t.neighbors(first).next() {
        None => write!(out, "{first}").unwrap(),
        Some(anchor) if t.is_leaf(anchor) => {
            out.push('(');
            write_subtree(&mut out, t, theta, anchor, first);
            write!(out, "){first}").unwrap();
        }
        Some(anchor) => write_subtree(&mut out, t, theta, anchor, usize::MAX),
    }
    out.push(';');
    out
}

/// Anchored at the neighbour of the smallest leaf, children ordered by their
/// smallest leaf, weights in shortest round-trip form.
pub fn write_tree(tree: &WeightedTree) -> String {
    write_any(tree.topology(), Some(tree.theta()))
}

pub fn write_topology(t: &TreeTopology) -> String {
    write_any(t, None)
}

/// One tree per line.
pub fn write_forest(forest: &WeightedForest) -> String {
    forest.components().iter().map(|c| write_tree(c) + "\n").collect()
}
