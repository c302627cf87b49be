//! Unlabelled dependency-tree shapes.
//!
//! A tree is canonicalized with the AHU parenthesis encoding: a leaf is
//! `()` and an inner node wraps the lexicographically sorted codes of its
//! children. Two rooted trees are isomorphic iff their codes are equal.
//! For the undirected variant the tree is re-rooted at its center (or at
//! both centers, keeping the smaller code).

use std::collections::{HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::conllu::{Sentence, Treebank, WordFilter};
use crate::rng::SeededRng;

/// Largest tree accepted by [`is_isomorphic_bruteforce`].
pub const BRUTEFORCE_MAX_NODES: usize = 8;
/// Largest size accepted by [`enumerate_rooted_trees`].
pub const ENUMERATE_MAX_NODES: usize = 12;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TreeErrorKind {
    #[error("tree has no nodes")]
    Empty,
    #[error("no node is attached to the root")]
    NoRoot,
    #[error("multiple roots: nodes {0:?}")]
    MultipleRoots(Vec<usize>),
    #[error("node {node} has parent {parent} outside 0..={len}")]
    ParentOutOfRange { node: usize, parent: usize, len: usize },
    #[error("cycle through node {0}")]
    Cycle(usize),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("sentence {sentence}: {kind}")]
pub struct TreeError {
    /// `sent_id` when available, otherwise the sentence index.
    pub sentence: String,
    pub kind: TreeErrorKind,
}

/// Rooted tree over nodes `1..=n`. `parent(v) == 0` marks the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DepTree {
    parents: Vec<usize>,
}

impl DepTree {
    /// `parents[i]` is the parent of node `i + 1`.
    pub fn from_parents(parents: Vec<usize>) -> Result<Self, TreeErrorKind> {
        let n = parents.len();
        if n == 0 {
            return Err(TreeErrorKind::Empty);
        }
        let mut roots = Vec::new();
        for (i, &p) in parents.iter().enumerate() {
            if p > n {
                return Err(TreeErrorKind::ParentOutOfRange {
                    node: i + 1,
                    parent: p,
                    len: n,
                });
            }
            if p == 0 {
                roots.push(i + 1);
            }
        }
        match roots.len() {
            0 => return Err(TreeErrorKind::NoRoot),
            1 => {}
            _ => return Err(TreeErrorKind::MultipleRoots(roots)),
        }

        let tree = DepTree { parents };
        // With exactly one root, the parent graph is a tree iff every node
        // is reachable from that root.
        let order = tree.bfs_order();
        if order.len() != n {
            let mut reached = vec![false; n + 1];
            for v in order {
                reached[v] = true;
            }
            let stuck = (1..=n).find(|&v| !reached[v]).unwrap_or(1);
            return Err(TreeErrorKind::Cycle(stuck));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Parent of node `v` (1-based); 0 for the root.
    pub fn parent(&self, v: usize) -> usize {
        self.parents[v - 1]
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn root(&self) -> usize {
        self.parents.iter().position(|&p| p == 0).map_or(0, |i| i + 1)
    }

    /// Child lists indexed by node; index 0 holds the root.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.len() + 1];
        for (i, &p) in self.parents.iter().enumerate() {
            children[p].push(i + 1);
        }
        children
    }

    fn bfs_order(&self) -> Vec<usize> {
        let children = self.children();
        let mut order = Vec::with_capacity(self.len());
        let mut queue: VecDeque<usize> = children[0].iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            queue.extend(children[v].iter().copied());
        }
        order
    }

    /// Undirected adjacency lists indexed by node (index 0 unused).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len() + 1];
        for (i, &p) in self.parents.iter().enumerate() {
            if p != 0 {
                adj[p].push(i + 1);
                adj[i + 1].push(p);
            }
        }
        adj
    }

    /// Renames node `v` to `perm[v - 1]`; `perm` is a permutation of `1..=n`.
    pub fn relabel(&self, perm: &[usize]) -> DepTree {
        assert_eq!(perm.len(), self.len());
        let mut parents = vec![0; self.len()];
        for (i, &p) in self.parents.iter().enumerate() {
            parents[perm[i] - 1] = if p == 0 { 0 } else { perm[p - 1] };
        }
        DepTree { parents }
    }
}

/// Builds the tree of a sentence's syntactic words.
pub fn build_tree(sentence: &Sentence) -> Result<DepTree, TreeError> {
    build_tree_filtered(sentence, WordFilter::All)
}

pub fn build_tree_filtered(sentence: &Sentence, filter: WordFilter) -> Result<DepTree, TreeError> {
    let label = sentence.sent_id().unwrap_or("<no sent_id>").to_owned();
    words_to_tree(sentence, filter).map_err(|kind| TreeError { sentence: label, kind })
}

fn words_to_tree(sentence: &Sentence, filter: WordFilter) -> Result<DepTree, TreeErrorKind> {
    let words: Vec<_> = sentence.words().collect();
    let heads: Vec<usize> = words.iter().map(|w| w.head.unwrap_or(0)).collect();
    if filter == WordFilter::All {
        return DepTree::from_parents(heads);
    }

    // Renumber kept words and lift their heads past dropped ones.
    let n = words.len();
    let mut new_id = vec![0; n + 1];
    let mut next = 0;
    for (i, w) in words.iter().enumerate() {
        if filter.keeps(w) {
            next += 1;
            new_id[i + 1] = next;
        }
    }
    let mut parents = Vec::with_capacity(next);
    for i in 0..n {
        if new_id[i + 1] == 0 {
            continue;
        }
        let mut head = heads[i];
        let mut steps = 0;
        while head != 0 && new_id[head] == 0 {
            head = heads[head - 1];
            steps += 1;
            if steps > n {
                return Err(TreeErrorKind::Cycle(i + 1));
            }
        }
        parents.push(if head == 0 { 0 } else { new_id[head] });
    }
    DepTree::from_parents(parents)
}

/// Trees of every sentence, in order. Errors name the sentence by
/// `sent_id` or by 1-based index.
pub fn treebank_trees(tb: &Treebank, filter: WordFilter) -> Result<Vec<DepTree>, TreeError> {
    tb.sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            words_to_tree(s, filter).map_err(|kind| TreeError {
                sentence: match s.sent_id() {
                    Some(id) => format!("{} ({})", i + 1, id),
                    None => format!("{}", i + 1),
                },
                kind,
            })
        })
        .collect()
}

/// Balanced-parenthesis canonical code; `2n` characters for `n` nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonCode(String);

impl CanonCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn node_count(&self) -> usize {
        self.0.len() / 2
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// A tree with this shape, nodes numbered in preorder.
    pub fn to_tree(&self) -> DepTree {
        let mut parents = Vec::with_capacity(self.node_count());
        let mut stack = Vec::new();
        for ch in self.0.chars() {
            if ch == '(' {
                parents.push(stack.last().copied().unwrap_or(0));
                stack.push(parents.len());
            } else {
                stack.pop();
            }
        }
        DepTree { parents }
    }
}

impl fmt::Display for CanonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn ahu(adj: &[Vec<usize>], root: usize) -> String {
    let n = adj.len() - 1;
    let mut parent = vec![usize::MAX; n + 1];
    let mut order = Vec::with_capacity(n);
    parent[root] = 0;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &u in &adj[v] {
            if parent[u] == usize::MAX {
                parent[u] = v;
                order.push(u);
            }
        }
    }

    let mut pending: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    let mut code = String::new();
    for &v in order.iter().rev() {
        let mut kids = std::mem::take(&mut pending[v]);
        kids.sort_unstable();
        let mut s = String::with_capacity(2 + kids.iter().map(String::len).sum::<usize>());
        s.push('(');
        for k in kids {
            s.push_str(&k);
        }
        s.push(')');
        if v == root {
            code = s;
        } else {
            pending[parent[v]].push(s);
        }
    }
    code
}

/// Rooted-tree canonical code.
pub fn canon_rooted(tree: &DepTree) -> CanonCode {
    CanonCode(ahu(&tree.adjacency(), tree.root()))
}

/// Centers of the undirected tree by repeated leaf removal (one or two nodes).
pub fn tree_centers(tree: &DepTree) -> Vec<usize> {
    let n = tree.len();
    if n <= 2 {
        return (1..=n).collect();
    }
    let adj = tree.adjacency();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            for &u in &adj[leaf] {
                degree[u] -= 1;
                if degree[u] == 1 {
                    next.push(u);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Unrooted canonical code: smallest rooted code over the tree's centers.
pub fn canon_unrooted(tree: &DepTree) -> CanonCode {
    let adj = tree.adjacency();
    tree_centers(tree)
        .into_iter()
        .map(|c| ahu(&adj, c))
        .min()
        .map(CanonCode)
        .expect("a tree has at least one center")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IsoMode {
    /// Rooted isomorphism; edge direction follows from the root.
    Directed,
    /// Edge direction and root are ignored.
    Undirected,
}

impl IsoMode {
    pub fn canon(self, tree: &DepTree) -> CanonCode {
        match self {
            IsoMode::Directed => canon_rooted(tree),
            IsoMode::Undirected => canon_unrooted(tree),
        }
    }
}

impl fmt::Display for IsoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IsoMode::Directed => "directed",
            IsoMode::Undirected => "undirected",
        })
    }
}

impl std::str::FromStr for IsoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "directed" => Ok(IsoMode::Directed),
            "undirected" => Ok(IsoMode::Undirected),
            other => Err(format!("unknown isomorphism mode {:?}", other)),
        }
    }
}

/// Isomorphism classes seen in a collection of trees.
#[derive(Clone, Debug)]
pub struct IsoClassSet {
    mode: IsoMode,
    codes: HashSet<CanonCode>,
    inserted: usize,
}

impl IsoClassSet {
    pub fn new(mode: IsoMode) -> Self {
        IsoClassSet {
            mode,
            codes: HashSet::new(),
            inserted: 0,
        }
    }

    pub fn from_trees<'a>(trees: impl IntoIterator<Item = &'a DepTree>, mode: IsoMode) -> Self {
        let mut set = IsoClassSet::new(mode);
        for t in trees {
            set.insert(t);
        }
        set
    }

    pub fn insert(&mut self, tree: &DepTree) -> bool {
        self.inserted += 1;
        self.codes.insert(self.mode.canon(tree))
    }

    pub fn contains(&self, tree: &DepTree) -> bool {
        self.codes.contains(&self.mode.canon(tree))
    }

    pub fn contains_code(&self, code: &CanonCode) -> bool {
        self.codes.contains(code)
    }

    pub fn mode(&self) -> IsoMode {
        self.mode
    }

    /// Number of distinct classes.
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Number of trees inserted, duplicates included.
    pub fn inserted(&self) -> usize {
        self.inserted
    }

    pub fn sorted_codes(&self) -> Vec<&CanonCode> {
        let mut codes: Vec<_> = self.codes.iter().collect();
        codes.sort();
        codes
    }

    /// One code per line, sorted.
    pub fn to_lines(&self) -> String {
        self.sorted_codes().iter().map(|c| format!("{}\n", c)).collect()
    }
}

/// Iso-class set of every sentence in a treebank.
pub fn iso_class_set(trees: &[DepTree], mode: IsoMode) -> IsoClassSet {
    IsoClassSet::from_trees(trees, mode)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OverlapError {
    #[error("no test trees")]
    EmptyTest,
    #[error("training classes were built in {found} mode, expected {expected}")]
    ModeMismatch { expected: IsoMode, found: IsoMode },
}

/// Fraction of test trees whose class occurs in `train`, in `train`'s mode.
pub fn overlap_ratio(train: &IsoClassSet, test: &[DepTree]) -> Result<f64, OverlapError> {
    if test.is_empty() {
        return Err(OverlapError::EmptyTest);
    }
    let hits = test.iter().filter(|t| train.contains(t)).count();
    Ok(hits as f64 / test.len() as f64)
}

fn require_mode(train: &IsoClassSet, expected: IsoMode) -> Result<(), OverlapError> {
    if train.mode() != expected {
        return Err(OverlapError::ModeMismatch {
            expected,
            found: train.mode(),
        });
    }
    Ok(())
}

/// Directed unlabelled graph isomorphism ratio.
pub fn dug(train: &IsoClassSet, test: &[DepTree]) -> Result<f64, OverlapError> {
    require_mode(train, IsoMode::Directed)?;
    overlap_ratio(train, test)
}

/// Undirected unlabelled graph isomorphism ratio.
pub fn uug(train: &IsoClassSet, test: &[DepTree]) -> Result<f64, OverlapError> {
    require_mode(train, IsoMode::Undirected)?;
    overlap_ratio(train, test)
}

/// Number of unlabelled rooted trees on `n` nodes (OEIS A000081), from
/// `a(m+1) = (1/m) * sum_{k=1..m} (sum_{d|k} d*a(d)) * a(m-k+1)`.
pub fn count_rooted_trees(n: usize) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    let mut a = vec![BigUint::zero(); n + 1];
    a[1] = BigUint::one();
    // divisor_sums[k] = sum_{d|k} d*a(d)
    let mut divisor_sums = vec![BigUint::zero(); n + 1];
    for m in 1..n {
        for (d, ad) in a.iter().enumerate().take(m + 1).skip(1) {
            if m % d == 0 {
                divisor_sums[m] += ad * BigUint::from(d);
            }
        }
        let mut total = BigUint::zero();
        for k in 1..=m {
            total += &divisor_sums[k] * &a[m - k + 1];
        }
        a[m + 1] = total / BigUint::from(m);
    }
    a.swap_remove(n)
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SizeError {
    #[error("tree size {n} outside the supported range 1..={max}")]
    OutOfRange { n: usize, max: usize },
}

/// Every rooted unlabelled tree on `n` nodes as canonical codes, sorted.
pub fn enumerate_rooted_trees(n: usize) -> Result<Vec<CanonCode>, SizeError> {
    if !(1..=ENUMERATE_MAX_NODES).contains(&n) {
        return Err(SizeError::OutOfRange {
            n,
            max: ENUMERATE_MAX_NODES,
        });
    }

    // by_size[m] lists the codes of trees with m nodes.
    let mut by_size: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    by_size[1].push("()".to_owned());
    for m in 2..=n {
        let mut out = HashSet::new();
        let mut chosen = Vec::new();
        forests(&by_size, m - 1, (m - 1, usize::MAX), &mut chosen, &mut |kids| {
            let mut kids: Vec<&str> = kids.to_vec();
            kids.sort_unstable();
            out.insert(format!("({})", kids.concat()));
        });
        let mut codes: Vec<String> = out.into_iter().collect();
        codes.sort_unstable();
        by_size[m] = codes;
    }
    Ok(by_size.swap_remove(n).into_iter().map(CanonCode).collect())
}

/// Calls `emit` once per multiset of subtrees with total size `remaining`,
/// drawing subtrees in non-increasing `(size, index)` order.
fn forests<'a>(
    by_size: &'a [Vec<String>],
    remaining: usize,
    max: (usize, usize),
    chosen: &mut Vec<&'a str>,
    emit: &mut dyn FnMut(&[&'a str]),
) {
    if remaining == 0 {
        emit(chosen);
        return;
    }
    for size in (1..=remaining.min(max.0)).rev() {
        let limit = if size == max.0 { max.1 } else { usize::MAX };
        for (idx, code) in by_size[size].iter().enumerate() {
            if idx > limit {
                break;
            }
            chosen.push(code);
            forests(by_size, remaining - size, (size, idx), chosen, emit);
            chosen.pop();
        }
    }
}

/// Exhaustive isomorphism test over all vertex bijections.
pub fn is_isomorphic_bruteforce(a: &DepTree, b: &DepTree, mode: IsoMode) -> Result<bool, SizeError> {
    let n = a.len().max(b.len());
    if n > BRUTEFORCE_MAX_NODES {
        return Err(SizeError::OutOfRange {
            n,
            max: BRUTEFORCE_MAX_NODES,
        });
    }
    if a.len() != b.len() {
        return Ok(false);
    }

    let edges = |t: &DepTree| -> Vec<(usize, usize)> {
        t.parents()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(|(i, &p)| match mode {
                IsoMode::Directed => (p, i + 1),
                IsoMode::Undirected => (p.min(i + 1), p.max(i + 1)),
            })
            .collect()
    };
    let mut target = [[false; BRUTEFORCE_MAX_NODES + 1]; BRUTEFORCE_MAX_NODES + 1];
    for (u, v) in edges(b) {
        target[u][v] = true;
        if mode == IsoMode::Undirected {
            target[v][u] = true;
        }
    }
    let source = edges(a);

    Ok((1..=n)
        .permutations(n)
        .any(|perm| source.iter().all(|&(u, v)| target[perm[u - 1]][perm[v - 1]])))
}

/// Random tree on `n` nodes: a random recursive tree under a random labelling.
pub fn random_tree(n: usize, rng: &mut SeededRng) -> DepTree {
    assert!(n >= 1);
    let mut parents = vec![0; n];
    for (i, p) in parents.iter_mut().enumerate().skip(1) {
        *p = rng.below(i as u64) as usize + 1;
    }
    let tree = DepTree { parents };
    let perm: Vec<usize> = rng.permutation(n).into_iter().map(|v| v + 1).collect();
    tree.relabel(&perm)
}
