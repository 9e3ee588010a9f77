//! Infinite Dirichlet Trees.
//!
//! One tree for the corpus and one per document. Every assigned token stops
//! at one node and passes through all of its ancestors; each node keeps both
//! the strict ("stop") counts and the inclusive counts. The document trees
//! partition the corpus tree: summing a path over all document trees gives
//! the corpus tree total at that path.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::corpus::{Corpus, TIME_SCALE};
use crate::error::{Error, Result};
use crate::params::HyperParams;
use crate::time_model::{estimate_beta, BetaParams, DepthDeltas, ModBeta};

/// Address of a node: child indices from the root. The root is the empty path.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(SmallVec<[u32; 6]>);

impl NodePath {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: u32) -> Self {
        let mut p = self.clone();
        p.0.push(index);
        p
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            return None;
        }
        let mut p = self.clone();
        p.0.pop();
        Some(p)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn starts_with(&self, prefix: &NodePath) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Strict prefixes, root excluded, shortest first.
    pub fn ancestors(&self) -> impl Iterator<Item = NodePath> + '_ {
        (1..self.0.len()).map(|l| NodePath(self.0[..l].into()))
    }

    /// Stable dotted identifier, e.g. `0.3.1`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl From<&[u32]> for NodePath {
    fn from(s: &[u32]) -> Self {
        NodePath(s.into())
    }
}

impl<const N: usize> From<[u32; N]> for NodePath {
    fn from(s: [u32; N]) -> Self {
        NodePath(s.as_slice().into())
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("NodePath(root)")
        } else {
            write!(f, "NodePath({self})")
        }
    }
}

impl FromStr for NodePath {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.is_empty() {
            return Ok(NodePath::root());
        }
        s.split('.')
            .map(str::parse)
            .collect::<std::result::Result<SmallVec<_>, _>>()
            .map(NodePath)
    }
}

/// Exact running moments of fixed-point timestamps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TimeStats {
    count: u64,
    sum: u128,
    sum_sq: u128,
}

impl TimeStats {
    pub fn add(&mut self, time: u64) {
        self.count += 1;
        self.sum += time as u128;
        self.sum_sq += (time as u128) * (time as u128);
    }

    pub fn remove(&mut self, time: u64) {
        self.count -= 1;
        self.sum -= time as u128;
        self.sum_sq -= (time as u128) * (time as u128);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        self.sum as f64 / self.count as f64 / TIME_SCALE as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let c = self.count as u128;
        let numer = c * self.sum_sq - self.sum * self.sum;
        let scale = TIME_SCALE as f64;
        numer as f64 / (c as f64 * c as f64) / (scale * scale)
    }
}

/// A topic node of the corpus tree.
#[derive(Clone, Debug)]
pub struct TopicNode {
    children: BTreeMap<u32, TopicNode>,
    next_child: u32,
    stop_by_word: FxHashMap<u32, u32>,
    total_by_word: FxHashMap<u32, u32>,
    stop_total: u64,
    total: u64,
    time: TimeStats,
    beta: BetaParams,
    density: ModBeta,
    valid: bool,
    ttl: u32,
}

impl TopicNode {
    fn new(ttl: u32) -> Self {
        Self {
            children: BTreeMap::new(),
            next_child: 0,
            stop_by_word: FxHashMap::default(),
            total_by_word: FxHashMap::default(),
            stop_total: 0,
            total: 0,
            time: TimeStats::default(),
            beta: BetaParams::default(),
            density: ModBeta::Flat,
            valid: false,
            ttl,
        }
    }

    /// `A(k)`: tokens stopping here or below.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `A*(k)`: tokens stopping here.
    pub fn stop_total(&self) -> u64 {
        self.stop_total
    }

    /// `A(k|w)`.
    pub fn word_total(&self, word: u32) -> u64 {
        self.total_by_word.get(&word).copied().unwrap_or(0) as u64
    }

    /// `A*(k|w)`.
    pub fn word_stop(&self, word: u32) -> u64 {
        self.stop_by_word.get(&word).copied().unwrap_or(0) as u64
    }

    pub fn word_totals(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.total_by_word.iter().map(|(&w, &c)| (w, c as u64))
    }

    pub fn word_stops(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.stop_by_word.iter().map(|(&w, &c)| (w, c as u64))
    }

    pub fn children(&self) -> impl Iterator<Item = (u32, &TopicNode)> + '_ {
        self.children.iter().map(|(&i, n)| (i, n))
    }

    pub fn child(&self, index: u32) -> Option<&TopicNode> {
        self.children.get(&index)
    }

    pub fn num_children(&self) -> usize {
        self.children.len()
    }

    pub fn next_child_index(&self) -> u32 {
        self.next_child
    }

    pub fn time_stats(&self) -> &TimeStats {
        &self.time
    }

    pub fn beta(&self) -> BetaParams {
        self.beta
    }

    pub fn valid(&self) -> bool {
        self.valid
    }

    pub fn ttl_remaining(&self) -> u32 {
        self.ttl
    }

    /// Time density at this node's own depth; uniform while invalid.
    #[inline]
    pub fn time_density(&self, tau: f64) -> f64 {
        if self.valid {
            self.density.eval(tau)
        } else {
            1.0
        }
    }

    fn refresh_beta(&mut self, delta: Option<f64>) {
        self.beta = if self.time.count() == 0 {
            BetaParams::default()
        } else {
            estimate_beta(self.time.mean(), self.time.variance())
        };
        self.density = match delta {
            Some(d) => ModBeta::new(self.beta, d),
            None => ModBeta::Flat,
        };
    }
}

/// A node of a document tree: counts only.
#[derive(Clone, Debug, Default)]
pub struct DocNode {
    children: BTreeMap<u32, DocNode>,
    stop_total: u64,
    total: u64,
}

impl DocNode {
    /// `A(k|d)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `A*(k|d)`.
    pub fn stop_total(&self) -> u64 {
        self.stop_total
    }

    pub fn child(&self, index: u32) -> Option<&DocNode> {
        self.children.get(&index)
    }

    pub fn children(&self) -> impl Iterator<Item = (u32, &DocNode)> + '_ {
        self.children.iter().map(|(&i, n)| (i, n))
    }
}

/// One token occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TokenInstance {
    pub doc: usize,
    pub pos: usize,
    pub word: u32,
    /// Normalized document timestamp, fixed point.
    pub time: u64,
}

impl TokenInstance {
    pub fn of(corpus: &Corpus, doc: usize, pos: usize) -> Self {
        let d = &corpus.documents[doc];
        Self {
            doc,
            pos,
            word: d.tokens[pos],
            time: d.time,
        }
    }

    pub fn tau(&self) -> f64 {
        crate::corpus::fixed_to_tau(self.time)
    }
}

/// Why a child could not be created.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refusal {
    Frozen,
    BelowSplittingMass,
    InvalidSibling,
    DeadParent,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRules {
    /// Critical mass in tokens.
    pub critical: f64,
    /// Splitting mass in tokens.
    pub splitting: f64,
    pub ttl: u32,
}

impl GrowthRules {
    pub fn new(params: &HyperParams, n: u64) -> Self {
        Self {
            critical: params.critical_mass * n as f64,
            splitting: params.splitting_mass * n as f64,
            ttl: params.ttl,
        }
    }

    pub fn is_valid(&self, total: u64) -> bool {
        total as f64 >= self.critical
    }
}

/// Per-node bookkeeping not derivable from the assignment list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeMeta {
    pub path: NodePath,
    pub valid: bool,
    pub ttl: u32,
    pub next_child: u32,
}

/// The corpus tree, all document trees and the token assignment list.
#[derive(Clone, Debug)]
pub struct Forest {
    corpus: TopicNode,
    docs: Vec<DocNode>,
    assignments: Vec<Vec<Option<NodePath>>>,
    rules: GrowthRules,
    deltas: DepthDeltas,
}

impl Forest {
    pub fn new(corpus: &Corpus, params: &HyperParams) -> Self {
        let deltas = if corpus.time_degenerate() {
            DepthDeltas::disabled()
        } else {
            params.delta.clone()
        };
        Self {
            corpus: TopicNode::new(0),
            docs: vec![DocNode::default(); corpus.documents.len()],
            assignments: corpus
                .documents
                .iter()
                .map(|d| vec![None; d.tokens.len()])
                .collect(),
            rules: GrowthRules::new(params, corpus.n),
            deltas,
        }
    }

    pub fn rules(&self) -> &GrowthRules {
        &self.rules
    }

    /// Effective per-depth multipliers (time forced off on a degenerate range).
    pub fn deltas(&self) -> &DepthDeltas {
        &self.deltas
    }

    pub fn root(&self) -> &TopicNode {
        &self.corpus
    }

    pub fn doc_root(&self, doc: usize) -> &DocNode {
        &self.docs[doc]
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn node(&self, path: &NodePath) -> Option<&TopicNode> {
        let mut node = &self.corpus;
        for idx in path.as_slice() {
            node = node.children.get(idx)?;
        }
        Some(node)
    }

    pub fn doc_node(&self, doc: usize, path: &NodePath) -> Option<&DocNode> {
        let mut node = &self.docs[doc];
        for idx in path.as_slice() {
            node = node.children.get(idx)?;
        }
        Some(node)
    }

    pub fn assignment(&self, doc: usize, pos: usize) -> Option<&NodePath> {
        self.assignments[doc][pos].as_ref()
    }

    pub fn assignments(&self) -> &[Vec<Option<NodePath>>] {
        &self.assignments
    }

    /// Records `token` as stopping at `path` and passing through its ancestors.
    pub fn assign(&mut self, token: TokenInstance, path: &NodePath) -> Result<()> {
        if path.is_root() || self.node(path).is_none() {
            return Err(Error::DeadPath(path.clone()));
        }
        if let Some(old) = &self.assignments[token.doc][token.pos] {
            warn!("token {}:{} reassigned without unassign from {old}", token.doc, token.pos);
            self.unassign(token);
        }
        let deltas = &self.deltas;
        let mut node = &mut self.corpus;
        add_token(node, token, path.is_root());
        for (depth, idx) in path.as_slice().iter().enumerate() {
            node = node.children.get_mut(idx).expect("checked above");
            add_token(node, token, depth + 1 == path.depth());
            let d = depth + 1;
            node.refresh_beta((deltas.time_enabled(d)).then(|| deltas.at(d)));
        }
        let mut doc = &mut self.docs[token.doc];
        doc.total += 1;
        for idx in path.as_slice() {
            doc = doc.children.entry(*idx).or_default();
            doc.total += 1;
        }
        doc.stop_total += 1;
        self.assignments[token.doc][token.pos] = Some(path.clone());
        Ok(())
    }

    /// Exact inverse of [`Forest::assign`]. Nodes left empty are destroyed.
    pub fn unassign(&mut self, token: TokenInstance) -> Option<NodePath> {
        let Some(path) = self.assignments[token.doc][token.pos].take() else {
            warn!("token {}:{} is not assigned", token.doc, token.pos);
            return None;
        };
        remove_token(&mut self.corpus, path.as_slice(), token, 0, &self.deltas);
        remove_doc_token(&mut self.docs[token.doc], path.as_slice());
        Some(path)
    }

    /// Creates the next child of `parent` in the corpus tree, subject to the
    /// growth rules. The root is exempt from the splitting-mass threshold.
    /// Siblings are checked against the critical mass on their live totals;
    /// the `valid` flag itself only changes at sweeps.
    /// The caller must assign a token to the new node before the next audit.
    pub fn create_child(&mut self, parent: &NodePath, growth_frozen: bool) -> Result<NodePath, Refusal> {
        if growth_frozen {
            return Err(Refusal::Frozen);
        }
        let rules = self.rules;
        let mut node = &mut self.corpus;
        for idx in parent.as_slice() {
            node = node.children.get_mut(idx).ok_or(Refusal::DeadParent)?;
        }
        if !parent.is_root() && (node.total as f64) < rules.splitting {
            return Err(Refusal::BelowSplittingMass);
        }
        if node.children.values().any(|c| !rules.is_valid(c.total)) {
            return Err(Refusal::InvalidSibling);
        }
        let index = node.next_child;
        node.next_child += 1;
        node.children.insert(index, TopicNode::new(rules.ttl));
        Ok(parent.child(index))
    }

    /// Whether [`Forest::create_child`] would succeed, without mutating.
    pub fn can_create_child(&self, parent: &NodePath, growth_frozen: bool) -> bool {
        if growth_frozen {
            return false;
        }
        let Some(node) = self.node(parent) else {
            return false;
        };
        (parent.is_root() || node.total as f64 >= self.rules.splitting)
            && node.children.values().all(|c| self.rules.is_valid(c.total))
    }

    /// End-of-pass maintenance: refreshes validity, counts down the TTL of
    /// invalid nodes and destroys the ones that ran out, unassigning every
    /// token that stopped in a destroyed subtree.
    pub fn sweep_ttl(&mut self, corpus: &Corpus) -> Vec<NodePath> {
        let mut doomed = Vec::new();
        sweep_node(&mut self.corpus, &NodePath::root(), &self.rules, &mut doomed);
        if doomed.is_empty() {
            return doomed;
        }
        for doc in 0..self.assignments.len() {
            for pos in 0..self.assignments[doc].len() {
                let hit = match &self.assignments[doc][pos] {
                    Some(p) => doomed.iter().any(|d| p.starts_with(d)),
                    None => false,
                };
                if hit {
                    self.unassign(TokenInstance::of(corpus, doc, pos));
                }
            }
        }
        debug_assert!(doomed.iter().all(|p| self.node(p).is_none()));
        doomed
    }

    /// Preorder walk over live corpus-tree nodes, root excluded.
    pub fn walk<'a>(&'a self, mut f: impl FnMut(&NodePath, &'a TopicNode)) {
        fn go<'a>(node: &'a TopicNode, path: &mut NodePath, f: &mut impl FnMut(&NodePath, &'a TopicNode)) {
            for (&idx, child) in &node.children {
                path.0.push(idx);
                f(path, child);
                go(child, path, f);
                path.0.pop();
            }
        }
        go(&self.corpus, &mut NodePath::root(), &mut f);
    }

    pub fn live_nodes(&self) -> usize {
        let mut n = 0;
        self.walk(|_, _| n += 1);
        n
    }

    pub fn max_depth(&self) -> usize {
        let mut d = 0;
        self.walk(|p, _| d = d.max(p.depth()));
        d
    }

    pub fn node_meta(&self) -> Vec<NodeMeta> {
        let mut out = vec![NodeMeta {
            path: NodePath::root(),
            valid: false,
            ttl: 0,
            next_child: self.corpus.next_child,
        }];
        self.walk(|p, n| {
            out.push(NodeMeta {
                path: p.clone(),
                valid: n.valid,
                ttl: n.ttl,
                next_child: n.next_child,
            })
        });
        out
    }

    /// Rebuilds both trees from an assignment list plus node metadata.
    pub fn rebuild(
        corpus: &Corpus,
        params: &HyperParams,
        assignments: &[Vec<Option<NodePath>>],
        meta: &[NodeMeta],
    ) -> Result<Self> {
        let mut forest = Forest::new(corpus, params);
        if assignments.len() != corpus.documents.len()
            || assignments
                .iter()
                .zip(&corpus.documents)
                .any(|(a, d)| a.len() != d.tokens.len())
        {
            return Err(Error::Checkpoint("assignment shape differs from corpus".into()));
        }
        let mut meta: Vec<&NodeMeta> = meta.iter().collect();
        meta.sort_by(|a, b| a.path.cmp(&b.path));
        for m in &meta {
            if m.path.is_root() {
                forest.corpus.next_child = m.next_child;
                continue;
            }
            let parent = m.path.parent().expect("non-root");
            let mut node = &mut forest.corpus;
            for idx in parent.as_slice() {
                node = node
                    .children
                    .get_mut(idx)
                    .ok_or_else(|| Error::Checkpoint(format!("orphan node {}", m.path)))?;
            }
            let mut fresh = TopicNode::new(m.ttl);
            fresh.valid = m.valid;
            fresh.next_child = m.next_child;
            node.children.insert(*m.path.as_slice().last().unwrap(), fresh);
        }
        for (doc, row) in assignments.iter().enumerate() {
            for (pos, path) in row.iter().enumerate() {
                if let Some(path) = path {
                    forest.assign(TokenInstance::of(corpus, doc, pos), path)?;
                }
            }
        }
        forest.audit()?;
        Ok(forest)
    }

    /// Checks every count identity of both tree kinds and the cross-tree
    /// partition property.
    pub fn audit(&self) -> Result<()> {
        fn fail(path: &NodePath, message: String) -> Result<()> {
            Err(Error::Audit {
                path: path.clone(),
                message,
            })
        }

        fn check_topic(node: &TopicNode, path: &mut NodePath, out: &mut Result<()>) {
            if out.is_err() {
                return;
            }
            let child_sum: u64 = node.children.values().map(|c| c.total).sum();
            if node.total != node.stop_total + child_sum {
                *out = fail(path, format!("total {} != stop {} + children {}", node.total, node.stop_total, child_sum));
                return;
            }
            if !path.is_root() && node.total == 0 {
                *out = fail(path, "live node with zero total".into());
                return;
            }
            if node.time.count() != node.total {
                *out = fail(path, "time stats count differs from total".into());
                return;
            }
            let word_sum: u64 = node.total_by_word.values().map(|&c| c as u64).sum();
            let stop_sum: u64 = node.stop_by_word.values().map(|&c| c as u64).sum();
            if word_sum != node.total || stop_sum != node.stop_total {
                *out = fail(path, "word counts do not sum to totals".into());
                return;
            }
            let mut expected: FxHashMap<u32, u64> = node.word_stops().collect();
            for child in node.children.values() {
                for (w, c) in child.word_totals() {
                    *expected.entry(w).or_default() += c;
                }
            }
            if expected.len() != node.total_by_word.len()
                || expected.iter().any(|(w, c)| node.word_total(*w) != *c)
            {
                *out = fail(path, "per-word totals differ from stop + children".into());
                return;
            }
            for (&idx, child) in &node.children {
                if idx >= node.next_child {
                    *out = fail(path, format!("child index {idx} beyond counter"));
                    return;
                }
                path.0.push(idx);
                check_topic(child, path, out);
                path.0.pop();
            }
        }

        fn check_doc(node: &DocNode, path: &mut NodePath, sums: &mut FxHashMap<NodePath, u64>, out: &mut Result<()>) {
            if out.is_err() {
                return;
            }
            let child_sum: u64 = node.children.values().map(|c| c.total).sum();
            if node.total != node.stop_total + child_sum {
                *out = fail(path, "document tree total != stop + children".into());
                return;
            }
            if !path.is_root() && node.total == 0 {
                *out = fail(path, "live document node with zero total".into());
                return;
            }
            *sums.entry(path.clone()).or_default() += node.total;
            for (&idx, child) in &node.children {
                path.0.push(idx);
                check_doc(child, path, sums, out);
                path.0.pop();
            }
        }

        let mut out = Ok(());
        check_topic(&self.corpus, &mut NodePath::root(), &mut out);
        std::mem::replace(&mut out, Ok(()))?;
        let mut sums = FxHashMap::default();
        for doc in &self.docs {
            check_doc(doc, &mut NodePath::root(), &mut sums, &mut out);
            std::mem::replace(&mut out, Ok(()))?;
        }
        for (path, sum) in &sums {
            match self.node(path) {
                Some(n) if n.total == *sum => {}
                Some(n) => return fail(path, format!("document trees sum to {sum}, corpus tree has {}", n.total)),
                None => return fail(path, "document node has no corpus counterpart".into()),
            }
        }
        let mut missing = None;
        self.walk(|p, _| {
            if missing.is_none() && !sums.contains_key(p) {
                missing = Some(p.clone());
            }
        });
        if let Some(p) = missing {
            return fail(&p, "corpus node absent from every document tree".into());
        }
        let assigned = self.assignments.iter().flatten().filter(|a| a.is_some()).count() as u64;
        if assigned != self.corpus.total {
            return fail(&NodePath::root(), format!("{assigned} assigned tokens, root holds {}", self.corpus.total));
        }
        Ok(())
    }

    /// Debug dump, one node per line: `path total stop_total valid rho1 rho2`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.walk(|p, n| {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\n",
                p, n.total, n.stop_total, n.valid, n.beta.rho1, n.beta.rho2
            ));
        });
        out
    }
}

fn add_token(node: &mut TopicNode, token: TokenInstance, stops: bool) {
    node.total += 1;
    *node.total_by_word.entry(token.word).or_default() += 1;
    node.time.add(token.time);
    if stops {
        node.stop_total += 1;
        *node.stop_by_word.entry(token.word).or_default() += 1;
    }
}

fn decrement(map: &mut FxHashMap<u32, u32>, word: u32) {
    let c = map.get_mut(&word).expect("word count present");
    *c -= 1;
    if *c == 0 {
        map.remove(&word);
    }
}

fn remove_token(node: &mut TopicNode, rest: &[u32], token: TokenInstance, depth: usize, deltas: &DepthDeltas) {
    node.total -= 1;
    decrement(&mut node.total_by_word, token.word);
    node.time.remove(token.time);
    match rest.split_first() {
        None => {
            node.stop_total -= 1;
            decrement(&mut node.stop_by_word, token.word);
        }
        Some((idx, tail)) => {
            let child = node.children.get_mut(idx).expect("assigned path is live");
            remove_token(child, tail, token, depth + 1, deltas);
            if child.total == 0 {
                node.children.remove(idx);
            }
        }
    }
    if depth > 0 && node.total > 0 {
        node.refresh_beta((deltas.time_enabled(depth)).then(|| deltas.at(depth)));
    }
}

fn remove_doc_token(node: &mut DocNode, rest: &[u32]) {
    node.total -= 1;
    match rest.split_first() {
        None => node.stop_total -= 1,
        Some((idx, tail)) => {
            let child = node.children.get_mut(idx).expect("document path is live");
            remove_doc_token(child, tail);
            if child.total == 0 {
                node.children.remove(idx);
            }
        }
    }
}

fn sweep_node(node: &mut TopicNode, path: &NodePath, rules: &GrowthRules, doomed: &mut Vec<NodePath>) {
    for (&idx, child) in node.children.iter_mut() {
        let child_path = path.child(idx);
        child.valid = rules.is_valid(child.total);
        if child.valid {
            child.ttl = rules.ttl;
        } else {
            child.ttl = child.ttl.saturating_sub(1);
            if child.ttl == 0 {
                doomed.push(child_path);
                continue;
            }
        }
        sweep_node(child, &child_path, rules, doomed);
    }
}
