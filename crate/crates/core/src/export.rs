//! The topic-tree document read by the explorer and downstream tools.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TokenKind};
use crate::error::{io_err, Error, Result};
use crate::idt::{DocNode, Forest, NodePath, TopicNode};
use crate::ranking::{is_reportable, ranked_words};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportOptions {
    pub top_words: usize,
    pub top_entities: usize,
    pub top_documents: usize,
    pub time_bins: usize,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self {
            top_words: 20,
            top_entities: 20,
            top_documents: 5,
            time_bins: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub surface: String,
    pub count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportBeta {
    pub rho1: f64,
    pub rho2: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopDocument {
    pub id: String,
    pub title: String,
    /// Tokens of the document assigned to the topic or its descendants.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub id: String,
    pub path: NodePath,
    pub depth: usize,
    pub size: u64,
    pub top_words: Vec<RankedTerm>,
    pub top_entities: Vec<RankedTerm>,
    pub beta: ExportBeta,
    /// Counts of assigned timestamps in equal bins over [0, 1].
    pub empirical_time: Vec<u64>,
    pub top_documents: Vec<TopDocument>,
    #[serde(default)]
    pub label: Option<String>,
    pub children: Vec<ExportNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicTreeExport {
    pub schema_version: u32,
    pub num_documents: usize,
    pub num_tokens: u64,
    pub time_start: String,
    pub time_end: String,
    pub topics: Vec<ExportNode>,
}

impl TopicTreeExport {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let export: Self = serde_json::from_slice(&bytes)?;
        if export.schema_version != SCHEMA_VERSION {
            return Err(Error::Params(format!(
                "unsupported export schema version {}",
                export.schema_version
            )));
        }
        Ok(export)
    }

    /// Preorder iteration over every exported node.
    pub fn nodes(&self) -> Vec<&ExportNode> {
        fn go<'a>(nodes: &'a [ExportNode], out: &mut Vec<&'a ExportNode>) {
            for n in nodes {
                out.push(n);
                go(&n.children, out);
            }
        }
        let mut out = Vec::new();
        go(&self.topics, &mut out);
        out
    }

    fn node_mut(&mut self, id: &str) -> Option<&mut ExportNode> {
        fn go<'a>(nodes: &'a mut [ExportNode], id: &str) -> Option<&'a mut ExportNode> {
            for n in nodes {
                if n.id == id {
                    return Some(n);
                }
                if let Some(found) = go(&mut n.children, id) {
                    return Some(found);
                }
            }
            None
        }
        go(&mut self.topics, id)
    }
}

/// Histogram bin of a fixed-point timestamp.
pub fn time_bin(time: u64, bins: usize) -> usize {
    let scaled = (time as u128 * bins as u128) >> 32;
    (scaled as usize).min(bins - 1)
}

/// Exports every valid topic of the corpus tree.
pub fn export_model(forest: &Forest, corpus: &Corpus, options: &ExportOptions) -> TopicTreeExport {
    let bins = options.time_bins.max(1);
    let mut hist: BTreeMap<NodePath, Vec<u64>> = BTreeMap::new();
    let mut docs: BTreeMap<NodePath, Vec<(u64, usize)>> = BTreeMap::new();
    forest.walk(|p, n| {
        if is_reportable(forest, n) {
            hist.insert(p.clone(), vec![0; bins]);
            docs.insert(p.clone(), Vec::new());
        }
    });
    for (d, row) in forest.assignments().iter().enumerate() {
        let bin = time_bin(corpus.documents[d].time, bins);
        for path in row.iter().flatten() {
            for depth in 1..=path.depth() {
                let prefix = NodePath::from(&path.as_slice()[..depth]);
                match hist.get_mut(&prefix) {
                    Some(h) => h[bin] += 1,
                    None => break,
                }
            }
        }
        walk_doc(forest.doc_root(d), &NodePath::root(), &mut |p, n| {
            if let Some(list) = docs.get_mut(p) {
                list.push((n.total(), d));
            }
        });
    }

    fn build(
        forest: &Forest,
        corpus: &Corpus,
        options: &ExportOptions,
        path: &NodePath,
        node: &TopicNode,
        hist: &mut BTreeMap<NodePath, Vec<u64>>,
        docs: &mut BTreeMap<NodePath, Vec<(u64, usize)>>,
    ) -> ExportNode {
        let terms = |kind, n| {
            ranked_words(node, &corpus.vocab, Some(kind))
                .into_iter()
                .take(n)
                .map(|(w, count)| RankedTerm {
                    surface: corpus.vocab.surface(w).to_string(),
                    count,
                })
                .collect()
        };
        let mut top = docs.remove(path).unwrap_or_default();
        top.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let beta = node.beta();
        ExportNode {
            id: path.id(),
            path: path.clone(),
            depth: path.depth(),
            size: node.total(),
            top_words: terms(TokenKind::Word, options.top_words),
            top_entities: terms(TokenKind::Entity, options.top_entities),
            beta: ExportBeta {
                rho1: beta.rho1,
                rho2: beta.rho2,
                delta: forest.deltas().at(path.depth()),
            },
            empirical_time: hist.remove(path).unwrap_or_default(),
            top_documents: top
                .into_iter()
                .take(options.top_documents)
                .map(|(count, d)| TopDocument {
                    id: corpus.documents[d].id.clone(),
                    title: corpus.documents[d].title.clone(),
                    count,
                })
                .collect(),
            label: None,
            children: node
                .children()
                .filter(|(_, c)| is_reportable(forest, c))
                .map(|(i, c)| build(forest, corpus, options, &path.child(i), c, hist, docs))
                .collect(),
        }
    }

    let root = NodePath::root();
    let topics = forest
        .root()
        .children()
        .filter(|(_, c)| is_reportable(forest, c))
        .map(|(i, c)| build(forest, corpus, options, &root.child(i), c, &mut hist, &mut docs))
        .collect();
    TopicTreeExport {
        schema_version: SCHEMA_VERSION,
        num_documents: corpus.num_docs(),
        num_tokens: corpus.n,
        time_start: corpus.t_min.to_rfc3339(),
        time_end: corpus.t_max.to_rfc3339(),
        topics,
    }
}

fn walk_doc(node: &DocNode, path: &NodePath, f: &mut impl FnMut(&NodePath, &DocNode)) {
    for (i, child) in node.children() {
        let p = path.child(i);
        f(&p, child);
        walk_doc(child, &p, f);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocTopicShare {
    pub path: NodePath,
    pub id: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentTopicTree {
    pub doc_id: String,
    pub nodes: Vec<DocTopicShare>,
}

/// Topics holding at least `threshold` of a document's tokens, in preorder.
/// Ancestors of a listed topic always qualify too.
pub fn document_tree(forest: &Forest, corpus: &Corpus, doc_id: &str, threshold: f64) -> Result<DocumentTopicTree> {
    let d = corpus
        .doc_index(doc_id)
        .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))?;
    let n_d = corpus.documents[d].len() as f64;
    let mut nodes = Vec::new();
    walk_doc(forest.doc_root(d), &NodePath::root(), &mut |p, n| {
        let share = n.total() as f64 / n_d;
        if share >= threshold {
            nodes.push(DocTopicShare {
                path: p.clone(),
                id: p.id(),
                count: n.total(),
                share,
            });
        }
    });
    Ok(DocumentTopicTree {
        doc_id: doc_id.to_string(),
        nodes,
    })
}

/// Analyst-assigned titles keyed by node id.
pub type Labels = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelRejection {
    pub id: String,
    pub reason: String,
}

/// Applies every label whose node exists; the others are returned.
pub fn apply_labels(export: &mut TopicTreeExport, labels: &Labels) -> Vec<LabelRejection> {
    let mut rejected = Vec::new();
    for (id, title) in labels {
        match export.node_mut(id) {
            Some(node) => node.label = Some(title.clone()),
            None => rejected.push(LabelRejection {
                id: id.clone(),
                reason: "no such topic in the export".into(),
            }),
        }
    }
    rejected
}

pub fn load_labels(path: &Path) -> Result<Labels> {
    if !path.exists() {
        return Ok(Labels::new());
    }
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub fn save_labels(path: &Path, labels: &Labels) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string_pretty(labels)?).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}
