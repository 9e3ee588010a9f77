//! Corpora with a known topic hierarchy, for checking what training recovers.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{fixed_to_tau, Corpus, DocumentInput, FilterConfig, RawRecord, RawToken, TokenKind};
use crate::error::{io_err, Error, Result};
use crate::idt::NodePath;

/// One topic of the generating tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicSpec {
    pub name: String,
    /// Size of the topic's vocabulary.
    pub words: usize,
    /// Time window of a leaf, as fractions of the time span.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Vocabulary overlap among this topic's children; defaults to the
    /// spec-wide value.
    #[serde(default)]
    pub overlap: Option<f64>,
    #[serde(default)]
    pub children: Vec<TopicSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub docs_per_leaf: usize,
    pub tokens_per_doc: usize,
    /// Fraction of each topic's vocabulary shared with its siblings.
    #[serde(default)]
    pub overlap: f64,
    /// Share of a document's tokens drawn from each depth of its leaf's path,
    /// starting at depth 1. Renormalized over the depths the path has.
    pub level_weights: Vec<f64>,
    /// Zipf exponent of the within-topic word distribution; 0 is uniform.
    #[serde(default)]
    pub zipf: f64,
    /// Length of the generated time span in days.
    #[serde(default = "default_span_days")]
    pub span_days: u32,
    pub topics: Vec<TopicSpec>,
}

fn default_span_days() -> u32 {
    365
}

impl SyntheticSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(serde_json::from_str(&text)?),
            _ => Self::from_toml(&text),
        }
    }
}

/// Vocabulary and word weights of a generating topic.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicWords {
    pub path: NodePath,
    pub name: String,
    pub words: Vec<String>,
    pub weights: Vec<f64>,
    /// Window in raw fractions of the span, for leaves.
    pub window: Option<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// Generating topic of every token, by document and position.
    pub truth: Vec<Vec<NodePath>>,
    /// Generating leaf of every document.
    pub doc_leaf: Vec<NodePath>,
    /// Every generating topic in preorder.
    pub topics: Vec<TopicWords>,
    /// Raw records, ready to be written as an ingestion file.
    pub records: Vec<RawRecord>,
}

impl SyntheticCorpus {
    pub fn topic(&self, path: &NodePath) -> Option<&TopicWords> {
        self.topics.iter().find(|t| &t.path == path)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TopicWords> {
        self.topics.iter().filter(|t| t.window.is_some())
    }

    /// A leaf's window in normalized corpus time.
    pub fn normalized_window(&self, path: &NodePath) -> Option<[f64; 2]> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (d, leaf) in self.doc_leaf.iter().enumerate() {
            if leaf == path {
                let t = fixed_to_tau(self.corpus.documents[d].time);
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        (lo <= hi).then_some([lo, hi])
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.push(b'\n');
        }
        let mut f = fs::File::create(path).map_err(io_err(path))?;
        f.write_all(&out).map_err(io_err(path))
    }
}

fn build_topics(
    spec: &SyntheticSpec,
    nodes: &[TopicSpec],
    parent: &NodePath,
    overlap: f64,
    out: &mut Vec<TopicWords>,
) -> Result<()> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::Synthetic("overlap must lie in [0, 1]".into()));
    }
    let shared = nodes.iter().map(|n| n.words).min().unwrap_or(0) as f64 * overlap;
    let shared = shared.round() as usize;
    let pool_name = if parent.is_root() { "root".to_string() } else { format!("t{parent}") };
    for (i, node) in nodes.iter().enumerate() {
        let path = parent.child(i as u32);
        if node.words == 0 {
            return Err(Error::Synthetic(format!("topic {} has an empty vocabulary", node.name)));
        }
        if node.children.is_empty() {
            match node.window {
                Some([a, b]) if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a <= b => {}
                _ => {
                    return Err(Error::Synthetic(format!(
                        "leaf {} needs a window inside [0, 1]",
                        node.name
                    )))
                }
            }
        }
        let words: Vec<String> = (0..node.words)
            .map(|k| {
                if k < shared {
                    format!("{pool_name}_shared{k}")
                } else {
                    format!("{}{k}", node.name)
                }
            })
            .collect();
        let weights = (0..node.words).map(|k| ((k + 1) as f64).powf(-spec.zipf)).collect();
        out.push(TopicWords {
            path: path.clone(),
            name: node.name.clone(),
            words,
            weights,
            window: if node.children.is_empty() { node.window } else { None },
        });
        let overlap = node.overlap.unwrap_or(spec.overlap);
        build_topics(spec, &node.children, &path, overlap, out)?;
    }
    Ok(())
}

/// Samples a corpus top-down from `spec`. Every leaf gets `docs_per_leaf`
/// documents with timestamps uniform in its window; every token picks a depth
/// along the leaf's path by `level_weights` and a word of that topic.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    if spec.topics.is_empty() || spec.docs_per_leaf == 0 || spec.tokens_per_doc == 0 {
        return Err(Error::Synthetic("spec generates no tokens".into()));
    }
    if spec.level_weights.is_empty() || spec.level_weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Synthetic("level weights must be non-negative".into()));
    }
    let mut topics = Vec::new();
    build_topics(spec, &spec.topics, &NodePath::root(), spec.overlap, &mut topics)?;
    let samplers: Vec<WeightedIndex<f64>> = topics
        .iter()
        .map(|t| WeightedIndex::new(&t.weights).expect("positive weights"))
        .collect();
    let index_of = |p: &NodePath| topics.iter().position(|t| &t.path == p).expect("known topic");

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start = DateTime::<Utc>::UNIX_EPOCH + Duration::days(20_000);
    let span_ms = spec.span_days as f64 * 86_400_000.0;
    let mut inputs = Vec::new();
    let mut records = Vec::new();
    let mut truth = Vec::new();
    let mut doc_leaf = Vec::new();
    for leaf in topics.iter().filter(|t| t.window.is_some()) {
        let [lo, hi] = leaf.window.unwrap();
        let path_nodes: Vec<usize> = (1..=leaf.path.depth())
            .map(|d| index_of(&NodePath::from(&leaf.path.as_slice()[..d])))
            .collect();
        let mut lw: Vec<f64> = (0..path_nodes.len())
            .map(|d| spec.level_weights.get(d).copied().unwrap_or(0.0))
            .collect();
        if lw.iter().sum::<f64>() <= 0.0 {
            *lw.last_mut().unwrap() = 1.0;
        }
        let levels = WeightedIndex::new(&lw).expect("positive level weights");
        for k in 0..spec.docs_per_leaf {
            let frac = lo + (hi - lo) * rng.random::<f64>();
            let timestamp = start + Duration::milliseconds((frac * span_ms).round() as i64);
            let mut tokens = Vec::with_capacity(spec.tokens_per_doc);
            let mut gen = Vec::with_capacity(spec.tokens_per_doc);
            for _ in 0..spec.tokens_per_doc {
                let level = levels.sample(&mut rng);
                let t = path_nodes[level];
                let w = samplers[t].sample(&mut rng);
                tokens.push((topics[t].words[w].clone(), TokenKind::Word));
                gen.push(topics[t].path.clone());
            }
            let id = format!("{}-{k}", leaf.name);
            records.push(RawRecord {
                id: id.clone(),
                title: String::new(),
                text: None,
                tokens: Some(
                    tokens
                        .iter()
                        .map(|(s, k)| RawToken { s: s.clone(), k: *k })
                        .collect(),
                ),
                timestamp: timestamp.to_rfc3339(),
                category: None,
            });
            inputs.push(DocumentInput {
                id,
                title: String::new(),
                category: None,
                timestamp,
                chars: 0,
                tokens,
            });
            truth.push(gen);
            doc_leaf.push(leaf.path.clone());
        }
    }
    let corpus = Corpus::build(inputs, &FilterConfig::permissive())?;
    debug_assert_eq!(corpus.documents.len(), truth.len());
    Ok(SyntheticCorpus {
        corpus,
        truth,
        doc_leaf,
        topics,
        records,
    })
}
