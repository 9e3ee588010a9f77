//! The per-level topic draw and the stop/descend Bernoulli.
//!
//! At each depth a token may pick an existing child of the current parent
//! through its document tree (local process), through the corpus tree
//! (global process), or open a new child. All outcomes form one categorical
//! draw; the three case masses sum to one before the per-topic factors are
//! applied.

use rand::Rng;

use crate::idt::{Forest, NodePath, TokenInstance};
use crate::params::HyperParams;
use crate::time_model::ModBeta;

/// Counts for one existing child of the current parent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub index: u32,
    /// Time density of the child at the token's timestamp.
    pub density: f64,
    /// `A(k|w)`.
    pub word_count: u64,
    /// `A(k|d)`, or `None` when the child is absent from the document tree.
    pub doc_count: Option<u64>,
    /// `A(k)`.
    pub total: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DrawContext {
    pub parent: NodePath,
    /// `n_d`: tokens of the document at or below the parent, current token excluded.
    pub doc_len: u64,
    /// `n_w`: corpus tokens of the word at or below the parent, current token excluded.
    pub word_freq: u64,
    pub vocab_len: usize,
    pub candidates: Vec<Candidate>,
}

impl DrawContext {
    pub fn depth(&self) -> usize {
        self.parent.depth() + 1
    }

    /// Refills the context for `token` below `parent`.
    pub fn gather(&mut self, forest: &Forest, token: &TokenInstance, parent: &NodePath, doc_len: u64, word_freq: u64, vocab_len: usize) {
        self.parent.clone_from(parent);
        self.doc_len = doc_len;
        self.word_freq = word_freq;
        self.vocab_len = vocab_len;
        self.candidates.clear();
        let Some(node) = forest.node(parent) else {
            return;
        };
        let doc_node = forest.doc_node(token.doc, parent);
        let tau = token.tau();
        for (index, child) in node.children() {
            self.candidates.push(Candidate {
                index,
                density: child.time_density(tau),
                word_count: child.word_total(token.word),
                doc_count: doc_node.and_then(|d| d.child(index)).map(|c| c.total()),
                total: child.total(),
            });
        }
    }
}

/// Probabilities of the local, global and new-topic cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaseMasses {
    pub local: f64,
    pub global: f64,
    pub new: f64,
}

impl CaseMasses {
    pub fn new(alpha: f64, beta: f64, doc_len: f64, word_freq: f64) -> Self {
        let not_local = alpha / (alpha + doc_len);
        Self {
            local: doc_len / (alpha + doc_len),
            global: word_freq / (beta + word_freq) * not_local,
            new: beta / (beta + word_freq) * not_local,
        }
    }

    pub fn sum(&self) -> f64 {
        self.local + self.global + self.new
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LevelOutcome {
    /// Existing child drawn through the document tree.
    Local(u32),
    /// Existing child drawn through the corpus tree.
    Global(u32),
    New,
}

impl LevelOutcome {
    pub fn index(&self) -> Option<u32> {
        match self {
            LevelOutcome::Local(i) | LevelOutcome::Global(i) => Some(*i),
            LevelOutcome::New => None,
        }
    }
}

/// Fills `out` with the unnormalized weight of every outcome of one level draw.
pub fn level_weights(ctx: &DrawContext, params: &HyperParams, out: &mut Vec<(LevelOutcome, f64)>) -> CaseMasses {
    out.clear();
    let n_d = ctx.doc_len as f64;
    let n_w = ctx.word_freq as f64;
    let masses = CaseMasses::new(params.alpha, params.beta, n_d, n_w);
    debug_assert!((masses.sum() - 1.0).abs() < 1e-12, "case masses sum to {}", masses.sum());
    let phi_v = params.phi * ctx.vocab_len as f64;
    // The case mass times 1/n_d (or 1/n_w), written so that empty counts stay finite.
    let local_scale = 1.0 / (params.alpha + n_d);
    let global_scale = params.alpha / (params.alpha + n_d) / (params.beta + n_w);
    for c in &ctx.candidates {
        let word_term = c.word_count as f64 + params.phi;
        if let Some(doc_count) = c.doc_count {
            let w = local_scale * c.density * (doc_count as f64 + params.epsilon) * word_term
                / (c.total as f64 + phi_v);
            out.push((LevelOutcome::Local(c.index), w));
        }
    }
    for c in &ctx.candidates {
        let w = global_scale * c.density * (c.word_count as f64 + params.phi);
        out.push((LevelOutcome::Global(c.index), w));
    }
    out.push((LevelOutcome::New, masses.new));
    masses
}

/// Normalizes a weight vector into probabilities.
pub fn normalize(weights: &[(LevelOutcome, f64)]) -> Vec<(LevelOutcome, f64)> {
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    weights.iter().map(|&(o, w)| (o, w / total)).collect()
}

/// Result of one level draw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelChoice {
    Existing(u32),
    Created(NodePath),
    /// No child could be chosen or created: the token stops at the parent.
    StopAtParent,
}

/// Draws one outcome. When the new-topic branch is drawn, `create` is asked
/// for a node; if it refuses, the branch is dropped and the draw repeated
/// over the remaining weights.
pub fn draw_level<R: Rng + ?Sized>(
    ctx: &DrawContext,
    params: &HyperParams,
    rng: &mut R,
    weights: &mut Vec<(LevelOutcome, f64)>,
    mut create: impl FnMut() -> Option<NodePath>,
) -> LevelChoice {
    level_weights(ctx, params, weights);
    loop {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return LevelChoice::StopAtParent;
        }
        let mut u = rng.random::<f64>() * total;
        let mut chosen = weights
            .iter()
            .rposition(|(_, w)| *w > 0.0)
            .expect("positive total");
        for (i, (_, w)) in weights.iter().enumerate() {
            if u < *w {
                chosen = i;
                break;
            }
            u -= w;
        }
        match weights[chosen].0 {
            LevelOutcome::Local(i) | LevelOutcome::Global(i) => return LevelChoice::Existing(i),
            LevelOutcome::New => match create() {
                Some(path) => return LevelChoice::Created(path),
                None => {
                    weights.remove(chosen);
                }
            },
        }
    }
}

/// The three weights of the stop/descend Bernoulli at a chosen node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentWeights {
    /// Weight of stopping at the chosen node (strict counts).
    pub parent: f64,
    /// Weight of a potential new child.
    pub new_child: f64,
    /// Summed weight of the existing children.
    pub children: f64,
}

impl DescentWeights {
    /// Probability of stopping, with Bernoulli prior `(theta1, theta2)`.
    pub fn stop_probability(&self, prior: (f64, f64)) -> f64 {
        let (t1, t2) = prior;
        (self.parent + t1) / (self.new_child + t1 + t2 + self.children + self.parent)
    }
}

/// Counts feeding one term of the descent weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentTerm {
    pub density: f64,
    pub word_count: u64,
    pub doc_count: u64,
    pub total: u64,
}

impl DescentTerm {
    pub fn weight(&self, phi: f64, epsilon: f64, vocab_len: usize) -> f64 {
        self.density * (self.word_count as f64 + phi) * (self.doc_count as f64 + epsilon)
            / (self.total as f64 + phi * vocab_len as f64)
    }
}

/// Combines the strict term of the chosen node with the inclusive terms of
/// its children.
pub fn descent_weights(
    node: DescentTerm,
    children: impl IntoIterator<Item = DescentTerm>,
    phi: f64,
    epsilon: f64,
    vocab_len: usize,
) -> DescentWeights {
    DescentWeights {
        parent: node.weight(phi, epsilon, vocab_len),
        new_child: phi * epsilon / (phi * vocab_len as f64),
        children: children
            .into_iter()
            .map(|c| c.weight(phi, epsilon, vocab_len))
            .sum(),
    }
}

/// Gathers the descent weights at `chosen` from the trees. Every density is
/// evaluated with the multiplier of the chosen node's depth.
pub fn gather_descent(forest: &Forest, token: &TokenInstance, chosen: &NodePath, params: &HyperParams, vocab_len: usize) -> DescentWeights {
    let node = forest.node(chosen).expect("chosen node is live");
    let doc_node = forest.doc_node(token.doc, chosen);
    let tau = token.tau();
    let depth = chosen.depth();
    let deltas = forest.deltas();
    let delta = deltas.at(depth);
    let same_delta = deltas.at(depth + 1) == delta || !deltas.time_enabled(depth);
    let own = DescentTerm {
        density: node.time_density(tau),
        word_count: node.word_stop(token.word),
        doc_count: doc_node.map_or(0, |d| d.stop_total()),
        total: node.stop_total(),
    };
    let children = node.children().map(|(idx, child)| {
        let density = if !child.valid() || !deltas.time_enabled(depth) {
            1.0
        } else if same_delta {
            child.time_density(tau)
        } else {
            ModBeta::new(child.beta(), delta).eval(tau)
        };
        DescentTerm {
            density,
            word_count: child.word_total(token.word),
            doc_count: doc_node.and_then(|d| d.child(idx)).map_or(0, |c| c.total()),
            total: child.total(),
        }
    });
    descent_weights(own, children, params.phi, params.epsilon, vocab_len)
}
