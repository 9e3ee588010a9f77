//! Gibbs sampling over the trees: every token is unassigned, a new path is
//! drawn level by level from the root, and the token is assigned again.

mod checkpoint;
pub mod draw;
mod train;

use rand::Rng;

pub use checkpoint::{Checkpoint, DocAssignments};
pub use draw::{
    draw_level, level_weights, CaseMasses, Candidate, DescentWeights, DrawContext, LevelChoice,
    LevelOutcome,
};
pub use train::{train, BatchStats, TrainState, TrainedModel, Trainer};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::idt::{Forest, NodePath, TokenInstance};
use crate::params::HyperParams;

/// Fills `ctx` for a level draw of `token` below `parent`. The draw works on
/// the sub-corpus of tokens at or below `parent`, so `n_d` and `n_w` are
/// counted there.
pub fn level_context(forest: &Forest, corpus: &Corpus, token: &TokenInstance, parent: &NodePath, ctx: &mut DrawContext) {
    let doc_len = forest.doc_node(token.doc, parent).map_or(0, |d| d.total());
    let word_freq = forest.node(parent).map_or(0, |n| n.word_total(token.word));
    ctx.gather(forest, token, parent, doc_len, word_freq, corpus.vocab_len());
}

/// Reusable scratch space for token resampling.
#[derive(Debug, Default)]
pub struct Sampler {
    ctx: DrawContext,
    weights: Vec<(LevelOutcome, f64)>,
    /// Nodes created since the counter was last reset.
    pub created: u64,
}

impl Sampler {
    pub fn new() -> Self {
        Self::default()
    }

    /// Unassigns `token` (if assigned), draws a new path and assigns it.
    pub fn resample_token<R: Rng + ?Sized>(
        &mut self,
        forest: &mut Forest,
        corpus: &Corpus,
        params: &HyperParams,
        token: TokenInstance,
        growth_frozen: bool,
        rng: &mut R,
    ) -> Result<NodePath> {
        if forest.assignment(token.doc, token.pos).is_some() {
            forest.unassign(token);
        }
        let path = self.draw_path(forest, corpus, params, token, growth_frozen, rng)?;
        forest.assign(token, &path)?;
        Ok(path)
    }

    fn draw_path<R: Rng + ?Sized>(
        &mut self,
        forest: &mut Forest,
        corpus: &Corpus,
        params: &HyperParams,
        token: TokenInstance,
        growth_frozen: bool,
        rng: &mut R,
    ) -> Result<NodePath> {
        let vocab_len = corpus.vocab_len();
        let prior = params.bernoulli_prior();
        let mut parent = NodePath::root();
        loop {
            level_context(forest, corpus, &token, &parent, &mut self.ctx);
            let mut created = false;
            let choice = draw_level(&self.ctx, params, rng, &mut self.weights, || {
                let r = forest.create_child(&parent, growth_frozen).ok();
                created = r.is_some();
                r
            });
            match choice {
                LevelChoice::Created(path) => {
                    debug_assert!(created);
                    self.created += 1;
                    return Ok(path);
                }
                LevelChoice::StopAtParent => {
                    if parent.is_root() {
                        return Err(Error::Params(
                            "no topic exists and growth is frozen".into(),
                        ));
                    }
                    return Ok(parent);
                }
                LevelChoice::Existing(index) => {
                    let chosen = parent.child(index);
                    if params.max_depth.is_some_and(|m| chosen.depth() >= m) {
                        return Ok(chosen);
                    }
                    let weights = draw::gather_descent(forest, &token, &chosen, params, vocab_len);
                    if rng.random::<f64>() < weights.stop_probability(prior) {
                        return Ok(chosen);
                    }
                    parent = chosen;
                }
            }
        }
    }
}
