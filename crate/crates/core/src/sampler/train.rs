use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Checkpoint, DocAssignments, Sampler};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::evaluation::sibling_kl_by_depth;
use crate::idt::{Forest, TokenInstance};
use crate::params::HyperParams;

/// Statistics recorded after each batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub iteration: u64,
    /// Completed full passes at the end of the batch.
    pub passes: u64,
    /// Live nodes per depth; index 0 is depth 1.
    pub live_per_depth: Vec<usize>,
    /// Nodes flagged valid per depth.
    pub valid_per_depth: Vec<usize>,
    /// Mean symmetric KL divergence between valid siblings, by depth.
    pub sibling_kl: BTreeMap<usize, f64>,
    /// Sizes of the valid depth-1 topics, keyed by node id.
    pub depth1_sizes: BTreeMap<String, u64>,
    pub created: u64,
    pub destroyed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    /// Batches completed.
    pub iteration: u64,
    /// Documents visited.
    pub visits: u64,
    pub passes: u64,
    pub growth_frozen: bool,
    pub history: Vec<BatchStats>,
}

/// Output of a training run.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub params: HyperParams,
    pub seed: u64,
    pub forest: Forest,
    pub state: TrainState,
}

/// Batch-by-batch driver of the Gibbs sampler.
///
/// Documents are visited in a cyclic order fixed by a seeded shuffle. Every
/// document visit draws from its own ChaCha stream keyed by the seed and the
/// visit counter, so a run resumed from a checkpoint is bit-identical to an
/// uninterrupted one.
pub struct Trainer<'a> {
    corpus: &'a Corpus,
    params: HyperParams,
    seed: u64,
    forest: Forest,
    state: TrainState,
    order: Vec<usize>,
    sampler: Sampler,
}

impl<'a> Trainer<'a> {
    pub fn new(corpus: &'a Corpus, params: HyperParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if corpus.documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let forest = Forest::new(corpus, &params);
        Ok(Self {
            order: visit_order(corpus.documents.len(), seed),
            corpus,
            params,
            seed,
            forest,
            state: TrainState::default(),
            sampler: Sampler::new(),
        })
    }

    pub fn resume(corpus: &'a Corpus, checkpoint: Checkpoint) -> Result<Self> {
        checkpoint.params.validate()?;
        if checkpoint.assignments.len() != corpus.documents.len()
            || checkpoint
                .assignments
                .iter()
                .zip(&corpus.documents)
                .any(|(a, d)| a.doc_id != d.id)
        {
            return Err(Error::Checkpoint("document ids differ".into()));
        }
        let rows: Vec<_> = checkpoint.assignments.into_iter().map(|a| a.paths).collect();
        let forest = Forest::rebuild(corpus, &checkpoint.params, &rows, &checkpoint.nodes)?;
        Ok(Self {
            order: visit_order(corpus.documents.len(), checkpoint.seed),
            corpus,
            params: checkpoint.params,
            seed: checkpoint.seed,
            forest,
            state: checkpoint.state,
            sampler: Sampler::new(),
        })
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn state(&self) -> &TrainState {
        &self.state
    }

    pub fn params(&self) -> &HyperParams {
        &self.params
    }

    pub fn finished(&self) -> bool {
        self.state.iteration >= self.params.iterations
    }

    /// Runs one batch of `batch_size` document visits.
    pub fn step(&mut self) -> Result<()> {
        let frozen = self.state.growth_frozen || self.state.iteration >= self.params.sgi;
        self.state.growth_frozen = frozen;
        self.sampler.created = 0;
        let num_docs = self.corpus.documents.len() as u64;
        let mut destroyed = 0;
        for _ in 0..self.params.batch_size {
            let doc = self.order[(self.state.visits % num_docs) as usize];
            let mut rng = visit_rng(self.seed, self.state.visits);
            for pos in 0..self.corpus.documents[doc].len() {
                let token = TokenInstance::of(self.corpus, doc, pos);
                self.sampler.resample_token(
                    &mut self.forest,
                    self.corpus,
                    &self.params,
                    token,
                    frozen,
                    &mut rng,
                )?;
            }
            self.state.visits += 1;
            if self.state.visits % num_docs == 0 {
                destroyed += self.forest.sweep_ttl(self.corpus).len() as u64;
                self.state.passes += 1;
            }
        }
        self.state.iteration += 1;
        let stats = self.batch_stats(self.sampler.created, destroyed);
        self.state.history.push(stats);
        Ok(())
    }

    pub fn run_for(&mut self, batches: u64) -> Result<()> {
        for _ in 0..batches {
            if self.finished() {
                break;
            }
            self.step()?;
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<()> {
        while !self.finished() {
            self.step()?;
        }
        Ok(())
    }

    fn batch_stats(&self, created: u64, destroyed: u64) -> BatchStats {
        let mut live_per_depth = Vec::new();
        let mut valid_per_depth = Vec::new();
        let mut depth1_sizes = BTreeMap::new();
        self.forest.walk(|path, node| {
            let d = path.depth();
            if live_per_depth.len() < d {
                live_per_depth.resize(d, 0);
                valid_per_depth.resize(d, 0);
            }
            live_per_depth[d - 1] += 1;
            if node.valid() {
                valid_per_depth[d - 1] += 1;
                if d == 1 {
                    depth1_sizes.insert(path.id(), node.total());
                }
            }
        });
        BatchStats {
            iteration: self.state.iteration,
            passes: self.state.passes,
            live_per_depth,
            valid_per_depth,
            sibling_kl: sibling_kl_by_depth(&self.forest, self.params.phi, self.corpus.vocab_len()),
            depth1_sizes,
            created,
            destroyed,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: Checkpoint::VERSION,
            seed: self.seed,
            params: self.params.clone(),
            state: self.state.clone(),
            nodes: self.forest.node_meta(),
            assignments: self
                .corpus
                .documents
                .iter()
                .zip(self.forest.assignments())
                .map(|(d, a)| DocAssignments {
                    doc_id: d.id.clone(),
                    paths: a.clone(),
                })
                .collect(),
        }
    }

    pub fn into_model(self) -> TrainedModel {
        TrainedModel {
            params: self.params,
            seed: self.seed,
            forest: self.forest,
            state: self.state,
        }
    }
}

/// Trains for `params.iterations` batches.
pub fn train(corpus: &Corpus, params: HyperParams, seed: u64) -> Result<TrainedModel> {
    let mut trainer = Trainer::new(corpus, params, seed)?;
    trainer.run()?;
    Ok(trainer.into_model())
}

fn visit_order(num_docs: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..num_docs).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

fn visit_rng(seed: u64, visit: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(visit);
    rng
}
