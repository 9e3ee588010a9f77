//! Shared fixtures for the criterion benches.

use htmot_core::scaling::scaling_spec;
use htmot_core::{generate, Corpus, HyperParams, Trainer};

/// Parameters the benches train with.
pub fn bench_params() -> HyperParams {
    HyperParams {
        alpha: 0.01,
        beta: 0.01,
        iterations: u64::MAX,
        ..HyperParams::default()
    }
}

pub fn bench_corpus(docs: usize) -> Corpus {
    generate(&scaling_spec(docs, 1)).expect("valid scaling spec").corpus
}

/// A trainer that has already run `passes` full passes, so the tree is grown.
pub fn warm_trainer(corpus: &Corpus, passes: u64) -> Trainer<'_> {
    let mut trainer = Trainer::new(corpus, bench_params(), 1).expect("valid parameters");
    while trainer.state().passes < passes {
        trainer.step().expect("training step");
    }
    trainer
}
