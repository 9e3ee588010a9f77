//! Throughput and convergence measurements over growing corpora.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::HyperParams;
use crate::sampler::{BatchStats, Trainer};
use crate::synthetic::{generate, SyntheticSpec, TopicSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub corpus_docs: usize,
    pub corpus_tokens: u64,
    pub iterations: u64,
    pub passes: u64,
    pub wall_seconds: f64,
    /// Wall time of one full pass over the corpus.
    pub seconds_per_pass: Option<f64>,
    pub seconds_per_iteration: Option<f64>,
    pub docs_per_hour: Option<f64>,
    pub tokens_per_sec: Option<f64>,
    pub iterations_to_plateau: Option<u64>,
    pub peak_live_nodes: usize,
    /// Valid depth-1 topic count after each iteration.
    pub depth1_series: Vec<usize>,
}

/// Generator used for every corpus size: three depth-1 topics with three
/// subtopics each, every subtopic in its own time window.
pub fn scaling_spec(docs: usize, seed: u64) -> SyntheticSpec {
    let leaves = 9;
    let topics = (0..3)
        .map(|i| TopicSpec {
            name: format!("g{i}"),
            words: 60,
            window: None,
            overlap: None,
            children: (0..3)
                .map(|j| {
                    let k = (i * 3 + j) as f64;
                    TopicSpec {
                        name: format!("g{i}s{j}"),
                        words: 40,
                        window: Some([k / leaves as f64, (k + 1.0) / leaves as f64]),
                        overlap: None,
                        children: Vec::new(),
                    }
                })
                .collect(),
        })
        .collect();
    SyntheticSpec {
        seed,
        docs_per_leaf: docs.div_ceil(leaves).max(1),
        tokens_per_doc: 50,
        overlap: 0.0,
        level_weights: vec![0.4, 0.6],
        zipf: 0.5,
        span_days: 365,
        topics,
    }
}

/// First iteration after which every valid depth-1 topic keeps its size
/// within `tolerance` (relative) for `window` further iterations, with the
/// set of depth-1 topics unchanged.
pub fn plateau_iteration(history: &[BatchStats], window: usize, tolerance: f64) -> Option<u64> {
    if window == 0 {
        return history.first().map(|s| s.iteration);
    }
    'start: for i in 0..history.len() {
        if i + window >= history.len() {
            return None;
        }
        let base = &history[i].depth1_sizes;
        if base.is_empty() {
            continue;
        }
        for later in &history[i + 1..=i + window] {
            if later.depth1_sizes.len() != base.len() {
                continue 'start;
            }
            for (id, &size) in base {
                match later.depth1_sizes.get(id) {
                    Some(&s) if (s as f64 - size as f64).abs() <= tolerance * size as f64 => {}
                    _ => continue 'start,
                }
            }
        }
        return Some(history[i].iteration);
    }
    None
}

/// Trains on a generated corpus of each size for `passes` full passes and
/// reports throughput and convergence.
pub fn run_scaling(sizes: &[usize], params: &HyperParams, passes: u64, seed: u64) -> Result<Vec<BenchReport>> {
    sizes
        .iter()
        .map(|&docs| {
            let synth = generate(&scaling_spec(docs, seed))?;
            run_one(&synth.corpus, params, passes, seed)
        })
        .collect()
}

pub fn run_one(corpus: &crate::corpus::Corpus, params: &HyperParams, passes: u64, seed: u64) -> Result<BenchReport> {
    let docs = corpus.num_docs();
    let batch = params.batch_size.max(1) as u64;
    let iterations = (passes * docs as u64).div_ceil(batch);
    let mut params = params.clone();
    params.iterations = iterations;
    let mut trainer = Trainer::new(corpus, params, seed)?;
    let mut peak = 0;
    let start = Instant::now();
    while !trainer.finished() {
        trainer.step()?;
        peak = peak.max(trainer.forest().live_nodes());
    }
    let wall = start.elapsed().as_secs_f64();
    let state = trainer.state();
    let visits = state.visits as f64;
    let per_pass_window = (docs as u64).div_ceil(batch) as usize;
    let rate = |x: f64| (visits > 0.0 && wall > 0.0).then(|| x / wall);
    Ok(BenchReport {
        corpus_docs: docs,
        corpus_tokens: corpus.n,
        iterations: state.iteration,
        passes: state.passes,
        wall_seconds: wall,
        seconds_per_pass: (visits > 0.0).then(|| wall * docs as f64 / visits),
        seconds_per_iteration: (state.iteration > 0).then(|| wall / state.iteration as f64),
        docs_per_hour: rate(visits * 3600.0),
        tokens_per_sec: rate(visits / docs as f64 * corpus.n as f64),
        iterations_to_plateau: plateau_iteration(&state.history, per_pass_window, 0.05),
        peak_live_nodes: peak,
        depth1_series: state
            .history
            .iter()
            .map(|s| s.depth1_sizes.len())
            .collect(),
    })
}

/// Tab-separated summary table, one row per corpus size.
pub fn render_table(reports: &[BenchReport]) -> String {
    let fmt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    let mut out = String::from(
        "docs\ttokens\titerations\tpasses\tsec_per_pass\tsec_per_iteration\tdocs_per_hour\ttokens_per_sec\titerations_to_plateau\tpeak_nodes\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.corpus_docs,
            r.corpus_tokens,
            r.iterations,
            r.passes,
            fmt(r.seconds_per_pass),
            fmt(r.seconds_per_iteration),
            fmt(r.docs_per_hour),
            fmt(r.tokens_per_sec),
            r.iterations_to_plateau.map_or("none".to_string(), |v| v.to_string()),
            r.peak_live_nodes,
        );
    }
    out
}
