use serde::{Deserialize, Serialize};

use super::CooccurrenceIndex;
use crate::corpus::Corpus;
use crate::idt::{Forest, NodePath};
use crate::ranking::{is_reportable, top_words};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicStats {
    pub path: NodePath,
    pub depth: usize,
    pub size: u64,
    pub coherence: f64,
    /// Empirical variance of the timestamps assigned to the topic.
    pub time_variance: f64,
}

/// Statistics of every valid topic; coherence uses the `top_n` words.
pub fn topic_stats(forest: &Forest, corpus: &Corpus, index: &CooccurrenceIndex, top_n: usize) -> Vec<TopicStats> {
    let mut out = Vec::new();
    forest.walk(|path, node| {
        if !is_reportable(forest, node) {
            return;
        }
        let words = top_words(node, &corpus.vocab, None, top_n);
        out.push(TopicStats {
            path: path.clone(),
            depth: path.depth(),
            size: node.total(),
            coherence: index.umass(&words),
            time_variance: node.time_stats().variance(),
        });
    });
    out
}
