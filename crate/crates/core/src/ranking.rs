//! Ranked word lists of topics.

use crate::corpus::{TokenKind, Vocabulary};
use crate::idt::{Forest, TopicNode};

/// Words of `node` by inclusive count, descending, ties broken by word id.
/// With `kind` set, only words of that kind are listed.
pub fn ranked_words(node: &TopicNode, vocab: &Vocabulary, kind: Option<TokenKind>) -> Vec<(u32, u64)> {
    let mut words: Vec<(u32, u64)> = node
        .word_totals()
        .filter(|(w, _)| kind.is_none_or(|k| vocab.kind(*w) == k))
        .collect();
    words.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    words
}

pub fn top_words(node: &TopicNode, vocab: &Vocabulary, kind: Option<TokenKind>, n: usize) -> Vec<u32> {
    let mut ranked = ranked_words(node, vocab, kind);
    ranked.truncate(n);
    ranked.into_iter().map(|(w, _)| w).collect()
}

/// Validity evaluated on current counts, as used for every output.
pub fn is_reportable(forest: &Forest, node: &TopicNode) -> bool {
    forest.rules().is_valid(node.total())
}
