#![allow(dead_code)]

pub mod oracle;

use chrono::{DateTime, Duration, Utc};
use htmot_core::corpus::{Corpus, DocumentInput, FilterConfig, TokenKind};
use htmot_core::idt::{Forest, NodePath, TokenInstance};
use htmot_core::HyperParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn day(n: i64) -> DateTime<Utc> {
    DateTime::<Utc>::UNIX_EPOCH + Duration::days(19_000 + n)
}

/// Builds a corpus from `(day offset, words)` pairs; entity tokens are
/// written with a leading `@`.
pub fn corpus(docs: &[(i64, &[&str])]) -> Corpus {
    let inputs = docs
        .iter()
        .enumerate()
        .map(|(i, (d, words))| DocumentInput {
            id: format!("d{i}"),
            title: format!("Document {i}"),
            category: None,
            timestamp: day(*d),
            chars: 0,
            tokens: words
                .iter()
                .map(|w| match w.strip_prefix('@') {
                    Some(e) => (e.to_string(), TokenKind::Entity),
                    None => (w.to_string(), TokenKind::Word),
                })
                .collect(),
        })
        .collect();
    Corpus::build(inputs, &FilterConfig::permissive()).unwrap()
}

/// A random corpus over a vocabulary of `vocab` words.
pub fn random_corpus(seed: u64, docs: usize, vocab: usize, max_len: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = (0..docs)
        .map(|i| DocumentInput {
            id: format!("r{i}"),
            title: String::new(),
            category: None,
            timestamp: day(rng.random_range(0..365)),
            chars: 0,
            tokens: (0..rng.random_range(1..=max_len))
                .map(|_| {
                    let w = rng.random_range(0..vocab);
                    let kind = if w % 7 == 0 { TokenKind::Entity } else { TokenKind::Word };
                    (format!("w{w}"), kind)
                })
                .collect(),
        })
        .collect();
    Corpus::build(inputs, &FilterConfig::permissive()).unwrap()
}

/// Parameters with thresholds low enough for hand-sized corpora.
pub fn small_params() -> HyperParams {
    HyperParams {
        critical_mass: 0.01,
        splitting_mass: 0.02,
        ..HyperParams::default()
    }
}

pub fn tokens(corpus: &Corpus) -> Vec<TokenInstance> {
    let mut out = Vec::new();
    for (d, doc) in corpus.documents.iter().enumerate() {
        for pos in 0..doc.len() {
            out.push(TokenInstance::of(corpus, d, pos));
        }
    }
    out
}

/// Every live path of the corpus tree, root excluded.
pub fn live_paths(forest: &Forest) -> Vec<NodePath> {
    let mut out = Vec::new();
    forest.walk(|p, _| out.push(p.clone()));
    out
}

/// Applies `ops` random operations: create, assign, unassign, sweep.
pub fn churn(forest: &mut Forest, corpus: &Corpus, ops: usize, seed: u64, audit_every: usize) {
    let tokens = tokens(corpus);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..ops {
        let tok = tokens[rng.random_range(0..tokens.len())];
        match rng.random_range(0..100) {
            0..=9 => {
                let live = live_paths(forest);
                let parent = if live.is_empty() || rng.random_bool(0.3) {
                    NodePath::root()
                } else {
                    live[rng.random_range(0..live.len())].clone()
                };
                if forest.assignment(tok.doc, tok.pos).is_some() {
                    forest.unassign(tok);
                }
                if forest.node(&parent).is_some() {
                    if let Ok(child) = forest.create_child(&parent, false) {
                        forest.assign(tok, &child).unwrap();
                    }
                }
            }
            10..=59 => {
                let live = live_paths(forest);
                if !live.is_empty() {
                    let path = live[rng.random_range(0..live.len())].clone();
                    if forest.assignment(tok.doc, tok.pos).is_some() {
                        forest.unassign(tok);
                    }
                    // The unassign may have destroyed the target.
                    if forest.node(&path).is_some() {
                        forest.assign(tok, &path).unwrap();
                    }
                }
            }
            60..=98 => {
                if forest.assignment(tok.doc, tok.pos).is_some() {
                    forest.unassign(tok);
                }
            }
            _ => {
                forest.sweep_ttl(corpus);
            }
        }
        if audit_every > 0 && i % audit_every == 0 {
            forest.audit().unwrap();
        }
    }
    forest.audit().unwrap();
}
