//! Brute-force reference implementations, written without the library's
//! index structures.

use std::collections::HashSet;

use htmot_core::corpus::{Corpus, TokenKind};
use htmot_core::evaluation::IntrusionItem;
use htmot_core::idt::{Forest, TopicNode};

/// UMass coherence by scanning every document for every pair.
pub fn umass(docs: &[HashSet<u32>], words: &[u32]) -> f64 {
    let n = docs.len() as f64;
    let df = |w: u32| docs.iter().filter(|d| d.contains(&w)).count() as f64;
    let words: Vec<u32> = words.iter().copied().filter(|&w| df(w) > 0.0).collect();
    let mut total = 0.0;
    for (i, &a) in words.iter().enumerate() {
        for &b in &words[i + 1..] {
            let both = docs.iter().filter(|d| d.contains(&a) && d.contains(&b)).count() as f64;
            total += ((both + 1.0) / df(a)).ln() - (df(b) / n).ln();
        }
    }
    total
}

pub fn doc_sets(corpus: &Corpus) -> Vec<HashSet<u32>> {
    corpus
        .documents
        .iter()
        .map(|d| d.tokens.iter().copied().collect())
        .collect()
}

/// `KL(p||q) + KL(q||p)` of smoothed dense count vectors, each direction
/// summed on its own.
pub fn symmetric_kl_counts(a: &[u64], b: &[u64], phi: f64) -> f64 {
    let smooth = |c: &[u64]| -> Vec<f64> {
        let z: f64 = c.iter().map(|&x| x as f64 + phi).sum();
        c.iter().map(|&x| (x as f64 + phi) / z).collect()
    };
    let (p, q) = (smooth(a), smooth(b));
    let kl = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * (x / y).ln()).sum::<f64>();
    kl(&p, &q) + kl(&q, &p)
}

/// Pearson r from sample moments with Bessel's correction.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}

/// Word-kind vocabulary of a topic ranked by count, ties by id.
pub fn ranked(node: &TopicNode, corpus: &Corpus) -> Vec<u32> {
    let mut words: Vec<(u32, u64)> = node
        .word_totals()
        .filter(|&(w, c)| c > 0 && corpus.vocab.kind(w) == TokenKind::Word)
        .collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    words.into_iter().map(|(w, _)| w).collect()
}

/// Checks one survey item against the intruder rules; returns the broken
/// rule, if any.
pub fn check_intrusion_item(forest: &Forest, corpus: &Corpus, item: &IntrusionItem) -> Result<(), String> {
    let cm = |n: &TopicNode| n.total() as f64 >= forest.rules().critical;
    let topic = forest.node(&item.topic).ok_or("topic missing")?;
    let source = forest.node(&item.source).ok_or("source missing")?;
    if item.topic.parent() != item.source.parent() || item.topic == item.source {
        return Err(format!("{} is not a sibling of {}", item.source, item.topic));
    }
    if !cm(topic) || !cm(source) {
        return Err("topic or source below critical mass".into());
    }
    let id = corpus.vocab.lookup(&item.intruder).ok_or("unknown intruder")?;
    let topic_rank = ranked(topic, corpus);
    if topic_rank.iter().take(50).any(|&w| w == id) {
        return Err(format!("intruder {} ranks in the topic's top 50", item.intruder));
    }
    if !ranked(source, corpus).iter().take(10).any(|&w| w == id) {
        return Err(format!("intruder {} not in the source's top 10", item.intruder));
    }
    let top5: Vec<String> = topic_rank
        .iter()
        .take(5)
        .map(|&w| corpus.vocab.surface(w).to_string())
        .collect();
    if top5 != item.topic_words {
        return Err("shown topic words are not the top 5".into());
    }
    if item.shown.len() != 6 || item.shown[item.answer] != item.intruder {
        return Err("answer position wrong".into());
    }
    Ok(())
}
