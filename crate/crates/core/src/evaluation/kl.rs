use std::collections::BTreeMap;

use crate::idt::{Forest, TopicNode};

/// Symmetric KL divergence `KL(p||q) + KL(q||p)` of two dense distributions.
pub fn symmetric_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a.ln() - b.ln()))
        .sum()
}

/// A topic-word count vector sorted by word id.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseTopic {
    pub counts: Vec<(u32, u64)>,
    pub total: u64,
}

impl SparseTopic {
    pub fn from_node(node: &TopicNode) -> Self {
        let mut counts: Vec<(u32, u64)> = node.word_totals().collect();
        counts.sort_unstable();
        Self {
            counts,
            total: node.total(),
        }
    }
}

/// Symmetric KL between the phi-smoothed word distributions of two topics
/// over a vocabulary of `vocab_len` words. Words absent from both topics
/// share one smoothed mass each and are accounted for in closed form.
pub fn symmetric_kl_sparse(a: &SparseTopic, b: &SparseTopic, phi: f64, vocab_len: usize) -> f64 {
    let norm_a = a.total as f64 + phi * vocab_len as f64;
    let norm_b = b.total as f64 + phi * vocab_len as f64;
    let term = |ca: u64, cb: u64| {
        let p = (ca as f64 + phi) / norm_a;
        let q = (cb as f64 + phi) / norm_b;
        (p - q) * (p.ln() - q.ln())
    };
    let (mut i, mut j) = (0, 0);
    let mut union = 0usize;
    let mut sum = 0.0;
    while i < a.counts.len() || j < b.counts.len() {
        let wa = a.counts.get(i).map(|x| x.0);
        let wb = b.counts.get(j).map(|x| x.0);
        match (wa, wb) {
            (Some(x), Some(y)) if x == y => {
                sum += term(a.counts[i].1, b.counts[j].1);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                sum += term(a.counts[i].1, 0);
                i += 1;
            }
            (Some(_), None) => {
                sum += term(a.counts[i].1, 0);
                i += 1;
            }
            _ => {
                sum += term(0, b.counts[j].1);
                j += 1;
            }
        }
        union += 1;
    }
    sum + (vocab_len - union) as f64 * term(0, 0)
}

/// Mean pairwise symmetric KL between valid siblings, averaged within each
/// parent and then across parents, keyed by the siblings' depth. Depths with
/// no parent holding two valid children are omitted.
pub fn sibling_kl_by_depth(forest: &Forest, phi: f64, vocab_len: usize) -> BTreeMap<usize, f64> {
    let mut per_depth: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut visit = |depth: usize, parent: &TopicNode| {
        let kids: Vec<SparseTopic> = parent
            .children()
            .filter(|(_, c)| forest.rules().is_valid(c.total()))
            .map(|(_, c)| SparseTopic::from_node(c))
            .collect();
        if kids.len() < 2 {
            return;
        }
        let mut sum = 0.0;
        let mut pairs = 0;
        for i in 0..kids.len() {
            for j in i + 1..kids.len() {
                sum += symmetric_kl_sparse(&kids[i], &kids[j], phi, vocab_len);
                pairs += 1;
            }
        }
        let e = per_depth.entry(depth).or_default();
        e.0 += sum / pairs as f64;
        e.1 += 1;
    };
    visit(1, forest.root());
    forest.walk(|path, node| visit(path.depth() + 1, node));
    per_depth
        .into_iter()
        .map(|(d, (s, n))| (d, s / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(symmetric_kl(&p, &p), 0.0);
        let t = SparseTopic { counts: vec![(0, 4), (2, 1)], total: 5 };
        assert_eq!(symmetric_kl_sparse(&t, &t, 0.1, 10), 0.0);
    }

    #[test]
    fn disjoint_three_word_vocabulary() {
        // a = {w0: 3}, b = {w1: 2}; V = 3, phi = 0.5.
        let a = SparseTopic { counts: vec![(0, 3)], total: 3 };
        let b = SparseTopic { counts: vec![(1, 2)], total: 2 };
        let p = [3.5 / 4.5, 0.5 / 4.5, 0.5 / 4.5];
        let q = [0.5 / 3.5, 2.5 / 3.5, 0.5 / 3.5];
        let dense = symmetric_kl(&p, &q);
        let by_hand = (p[0] - q[0]) * (p[0] / q[0]).ln()
            + (p[1] - q[1]) * (p[1] / q[1]).ln()
            + (p[2] - q[2]) * (p[2] / q[2]).ln();
        assert!((dense - by_hand).abs() < 1e-15);
        assert!(dense > 0.0 && dense.is_finite());
        assert!((symmetric_kl_sparse(&a, &b, 0.5, 3) - dense).abs() < 1e-12);
        assert_eq!(symmetric_kl_sparse(&a, &b, 0.5, 3), symmetric_kl_sparse(&b, &a, 0.5, 3));
    }
}
