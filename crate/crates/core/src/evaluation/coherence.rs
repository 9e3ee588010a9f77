use log::warn;

use crate::corpus::Corpus;

/// Document-level occurrence lists for UMass coherence.
#[derive(Clone, Debug)]
pub struct CooccurrenceIndex {
    postings: Vec<Vec<u32>>,
    num_docs: usize,
}

impl CooccurrenceIndex {
    pub fn new(corpus: &Corpus) -> Self {
        let mut postings = vec![Vec::new(); corpus.vocab_len()];
        for (d, doc) in corpus.documents.iter().enumerate() {
            for &w in &doc.tokens {
                let list: &mut Vec<u32> = &mut postings[w as usize];
                if list.last() != Some(&(d as u32)) {
                    list.push(d as u32);
                }
            }
        }
        Self {
            postings,
            num_docs: corpus.documents.len(),
        }
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    /// Number of documents containing `word`.
    pub fn doc_freq(&self, word: u32) -> usize {
        self.postings.get(word as usize).map_or(0, Vec::len)
    }

    /// Number of documents containing both words.
    pub fn co_doc_freq(&self, a: u32, b: u32) -> usize {
        let (Some(x), Some(y)) = (self.postings.get(a as usize), self.postings.get(b as usize)) else {
            return 0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// UMass coherence of a word list:
    /// `sum over pairs of ln((D(a,b) + 1) * D / (D(a) * D(b)))`.
    /// Words that never occur are left out of every pair.
    pub fn umass(&self, words: &[u32]) -> f64 {
        let present: Vec<u32> = words
            .iter()
            .copied()
            .filter(|&w| {
                let ok = self.doc_freq(w) > 0;
                if !ok {
                    warn!("word {w} does not occur in the corpus; skipped for coherence");
                }
                ok
            })
            .collect();
        let d = self.num_docs as f64;
        let mut score = 0.0;
        for i in 0..present.len() {
            for j in i + 1..present.len() {
                let (a, b) = (present[i], present[j]);
                let joint = self.co_doc_freq(a, b) as f64 + 1.0;
                score += (joint * d / (self.doc_freq(a) as f64 * self.doc_freq(b) as f64)).ln();
            }
        }
        score
    }
}

/// Mean coherence over topics.
pub fn model_coherence(index: &CooccurrenceIndex, topics: &[Vec<u32>]) -> f64 {
    if topics.is_empty() {
        return f64::NAN;
    }
    topics.iter().map(|t| index.umass(t)).sum::<f64>() / topics.len() as f64
}
