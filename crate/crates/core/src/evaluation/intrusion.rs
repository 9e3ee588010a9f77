use std::fmt::Write as _;

use log::warn;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TokenKind};
use crate::idt::{Forest, NodePath, TopicNode};
use crate::ranking::{is_reportable, ranked_words};

/// Which words count as plausible intruders for a topic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntruderRule {
    /// Number of topic words shown.
    pub topic_words: usize,
    /// An intruder must rank within this many words of its sibling.
    pub sibling_top: usize,
    /// An intruder must rank at or below this position in the topic, or be absent.
    pub min_rank: usize,
}

impl Default for IntruderRule {
    fn default() -> Self {
        Self {
            topic_words: 5,
            sibling_top: 10,
            min_rank: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrusionItem {
    pub topic: NodePath,
    pub topic_words: Vec<String>,
    pub intruder: String,
    pub source: NodePath,
    /// Topic words plus the intruder, shuffled.
    pub shown: Vec<String>,
    /// Position of the intruder in `shown`.
    pub answer: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Survey {
    pub seed: u64,
    pub items: Vec<IntrusionItem>,
}

/// Builds a word intrusion survey over up to `topics` topics chosen uniformly
/// among valid topics with at least one valid sibling. Intruders are taken
/// from the top words of a sibling and must rank low or not at all in the
/// topic itself.
pub fn generate_intrusion_survey(
    forest: &Forest,
    corpus: &Corpus,
    topics: usize,
    rule: IntruderRule,
    seed: u64,
) -> Survey {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eligible: Vec<(NodePath, Vec<NodePath>)> = Vec::new();
    let mut collect = |parent_path: &NodePath, parent: &TopicNode| {
        let valid: Vec<NodePath> = parent
            .children()
            .filter(|(_, c)| is_reportable(forest, c))
            .map(|(i, _)| parent_path.child(i))
            .collect();
        if valid.len() < 2 {
            return;
        }
        for p in &valid {
            let sibs = valid.iter().filter(|s| *s != p).cloned().collect();
            eligible.push((p.clone(), sibs));
        }
    };
    collect(&NodePath::root(), forest.root());
    forest.walk(|p, n| collect(p, n));
    eligible.shuffle(&mut rng);

    let words = |node: &TopicNode| -> Vec<u32> {
        ranked_words(node, &corpus.vocab, Some(TokenKind::Word))
            .into_iter()
            .map(|(w, _)| w)
            .collect()
    };
    let mut items = Vec::new();
    for (path, mut siblings) in eligible {
        if items.len() == topics {
            break;
        }
        let ranked = words(forest.node(&path).expect("live topic"));
        if ranked.len() < rule.topic_words {
            warn!("topic {path} has fewer than {} words; skipped", rule.topic_words);
            continue;
        }
        let high: &[u32] = &ranked[..ranked.len().min(rule.min_rank)];
        siblings.shuffle(&mut rng);
        let mut pick = None;
        for sib in siblings {
            let sib_words = words(forest.node(&sib).expect("live sibling"));
            let pool: Vec<u32> = sib_words
                .iter()
                .take(rule.sibling_top)
                .copied()
                .filter(|w| !high.contains(w))
                .collect();
            if let Some(&w) = pool.choose(&mut rng) {
                pick = Some((w, sib));
                break;
            }
        }
        let Some((intruder, source)) = pick else {
            warn!("no intruder available for topic {path}; skipped");
            continue;
        };
        let topic_words: Vec<String> = ranked[..rule.topic_words]
            .iter()
            .map(|&w| corpus.vocab.surface(w).to_string())
            .collect();
        let intruder = corpus.vocab.surface(intruder).to_string();
        let mut shown = topic_words.clone();
        shown.push(intruder.clone());
        shown.shuffle(&mut rng);
        let answer = shown.iter().position(|w| *w == intruder).expect("intruder shown");
        items.push(IntrusionItem {
            topic: path,
            topic_words,
            intruder,
            source,
            shown,
            answer,
        });
    }
    Survey { seed, items }
}

/// Questionnaire text, one numbered question per item.
pub fn render_survey(survey: &Survey) -> String {
    let mut out = String::from("Pick the word that does not belong with the others.\n\n");
    for (i, item) in survey.items.iter().enumerate() {
        let _ = writeln!(out, "{}. {}", i + 1, item.shown.join("  "));
    }
    out
}

/// Answer key, one tab-separated line per question.
pub fn render_answer_key(survey: &Survey) -> String {
    let mut out = String::from("question\ttopic\tintruder\tposition\tsource\n");
    for (i, item) in survey.items.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            i + 1,
            item.topic,
            item.intruder,
            item.answer + 1,
            item.source
        );
    }
    out
}
