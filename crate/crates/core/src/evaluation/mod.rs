//! Topic statistics and quality measures.

mod coherence;
mod correlation;
mod intrusion;
mod kl;
mod stats;

pub use coherence::{model_coherence, CooccurrenceIndex};
pub use correlation::{pearson, topic_correlations, Correlations};
pub use intrusion::{generate_intrusion_survey, render_answer_key, render_survey, IntruderRule, IntrusionItem, Survey};
pub use kl::{sibling_kl_by_depth, symmetric_kl, symmetric_kl_sparse, SparseTopic};
pub use stats::{topic_stats, TopicStats};
