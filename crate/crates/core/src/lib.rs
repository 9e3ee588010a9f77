//! Hierarchical topic modelling over time with infinite Dirichlet trees.
//!
//! Documents are modelled with one corpus-wide tree of topics and one tree per
//! document. Training is collapsed Gibbs sampling that grows and prunes the
//! trees, with a per-topic Beta density over normalized timestamps.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod export;
pub mod idt;
pub mod params;
pub mod ranking;
pub mod sampler;
pub mod scaling;
pub mod synthetic;
pub mod time_model;

pub use corpus::{load_corpus, Corpus, Document, DocumentInput, FilterConfig, TokenKind, Vocabulary};
pub use error::{Error, Result};
pub use export::{export_model, ExportOptions, TopicTreeExport};
pub use idt::{Forest, NodePath, TokenInstance, TopicNode};
pub use params::HyperParams;
pub use sampler::{train, Checkpoint, TrainedModel, Trainer};
pub use time_model::{estimate_beta, mod_beta_pdf, BetaParams, DepthDeltas};
pub use synthetic::{generate, SyntheticCorpus, SyntheticSpec};
