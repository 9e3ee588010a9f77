//! Layout of a trained model directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use htmot_core::export::{apply_labels, load_labels, LabelRejection, Labels};
use htmot_core::{export_model, Checkpoint, Corpus, ExportOptions, TopicTreeExport, TrainedModel, Trainer};

pub const CORPUS: &str = "corpus.json";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const TOPICS: &str = "topics.json";
pub const LABELS: &str = "labels.json";

pub struct ModelDir {
    pub root: PathBuf,
}

impl ModelDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn save_corpus(&self, corpus: &Corpus) -> Result<()> {
        let path = self.path(CORPUS);
        fs::write(&path, serde_json::to_vec(corpus)?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        let path = self.path(CORPUS);
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn load_checkpoint(&self) -> Result<Checkpoint> {
        Ok(Checkpoint::load(&self.path(CHECKPOINT))?)
    }

    pub fn load_model(&self, corpus: &Corpus) -> Result<TrainedModel> {
        let trainer = Trainer::resume(corpus, self.load_checkpoint()?)?;
        Ok(trainer.into_model())
    }

    pub fn labels(&self) -> Result<Labels> {
        Ok(load_labels(&self.path(LABELS))?)
    }

    /// Exports the model with the saved labels applied and writes `topics.json`.
    pub fn write_export(
        &self,
        model: &TrainedModel,
        corpus: &Corpus,
        options: &ExportOptions,
    ) -> Result<(TopicTreeExport, Vec<LabelRejection>)> {
        let mut export = export_model(&model.forest, corpus, options);
        let rejected = apply_labels(&mut export, &self.labels()?);
        export.save(&self.path(TOPICS))?;
        Ok((export, rejected))
    }
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}
