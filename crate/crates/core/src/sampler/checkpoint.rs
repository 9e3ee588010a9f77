use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainState;
use crate::error::{io_err, Error, Result};
use crate::idt::{NodeMeta, NodePath};
use crate::params::HyperParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocAssignments {
    pub doc_id: String,
    /// Path of every token, by position; `None` for unassigned tokens.
    pub paths: Vec<Option<NodePath>>,
}

/// Everything needed to rebuild both trees and continue training exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub seed: u64,
    pub params: HyperParams,
    pub state: TrainState,
    /// Validity, TTL and child counters of every live node.
    pub nodes: Vec<NodeMeta>,
    pub assignments: Vec<DocAssignments>,
}

impl Checkpoint {
    pub const VERSION: u32 = 1;

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(self)?).map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let ckpt: Checkpoint = serde_json::from_slice(&bytes)?;
        if ckpt.version != Self::VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ckpt.version)));
        }
        Ok(ckpt)
    }
}
