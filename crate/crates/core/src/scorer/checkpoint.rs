use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{FeatureVocabs, Vocab};
use super::model::{Dims, Model};
use super::params::ParamStore;
use super::ScorerError;
use crate::grammar::{read_grammar, write_grammar};

pub const CHECKPOINT_FORMAT: &str = "dagram-model";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON container: vocabularies, the grammar in its text form and every
/// tensor with its name and shape.
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    dims: Dims,
    grammar: String,
    features: FeatureVocabs,
    terminals: Vocab,
    constants: Vocab,
    senses: Vocab,
    edges: Vocab,
    params: ParamStore,
}

impl Model {
    pub fn to_json(&self) -> String {
        let c = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            dims: self.dims,
            grammar: write_grammar(&self.grammar),
            features: self.features.clone(),
            terminals: self.terminals.clone(),
            constants: self.constants.clone(),
            senses: self.senses.clone(),
            edges: self.edges.clone(),
            params: self.params.clone(),
        };
        serde_json::to_string(&c).expect("checkpoints serialise")
    }

    pub fn from_json(text: &str) -> Result<Model, ScorerError> {
        let c: Checkpoint = serde_json::from_str(text).map_err(|e| ScorerError::Checkpoint(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(ScorerError::Checkpoint(format!("unsupported checkpoint {} v{}", c.format, c.version)));
        }
        if !c.params.all_finite() {
            return Err(ScorerError::Checkpoint("non-finite parameter".into()));
        }
        let grammar = read_grammar(&c.grammar).map_err(|e| ScorerError::Checkpoint(e.to_string()))?;
        Model::assemble(c.dims, grammar, c.features, c.terminals, c.constants, c.senses, c.edges, c.params)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScorerError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Model, ScorerError> {
        Model::from_json(&std::fs::read_to_string(path)?)
    }
}
