//! Serialization envelope shared by every controller family, and the
//! developed controller that drives robots.

use crate::ant::{AntError, Genome, Tissue};
use crate::baselines::{BaselineError, FixedNetGenome, NetVariant};
use crate::controller::{Behavior, BehaviorSet, DecisionSource, InputPlane, Repertoire};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenomeError {
    #[error(transparent)]
    Ant(#[from] AntError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("cannot parse genome: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot cross a {0} genome with a {1} genome")]
    KindMismatch(&'static str, &'static str),
}

/// Any controller genome. Serialized with a `kind` discriminator
/// (`"ant"` or `"fixed"`); fixed nets also carry their `variant`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ControllerGenome {
    Ant(Genome),
    Fixed(FixedNetGenome),
}

impl ControllerGenome {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ControllerGenome::Ant(_) => "ant",
            ControllerGenome::Fixed(net) => match net.variant {
                NetVariant::Fc => "fc",
                NetVariant::Pc => "pc",
            },
        }
    }

    pub fn mode(&self) -> Repertoire {
        match self {
            ControllerGenome::Ant(g) => g.mode,
            ControllerGenome::Fixed(n) => n.mode,
        }
    }

    pub fn validate(&self) -> Result<(), GenomeError> {
        match self {
            ControllerGenome::Ant(g) => Ok(g.validate()?),
            ControllerGenome::Fixed(n) => Ok(n.validate()?),
        }
    }

    /// Builds the runnable controller.
    pub fn develop(&self) -> Result<Controller, GenomeError> {
        match self {
            ControllerGenome::Ant(g) => Ok(Controller::Ant(Tissue::develop(g)?)),
            ControllerGenome::Fixed(n) => {
                n.validate()?;
                Ok(Controller::Fixed(n.clone()))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("genomes always serialize")
    }

    /// Parses and validates a genome.
    pub fn from_json(text: &str) -> Result<ControllerGenome, GenomeError> {
        let genome: ControllerGenome = serde_json::from_str(text)?;
        genome.validate()?;
        Ok(genome)
    }

    pub fn load(path: &Path) -> Result<ControllerGenome, GenomeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| GenomeError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), GenomeError> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|source| GenomeError::Io { path: path.display().to_string(), source })
    }
}

/// A developed controller of any family.
#[derive(Clone, Debug)]
pub enum Controller {
    Ant(Tissue),
    Fixed(FixedNetGenome),
}

impl DecisionSource for Controller {
    fn repertoire(&self) -> Repertoire {
        match self {
            Controller::Ant(t) => t.repertoire(),
            Controller::Fixed(n) => n.repertoire(),
        }
    }

    fn decide(&self, input: &InputPlane) -> BehaviorSet {
        match self {
            Controller::Ant(t) => t.decide(input),
            Controller::Fixed(n) => n.decide(input),
        }
    }

    fn execution_order(&self) -> &[Behavior] {
        match self {
            Controller::Ant(t) => t.execution_order(),
            Controller::Fixed(n) => n.execution_order(),
        }
    }
}
