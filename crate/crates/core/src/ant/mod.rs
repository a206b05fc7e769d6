//! Artificial Neural Tissue.
//!
//! A genome lists motor-control and decision neuron genes at integer
//! positions of a 3D lattice. Development wires each motor neuron to its
//! 3×3 neighborhood in the layer below (layer 0 is the 4×4 input plane) and
//! precomputes the box-shaped diffusion field of every decision neuron.
//!
//! At each timestep, decision neurons that fire add their emission
//! strength to every motor neuron inside their field. Only the motor neurons
//! at the tissue-wide maximum concentration are active; all others are
//! silenced. Active neurons compute a two-threshold binary function of their
//! weighted inputs, and the behaviors tagged on neurons that output 1 are
//! triggered.

mod tissue;
mod variation;

pub use tissue::{Activation, Tissue};
pub use variation::{crossover, crossover_with_cut, mutate, random_decision_gene, random_motor_gene, seed_genome, SeedParams};

use crate::controller::{is_permutation_of, Behavior, Repertoire};
use crate::hexfloat;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

/// Bound on motor weights and decision input weights.
pub const WEIGHT_BOUND: f64 = 1.0;
/// Bound on motor thresholds and decision firing thresholds.
pub const THRESHOLD_BOUND: f64 = 3.0;
pub const MAX_EMISSION: f64 = 1.0;
pub const MAX_LAYER: i32 = 3;
pub const ROW_RANGE: (i32, i32) = (-4, 7);
pub const COL_RANGE: (i32, i32) = (-4, 9);
/// Maximum field half-extent along (layer, row, col).
pub const MAX_HALF_EXTENTS: [i32; 3] = [2, 4, 4];
pub const MAX_NEURONS: usize = 256;
/// Seed-culture motor layer shape (rows, cols), placed at layer 1.
pub const SEED_LAYER: (i32, i32) = (3, 6);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AntError {
    #[error("malformed genome: {0}")]
    MalformedGenome(String),
    #[error("cannot cross a {0} genome with a {1} genome")]
    ModeMismatch(Repertoire, Repertoire),
}

/// Lattice coordinate; ordering is lexicographic (layer, row, col).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePos {
    pub layer: i32,
    pub row: i32,
    pub col: i32,
}

impl LatticePos {
    pub const fn new(layer: i32, row: i32, col: i32) -> Self {
        LatticePos { layer, row, col }
    }

    pub fn in_bounds(&self) -> bool {
        (1..=MAX_LAYER).contains(&self.layer)
            && (ROW_RANGE.0..=ROW_RANGE.1).contains(&self.row)
            && (COL_RANGE.0..=COL_RANGE.1).contains(&self.col)
    }

    pub fn face_neighbors(&self) -> [LatticePos; 6] {
        let LatticePos { layer, row, col } = *self;
        [
            LatticePos::new(layer - 1, row, col),
            LatticePos::new(layer + 1, row, col),
            LatticePos::new(layer, row - 1, col),
            LatticePos::new(layer, row + 1, col),
            LatticePos::new(layer, row, col - 1),
            LatticePos::new(layer, row, col + 1),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThresholdFn {
    Up,
    Down,
    Ditch,
    Mound,
}

impl ThresholdFn {
    pub const ALL: [ThresholdFn; 4] = [ThresholdFn::Up, ThresholdFn::Down, ThresholdFn::Ditch, ThresholdFn::Mound];

    /// Binary output for weighted input `u`.
    #[inline]
    pub fn fire(self, u: f64, thresholds: [f64; 2]) -> bool {
        let lo = thresholds[0].min(thresholds[1]);
        let hi = thresholds[0].max(thresholds[1]);
        match self {
            ThresholdFn::Up => u >= lo,
            ThresholdFn::Down => u < lo,
            ThresholdFn::Ditch => lo <= u && u < hi,
            ThresholdFn::Mound => !(lo <= u && u < hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorGene {
    pub position: LatticePos,
    /// Weights over the 3×3 neighborhood below, row-major from (-1,-1).
    #[serde(with = "hexfloat::array")]
    pub weights: [f64; 9],
    #[serde(with = "hexfloat::array")]
    pub thresholds: [f64; 2],
    pub threshold_fn: ThresholdFn,
    pub output_tag: Option<Behavior>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionGene {
    pub position: LatticePos,
    #[serde(with = "hexfloat::array")]
    pub input_weights: [f64; 16],
    #[serde(with = "hexfloat::scalar")]
    pub firing_threshold: f64,
    /// Field half-extents along (layer, row, col).
    pub half_extents: [i32; 3],
    #[serde(with = "hexfloat::scalar")]
    pub emission_strength: f64,
}

impl DecisionGene {
    #[inline]
    pub fn covers(&self, p: LatticePos) -> bool {
        (p.layer - self.position.layer).abs() <= self.half_extents[0]
            && (p.row - self.position.row).abs() <= self.half_extents[1]
            && (p.col - self.position.col).abs() <= self.half_extents[2]
    }
}

/// ANT genotype.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub mode: Repertoire,
    pub motor_genes: Vec<MotorGene>,
    pub decision_genes: Vec<DecisionGene>,
    /// Behavior execution order; fixed to the repertoire order in basis mode.
    pub execution_order: Vec<Behavior>,
}

impl Genome {
    pub fn neuron_count(&self) -> usize {
        self.motor_genes.len() + self.decision_genes.len()
    }

    pub fn positions(&self) -> impl Iterator<Item = LatticePos> + '_ {
        self.motor_genes
            .iter()
            .map(|g| g.position)
            .chain(self.decision_genes.iter().map(|g| g.position))
    }

    pub fn has_tagged_motor(&self) -> bool {
        self.motor_genes.iter().any(|g| g.output_tag.is_some())
    }

    /// Sorts both gene lists by lattice position.
    pub fn canonicalize(&mut self) {
        self.motor_genes.sort_by_key(|g| g.position);
        self.decision_genes.sort_by_key(|g| g.position);
    }

    pub fn validate(&self) -> Result<(), AntError> {
        let bad = |msg: String| Err(AntError::MalformedGenome(msg));
        let n = self.neuron_count();
        if n == 0 || n > MAX_NEURONS {
            return bad(format!("neuron count {n} outside 1..={MAX_NEURONS}"));
        }
        if !self.has_tagged_motor() {
            return bad("no motor gene carries a behavior tag".into());
        }
        if !is_permutation_of(&self.execution_order, self.mode) {
            return bad("execution order is not a permutation of the repertoire".into());
        }
        if self.mode == Repertoire::Basis && self.execution_order != Repertoire::Basis.behaviors() {
            return bad("basis-mode execution order must be the fixed basis order".into());
        }
        let mut seen = HashSet::with_capacity(n);
        for p in self.positions() {
            if !p.in_bounds() {
                return bad(format!("position {p:?} outside the lattice"));
            }
            if !seen.insert(p) {
                return bad(format!("two genes at position {p:?}"));
            }
        }
        let in_weight = |v: f64| v.is_finite() && v.abs() <= WEIGHT_BOUND;
        let in_threshold = |v: f64| v.is_finite() && v.abs() <= THRESHOLD_BOUND;
        for g in &self.motor_genes {
            if !g.weights.iter().all(|&w| in_weight(w)) || !g.thresholds.iter().all(|&t| in_threshold(t)) {
                return bad(format!("motor gene at {:?} has out-of-range parameters", g.position));
            }
            if let Some(tag) = g.output_tag {
                if !self.mode.contains(tag) {
                    return bad(format!("tag {tag:?} is not in the {} repertoire", self.mode));
                }
            }
        }
        for g in &self.decision_genes {
            let extents_ok = g.half_extents.iter().zip(MAX_HALF_EXTENTS).all(|(&e, max)| (1..=max).contains(&e));
            let strength_ok = g.emission_strength > 0.0 && g.emission_strength <= MAX_EMISSION;
            if !g.input_weights.iter().all(|&w| in_weight(w))
                || !in_threshold(g.firing_threshold)
                || !extents_ok
                || !strength_ok
            {
                return bad(format!("decision gene at {:?} has out-of-range parameters", g.position));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
