//! Fixed-topology feed-forward baselines: fully connected (FC) and
//! partially connected (PC) networks built from the same two-threshold
//! binary neurons as the tissue's motor neurons, but with every neuron
//! active on every step.
//!
//! The topology is drawn once and never changes; variation touches
//! weights, thresholds and threshold functions only.

use crate::ant::{ThresholdFn, THRESHOLD_BOUND, WEIGHT_BOUND};
use crate::controller::{Behavior, BehaviorSet, DecisionSource, InputPlane, Repertoire, INPUT_NODES};
use crate::hexfloat;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_HIDDEN: usize = 10;
pub const MAX_HIDDEN: usize = 110;
pub const MAX_HIDDEN_LAYERS: usize = 3;
/// Incoming-connection cap for partially connected nets.
pub const PC_FAN_IN: usize = 9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BaselineError {
    #[error("malformed fixed net: {0}")]
    MalformedNet(String),
    #[error("cannot cross nets with different topologies")]
    TopologyMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetVariant {
    Fc,
    Pc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedNeuron {
    /// Indices into the previous layer, ascending.
    pub inputs: Vec<u32>,
    #[serde(with = "hexfloat::vec")]
    pub weights: Vec<f64>,
    #[serde(with = "hexfloat::array")]
    pub thresholds: [f64; 2],
    pub threshold_fn: ThresholdFn,
}

/// A feed-forward net: 16 inputs, 1–3 hidden layers, one output neuron per
/// repertoire behavior (output `i` triggers `mode.behaviors()[i]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedNetGenome {
    pub variant: NetVariant,
    pub mode: Repertoire,
    /// Sizes of every layer including the 16-node input and the output.
    pub layer_sizes: Vec<usize>,
    /// Neurons of layers 1.. (hidden layers, then output).
    pub layers: Vec<Vec<FixedNeuron>>,
}

fn random_params<R: Rng + ?Sized>(rng: &mut R, inputs: Vec<u32>) -> FixedNeuron {
    FixedNeuron {
        weights: inputs.iter().map(|_| rng.random_range(-WEIGHT_BOUND..=WEIGHT_BOUND)).collect(),
        inputs,
        thresholds: [
            rng.random_range(-THRESHOLD_BOUND..=THRESHOLD_BOUND),
            rng.random_range(-THRESHOLD_BOUND..=THRESHOLD_BOUND),
        ],
        threshold_fn: ThresholdFn::ALL[rng.random_range(0..4)],
    }
}

/// Draws a random topology with random parameters.
pub fn random_fixed_net<R: Rng + ?Sized>(rng: &mut R, variant: NetVariant, mode: Repertoire) -> FixedNetGenome {
    let hidden = rng.random_range(MIN_HIDDEN..=MAX_HIDDEN);
    let depth = rng.random_range(1..=MAX_HIDDEN_LAYERS);
    // split `hidden` into `depth` non-empty layers via distinct cut points
    let mut cuts: Vec<usize> = index::sample(rng, hidden - 1, depth - 1).into_iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    let mut layer_sizes = vec![INPUT_NODES];
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(hidden)) {
        layer_sizes.push(c - prev);
        prev = c;
    }
    layer_sizes.push(mode.len());

    let layers = layer_sizes
        .windows(2)
        .map(|w| {
            let (below, size) = (w[0], w[1]);
            (0..size)
                .map(|_| {
                    let inputs: Vec<u32> = match variant {
                        NetVariant::Fc => (0..below as u32).collect(),
                        NetVariant::Pc => {
                            let mut picked: Vec<u32> = index::sample(rng, below, below.min(PC_FAN_IN))
                                .into_iter()
                                .map(|i| i as u32)
                                .collect();
                            picked.sort_unstable();
                            picked
                        }
                    };
                    random_params(rng, inputs)
                })
                .collect()
        })
        .collect();
    FixedNetGenome { variant, mode, layer_sizes, layers }
}

impl FixedNetGenome {
    pub fn hidden_count(&self) -> usize {
        self.layer_sizes[1..self.layer_sizes.len() - 1].iter().sum()
    }

    pub fn neurons(&self) -> impl Iterator<Item = &FixedNeuron> {
        self.layers.iter().flatten()
    }

    pub fn max_fan_in(&self) -> usize {
        self.neurons().map(|n| n.inputs.len()).max().unwrap_or(0)
    }

    /// Same topology, freshly drawn parameters.
    pub fn randomize_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> FixedNetGenome {
        let layers = self
            .layers
            .iter()
            .map(|layer| layer.iter().map(|n| random_params(rng, n.inputs.clone())).collect())
            .collect();
        FixedNetGenome { layers, ..self.clone() }
    }

    pub fn same_topology(&self, other: &FixedNetGenome) -> bool {
        self.variant == other.variant
            && self.mode == other.mode
            && self.layer_sizes == other.layer_sizes
            && self.neurons().zip(other.neurons()).all(|(a, b)| a.inputs == b.inputs)
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |msg: String| Err(BaselineError::MalformedNet(msg));
        let n = self.layer_sizes.len();
        if !(3..=MAX_HIDDEN_LAYERS + 2).contains(&n) {
            return bad(format!("{} hidden layers", n.saturating_sub(2)));
        }
        if self.layer_sizes[0] != INPUT_NODES || self.layer_sizes[n - 1] != self.mode.len() {
            return bad("input or output layer has the wrong size".into());
        }
        if self.layer_sizes[1..n - 1].contains(&0) || !(MIN_HIDDEN..=MAX_HIDDEN).contains(&self.hidden_count()) {
            return bad(format!("{} hidden neurons", self.hidden_count()));
        }
        if self.layers.len() != n - 1 {
            return bad("layer list does not match layer sizes".into());
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let below = self.layer_sizes[l];
            if layer.len() != self.layer_sizes[l + 1] {
                return bad(format!("layer {} has {} neurons", l + 1, layer.len()));
            }
            for neuron in layer {
                let strictly_ascending = neuron.inputs.windows(2).all(|w| w[0] < w[1]);
                let in_range = neuron.inputs.iter().all(|&i| (i as usize) < below);
                let fan_in_ok = match self.variant {
                    NetVariant::Fc => neuron.inputs.len() == below,
                    NetVariant::Pc => (1..=PC_FAN_IN).contains(&neuron.inputs.len()),
                };
                if !strictly_ascending || !in_range || !fan_in_ok || neuron.weights.len() != neuron.inputs.len() {
                    return bad(format!("bad connectivity in layer {}", l + 1));
                }
                let weights_ok = neuron.weights.iter().all(|w| w.is_finite() && w.abs() <= WEIGHT_BOUND);
                let thresholds_ok = neuron.thresholds.iter().all(|t| t.is_finite() && t.abs() <= THRESHOLD_BOUND);
                if !weights_ok || !thresholds_ok {
                    return bad(format!("out-of-range parameters in layer {}", l + 1));
                }
            }
        }
        Ok(())
    }

    /// Feed-forward pass; returns the triggered behaviors.
    pub fn activate_fixed(&self, input: &InputPlane) -> BehaviorSet {
        let mut below: Vec<f64> = input.0.to_vec();
        let mut next = Vec::with_capacity(MAX_HIDDEN);
        for layer in &self.layers {
            next.clear();
            for neuron in layer {
                let u: f64 = neuron.inputs.iter().zip(&neuron.weights).map(|(&i, w)| w * below[i as usize]).sum();
                next.push(if neuron.threshold_fn.fire(u, neuron.thresholds) { 1.0 } else { 0.0 });
            }
            std::mem::swap(&mut below, &mut next);
        }
        self.mode
            .behaviors()
            .iter()
            .zip(&below)
            .filter(|(_, &out)| out == 1.0)
            .map(|(&b, _)| b)
            .collect()
    }
}

impl DecisionSource for FixedNetGenome {
    fn repertoire(&self) -> Repertoire {
        self.mode
    }

    fn decide(&self, input: &InputPlane) -> BehaviorSet {
        self.activate_fixed(input)
    }

    fn execution_order(&self) -> &[Behavior] {
        self.mode.behaviors()
    }
}

/// Per-field parameter redraw with probability `p_m`; topology untouched.
pub fn mutate_fixed<R: Rng + ?Sized>(net: &FixedNetGenome, rng: &mut R, p_m: f64) -> FixedNetGenome {
    let mut out = net.clone();
    if p_m <= 0.0 {
        return out;
    }
    for neuron in out.layers.iter_mut().flatten() {
        for w in &mut neuron.weights {
            if rng.random_bool(p_m) {
                *w = rng.random_range(-WEIGHT_BOUND..=WEIGHT_BOUND);
            }
        }
        for t in &mut neuron.thresholds {
            if rng.random_bool(p_m) {
                *t = rng.random_range(-THRESHOLD_BOUND..=THRESHOLD_BOUND);
            }
        }
        if rng.random_bool(p_m) {
            neuron.threshold_fn = ThresholdFn::ALL[rng.random_range(0..4)];
        }
    }
    out
}

/// Single-cut crossover over the neuron list (bottom-up order); both
/// parents must share one topology.
pub fn crossover_fixed<R: Rng + ?Sized>(
    a: &FixedNetGenome,
    b: &FixedNetGenome,
    rng: &mut R,
) -> Result<(FixedNetGenome, FixedNetGenome), BaselineError> {
    if !a.same_topology(b) {
        return Err(BaselineError::TopologyMismatch);
    }
    let total = a.neurons().count();
    let cut = rng.random_range(0..=total);
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    let pairs = c1.layers.iter_mut().flatten().zip(c2.layers.iter_mut().flatten());
    for (k, (x, y)) in pairs.enumerate() {
        if k >= cut {
            std::mem::swap(x, y);
        }
    }
    Ok((c1, c2))
}
