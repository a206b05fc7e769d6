use super::{AntError, DecisionGene, Genome, LatticePos, MotorGene};
use crate::controller::{Behavior, BehaviorSet, DecisionSource, InputPlane, Repertoire, INPUT_NODES};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    Input(u8),
    Motor(u32),
}

#[derive(Clone, Debug)]
struct MotorNeuron {
    gene: MotorGene,
    /// `(weight index, source)` in ascending weight-index order.
    inputs: Vec<(u8, Source)>,
}

/// Developed phenotype of a [`Genome`].
#[derive(Clone, Debug)]
pub struct Tissue {
    mode: Repertoire,
    /// Sorted by lattice position, hence bottom-up by layer.
    motors: Vec<MotorNeuron>,
    decisions: Vec<DecisionGene>,
    /// Motor indices covered by each decision neuron's field.
    fields: Vec<Vec<u32>>,
    execution_order: Vec<Behavior>,
}

/// Full intermediate state of one activation, for inspection.
#[derive(Clone, Debug, PartialEq)]
pub struct Activation {
    pub fired: Vec<bool>,
    pub concentration: Vec<f64>,
    pub active: Vec<bool>,
    pub output: Vec<bool>,
    pub triggered: BehaviorSet,
}

impl Tissue {
    /// Develops a genome into its tissue.
    pub fn develop(genome: &Genome) -> Result<Tissue, AntError> {
        genome.validate()?;
        let mut genes = genome.motor_genes.clone();
        genes.sort_by_key(|g| g.position);
        let index: HashMap<LatticePos, u32> =
            genes.iter().enumerate().map(|(i, g)| (g.position, i as u32)).collect();

        let motors = genes
            .into_iter()
            .map(|gene| {
                let p = gene.position;
                let mut inputs = Vec::with_capacity(9);
                for (k, (dr, dc)) in neighborhood().enumerate() {
                    let (row, col) = (p.row + dr, p.col + dc);
                    let source = if p.layer == 1 {
                        let side = crate::controller::INPUT_SIDE;
                        ((0..side).contains(&row) && (0..side).contains(&col))
                            .then(|| Source::Input((row * side + col) as u8))
                    } else {
                        index.get(&LatticePos::new(p.layer - 1, row, col)).map(|&i| Source::Motor(i))
                    };
                    if let Some(s) = source {
                        inputs.push((k as u8, s));
                    }
                }
                MotorNeuron { gene, inputs }
            })
            .collect::<Vec<_>>();

        let decisions = genome.decision_genes.clone();
        let fields = decisions
            .iter()
            .map(|d| {
                motors
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| d.covers(m.gene.position))
                    .map(|(i, _)| i as u32)
                    .collect()
            })
            .collect();

        Ok(Tissue {
            mode: genome.mode,
            motors,
            decisions,
            fields,
            execution_order: genome.execution_order.clone(),
        })
    }

    pub fn motor_count(&self) -> usize {
        self.motors.len()
    }

    pub fn decision_count(&self) -> usize {
        self.decisions.len()
    }

    /// Motor neuron positions in tissue order.
    pub fn motor_positions(&self) -> impl Iterator<Item = LatticePos> + '_ {
        self.motors.iter().map(|m| m.gene.position)
    }

    /// Number of resolved input connections of the motor neuron at `p`.
    pub fn fan_in(&self, p: LatticePos) -> Option<usize> {
        self.motors.iter().find(|m| m.gene.position == p).map(|m| m.inputs.len())
    }

    /// Positions feeding the motor neuron at `p`: input-plane nodes are
    /// reported at layer 0.
    pub fn input_positions(&self, p: LatticePos) -> Option<Vec<LatticePos>> {
        let m = self.motors.iter().find(|m| m.gene.position == p)?;
        Some(
            m.inputs
                .iter()
                .map(|&(_, s)| match s {
                    Source::Input(i) => {
                        let side = crate::controller::INPUT_SIDE;
                        LatticePos::new(0, i as i32 / side, i as i32 % side)
                    }
                    Source::Motor(j) => self.motors[j as usize].gene.position,
                })
                .collect(),
        )
    }

    fn fired(&self, input: &InputPlane) -> Vec<bool> {
        self.decisions
            .iter()
            .map(|d| {
                let mut sum = 0.0;
                for i in 0..INPUT_NODES {
                    sum += d.input_weights[i] * input.0[i];
                }
                sum >= d.firing_threshold
            })
            .collect()
    }

    /// Runs the tissue on one input, returning every intermediate quantity.
    pub fn activate_detailed(&self, input: &InputPlane) -> Activation {
        let fired = self.fired(input);
        let n = self.motors.len();
        let mut concentration = vec![0.0; n];
        for (d, field) in self.decisions.iter().zip(&self.fields).zip(&fired).filter_map(|(p, &f)| f.then_some(p)) {
            for &m in field {
                concentration[m as usize] += d.emission_strength;
            }
        }
        let max = concentration.iter().copied().fold(0.0_f64, f64::max);
        let active: Vec<bool> = concentration.iter().map(|&c| max > 0.0 && c == max).collect();

        let mut output = vec![false; n];
        let mut triggered = BehaviorSet::EMPTY;
        for (i, m) in self.motors.iter().enumerate() {
            if !active[i] {
                continue;
            }
            let mut u = 0.0;
            for &(k, source) in &m.inputs {
                let x = match source {
                    Source::Input(j) => input.0[j as usize],
                    Source::Motor(j) => {
                        if output[j as usize] {
                            1.0
                        } else {
                            0.0
                        }
                    }
                };
                u += m.gene.weights[k as usize] * x;
            }
            output[i] = m.gene.threshold_fn.fire(u, m.gene.thresholds);
            if output[i] {
                if let Some(tag) = m.gene.output_tag {
                    triggered.insert(tag);
                }
            }
        }
        Activation { fired, concentration, active, output, triggered }
    }

    /// Triggered behavior set and the order to execute them in.
    pub fn activate(&self, input: &InputPlane) -> (BehaviorSet, &[Behavior]) {
        (self.activate_detailed(input).triggered, &self.execution_order)
    }
}

fn neighborhood() -> impl Iterator<Item = (i32, i32)> {
    (-1..=1).flat_map(|dr| (-1..=1).map(move |dc| (dr, dc)))
}

impl DecisionSource for Tissue {
    fn repertoire(&self) -> Repertoire {
        self.mode
    }

    fn decide(&self, input: &InputPlane) -> BehaviorSet {
        self.activate_detailed(input).triggered
    }

    fn execution_order(&self) -> &[Behavior] {
        &self.execution_order
    }
}
