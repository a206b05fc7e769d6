use super::{
    AntError, DecisionGene, Genome, LatticePos, MotorGene, ThresholdFn, MAX_EMISSION, MAX_HALF_EXTENTS, MAX_NEURONS,
    SEED_LAYER, THRESHOLD_BOUND, WEIGHT_BOUND,
};
use crate::controller::{Behavior, Repertoire};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

/// Seed-culture growth parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedParams {
    pub min_neurons: usize,
    pub max_neurons: usize,
    /// Probability that a grown gene is a decision neuron.
    pub decision_fraction: f64,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams { min_neurons: 10, max_neurons: 110, decision_fraction: 0.1 }
    }
}

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-WEIGHT_BOUND..=WEIGHT_BOUND)
}

fn threshold<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(-THRESHOLD_BOUND..=THRESHOLD_BOUND)
}

fn strength<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, MAX_EMISSION]
    MAX_EMISSION - rng.random_range(0.0..MAX_EMISSION)
}

fn tag<R: Rng + ?Sized>(rng: &mut R, mode: Repertoire) -> Option<Behavior> {
    let k = rng.random_range(0..=mode.len());
    (k > 0).then(|| mode.behaviors()[k - 1])
}

fn threshold_fn<R: Rng + ?Sized>(rng: &mut R) -> ThresholdFn {
    ThresholdFn::ALL[rng.random_range(0..4)]
}

fn half_extent<R: Rng + ?Sized>(rng: &mut R, axis: usize) -> i32 {
    rng.random_range(1..=MAX_HALF_EXTENTS[axis])
}

pub fn random_motor_gene<R: Rng + ?Sized>(rng: &mut R, position: LatticePos, mode: Repertoire) -> MotorGene {
    MotorGene {
        position,
        weights: std::array::from_fn(|_| weight(rng)),
        thresholds: [threshold(rng), threshold(rng)],
        threshold_fn: threshold_fn(rng),
        output_tag: tag(rng, mode),
    }
}

pub fn random_decision_gene<R: Rng + ?Sized>(rng: &mut R, position: LatticePos) -> DecisionGene {
    DecisionGene {
        position,
        input_weights: std::array::from_fn(|_| weight(rng)),
        firing_threshold: threshold(rng),
        half_extents: std::array::from_fn(|axis| half_extent(rng, axis)),
        emission_strength: strength(rng),
    }
}

/// Free in-bounds lattice sites face-adjacent to an existing neuron,
/// in lattice order.
fn growth_sites(occupied: &HashSet<LatticePos>) -> Vec<LatticePos> {
    let sites: BTreeSet<LatticePos> = occupied
        .iter()
        .flat_map(|p| p.face_neighbors())
        .filter(|q| q.in_bounds() && !occupied.contains(q))
        .collect();
    sites.into_iter().collect()
}

fn grow_one<R: Rng + ?Sized>(genome: &mut Genome, rng: &mut R, decision_fraction: f64) -> bool {
    let occupied: HashSet<LatticePos> = genome.positions().collect();
    let sites = if occupied.is_empty() {
        vec![LatticePos::new(1, 0, 0)]
    } else {
        growth_sites(&occupied)
    };
    if sites.is_empty() || genome.neuron_count() >= MAX_NEURONS {
        return false;
    }
    let site = sites[rng.random_range(0..sites.len())];
    if rng.random_bool(decision_fraction) {
        genome.decision_genes.push(random_decision_gene(rng, site));
    } else {
        genome.motor_genes.push(random_motor_gene(rng, site, genome.mode));
    }
    true
}

fn default_order<R: Rng + ?Sized>(rng: &mut R, mode: Repertoire) -> Vec<Behavior> {
    let mut order = mode.behaviors().to_vec();
    if mode == Repertoire::Primitive {
        order.shuffle(rng);
    }
    order
}

/// Restores the "at least one tagged motor neuron" invariant.
fn ensure_tagged<R: Rng + ?Sized>(genome: &mut Genome, rng: &mut R) {
    if genome.has_tagged_motor() {
        return;
    }
    if genome.motor_genes.is_empty() {
        let occupied: HashSet<LatticePos> = genome.positions().collect();
        let sites = if occupied.is_empty() { vec![LatticePos::new(1, 0, 0)] } else { growth_sites(&occupied) };
        let site = sites[rng.random_range(0..sites.len())];
        genome.motor_genes.push(random_motor_gene(rng, site, genome.mode));
    }
    let k = rng.random_range(0..genome.motor_genes.len());
    let behaviors = genome.mode.behaviors();
    genome.motor_genes[k].output_tag = Some(behaviors[rng.random_range(0..behaviors.len())]);
}

/// Builds a seed-culture genome: a 3×6 motor layer at layer 1, pre-grown
/// with random neighbors up to a uniformly drawn neuron count.
pub fn seed_genome<R: Rng + ?Sized>(rng: &mut R, mode: Repertoire, params: &SeedParams) -> Genome {
    let mut genome = Genome {
        mode,
        motor_genes: Vec::new(),
        decision_genes: Vec::new(),
        execution_order: Vec::new(),
    };
    for row in 0..SEED_LAYER.0 {
        for col in 0..SEED_LAYER.1 {
            genome.motor_genes.push(random_motor_gene(rng, LatticePos::new(1, row, col), mode));
        }
    }
    let seed_size = genome.neuron_count();
    let target = rng
        .random_range(params.min_neurons..=params.max_neurons)
        .clamp(seed_size, MAX_NEURONS);
    while genome.neuron_count() < target {
        if !grow_one(&mut genome, rng, params.decision_fraction) {
            break;
        }
    }
    genome.execution_order = default_order(rng, mode);
    ensure_tagged(&mut genome, rng);
    genome.canonicalize();
    genome
}

/// Point mutation, gene insertion/deletion and execution-order swaps, each
/// applied independently with probability `p_m`.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, rng: &mut R, p_m: f64) -> Genome {
    let mut g = genome.clone();
    if p_m <= 0.0 {
        return g;
    }
    let mode = g.mode;
    let hit = |rng: &mut R| rng.random_bool(p_m);
    for m in &mut g.motor_genes {
        for w in &mut m.weights {
            if hit(rng) {
                *w = weight(rng);
            }
        }
        for t in &mut m.thresholds {
            if hit(rng) {
                *t = threshold(rng);
            }
        }
        if hit(rng) {
            m.threshold_fn = threshold_fn(rng);
        }
        if hit(rng) {
            m.output_tag = tag(rng, mode);
        }
    }
    for d in &mut g.decision_genes {
        for w in &mut d.input_weights {
            if hit(rng) {
                *w = weight(rng);
            }
        }
        if hit(rng) {
            d.firing_threshold = threshold(rng);
        }
        for axis in 0..3 {
            if hit(rng) {
                d.half_extents[axis] = half_extent(rng, axis);
            }
        }
        if hit(rng) {
            d.emission_strength = strength(rng);
        }
    }
    ensure_tagged(&mut g, rng);

    // deletions never remove the last tagged motor gene
    let mut tagged = g.motor_genes.iter().filter(|m| m.output_tag.is_some()).count();
    let motors = std::mem::take(&mut g.motor_genes);
    for m in motors {
        let keep = if hit(rng) {
            let protected = m.output_tag.is_some() && tagged == 1;
            if !protected && m.output_tag.is_some() {
                tagged -= 1;
            }
            protected
        } else {
            true
        };
        if keep {
            g.motor_genes.push(m);
        }
    }
    let decisions = std::mem::take(&mut g.decision_genes);
    g.decision_genes = decisions.into_iter().filter(|_| !hit(rng)).collect();

    if hit(rng) {
        grow_one(&mut g, rng, SeedParams::default().decision_fraction);
    }
    if mode == Repertoire::Primitive && g.execution_order.len() >= 2 && hit(rng) {
        let n = g.execution_order.len();
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        g.execution_order.swap(i, j);
    }
    g.canonicalize();
    g
}

#[derive(Clone, Debug)]
enum Gene {
    Motor(MotorGene),
    Decision(DecisionGene),
}

impl Gene {
    fn position(&self) -> LatticePos {
        match self {
            Gene::Motor(m) => m.position,
            Gene::Decision(d) => d.position,
        }
    }
}

fn sorted_genes(g: &Genome) -> Vec<Gene> {
    let mut genes: Vec<Gene> = g
        .motor_genes
        .iter()
        .cloned()
        .map(Gene::Motor)
        .chain(g.decision_genes.iter().cloned().map(Gene::Decision))
        .collect();
    genes.sort_by_key(Gene::position);
    genes
}

fn splice<R: Rng + ?Sized>(
    mode: Repertoire,
    prefix: &[Gene],
    suffix: &[Gene],
    order: Vec<Behavior>,
    rng: &mut R,
) -> Genome {
    let suffix_sites: HashSet<LatticePos> = suffix.iter().map(Gene::position).collect();
    let mut child = Genome { mode, motor_genes: Vec::new(), decision_genes: Vec::new(), execution_order: order };
    for gene in prefix.iter().filter(|g| !suffix_sites.contains(&g.position())).chain(suffix) {
        match gene.clone() {
            Gene::Motor(m) => child.motor_genes.push(m),
            Gene::Decision(d) => child.decision_genes.push(d),
        }
    }
    ensure_tagged(&mut child, rng);
    child.canonicalize();
    child
}

/// Single-cut crossover over position-sorted gene lists.
///
/// Both parents are cut at the same index; children swap suffixes. On a
/// position collision the suffix donor's gene wins. The execution order
/// travels with the suffix unless the cut falls at the donor's end.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<(Genome, Genome), AntError> {
    if a.mode != b.mode {
        return Err(AntError::ModeMismatch(a.mode, b.mode));
    }
    let ga = sorted_genes(a);
    let gb = sorted_genes(b);
    let cut = rng.random_range(0..=ga.len().min(gb.len()));
    Ok(crossover_at(a, b, &ga, &gb, cut, rng))
}

/// Crossover with an explicit cut index.
pub fn crossover_with_cut<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    cut: usize,
    rng: &mut R,
) -> Result<(Genome, Genome), AntError> {
    if a.mode != b.mode {
        return Err(AntError::ModeMismatch(a.mode, b.mode));
    }
    let ga = sorted_genes(a);
    let gb = sorted_genes(b);
    let cut = cut.min(ga.len().min(gb.len()));
    Ok(crossover_at(a, b, &ga, &gb, cut, rng))
}

fn crossover_at<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    ga: &[Gene],
    gb: &[Gene],
    cut: usize,
    rng: &mut R,
) -> (Genome, Genome) {
    let order_1 = if cut < gb.len() { b.execution_order.clone() } else { a.execution_order.clone() };
    let order_2 = if cut < ga.len() { a.execution_order.clone() } else { b.execution_order.clone() };
    let c1 = splice(a.mode, &ga[..cut], &gb[cut..], order_1, rng);
    let c2 = splice(a.mode, &gb[..cut], &ga[cut..], order_2, rng);
    (c1, c2)
}
